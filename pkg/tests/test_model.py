import numpy as np
import pytest

from presmooth.errors import ConfigurationError, DomainError, IntegrabilityError
from presmooth.function_spaces import Constant, Linear, MollifierBump, Sinusoid
from presmooth.model import finest_level, integrate_K, noise_streams, simulate
from presmooth.wavelet import WaveletBasis

HAAR = WaveletBasis.haar()
DB4 = WaveletBasis.daubechies(4)


def test_finest_level():
    assert finest_level(1024) == 10
    assert finest_level(1500) == 10
    assert 512 <= 2 ** finest_level(1024) <= 1024
    with pytest.raises(ConfigurationError):
        finest_level(4)


def test_zero_function_gives_pure_noise():
    obs = simulate(Constant(0.0), "poisson", 256, HAAR, seed=3)
    assert np.all(obs.clean_tree.flat() == 0)
    z = noise_streams(3, 0)[0].standard_normal(2 ** (obs.J_n + 1))
    np.testing.assert_allclose(obs.y_tree.flat(), z / 16.0, rtol=0, atol=1e-15)


def test_quarter_constant_haar():
    obs = simulate(Constant(0.25), "poisson", 256, HAAR, seed=1)
    assert obs.clean_tree.scaling[0] == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(obs.clean_tree.flat()[1:])) < 1e-14


def test_noise_is_standard_normal():
    obs = simulate(Sinusoid(0.5, 0.25, 1, 0), "poisson", 2**14, DB4, seed=11)
    z = obs.noise
    assert abs(z.mean()) < 0.03
    assert z.std() == pytest.approx(1.0, abs=0.02)


def test_same_seed_same_draw_and_prefix_across_n():
    f = Linear(0.5, 0.2)
    a = simulate(f, "bernoulli", 1024, DB4, seed=5, rep=2)
    b = simulate(f, "bernoulli", 1024, DB4, seed=5, rep=2)
    np.testing.assert_array_equal(a.y_tree.flat(), b.y_tree.flat())
    big = simulate(f, "bernoulli", 4096, DB4, seed=5, rep=2)
    np.testing.assert_allclose(a.noise, big.noise[: a.noise.size], rtol=0, atol=1e-12)
    other = simulate(f, "bernoulli", 1024, DB4, seed=5, rep=3)
    assert not np.array_equal(a.noise, other.noise)


def test_antithetic_and_noiseless_hooks():
    f = Linear(0.5, 0.2)
    a = simulate(f, "poisson", 1024, DB4, seed=5)
    b = simulate(f, "poisson", 1024, DB4, seed=5, antithetic=True)
    np.testing.assert_allclose(a.noise, -b.noise, atol=1e-9)
    c = simulate(f, "poisson", 1024, DB4, seed=5, noise_scale=0.0)
    np.testing.assert_array_equal(c.y_tree.flat(), c.clean_tree.flat())


def test_gaussvar_window_noise():
    obs = simulate(Constant(1.0), "gaussvar", 512, DB4, seed=2)
    assert obs.zn_noise.shape == (512,)
    assert simulate(Constant(1.0), "poisson", 512, DB4, seed=2).zn_noise is None


def test_domain_errors():
    with pytest.raises(DomainError):
        simulate(Linear(2.0, 0.0), "bernoulli", 256, DB4, seed=1)
    with pytest.raises(DomainError):
        simulate(Linear(1.0, -0.5), "poisson", 256, DB4, seed=1)
    with pytest.raises(IntegrabilityError):
        simulate(MollifierBump(0.5, 0.2, 1.0), "gaussvar", 256, DB4, seed=1)


def test_basis_too_fine_for_n():
    with pytest.raises(ConfigurationError):
        simulate(Constant(1.0), "poisson", 8, DB4, seed=1)


def test_integrate_K_closed_forms():
    x = np.linspace(0, 1, 17)
    np.testing.assert_allclose(integrate_K(Constant(1.0))(x), x, atol=1e-15)
    np.testing.assert_allclose(integrate_K(Constant(1.0), s=2)(x), x**2 / 2, atol=1e-15)


def test_integrate_K_trapezoid_oracle():
    f = Sinusoid(0.0, 1.0, 1.0, 0.0)
    x = np.linspace(0, 1, 2001)
    want = (1 - np.cos(2 * np.pi * x)) / (2 * np.pi)
    got = integrate_K(f, method="trapezoid")(x)
    assert np.max(np.abs(got - want)) <= 1e-8
