import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from presmooth.errors import ConfigurationError, PreconditionError
from presmooth.estimators import (EstimatorConfig, bias_corrected_poisson, default_grid,
                                  detector_on_grid, detector_threshold, estimate_h,
                                  gaussvar_estimate, hard_threshold, plugin_estimate,
                                  threshold_value, zn_process)
from presmooth.function_spaces import Constant, Sinusoid
from presmooth.model import simulate
from presmooth.wavelet import WaveletBasis, basis_function

DB4 = WaveletBasis.daubechies(4)
HAAR = WaveletBasis.haar()
GRID = default_grid(2**10 + 1)


def with_values(obs, values):
    return dataclasses.replace(obs, y_tree=obs.y_tree.with_values(values, kind="noisy"))


def test_threshold_value():
    assert threshold_value(1024, 4.0) == pytest.approx(0.32909, abs=1e-5)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        EstimatorConfig(tau=2.0)
    with pytest.raises(ConfigurationError):
        EstimatorConfig(sigma=1.0)


def test_strict_threshold():
    obs = simulate(Constant(0.0), "poisson", 1024, DB4, seed=1, noise_scale=0.0)
    y = np.zeros(obs.y_tree.flat().size)
    t = threshold_value(1024, 4.0)
    y[20], y[21], y[22] = 0.3, t, -np.nextafter(t, 1)
    kept = hard_threshold(with_values(obs, y), 4.0).flat()
    assert kept[20] == 0 and kept[21] == 0 and kept[22] == y[22]


def test_all_below_threshold_gives_zero():
    obs = simulate(Constant(0.0), "poisson", 1024, DB4, seed=1)
    y = np.clip(obs.y_tree.flat(), -0.3, 0.3)
    obs = with_values(obs, y)
    assert np.all(estimate_h(obs, grid=GRID) == 0)
    assert np.all(plugin_estimate(obs, grid=GRID) == 0)
    assert np.all(bias_corrected_poisson(obs, grid=GRID) == 0)


def test_noiseless_constant_reconstructs_exactly():
    obs = simulate(Constant(1.0), "poisson", 1024, DB4, seed=1, noise_scale=0.0)
    np.testing.assert_allclose(estimate_h(obs, grid=GRID), 2.0, atol=1e-12)
    np.testing.assert_allclose(plugin_estimate(obs, grid=GRID), 1.0, atol=1e-12)
    obs = simulate(Constant(1.0), "bernoulli", 1024, DB4, seed=1, noise_scale=0.0)
    np.testing.assert_allclose(plugin_estimate(obs, grid=GRID), 1.0, atol=1e-12)


def test_single_coefficient_is_that_wavelet():
    obs = simulate(Constant(0.0), "poisson", 1024, DB4, seed=1, noise_scale=0.0)
    y = np.zeros(obs.y_tree.flat().size)
    y[2**6 + 9] = 1.7
    got = estimate_h(with_values(obs, y), grid=GRID)
    np.testing.assert_allclose(got, 1.7 * basis_function(obs.basis, 6, 9, GRID), atol=1e-12)


def test_plugin_rejects_log_link():
    obs = simulate(Constant(1.0), "gaussvar", 256, DB4, seed=1)
    with pytest.raises(PreconditionError):
        plugin_estimate(obs)


def test_haar_scaling_bias_correction():
    n = 1024
    obs = simulate(Constant(0.0), "poisson", n, HAAR, seed=1, noise_scale=0.0)
    y = np.zeros(obs.y_tree.flat().size)
    y[0] = 2.0
    obs = with_values(obs, y)
    np.testing.assert_allclose(bias_corrected_poisson(obs, grid=GRID),
                               plugin_estimate(obs, grid=GRID) - 1 / (4 * n), atol=1e-15)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_bias_correction_never_exceeds_plugin(seed):
    obs = simulate(Sinusoid(0.5, 0.25, 1, 0), "poisson", 512, DB4, seed=seed)
    assert np.all(bias_corrected_poisson(obs, grid=GRID) <= plugin_estimate(obs, grid=GRID))


def test_bias_correction_reduces_mean_bias():
    n, reps = 4096, 500
    x = np.array([0.5])
    plain = np.empty(reps)
    fixed = np.empty(reps)
    for r in range(reps):
        obs = simulate(Constant(1.0), "poisson", n, DB4, seed=99, rep=r)
        plain[r] = plugin_estimate(obs, grid=x)[0]
        fixed[r] = bias_corrected_poisson(obs, grid=x)[0]
    assert abs(fixed.mean() - 1) < abs(plain.mean() - 1)


def test_zn_for_constants():
    obs = simulate(Constant(1.0), "gaussvar", 512, DB4, seed=4)
    np.testing.assert_allclose(zn_process(obs), obs.zn_noise, atol=1e-12)
    obs = simulate(Constant(math.exp(math.sqrt(2))), "gaussvar", 512, DB4, seed=4)
    np.testing.assert_allclose(zn_process(obs), 1.0 + obs.zn_noise, atol=1e-9)


def test_detector_threshold_value():
    assert detector_threshold(1024, 1.0, 1.5) == pytest.approx(0.68365, abs=1e-5)


def test_detector_needs_beta():
    obs = simulate(Constant(1.0), "gaussvar", 512, DB4, seed=4)
    with pytest.raises(ConfigurationError):
        detector_on_grid(obs, EstimatorConfig())


def test_detector_off_everywhere_gives_zero():
    obs = simulate(Constant(1.0), "gaussvar", 512, DB4, seed=4)
    obs = dataclasses.replace(obs, zn_noise=np.full(512, -1e6))
    assert np.all(gaussvar_estimate(obs, EstimatorConfig(beta=1.0), GRID) == 0)


def test_log_link_error_shrinks_for_unit_function():
    cfg = EstimatorConfig(beta=2.0)
    med = []
    for n in (2**10, 2**13, 2**16):
        errs = [np.max(np.abs(gaussvar_estimate(simulate(Constant(1.0), "gaussvar", n, DB4, seed=8, rep=r),
                                                cfg, GRID) - 1)) for r in range(30)]
        med.append(np.median(errs))
    assert med[0] >= med[1] >= med[2]
    assert med[2] < 0.05
