import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from presmooth.errors import ConfigurationError, DomainError
from presmooth.rates import (RateQuery, Regime, gaussvar_cutoff, plugin_noise_level, rate_lower,
                             rate_upper, regime, transition_point, upper_rate_array)

betas = st.floats(0.2, 6.0)
sizes = st.floats(16, 1e9)


def q(kind, beta, n, fx):
    return RateQuery(kind, beta, n, fx)


def test_poisson_zero_value():
    n = 1024
    assert rate_upper(q("poisson", 1, n, 0.0)) == pytest.approx(math.sqrt(math.log(n) / n))
    assert rate_upper(q("poisson", 1, n, 0.0)) == pytest.approx(0.082273, abs=2e-6)
    assert rate_lower(q("poisson", 2, n, 0.0)) == pytest.approx(n ** (-2 / 3))


def test_branch_arithmetic_at_fixed_log_ratio():
    n = optimize.brentq(lambda v: math.log(v) / v - 1e-3, 100, 1e6, xtol=1e-12)
    assert rate_upper(q("poisson", 1, n, 1.0)) == pytest.approx(0.1, rel=1e-9)


def test_gaussvar_lower_at_zero():
    assert rate_lower(q("gaussvar", 1, 1024, 0.0)) == 0.0


def test_regimes():
    assert regime(q("poisson", 1, 1024, 0.0)) is Regime.IRREGULAR_DOMINATED
    assert regime(q("poisson", 1, 8, 1.0)) is Regime.STANDARD
    cut = gaussvar_cutoff(1024, 1.0)
    assert regime(q("gaussvar", 1, 1024, cut)) is Regime.STANDARD
    assert regime(q("gaussvar", 1, 1024, cut * 0.999)) is Regime.IRREGULAR_DOMINATED


def test_validation():
    with pytest.raises(ConfigurationError):
        q("poisson", 0, 1024, 0.5)
    with pytest.raises(ConfigurationError):
        q("poisson", 1, 4, 0.5)
    with pytest.raises(DomainError):
        q("bernoulli", 1, 1024, 1.5)
    with pytest.raises(DomainError):
        q("poisson", 1, 1024, -0.1)


@given(st.floats(0, 1), betas, sizes)
def test_bernoulli_symmetry(fx, beta, n):
    assert rate_upper(q("bernoulli", beta, n, fx)) == rate_upper(q("bernoulli", beta, n, 1 - fx))
    assert rate_lower(q("bernoulli", beta, n, fx)) == rate_lower(q("bernoulli", beta, n, 1 - fx))


@given(st.floats(0, 100), betas, sizes)
def test_upper_over_lower_bounded_by_log(fx, beta, n):
    ratio = rate_upper(q("poisson", beta, n, fx)) / rate_lower(q("poisson", beta, n, fx))
    assert 1 - 1e-12 <= ratio <= math.log(n) ** (beta / (beta + 1)) * (1 + 1e-12)


@given(st.floats(0, 100), st.floats(0, 100), betas, sizes)
def test_upper_rate_monotone_in_value(a, b, beta, n):
    lo, hi = sorted((a, b))
    assert rate_upper(q("poisson", beta, n, lo)) <= rate_upper(q("poisson", beta, n, hi))


@given(st.lists(st.floats(0, 1), min_size=1, max_size=20), betas, sizes)
def test_array_matches_scalar(values, beta, n):
    for kind in ("poisson", "bernoulli", "gaussvar"):
        arr = upper_rate_array(kind, values, beta, n)
        for v, r in zip(values, arr):
            assert r == pytest.approx(rate_upper(q(kind, beta, n, v)), rel=1e-12, abs=0)


def test_plugin_level_at_truth_has_ratio_one():
    kf = np.linspace(0, 1, 33)
    level = plugin_noise_level(kf, 2.0, 4096, "poisson")
    np.testing.assert_array_equal(level / upper_rate_array("poisson", kf, 2.0, 4096), 1.0)


@pytest.mark.parametrize("kind", ["poisson", "bernoulli"])
def test_transition_point_splits_regimes(kind):
    t = transition_point(kind, 1.5, 4096)
    assert regime(q(kind, 1.5, 4096, t)) is Regime.STANDARD
    assert regime(q(kind, 1.5, 4096, t * (1 - 1e-9))) is Regime.IRREGULAR_DOMINATED
