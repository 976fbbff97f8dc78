import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from presmooth.errors import PreconditionError
from presmooth.function_spaces import Constant, Linear, PowerBump, mollifier_K0
from presmooth.lower_bounds import (build_pair, in_linear_class, linear_counterexample,
                                    linear_kl_bound, mollifier_norms, verify_conditions)

K0_AT_ZERO = math.exp(-1)


def test_mollifier_norms_against_grid_oracle():
    x = np.linspace(-1, 1, 200_001)
    k = mollifier_K0(x)
    l1, l2, k0 = mollifier_norms()
    assert l1 == pytest.approx(np.trapezoid(k, x), rel=1e-8)
    assert l2 == pytest.approx(np.trapezoid(k**2, x), rel=1e-8)
    assert k0 == pytest.approx(K0_AT_ZERO)


@pytest.mark.parametrize("n", [2**8, 2**11, 2**14])
def test_poisson_case_a_separation_formula(n):
    beta, R = 2.0, 3.0
    pair = build_pair("poisson", Constant(0.5), 0.5, beta, R, n)
    assert pair.case == "A"
    want = R * pair.c0**beta * pair.eta * K0_AT_ZERO * (0.5 / n) ** (beta / (2 * beta + 1))
    assert pair.separation == pytest.approx(want, rel=1e-12)


def test_poisson_zero_reference_is_case_b():
    beta, R, n = 2.0, 3.0, 2**12
    pair = build_pair("poisson", Constant(0.0), 0.5, beta, R, n)
    assert pair.case == "B"
    assert pair.h_n == pytest.approx(pair.c0 * n ** (-1 / (beta + 1)), rel=1e-12)
    want = R * pair.c0**beta * pair.eta * K0_AT_ZERO * n ** (-beta / (beta + 1))
    assert pair.separation == pytest.approx(want, rel=1e-12)
    assert verify_conditions(pair).passed


def test_identical_hypotheses_fail_separation():
    pair = build_pair("poisson", Constant(0.5), 0.5, 2.0, 3.0, 1024)
    same = dataclasses.replace(pair, f1=pair.f0)
    report = verify_conditions(same)
    assert report.separation_ratio == 0 and not report.cond_ii


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 1.0), st.sampled_from([2**8, 2**11, 2**14]))
def test_poisson_case_a_rate_equivalence(u, n):
    beta = 2.0
    low = n ** (-beta / (beta + 1))
    fs = low * (1 / low) ** u  # log-uniform over [n^{-beta/(beta+1)}, 1]
    pair = build_pair("poisson", Constant(fs), 0.5, beta, 2 * fs + 1, n)
    report = verify_conditions(pair)
    assert 0.25 <= report.rate_ratio <= 4
    assert report.kl <= 1


@pytest.mark.parametrize("kind", ["poisson", "bernoulli", "gaussvar"])
def test_pairs_satisfy_all_conditions(kind):
    f = PowerBump(0.5, 2.0, Linear(0.5, 0.5))
    R = 20.0
    for x0 in (0.3, 0.5 + 1e-3):
        pair = build_pair(kind, f, x0, 2.0, R, 2**10)
        report = verify_conditions(pair)
        assert report.passed, (kind, x0, report)


def test_gaussvar_case_b_near_a_zero():
    pair = build_pair("gaussvar", PowerBump(0.5, 2.0), 0.5 + 1e-3, 2.0, 20.0, 2**8)
    assert pair.case == "B"
    assert pair.kl <= min(2**8 * pair.f0(pair.x0) ** 0.5, 1.0)


def test_norm_budget_precondition():
    with pytest.raises(PreconditionError):
        build_pair("poisson", Linear(1.0, 0.5), 0.5, 2.0, 0.5, 1024)
    with pytest.raises(PreconditionError):
        build_pair("poisson", Constant(0.5), 1.0, 2.0, 3.0, 1024)


def test_boundary_shift_warns():
    with pytest.warns(UserWarning):
        pair = build_pair("poisson", Constant(0.5), 0.001, 2.0, 3.0, 256)
    assert pair.x0 - pair.h_n >= 0


@pytest.mark.parametrize("n", [16, 1024, 2**14, 2**20])
def test_linear_counterexample(n):
    pair = linear_counterexample(n)
    r = 1 / math.sqrt(n * math.log(n))
    assert pair.separation == pytest.approx(r)
    assert pair.kl <= linear_kl_bound(n, r)
    assert in_linear_class(pair.f0, n) and in_linear_class(pair.f1, n)
