import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from presmooth.errors import DomainError
from presmooth.function_spaces import Constant, Linear, MollifierBump
from presmooth.links import BERNOULLI, GAUSSVAR, POISSON, LinkKind, get_link, kl_divergence
from presmooth.lower_bounds import linear_kl_bound


def test_apply_values():
    assert POISSON.apply(0.25) == 1.0
    assert BERNOULLI.apply(0.5) == pytest.approx(math.pi / 2)
    assert GAUSSVAR.apply(1.0) == 0.0


def test_invert_values_and_clamp():
    assert POISSON.invert(2.0) == 1.0
    assert BERNOULLI.invert(math.pi) == pytest.approx(1.0)
    assert BERNOULLI.invert(3.5) == 1.0
    assert POISSON.invert(-1.0) == 0.0
    assert BERNOULLI.invert(-0.2) == 0.0


@pytest.mark.parametrize("link,u", [(POISSON, -0.1), (BERNOULLI, 1.2), (GAUSSVAR, 0.0)])
def test_domain_errors(link, u):
    with pytest.raises(DomainError):
        link.apply(u)


@given(st.floats(0, 50))
def test_poisson_roundtrip(u):
    assert POISSON.invert(POISSON.apply(u)) == pytest.approx(u, rel=1e-12, abs=1e-300)


@given(st.floats(0, 1))
def test_bernoulli_roundtrip(u):
    assert BERNOULLI.invert(BERNOULLI.apply(u)) == pytest.approx(u, abs=1e-14)


@given(st.floats(1e-8, 1e8))
def test_log_roundtrip(u):
    assert GAUSSVAR.invert(GAUSSVAR.apply(u)) == pytest.approx(u, rel=1e-12)


def test_get_link_accepts_enum_string_and_link():
    assert get_link(LinkKind.BERNOULLI) is BERNOULLI
    assert get_link("Poisson") is POISSON
    assert get_link(GAUSSVAR) is GAUSSVAR
    with pytest.raises(DomainError):
        get_link("gamma")


def test_kl_identical_is_zero():
    f = Linear(0.5, 0.1)
    assert kl_divergence(POISSON, f, f, 100) == 0.0


def test_kl_constants_exact():
    # (n/2)(2*1.1 - 2)^2 with n = 100
    assert kl_divergence(POISSON, Constant(1.0), Constant(1.21), 100) == pytest.approx(2.0, rel=1e-12)


def test_kl_log_link_constants():
    n = 50
    want = n / 2 * (math.log(2.0) / math.sqrt(2)) ** 2
    assert kl_divergence(GAUSSVAR, Constant(1.0), Constant(2.0), n) == pytest.approx(want, rel=1e-12)


def test_kl_log_link_vanishing_on_interval_is_infinite():
    assert kl_divergence(GAUSSVAR, MollifierBump(0.5, 0.2, 1.0), Constant(1.0), 10) == math.inf


@pytest.mark.parametrize("n", [64, 1024, 2**14])
def test_linear_pair_kl_below_bound(n):
    r = 1 / math.sqrt(n * math.log(n))
    kl = kl_divergence(POISSON, Linear(1, 0), Linear(1, r), n)
    assert 0 < kl <= linear_kl_bound(n, r)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_kl_symmetric_in_arguments(a, b):
    k1 = kl_divergence(BERNOULLI, Constant(a), Constant(b), 10)
    k2 = kl_divergence(BERNOULLI, Constant(b), Constant(a), 10)
    assert k1 == pytest.approx(k2, rel=1e-12, abs=1e-300)
