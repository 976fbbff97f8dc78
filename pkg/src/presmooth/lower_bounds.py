"""Two-hypothesis lower-bound constructions and their checks.

A pair perturbs a reference function f* by a mollifier bump of height
R h^beta eta K0(0) and width h at x0.  The bandwidth and the constant c0
depend on the link and on whether f*(x0) is above the regime threshold
("case A") or below it ("case B").  The bump scale eta starts at 1 and is
halved until both hypotheses fit the norm budget R on the evaluation grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate

from .errors import PreconditionError
from .function_spaces import (Constant, Linear, MollifierBump, Sum, fluctuation_constant,
                              mollifier_K0, space_norm)
from .links import LinkKind, get_link, kl_divergence
from .rates import RateQuery, rate_lower

__all__ = ["HypothesisPair", "ConditionReport", "build_pair", "verify_conditions",
           "linear_counterexample", "linear_kl_bound", "mollifier_norms"]

NORM_GRID = 2**12 + 1
MAX_HALVINGS = 40


@dataclass(frozen=True)
class HypothesisPair:
    link_kind: LinkKind
    f0: object
    f1: object
    x0: float
    h_n: float
    case: str
    c0: float
    eta: float
    kl: float
    separation: float
    rate_at_f0: float
    rate_at_f1: float
    beta: float
    R: float
    n: int
    sign: int = 1
    norm_f0: float = math.nan
    norm_f1: float = math.nan


@dataclass(frozen=True)
class ConditionReport:
    norm_f0: float
    norm_f1: float
    cond_i: bool
    separation_ratio: float
    rate_ratio: float
    cond_ii: bool
    kl: float
    cond_iii: bool

    @property
    def passed(self):
        return self.cond_i and self.cond_ii and self.cond_iii


@lru_cache(maxsize=None)
def mollifier_norms():
    """(||K0||_1, ||K0||_2^2, K0(0))."""
    l1, _ = integrate.quad(lambda u: mollifier_K0(u), -1, 1, epsabs=0, epsrel=1e-13)
    l2, _ = integrate.quad(lambda u: mollifier_K0(u) ** 2, -1, 1, epsabs=0, epsrel=1e-13)
    return l1, l2, math.exp(-1.0)


def _norm(desc, beta, kind, focus=None):
    return space_norm(desc, beta, kind, NORM_GRID, focus).total


def _bandwidth(kind, fs, beta, R, n, eta):
    """Case label, c0, bandwidth and bump sign from the proof recipes."""
    l1, l2, _ = mollifier_norms()
    K1, K2 = eta * l1, eta**2 * l2
    a = fluctuation_constant(beta)
    local = a * R ** (-1 / beta)
    if kind is LinkKind.POISSON:
        if fs > n ** (-beta / (beta + 1)):
            c0 = min(local, (4 * R**2 * K2) ** (-1 / (2 * beta + 1)))
            return "A", c0, c0 * (fs / n) ** (1 / (2 * beta + 1)), 1
        c0 = (2 * R * K1) ** (-1 / (beta + 1))
        return "B", c0, c0 * n ** (-1 / (beta + 1)), 1
    if kind is LinkKind.BERNOULLI:
        m = min(fs, 1 - fs)
        sign = 1 if fs <= 0.5 else -1
        if m > n ** (-beta / (beta + 1)):
            c0 = min(local, (8 * R**2 * K2) ** (-1 / (2 * beta + 1)))
            return "A", c0, c0 * (m / n) ** (1 / (2 * beta + 1)), sign
        c0 = (8 * R * K1) ** (-1 / (beta + 1))
        return "B", c0, c0 * n ** (-1 / (beta + 1)), sign
    if fs > n ** (-beta):
        c0 = min(local, (R**2 * K2) ** (-1 / (2 * beta + 1)))
        return "A", c0, c0 * (fs**2 / n) ** (1 / (2 * beta + 1)), 1
    c0 = local
    return "B", c0, c0 * fs ** (1 / beta), 1


def _perturb(f_star, x0, h, height, sign):
    return Sum((f_star, MollifierBump(x0, h, 1.0)), (1.0, sign * height))


def build_pair(link_kind, f_star, x0, beta, R, n) -> HypothesisPair:
    """Construct (f0, f1) = (f*, f* +/- R h^beta eta K0((x - x0)/h))."""
    kind = get_link(link_kind).kind
    if not 0 < x0 < 1:
        raise PreconditionError("x0 must lie in (0, 1)")
    base_norm = _norm(f_star, beta, kind)
    if not base_norm < R:
        raise PreconditionError(f"norm of f* is {base_norm:.4g}, not below R = {R}")
    fs = float(f_star(x0))
    if kind is LinkKind.GAUSSVAR and fs <= 0:
        raise PreconditionError("the log link needs f*(x0) > 0")
    eta = 1.0
    for _ in range(MAX_HALVINGS):
        case, c0, h, sign = _bandwidth(kind, fs, beta, R, n, eta)
        x_c = x0
        if x_c - h < 0 or x_c + h > 1:
            x_c = min(max(x0, h), 1 - h)
            warnings.warn(f"bump support leaves [0, 1]; moved x0 from {x0} to {x_c}", stacklevel=2)
            fs = float(f_star(x_c))
        height = R * h**beta * eta
        f1 = _perturb(f_star, x_c, h, height, sign)
        if kind is LinkKind.GAUSSVAR and case == "B":
            budget = min(n * fs ** (1 / beta), 1.0)
            kl = kl_divergence(kind, f_star, f1, n)
            shrink = 0
            while kl > budget and shrink < MAX_HALVINGS:
                c0 /= 2
                h = c0 * fs ** (1 / beta)
                height = R * h**beta * eta
                f1 = _perturb(f_star, x_c, h, height, sign)
                kl = kl_divergence(kind, f_star, f1, n)
                shrink += 1
        focus = (x_c - 2 * h, x_c + 2 * h)
        n1 = _norm(f1, beta, kind, focus)
        if n1 <= R:
            break
        eta /= 2
    else:
        raise PreconditionError("could not fit the perturbed hypothesis into the norm budget")
    kl = kl_divergence(kind, f_star, f1, n)
    f1x = float(f1(x_c))
    return HypothesisPair(
        link_kind=kind, f0=f_star, f1=f1, x0=x_c, h_n=h, case=case, c0=c0, eta=eta, kl=kl,
        separation=abs(fs - f1x), rate_at_f0=rate_lower(RateQuery(kind, beta, n, fs)),
        rate_at_f1=rate_lower(RateQuery(kind, beta, n, f1x)), beta=beta, R=R, n=int(n),
        sign=sign, norm_f0=base_norm, norm_f1=n1)


def verify_conditions(pair: HypothesisPair, link=None, n=None, R=None, beta=None) -> ConditionReport:
    """Check the norm budget, separation versus rate, and the KL budget."""
    kind = get_link(link if link is not None else pair.link_kind).kind
    n = pair.n if n is None else n
    R = pair.R if R is None else R
    beta = pair.beta if beta is None else beta
    focus = (pair.x0 - 2 * pair.h_n, pair.x0 + 2 * pair.h_n) if pair.h_n > 0 else None
    n0 = _norm(pair.f0, beta, kind)
    n1 = _norm(pair.f1, beta, kind, focus)
    f0x, f1x = float(pair.f0(pair.x0)), float(pair.f1(pair.x0))
    sep = abs(f0x - f1x)
    r0 = rate_lower(RateQuery(kind, beta, n, f0x))
    r1 = rate_lower(RateQuery(kind, beta, n, max(f1x, 0.0)))
    sep_ratio = sep / r0 if r0 > 0 else math.inf
    rate_ratio = r1 / r0 if r0 > 0 else math.nan
    kl = kl_divergence(kind, pair.f0, pair.f1, n)
    return ConditionReport(
        norm_f0=n0, norm_f1=n1, cond_i=bool(n0 <= R and n1 <= R),
        separation_ratio=sep_ratio, rate_ratio=rate_ratio,
        cond_ii=bool(sep > 0 and 0.25 <= rate_ratio <= 4.0),
        kl=kl, cond_iii=bool(kl <= 1.0))


def linear_kl_bound(n, r):
    """10 n r^2 log(1/r)."""
    return 10 * n * r**2 * math.log(1 / r)


def linear_counterexample(n, c0=1.0) -> HypothesisPair:
    """f0(x) = x against f1(x) = x + c0 / sqrt(n ln n) under the Poisson link."""
    if n < 8 or c0 <= 0:
        raise PreconditionError("need n >= 8 and c0 > 0")
    r = c0 / math.sqrt(n * math.log(n))
    f0 = Linear(1.0, 0.0)
    f1 = Linear(1.0, r)
    kl = kl_divergence(LinkKind.POISSON, f0, f1, n)
    return HypothesisPair(
        link_kind=LinkKind.POISSON, f0=f0, f1=f1, x0=0.0, h_n=0.0, case="linear", c0=c0,
        eta=1.0, kl=kl, separation=r, rate_at_f0=r, rate_at_f1=r, beta=1.0, R=2.0, n=int(n))


def in_linear_class(desc, n):
    """Membership in the class of nonnegative linear functions used by the counterexample."""
    if isinstance(desc, Constant):
        a, b = 0.0, desc.c
    else:
        a, b = desc.a, desc.b
    return abs(a) + abs(b) <= 2 and b >= 0 and a + b >= 0 and b <= n ** -0.5
