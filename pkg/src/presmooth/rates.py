"""Local convergence rates, regime classification, and the plug-in noise level."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .estimators import mn_level
from .links import LinkKind, get_link

__all__ = ["Regime", "RateQuery", "rate_upper", "rate_lower", "regime", "plugin_noise_level",
           "upper_rate_array", "gaussvar_cutoff", "transition_point", "bernoulli_spread"]


class Regime(str, enum.Enum):
    IRREGULAR_DOMINATED = "IrregularDominated"
    STANDARD = "Standard"


@dataclass(frozen=True)
class RateQuery:
    link_kind: LinkKind
    beta: float
    n: float
    fx: float
    mn_constant: float = 1.0
    sigma: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "link_kind", get_link(self.link_kind).kind)
        if not self.beta > 0:
            raise ConfigurationError("beta must be positive")
        if self.n < 8:
            raise ConfigurationError("n must be at least 8")
        if not get_link(self.link_kind).in_domain(self.fx) and not (
                self.link_kind is LinkKind.GAUSSVAR and self.fx == 0):
            raise DomainError(f"fx = {self.fx} outside the {self.link_kind.value} domain", value=self.fx)


def _log_ratio(n):
    return math.log(n) / n


def bernoulli_spread(fx):
    """fx (1 - fx), bit-identical for fx and the float 1 - fx.

    With w = max(fx, 1 - fx) >= 1/2 the subtraction 1 - w is exact, so both
    arguments reduce to the same pair (1 - w, w).
    """
    fx = np.asarray(fx, dtype=float)
    w = np.where(fx >= 0.5, fx, 1.0 - fx)
    out = (1.0 - w) * w
    return float(out) if out.ndim == 0 else out


def gaussvar_cutoff(n, beta, sigma=1.5, mn_constant=1.0):
    """n^{-beta} M_n, below which the log-link rate is the value itself."""
    return n ** (-beta) * mn_level(n, sigma, mn_constant)


def _branches_upper(q):
    L = _log_ratio(q.n)
    b = q.beta
    if q.link_kind is LinkKind.POISSON:
        return L ** (b / (b + 1)), (q.fx * L) ** (b / (2 * b + 1))
    if q.link_kind is LinkKind.BERNOULLI:
        return L ** (b / (b + 1)), (bernoulli_spread(q.fx) * L) ** (b / (2 * b + 1))
    return q.fx, (q.fx**2 * L) ** (b / (2 * b + 1))


def rate_upper(q: RateQuery) -> float:
    """Local upper rate with the log factor L = ln n / n."""
    irregular, standard = _branches_upper(q)
    if q.link_kind is LinkKind.GAUSSVAR:
        if q.fx <= gaussvar_cutoff(q.n, q.beta, q.sigma, q.mn_constant):
            return float(q.fx)
        return float(standard)
    return float(max(irregular, standard))


def rate_lower(q: RateQuery) -> float:
    """Local lower rate (no log factors)."""
    n, b = q.n, q.beta
    if q.link_kind is LinkKind.GAUSSVAR:
        return float(min(q.fx, (q.fx**2 / n) ** (b / (2 * b + 1))))
    value = q.fx if q.link_kind is LinkKind.POISSON else bernoulli_spread(q.fx)
    return float(max(n ** (-b / (b + 1)), (value / n) ** (b / (2 * b + 1))))


def regime(q: RateQuery) -> Regime:
    """Which branch of the upper rate is active; ties count as Standard."""
    if q.link_kind is LinkKind.GAUSSVAR:
        cut = gaussvar_cutoff(q.n, q.beta, q.sigma, q.mn_constant)
        return Regime.IRREGULAR_DOMINATED if q.fx < cut else Regime.STANDARD
    irregular, standard = _branches_upper(q)
    return Regime.IRREGULAR_DOMINATED if irregular > standard else Regime.STANDARD


def upper_rate_array(link_kind, fx, beta, n, sigma=1.5, mn_constant=1.0):
    """rate_upper evaluated pointwise on an array of function values."""
    kind = get_link(link_kind).kind
    fx = np.asarray(fx, dtype=float)
    L = _log_ratio(n)
    b = beta
    if kind is LinkKind.GAUSSVAR:
        cut = gaussvar_cutoff(n, beta, sigma, mn_constant)
        return np.where(fx <= cut, fx, (fx**2 * L) ** (b / (2 * b + 1)))
    value = fx if kind is LinkKind.POISSON else bernoulli_spread(fx)
    return np.maximum(L ** (b / (b + 1)), (np.maximum(value, 0.0) * L) ** (b / (2 * b + 1)))


def plugin_noise_level(y_delta, beta, n, link_kind, sigma=1.5, mn_constant=1.0):
    """The upper rate with f(x) replaced by the pre-smoothed data Y^delta(t), pointwise."""
    return upper_rate_array(link_kind, y_delta, beta, n, sigma, mn_constant)


def transition_point(link_kind, beta, n, tol=1e-12):
    """fx where the Poisson or Bernoulli regime switches, found by bisection on [0, 1/2]."""
    lo, hi = 0.0, 0.5
    kind = get_link(link_kind).kind
    if regime(RateQuery(kind, beta, n, hi)) is not Regime.STANDARD:
        return math.nan
    while hi - lo > tol * max(hi, 1e-300):
        mid = 0.5 * (lo + hi)
        if regime(RateQuery(kind, beta, n, mid)) is Regime.STANDARD:
            hi = mid
        else:
            lo = mid
    return hi
