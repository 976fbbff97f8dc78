"""Variance-stabilizing link functions and the white-noise KL divergence."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, IntegrabilityError

__all__ = ["LinkKind", "Link", "POISSON", "BERNOULLI", "GAUSSVAR", "get_link",
           "apply", "invert", "kl_divergence"]


class LinkKind(str, enum.Enum):
    POISSON = "poisson"
    BERNOULLI = "bernoulli"
    GAUSSVAR = "gaussvar"


@dataclass(frozen=True)
class Link:
    """A link function with its domain and irregular points.

    ``lower_open`` marks a domain whose left end is excluded (log link).
    """

    kind: LinkKind
    lower: float
    upper: float
    lower_open: bool
    irregular_points: tuple

    @property
    def name(self):
        return self.kind.value

    def in_domain(self, u):
        u = np.asarray(u, dtype=float)
        low_ok = u > self.lower if self.lower_open else u >= self.lower
        return low_ok & (u <= self.upper)

    def apply(self, u):
        """h(u), vectorized.  Raises DomainError on the first value outside the domain."""
        arr = np.asarray(u, dtype=float)
        ok = self.in_domain(arr)
        if not np.all(ok):
            bad = float(np.ravel(arr)[np.argmin(np.ravel(ok))])
            raise DomainError(f"{self.name} link undefined at u = {bad!r}", value=bad)
        out = self._raw(arr)
        return float(out) if np.ndim(u) == 0 else out

    def _raw(self, u):
        # no domain check; callers guarantee it or want nan/inf propagation
        if self.kind is LinkKind.POISSON:
            return 2.0 * np.sqrt(u)
        if self.kind is LinkKind.BERNOULLI:
            return 2.0 * np.arcsin(np.sqrt(u))
        with np.errstate(divide="ignore"):
            return np.log(u) / math.sqrt(2.0)

    def invert(self, y):
        """h^{-1}(y) after clamping y to the range of h."""
        arr = np.asarray(y, dtype=float)
        if self.kind is LinkKind.POISSON:
            out = np.maximum(arr, 0.0) ** 2 / 4.0
        elif self.kind is LinkKind.BERNOULLI:
            out = np.sin(np.clip(arr, 0.0, math.pi) / 2.0) ** 2
        else:
            out = np.exp(math.sqrt(2.0) * arr)
        return float(out) if np.ndim(y) == 0 else out

    def compose(self, f):
        """The callable x -> h(f(x)) without domain checks (non-finite values flag trouble)."""
        def composed(x):
            with np.errstate(invalid="ignore"):
                return self._raw(np.asarray(f(x), dtype=float))
        return composed


POISSON = Link(LinkKind.POISSON, 0.0, math.inf, False, (0.0,))
BERNOULLI = Link(LinkKind.BERNOULLI, 0.0, 1.0, False, (0.0, 1.0))
GAUSSVAR = Link(LinkKind.GAUSSVAR, 0.0, math.inf, True, (0.0,))

_BY_KIND = {LinkKind.POISSON: POISSON, LinkKind.BERNOULLI: BERNOULLI, LinkKind.GAUSSVAR: GAUSSVAR}


def get_link(kind) -> Link:
    if isinstance(kind, Link):
        return kind
    if isinstance(kind, LinkKind):
        return _BY_KIND[kind]
    try:
        return _BY_KIND[LinkKind(str(kind).lower())]
    except ValueError:
        raise DomainError(f"unknown link {kind!r}; choose poisson, bernoulli or gaussvar") from None


def apply(link, u):
    return get_link(link).apply(u)


def invert(link, y):
    return get_link(link).invert(y)


def _breakpoints(*descs):
    pts = set()
    for d in descs:
        pts.update(getattr(d, "breakpoints", lambda: ())())
    return sorted(p for p in pts if 0.0 < p < 1.0)


def kl_divergence(link, f, g, n, rtol=1e-9) -> float:
    """(n/2) * int_0^1 (h(f) - h(g))^2 dx by adaptive quadrature.

    ``f`` and ``g`` are descriptors or vectorized callables.  For the log
    link a function that vanishes on an interval gives +inf.
    """
    link = get_link(link)
    if f is g:
        return 0.0
    hf, hg = link.compose(f), link.compose(g)
    if link.kind is LinkKind.GAUSSVAR:
        probe = np.linspace(0.0, 1.0, 4097)
        for desc in (f, g):
            vals = np.asarray(desc(probe), dtype=float)
            zero = vals <= 0
            # isolated zeros are integrable for log; runs of zeros are not
            if np.any(zero[1:] & zero[:-1]):
                return math.inf

    def integrand(x):
        a = hf(np.array([x]))[0]
        b = hg(np.array([x]))[0]
        v = (a - b) ** 2
        if not math.isfinite(v):
            if math.isinf(a) and math.isinf(b) and a == b:
                return 0.0
            raise IntegrabilityError(f"KL integrand is not finite at x = {x:.6g}", location=x)
        return v

    pts = _breakpoints(f, g)
    total = 0.0
    edges = [0.0, *pts, 1.0]
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, epsabs=1e-300, epsrel=rtol, limit=500)
        total += val
    return 0.5 * n * total
