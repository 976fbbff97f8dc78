"""Sequence-space simulation of the white noise experiment, and s-fold integration.

Noise comes from a Philox counter-based generator.  Replication ``rep`` of
seed ``seed`` owns the stream ``SeedSequence([seed, rep])``, whose two
children feed the wavelet noise and the detector-window noise.  The wavelet
noise is drawn in coarse-to-fine order in one call, so the first 2**(J+1)
draws are the same for every n: doubling n only appends finer levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigurationError, DomainError, IntegrabilityError
from .function_spaces import FunctionDescriptor, GridFunction
from .links import Link, LinkKind, get_link
from .wavelet import CoefficientTree, WaveletBasis, clean_tree

__all__ = ["Observation", "simulate", "finest_level", "basis_for", "noise_streams",
           "clean_coefficients", "integrate_K"]

K_GRID_POINTS = 2**16 + 1


@dataclass(frozen=True, eq=False)
class Observation:
    """One draw of Y_{j,k} = d_{j,k} + n^{-1/2} Z_{j,k}."""

    n: int
    link: Link
    y_tree: CoefficientTree
    J_n: int
    clean_tree: CoefficientTree
    seed: int
    rep: int
    basis: WaveletBasis
    f: FunctionDescriptor
    zn_noise: np.ndarray | None = None
    noise_scale: float = 1.0
    antithetic: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def noise(self):
        """Standardized residuals sqrt(n) (Y - d), all levels pooled."""
        return math.sqrt(self.n) * (self.y_tree.flat() - self.clean_tree.flat())


def finest_level(n):
    """J_n = floor(log2 n), so that n/2 <= 2**J_n <= n."""
    if n < 8:
        raise ConfigurationError(f"sample size must be >= 8, got {n}")
    return int(math.floor(math.log2(n) + 1e-12))


def basis_for(basis: WaveletBasis, n):
    J = finest_level(n)
    if J <= basis.j0:
        raise ConfigurationError(f"n={n} gives finest level {J}, not above coarse level {basis.j0} of {basis.name}")
    return basis if basis.jmax == J else basis.with_jmax(J)


def noise_streams(seed, rep):
    """Independent generators for the coefficient noise and the detector-window noise."""
    coef, window = np.random.SeedSequence([int(seed), int(rep)]).spawn(2)
    return np.random.Generator(np.random.Philox(coef)), np.random.Generator(np.random.Philox(window))


def _check_domain(f, link):
    x = np.linspace(0.0, 1.0, 4097)
    v = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(v)):
        xb = float(x[np.argmax(~np.isfinite(v))])
        raise IntegrabilityError(f"function is not finite at x = {xb:.6g}", location=xb)
    if link.kind is LinkKind.GAUSSVAR:
        if np.any(v < 0):
            xb = float(x[np.argmax(v < 0)])
            raise DomainError(f"gaussvar link needs f > 0; f({xb:.6g}) < 0", value=xb)
        zero = v <= 0
        run = zero[1:] & zero[:-1]
        if np.any(run):
            xb = float(x[np.argmax(run)])
            raise IntegrabilityError(f"log f is not integrable: f vanishes on an interval near x = {xb:.6g}",
                                     location=xb)
        return
    bad = ~link.in_domain(v)
    if np.any(bad):
        xb = float(x[np.argmax(bad)])
        raise DomainError(f"f({xb:.6g}) = {v[np.argmax(bad)]:.6g} is outside the {link.name} domain", value=xb)


@lru_cache(maxsize=16)
def clean_coefficients(f, link_kind, basis, J):
    """Clean tree of h(f) at levels up to J (cached per process)."""
    link = get_link(link_kind)
    _check_domain(f, link)
    return clean_tree(link.compose(f), basis, J)


def simulate(f, link, n, basis, seed, rep=0, noise_scale=1.0, antithetic=False):
    """Simulate one observation of h(f) at sample size n.

    ``noise_scale`` multiplies Z (0 gives the noiseless observation used by
    oracle tests); ``antithetic`` flips the sign of all noise, which couples
    a run for f with a run for 1 - f under the Bernoulli link.
    """
    link = get_link(link)
    n = int(n)
    basis = basis_for(basis, n)
    J = basis.jmax
    d = clean_coefficients(f, link.kind, basis, J)
    coef_rng, window_rng = noise_streams(seed, rep)
    z = coef_rng.standard_normal(2 ** (J + 1))
    sign = -1.0 if antithetic else 1.0
    y = d.flat() + sign * noise_scale * z / math.sqrt(n)
    zn = None
    if link.kind is LinkKind.GAUSSVAR:
        zn = sign * noise_scale * window_rng.standard_normal(n)
        zn.flags.writeable = False
    return Observation(n=n, link=link, y_tree=d.with_values(y, kind="noisy"), J_n=J,
                       clean_tree=d, seed=int(seed), rep=int(rep), basis=basis, f=f,
                       zn_noise=zn, noise_scale=float(noise_scale), antithetic=bool(antithetic))


def integrate_K(f, s=1, method="auto", points=K_GRID_POINTS):
    """s-fold antiderivative of f with zero integration constants.

    ``method="auto"`` uses the closed form when the descriptor has one and
    falls back to cumulative trapezoid sums on ``points`` grid points.
    """
    if not 1 <= s <= 3:
        raise ConfigurationError("integration order s must be 1, 2 or 3")
    if method not in ("auto", "closed", "trapezoid"):
        raise ConfigurationError(f"unknown integration method {method!r}")
    current = f
    if method != "trapezoid":
        for _ in range(s):
            nxt = current.antiderivative() if hasattr(current, "antiderivative") else None
            if nxt is None:
                break
            current = nxt
        else:
            return current
        if method == "closed":
            raise ConfigurationError(f"{type(f).__name__} has no closed-form antiderivative")
        current = f
    x = np.linspace(0.0, 1.0, points)
    v = np.asarray(current(x), dtype=float)
    for _ in range(s):
        v = cumulative_trapezoid(v, x, initial=0.0)
    return GridFunction(v)
