"""Hard thresholding, plug-in inversion, and the two link-specific refinements.

The Poisson refinement subtracts the squared-noise bias of the kept
coefficients.  The log-link estimator multiplies the plug-in by a detector
that switches the estimate off where local averages of log f look too small.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, IntegrabilityError, PreconditionError
from .links import LinkKind
from .wavelet import CoefficientTree, level_square_sum, synthesize

__all__ = ["EstimatorConfig", "threshold_value", "hard_threshold", "default_grid",
           "estimate_h", "plugin_estimate", "bias_corrected_poisson", "window_log_integrals",
           "zn_process", "detector_threshold", "detector_on_grid", "gaussvar_estimate",
           "mn_level", "kept_mask"]

DEFAULT_GRID = 2**12 + 1


@dataclass(frozen=True)
class EstimatorConfig:
    tau: float = 4.0
    sigma: float = 1.5
    beta: float | None = None
    grid_size: int = DEFAULT_GRID
    mn_constant: float = 1.0

    def __post_init__(self):
        if not self.tau > 2 * math.sqrt(2):
            raise ConfigurationError(f"tau must exceed 2*sqrt(2), got {self.tau}")
        if not self.sigma > 1:
            raise ConfigurationError(f"sigma must exceed 1, got {self.sigma}")
        if self.beta is not None and not self.beta > 0:
            raise ConfigurationError("beta must be positive")
        if self.grid_size < 2:
            raise ConfigurationError("grid_size must be at least 2")


def default_grid(size=DEFAULT_GRID):
    return np.linspace(0.0, 1.0, size)


def threshold_value(n, tau):
    """tau * sqrt(ln n / n)."""
    return tau * math.sqrt(math.log(n) / n)


def kept_mask(obs, tau):
    """Flat boolean vector of coefficients that survive thresholding (strict inequality)."""
    return np.abs(obs.y_tree.flat()) > threshold_value(obs.n, tau)


def hard_threshold(obs, tau) -> CoefficientTree:
    if not tau > 2 * math.sqrt(2):
        raise ConfigurationError(f"tau must exceed 2*sqrt(2), got {tau}")
    y = obs.y_tree.flat()
    keep = kept_mask(obs, tau)
    return obs.y_tree.with_values(np.where(keep, y, 0.0), kind="thresholded",
                                  threshold=threshold_value(obs.n, tau))


def _grid(config, grid):
    return default_grid(config.grid_size) if grid is None else np.asarray(grid, dtype=float)


def estimate_h(obs, config=EstimatorConfig(), grid=None):
    """Reconstruction of h(f) from the thresholded coefficients."""
    return synthesize(hard_threshold(obs, config.tau), obs.basis, _grid(config, grid))


def plugin_estimate(obs, config=EstimatorConfig(), grid=None):
    """h^{-1} applied to the thresholded reconstruction (Poisson and Bernoulli links)."""
    if obs.link.kind is LinkKind.GAUSSVAR:
        raise PreconditionError("the log link needs gaussvar_estimate, not the plain plug-in")
    return obs.link.invert(estimate_h(obs, config, grid))


def _squared_basis_sum(obs, keep, grid):
    """sum over kept (j, k) of psi_{j,k}(x)^2 on ``grid``."""
    basis = obs.basis
    J = obs.y_tree.J
    x = np.asarray(grid, dtype=float)
    M = max(J + 2, int(math.ceil(math.log2(max(x.size - 1, 2)))))
    n0 = 2**basis.j0
    total = level_square_sum(keep[:n0], basis.j0, basis, M, kind="scaling")
    pos = n0
    for j in range(basis.j0, J + 1):
        w = keep[pos:pos + 2**j].astype(float)
        pos += 2**j
        if w.any():
            total = total + level_square_sum(w, j, basis, M)
    idx = np.round(x * 2**M).astype(np.int64)
    if np.all(np.abs(x * 2**M - idx) < 1e-9):
        return total[idx % 2**M]
    return np.interp(x, np.linspace(0.0, 1.0, 2**M + 1), np.append(total, total[0]))


def bias_corrected_poisson(obs, config=EstimatorConfig(), grid=None):
    """f_hat - (1/(4n)) sum over kept coefficients of psi_{j,k}(x)^2."""
    if obs.link.kind is not LinkKind.POISSON:
        raise PreconditionError("the bias correction applies to the Poisson link only")
    g = _grid(config, grid)
    fhat = plugin_estimate(obs, config, g)
    keep = kept_mask(obs, config.tau)
    if not keep.any():
        return fhat
    return fhat - _squared_basis_sum(obs, keep, g) / (4.0 * obs.n)


# ------------------------------------------------------------ log link


@lru_cache(maxsize=8)
def window_log_integrals(f, n, nq=16):
    """int over [i/n, (i+1)/n] of log f, for i = 0..n-1, by Gauss-Legendre per window.

    Windows holding a breakpoint of f are split there.
    """
    x, w = np.polynomial.legendre.leggauss(nq)
    t = (x + 1) / 2
    w = w / 2
    edges = np.arange(n)[:, None]
    pts = (edges + t[None, :]) / n
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.log(np.asarray(f(pts), dtype=float))
    out = vals @ w / n
    for b in getattr(f, "breakpoints", lambda: ())():
        i = int(math.floor(b * n))
        if 0 <= i < n and b * n != i:
            lo, hi = i / n, (i + 1) / n
            acc = 0.0
            for a, c in ((lo, b), (b, hi)):
                xs = a + (c - a) * t
                with np.errstate(divide="ignore"):
                    acc += float(np.log(np.asarray(f(xs), dtype=float)) @ w) * (c - a)
            out[i] = acc
    bad = ~np.isfinite(out)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise IntegrabilityError(f"log f is not integrable on window [{i}/{n}, {i + 1}/{n}]",
                                 location=(i + 0.5) / n)
    out.flags.writeable = False
    return out


def zn_process(obs):
    """Z_n at window centres (i + 1/2)/n: (n / sqrt 2) * window integral of log f + noise."""
    if obs.link.kind is not LinkKind.GAUSSVAR:
        raise PreconditionError("the detector process exists for the log link only")
    drift = obs.n / math.sqrt(2) * window_log_integrals(obs.f, obs.n)
    return drift + obs.zn_noise


def detector_threshold(n, beta, sigma):
    """-beta ln n / sqrt 2 + sigma sqrt(2 ln n)."""
    ln = math.log(n)
    return -beta * ln / math.sqrt(2) + sigma * math.sqrt(2 * ln)


def mn_level(n, sigma=1.5, constant=1.0):
    """M_n = C exp((3 sigma + 1) sqrt(ln n))."""
    return constant * math.exp((3 * sigma + 1) * math.sqrt(math.log(n)))


def _window_index(x, n):
    return np.minimum(np.floor(np.asarray(x) * n).astype(np.int64), n - 1)


def detector_on_grid(obs, config, grid=None):
    """Boolean detector state at each grid point, read from the window containing it."""
    if config.beta is None:
        raise ConfigurationError("the log-link estimator is not adaptive: beta is required")
    g = _grid(config, grid)
    z = zn_process(obs)
    on = z >= detector_threshold(obs.n, config.beta, config.sigma)
    return on[_window_index(g, obs.n)]


def gaussvar_estimate(obs, config, grid=None):
    """exp(sqrt 2 * h_hat(x)) where the detector fires, 0 elsewhere."""
    if obs.link.kind is not LinkKind.GAUSSVAR:
        raise PreconditionError("gaussvar_estimate needs an observation under the log link")
    g = _grid(config, grid)
    on = detector_on_grid(obs, config, g)
    fhat = obs.link.invert(estimate_h(obs, config, g))
    return np.where(on, fhat, 0.0)
