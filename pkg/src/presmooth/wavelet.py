"""Periodized orthonormal wavelet bases on [0, 1].

Haar and Daubechies-S (S vanishing moments) filters come from PyWavelets.
Everything else lives here: the periodic pyramid, exact point values of the
scaling function on dyadic grids, and a product-integration rule for
inner products against the scaling function.

Conventions
-----------
``phi(x) = sqrt(2) * sum_k h[k] phi(2x - k)`` with ``h = pywt.Wavelet(...).rec_lo``,
so ``phi`` is supported on ``[0, 2S-1]``.  The mother wavelet is
``psi(x) = sqrt(2) * sum_l g[l] phi(2x - l)`` with ``g[l] = (-1)**l h[2S-1-l]``.
For Haar this gives ``psi = 1`` on ``[0, 1/2)`` and ``-1`` on ``[1/2, 1)``.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
import pywt

from .errors import ConfigurationError, InputError, IntegrabilityError

__all__ = [
    "WaveletBasis",
    "CoefficientTree",
    "analyze",
    "synthesize",
    "coeff_exact",
    "clean_tree",
    "decay_profile",
    "fine_scaling_coefficients",
    "basis_function",
    "level_square_sum",
    "interior_indices",
    "exact_gram",
    "sampled_gram",
]

HAAR = "haar"
DAUBECHIES = "daubechies"


@dataclass(frozen=True)
class WaveletBasis:
    """A periodized wavelet basis.

    Parameters
    ----------
    family : {"haar", "daubechies"}
    S : int
        Number of vanishing moments.  Haar is S = 1.
    jmax : int
        Finest wavelet level.
    j0 : int, optional
        Coarse level.  Defaults to 0 for Haar and ceil(log2(2S)) otherwise.
    """

    family: str = DAUBECHIES
    S: int = 4
    jmax: int = 10
    j0: int | None = None

    def __post_init__(self):
        family = self.family.lower()
        if family not in (HAAR, DAUBECHIES):
            raise ConfigurationError(f"unknown wavelet family {self.family!r}")
        object.__setattr__(self, "family", family)
        if family == HAAR:
            if self.S != 1:
                object.__setattr__(self, "S", 1)
        elif not 1 <= self.S <= 20:
            raise ConfigurationError(f"Daubechies order must be in 1..20, got {self.S}")
        if self.j0 is None:
            j0 = 0 if self.S == 1 else math.ceil(math.log2(2 * self.S))
            object.__setattr__(self, "j0", j0)
        if self.j0 < 0:
            raise ConfigurationError("coarse level must be >= 0")
        if self.jmax <= self.j0:
            raise ConfigurationError(f"jmax={self.jmax} must exceed j0={self.j0}")

    @classmethod
    def haar(cls, jmax=10):
        return cls(HAAR, 1, jmax)

    @classmethod
    def daubechies(cls, S, jmax=10, j0=None):
        return cls(DAUBECHIES, S, jmax, j0)

    @classmethod
    def parse(cls, text, jmax=10):
        """Parse ``"haar"``, ``"db4"`` or ``"daubechies4"``."""
        t = text.strip().lower()
        if t == HAAR:
            return cls.haar(jmax)
        for prefix in ("daubechies", "db"):
            if t.startswith(prefix) and t[len(prefix):].isdigit():
                return cls.daubechies(int(t[len(prefix):]), jmax)
        raise ConfigurationError(f"cannot parse wavelet basis {text!r}")

    def with_jmax(self, jmax):
        return dataclasses.replace(self, jmax=jmax)

    @property
    def name(self):
        return HAAR if self.family == HAAR else f"db{self.S}"

    @property
    def support_length(self):
        return 2 * self.S - 1

    @property
    def lowpass(self):
        return _filters(self.S)[0]

    @property
    def highpass(self):
        return _filters(self.S)[1]


@dataclass(frozen=True, eq=False)
class CoefficientTree:
    """Wavelet coefficients from the coarse scaling level up to level ``J``.

    ``scaling`` holds the 2**j0 scaling coefficients, ``details[i]`` the
    2**(j0+i) wavelet coefficients at level j0 + i.  Arrays are read-only.
    """

    j0: int
    scaling: np.ndarray
    details: tuple
    kind: str = "clean"
    threshold: float | None = None

    def __post_init__(self):
        if self.kind not in ("clean", "noisy", "thresholded"):
            raise ConfigurationError(f"unknown tree kind {self.kind!r}")
        scaling = np.array(self.scaling, dtype=float)
        if scaling.shape != (2**self.j0,):
            raise ConfigurationError("scaling array length must be 2**j0")
        details = []
        for i, d in enumerate(self.details):
            d = np.array(d, dtype=float)
            if d.shape != (2 ** (self.j0 + i),):
                raise ConfigurationError(f"level {self.j0 + i} must hold {2 ** (self.j0 + i)} entries")
            d.flags.writeable = False
            details.append(d)
        scaling.flags.writeable = False
        object.__setattr__(self, "scaling", scaling)
        object.__setattr__(self, "details", tuple(details))

    @property
    def J(self):
        return self.j0 + len(self.details) - 1

    def level(self, j):
        if not self.j0 <= j <= self.J:
            raise ConfigurationError(f"level {j} outside {self.j0}..{self.J}")
        return self.details[j - self.j0]

    def flat(self):
        """All coefficients as one vector: scaling first, then levels in order."""
        return np.concatenate([self.scaling, *self.details])

    def with_values(self, flat, kind=None, threshold=None):
        flat = np.asarray(flat, dtype=float)
        if flat.size != 2 ** (self.J + 1):
            raise ConfigurationError("flat vector has the wrong length")
        n0 = 2**self.j0
        details = []
        pos = n0
        for j in range(self.j0, self.J + 1):
            details.append(flat[pos:pos + 2**j])
            pos += 2**j
        return CoefficientTree(self.j0, flat[:n0], tuple(details),
                               kind or self.kind, threshold)

    def truncate(self, J):
        if J > self.J:
            raise ConfigurationError(f"cannot truncate level {self.J} tree to {J}")
        return CoefficientTree(self.j0, self.scaling, self.details[:J - self.j0 + 1],
                               self.kind, self.threshold)

    @classmethod
    def zeros(cls, j0, J, kind="clean"):
        return cls(j0, np.zeros(2**j0), tuple(np.zeros(2**j) for j in range(j0, J + 1)), kind)


# ---------------------------------------------------------------- filters


@functools.lru_cache(maxsize=None)
def _filters(S):
    h = np.array(pywt.Wavelet(f"db{S}").rec_lo, dtype=float)
    L = h.size
    g = np.array([(-1) ** l * h[L - 1 - l] for l in range(L)])
    h.flags.writeable = False
    g.flags.writeable = False
    return h, g


def _analysis_step(c, h, g):
    """One periodic pyramid step: level j+1 scaling -> level j scaling, detail."""
    N = c.size
    idx = (2 * np.arange(N // 2)[:, None] + np.arange(h.size)[None, :]) % N
    block = c[idx]
    return block @ h, block @ g


def _synthesis_step(a, d, h, g):
    N = 2 * a.size
    out = np.zeros(N)
    base = 2 * np.arange(a.size)
    for l in range(h.size):
        out[(base + l) % N] += h[l] * a + g[l] * d
    return out


def _pyramid_down(c_fine, L, j0, S):
    h, g = _filters(S)
    details = []
    c = np.asarray(c_fine, dtype=float)
    for _ in range(L - 1, j0 - 1, -1):
        c, d = _analysis_step(c, h, g)
        details.append(d)
    return c, details[::-1]


def _pyramid_up(tree, S):
    h, g = _filters(S)
    c = np.asarray(tree.scaling, dtype=float)
    for d in tree.details:
        c = _synthesis_step(c, d, h, g)
    return c


# ------------------------------------------------- point values of phi


@functools.lru_cache(maxsize=None)
def _phi_table(S, R):
    """phi at t = i / 2**R, i = 0 .. (2S-1) 2**R, exact up to rounding."""
    if S == 1:
        vals = np.zeros(2**R + 1)
        vals[:-1] = 1.0
        vals.flags.writeable = False
        return vals
    h, _ = _filters(S)
    N = 2 * S - 1
    # integer values: phi(m) = sqrt2 sum_k h[k] phi(2m - k), m = 0..N
    A = np.zeros((N + 1, N + 1))
    for m in range(N + 1):
        for p in range(N + 1):
            k = 2 * m - p
            if 0 <= k < h.size:
                A[m, p] = math.sqrt(2) * h[k]
    w, V = np.linalg.eig(A)
    v = np.real(V[:, np.argmin(np.abs(w - 1))])
    v /= v.sum()
    vals = v
    for r in range(1, R + 1):
        new = np.zeros(N * 2**r + 1)
        new[::2] = vals
        odd = np.arange(1, new.size, 2)
        # phi(i/2^r) = sqrt2 sum_k h_k phi(i/2^{r-1} - k); fine index i - k 2^{r-1}
        acc = np.zeros(odd.size)
        step = 2 ** (r - 1)
        for k in range(h.size):
            # phi(i/2^r) = sqrt2 sum_k h_k phi(i/2^(r-1) - k), read from the coarser table
            src = odd - k * step
            ok = (src >= 0) & (src < vals.size)
            acc[ok] += math.sqrt(2) * h[k] * vals[src[ok]]
        new[odd] = acc
        vals = new
    vals.flags.writeable = False
    return vals


@functools.lru_cache(maxsize=None)
def _psi_table(S, R):
    """psi at t = i / 2**R, i = 0 .. (2S-1) 2**R."""
    _, g = _filters(S)
    phi = _phi_table(S, R)
    N = 2 * S - 1
    twice = 2 * np.arange(N * 2**R + 1)  # index of 2t in the same table
    out = np.zeros(twice.size)
    for l in range(g.size):
        src = twice - l * 2**R
        ok = (src >= 0) & (src < phi.size)
        out[ok] += math.sqrt(2) * g[l] * phi[src[ok]]
    out.flags.writeable = False
    return out


def _table(S, R, kind):
    return _phi_table(S, R) if kind == "scaling" else _psi_table(S, R)


def _expand_on_dyadic(coeffs, j, S, M, kind="scaling"):
    """Values of sum_k a_k theta_{j,k} at x_i = i / 2**M, i = 0 .. 2**M - 1 (periodic)."""
    coeffs = np.asarray(coeffs, dtype=float)
    P = 2**j
    N = 2 * S - 1
    if M >= j:
        R = M - j
        tab = _table(S, R, kind)
        out = np.zeros((P, 2**R))
        for m in range(N):
            seg = tab[m * 2**R: (m + 1) * 2**R]
            out += np.roll(coeffs, m)[:, None] * seg[None, :]
        return 2 ** (j / 2) * out.ravel()
    fine = _expand_on_dyadic(coeffs, j, S, j, kind)
    return fine[:: 2 ** (j - M)]


# -------------------------------------------------- product integration


@functools.lru_cache(maxsize=None)
def _cell_rule(S, nq):
    """Nodes t_i on [0, 1] and weights w[m, i] with
    sum_i w[m, i] G(t_i) ~= int_0^1 phi(t + m) G(t) dt, exact for polynomial G of degree < nq.
    """
    x, wgl = np.polynomial.legendre.leggauss(nq)
    t = (x + 1) / 2
    if S == 1:
        w = (wgl / 2)[None, :]
        return t, w
    mpmath.mp.dps = 50
    moments = _cell_moments(S, nq)  # (nq, N) mp matrix rows p, columns m
    N = 2 * S - 1
    tm = [mpmath.mpf(float(ti)) for ti in t]
    V = mpmath.matrix(nq, nq)
    for p in range(nq):
        for i in range(nq):
            V[p, i] = tm[i] ** p
    weights = np.zeros((N, nq))
    for m in range(N):
        rhs = mpmath.matrix([moments[p][m] for p in range(nq)])
        sol = mpmath.lu_solve(V, rhs)
        weights[m] = [float(s) for s in sol]
    return t, weights


@functools.lru_cache(maxsize=None)
def _precise_filter(S, dps=50):
    """The Daubechies lowpass filter polished to ``dps`` digits.

    Newton iteration on the orthonormality and vanishing-moment equations,
    started from the double-precision PyWavelets filter.
    """
    with mpmath.workdps(dps):
        start = [mpmath.mpf(float(v)) for v in _filters(S)[0]]
        size = 2 * S

        def equations(*h):
            eqs = []
            for m in range(S):
                eqs.append(sum(h[k] * h[k + 2 * m] for k in range(size - 2 * m)) - (1 if m == 0 else 0))
            for q in range(S):
                eqs.append(sum((-1) ** k * mpmath.mpf(k) ** q * h[k] for k in range(size)))
            return eqs

        sol = mpmath.findroot(equations, start, tol=mpmath.mpf(10) ** (-2 * dps + 10))
        return [sol[i] for i in range(size)]


def _cell_moments(S, P):
    """mu[p][m] = int_0^1 t**p phi(t + m) dt for p < P, in mpmath precision."""
    h = _precise_filter(S)
    c = [mpmath.sqrt(2) * v for v in h]
    N = 2 * S - 1
    # global moments M_p = int x^p phi(x) dx
    glob = [mpmath.mpf(1)]
    for p in range(1, P):
        s = mpmath.mpf(0)
        for k, ck in enumerate(c):
            for i in range(p):
                s += ck * mpmath.binomial(p, i) * mpmath.mpf(k) ** (p - i) * glob[i]
        glob.append(s / (2 ** (p + 1)) / (1 - mpmath.mpf(2) ** (-p)))
    T0 = mpmath.matrix(N, N)
    T1 = mpmath.matrix(N, N)
    for m in range(N):
        for q in range(N):
            k0 = 2 * m - q
            k1 = 2 * m + 1 - q
            if 0 <= k0 < len(c):
                T0[m, q] = c[k0]
            if 0 <= k1 < len(c):
                T1[m, q] = c[k1]
    mu = []
    for p in range(P):
        scale = mpmath.mpf(2) ** (-p - 1)
        A = mpmath.matrix(N + 1, N)
        b = mpmath.matrix(N + 1, 1)
        rhs = mpmath.matrix(N, 1)
        for i in range(p):
            rhs += mpmath.binomial(p, i) * mpmath.matrix(mu[i])
        rhs = scale * (T1 * rhs)
        for m in range(N):
            for q in range(N):
                A[m, q] = (1 if m == q else 0) - scale * (T0[m, q] + T1[m, q])
            b[m] = rhs[m]
        # int x^p phi = sum_m int_0^1 (t+m)^p phi(t+m) dt pins down the null direction
        known = mpmath.mpf(0)
        for m in range(N):
            A[N, m] = 1
            for i in range(p):
                known += mpmath.binomial(p, i) * mpmath.mpf(m) ** (p - i) * mu[i][m]
        b[N] = glob[p] - known
        if p == 0:
            sol, _ = mpmath.qr_solve(A, b)
        else:
            # nonsingular for p >= 1; the extra row is then a consistency check
            sol = mpmath.lu_solve(A[:N, :N], b[:N])
        mu.append([sol[m] for m in range(N)])
    return mu


def _check_finite(values, xs, what="integrand"):
    bad = ~np.isfinite(values)
    if np.any(bad):
        loc = float(np.ravel(xs)[np.argmax(np.ravel(bad))])
        raise IntegrabilityError(f"{what} is not finite at x = {loc:.6g}", location=loc)


def fine_scaling_coefficients(func: Callable, L: int, S: int, nq: int = 16, cells=None):
    """Inner products <func, phi_{L,l}> of the periodized scaling functions.

    ``func`` must accept a numpy array of points in [0, 1).  With ``cells``
    (an index array of level-L cells) only those cells are evaluated and the
    result covers indices ``cells[0] - (2S-2) .. cells[-1]`` instead.
    """
    t, w = _cell_rule(S, nq)
    P = 2**L
    if cells is None:
        cells = np.arange(P)
    xs = ((cells[:, None] + t[None, :]) / P) % 1.0
    G = np.asarray(func(xs), dtype=float)
    _check_finite(G, xs)
    N = w.shape[0]
    cellsum = G @ w.T  # (ncells, N)
    if cells.size == P:
        out = np.zeros(P)
        for m in range(N):
            # phi_{L,l} sees cell l + m through its m-th unit piece
            out += np.roll(cellsum[:, m], -m)
        return out * 2 ** (-L / 2)
    count = cells.size + N - 1
    out = np.zeros(count)
    for m in range(N):
        out[N - 1 - m: N - 1 - m + cells.size] += cellsum[:, m]
    return out * 2 ** (-L / 2)


def clean_tree(func: Callable, basis: WaveletBasis, J: int | None = None,
               refine: int = 1, nq: int = 16) -> CoefficientTree:
    """Exact-quadrature coefficient tree of ``func`` up to level ``J``.

    Scaling coefficients are computed at level J + 1 + refine and pushed
    down the periodic pyramid.
    """
    J = basis.jmax if J is None else J
    L = J + 1 + refine
    c = fine_scaling_coefficients(func, L, basis.S, nq)
    scaling, details = _pyramid_down(c, L, basis.j0, basis.S)
    return CoefficientTree(basis.j0, scaling, tuple(details[: J - basis.j0 + 1]), "clean")


def _filter_expansion(j, L, S, kind):
    """Coefficients of theta_{j,0} in the level-L scaling basis (non-periodic)."""
    h, g = _filters(S)
    if kind == "wavelet":
        a, steps = g.copy(), L - j - 1
    else:
        a, steps = np.ones(1), L - j
    for _ in range(steps):
        up = np.zeros(2 * a.size - 1)
        up[::2] = a
        a = np.convolve(up, h)
    return a


def coeff_exact(g: Callable, j: int, k: int, basis: WaveletBasis, quad_order: int = 16,
                kind: str = "wavelet", refine: int = 4) -> float:
    """High-accuracy ``<g, psi_{j,k}>`` (or ``<g, phi_{j,k}>`` with kind="scaling").

    The basis function is expanded exactly in scaling functions at level
    j + 1 + refine; each of those inner products uses a Gauss-Legendre based
    product rule with ``quad_order`` nodes per dyadic cell.
    """
    if quad_order < 8:
        raise ConfigurationError("quad_order must be at least 8")
    if kind not in ("wavelet", "scaling"):
        raise ConfigurationError(f"unknown coefficient kind {kind!r}")
    L = j + 1 + refine
    S = basis.S
    a = _filter_expansion(j, L, S, kind)
    first = k * 2 ** (L - j)
    N = 2 * S - 1
    cells = first + np.arange(a.size + N - 1)
    vals = fine_scaling_coefficients(g, L, S, quad_order, cells)
    # vals[i] is <g, phi_{L, cells[0] - (N-1) + i}>; we need indices first .. first + len(a) - 1
    return float(a @ vals[N - 1: N - 1 + a.size])


# ------------------------------------------------------------ transforms


def _dyadic_exponent(npoints):
    for size in (npoints, npoints - 1):
        if size >= 1 and size & (size - 1) == 0:
            return int(round(math.log2(size))), size
    raise ConfigurationError(f"grid with {npoints} points is not dyadic")


def analyze(samples, basis: WaveletBasis) -> CoefficientTree:
    """Wavelet tree of a function given by samples on a dyadic grid.

    ``samples`` holds values at ``i / 2**M`` for ``i = 0 .. 2**M - 1`` (an
    optional trailing value at x = 1 is ignored).  The result is the
    least-squares fit in the level ``jmax + 1`` scaling space, so any function
    in the span of the basis is recovered exactly.
    """
    s = np.asarray(samples, dtype=float)
    if s.ndim != 1:
        raise InputError("samples must be one-dimensional")
    if not np.all(np.isfinite(s)):
        raise InputError("samples contain NaN or infinite values")
    M, size = _dyadic_exponent(s.size)
    s = s[:size]
    L = basis.jmax + 1
    if M < basis.jmax + 3:
        raise ConfigurationError(f"grid 2^{M} too coarse for jmax={basis.jmax}; need 2^{basis.jmax + 3}")
    R = 2 ** (M - L)
    P = 2**L
    tab = _phi_table(basis.S, M - L)
    N = 2 * basis.S - 1
    num = np.zeros(P, dtype=complex)
    den = np.zeros(P)
    poly = s.reshape(P, R)
    for r in range(R):
        ar = np.zeros(P)
        for m in range(N):
            idx = m * R + r
            if idx < tab.size:
                ar[m % P] += 2 ** (L / 2) * tab[idx]
        A = np.fft.fft(ar)
        num += np.conj(A) * np.fft.fft(poly[:, r])
        den += np.abs(A) ** 2
    c = np.real(np.fft.ifft(num / den))
    scaling, details = _pyramid_down(c, L, basis.j0, basis.S)
    return CoefficientTree(basis.j0, scaling, tuple(details), "clean")


def _grid_resolution(grid):
    x = np.asarray(grid, dtype=float)
    for M in range(0, 31):
        scaled = x * 2**M
        if np.all(np.abs(scaled - np.round(scaled)) <= 1e-9 * max(1, 2**M)):
            return M
    return None


def synthesize(tree: CoefficientTree, basis: WaveletBasis, grid) -> np.ndarray:
    """Evaluate ``sum scaling*phi + sum d*psi`` at the points of ``grid``.

    Dyadic grids are evaluated exactly.  Other points use linear
    interpolation on a dyadic table six levels finer than the tree.
    """
    if tree.j0 != basis.j0 or tree.J > basis.jmax:
        raise ConfigurationError(
            f"tree levels {tree.j0}..{tree.J} do not fit basis levels {basis.j0}..{basis.jmax}")
    x = np.asarray(grid, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ConfigurationError("grid points must lie in [0, 1]")
    L = tree.J + 1
    c = _pyramid_up(tree, basis.S)
    M = _grid_resolution(x)
    if M is not None and M <= max(L + 10, 22):
        Mt = max(M, 0)
        vals = _expand_on_dyadic(c, L, basis.S, Mt)
        idx = np.round(x * 2**Mt).astype(np.int64) % 2**Mt
        return vals[idx]
    Mt = L + 6
    vals = _expand_on_dyadic(c, L, basis.S, Mt)
    vals = np.append(vals, vals[0])
    return np.interp(x, np.linspace(0, 1, 2**Mt + 1), vals)


def basis_function(basis: WaveletBasis, j: int, k: int, grid, kind: str = "wavelet"):
    """Values of the periodized psi_{j,k} (or phi_{j,k}) on ``grid``."""
    if kind == "scaling":
        tree = CoefficientTree.zeros(basis.j0, j if j >= basis.j0 else basis.j0)
        if j != basis.j0:
            raise ConfigurationError("scaling functions live at the coarse level only")
        flat = tree.flat()
        flat[k] = 1.0
    else:
        tree = CoefficientTree.zeros(basis.j0, j)
        flat = tree.flat()
        flat[2**j + k] = 1.0
    return synthesize(tree.with_values(flat), basis, grid)


def level_square_sum(weights, j, basis: WaveletBasis, M: int, kind: str = "wavelet"):
    """``sum_k weights[k] * theta_{j,k}(x)**2`` on the dyadic grid i / 2**M (periodic, 2**M values)."""
    w = np.asarray(weights, dtype=float)
    S = basis.S
    if M < j:
        raise ConfigurationError("grid coarser than the level")
    R = M - j
    tab = _table(S, R, "scaling" if kind == "scaling" else "wavelet") ** 2
    N = 2 * S - 1
    out = np.zeros((2**j, 2**R))
    for m in range(N):
        seg = tab[m * 2**R: (m + 1) * 2**R]
        out += np.roll(w, m)[:, None] * seg[None, :]
    return 2.0**j * out.ravel()


def interior_indices(basis: WaveletBasis, j: int):
    """Wavelet indices at level j whose support does not wrap around x = 1."""
    return np.arange(0, max(0, 2**j - basis.support_length + 1))


def decay_profile(tree: CoefficientTree, basis: WaveletBasis | None = None) -> np.ndarray:
    """m_j = max_k |d_{j,k}| for j = j0..J.

    With ``basis`` given, only interior (non-wrapping) wavelets count.
    """
    out = []
    for j in range(tree.j0, tree.J + 1):
        d = tree.level(j)
        if basis is not None:
            d = d[interior_indices(basis, j)]
        out.append(float(np.max(np.abs(d))) if d.size else 0.0)
    return np.array(out)


# ------------------------------------------------------------ Gram checks


def _all_basis_vectors(basis: WaveletBasis, M: int):
    rows = []
    J = basis.jmax
    size = 2 ** (J + 1)
    zero = CoefficientTree.zeros(basis.j0, J)
    for i in range(size):
        flat = np.zeros(size)
        flat[i] = 1.0
        rows.append(_expand_on_dyadic(_pyramid_up(zero.with_values(flat), basis.S), J + 1, basis.S, M))
    return np.array(rows)


def sampled_gram(basis: WaveletBasis, q: int = 3) -> np.ndarray:
    """Riemann-sum Gram matrix of all basis functions on 2**(jmax+q) points."""
    M = basis.jmax + q
    V = _all_basis_vectors(basis, M)
    return V @ V.T / 2**M


@functools.lru_cache(maxsize=None)
def _phi_autocorrelation(S):
    """a[m] = int phi(x) phi(x - m) dx for |m| <= 2S-2, from the transition operator."""
    h, _ = _filters(S)
    N = 2 * S - 2
    c = np.convolve(h, h[::-1])  # autocorrelation of the filter, length 4S-1, centre 2S-1
    size = 2 * N + 1
    T = np.zeros((size, size))
    for i, m in enumerate(range(-N, N + 1)):
        for jj, p in enumerate(range(-N, N + 1)):
            k = 2 * m - p + (c.size // 2)
            if 0 <= k < c.size:
                T[i, jj] = c[k]
    w, V = np.linalg.eig(T)
    v = np.real(V[:, np.argmin(np.abs(w - 1))])
    v /= v.sum()  # sum_m a[m] = (int phi)^2 = 1
    return v


def exact_gram(basis: WaveletBasis) -> np.ndarray:
    """Gram matrix of the periodized basis computed from scaling-function autocorrelations.

    Expands each basis function in level jmax + 1 scaling functions and uses
    the integer-shift autocorrelation of phi, which is obtained independently
    of the orthogonality of the filter (as an eigenvector of the transition
    operator).
    """
    J = basis.jmax
    P = 2 ** (J + 1)
    size = P
    zero = CoefficientTree.zeros(basis.j0, J)
    W = np.zeros((size, P))
    for i in range(size):
        flat = np.zeros(size)
        flat[i] = 1.0
        W[i] = _pyramid_up(zero.with_values(flat), basis.S)
    a = _phi_autocorrelation(basis.S)
    Nn = (a.size - 1) // 2
    col = np.zeros(P)
    for i, m in enumerate(range(-Nn, Nn + 1)):
        col[m % P] += a[i]
    Phi = np.array([np.roll(col, s) for s in range(P)])
    return W @ Phi @ W.T
