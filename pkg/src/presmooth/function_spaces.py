"""Test functions with exact derivatives, flat Hölder seminorms, and the mollifier.

Descriptors are small immutable objects.  Calling one evaluates it; every
closed-form variant also knows its derivatives up to order 10, the points
where it stops being smooth (``breakpoints``) and where it or its first
derivative vanishes (``critical_points``).  Norm computations sample those
points on purpose, because zeros dominate the flatness ratio.

Throughout, ``floor_strict(beta)`` is the largest integer strictly below
beta, so beta = 2 has one classical derivative plus a Lipschitz part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize

from .errors import CapabilityError, ConfigurationError, DomainError, PreconditionError

__all__ = [
    "FunctionDescriptor", "Constant", "Linear", "Polynomial1D", "PowerBump",
    "MollifierBump", "Sinusoid", "SquaredTrig", "Exponential", "Sum", "GridFunction",
    "SpaceNormReport", "evaluate", "derivative", "flat_seminorm", "c_beta_norm",
    "hb_norm", "space_norm", "mollifier_K0", "mollifier_derivative",
    "mollifier_ratio_bound", "local_fluctuation_check", "fluctuation_constant",
    "floor_strict", "norm_grid", "parse_descriptor", "builtin_descriptors",
    "INFINITE_RATIO",
]

MAX_ORDER = 10
INFINITE_RATIO = 1e12


def floor_strict(beta):
    """Largest integer strictly smaller than ``beta``."""
    f = math.floor(beta)
    return f - 1 if f == beta else f


# ------------------------------------------------------------- mollifier


@lru_cache(maxsize=None)
def _mollifier_polys(order):
    """p_j with K0^{(j)}(x) = p_j(x) (1 - x^2)^{-2j} K0(x)."""
    x = Polynomial([0, 1])
    u = Polynomial([1, 0, -1])
    polys = [Polynomial([1.0])]
    for j in range(order):
        p = polys[-1]
        polys.append(p.deriv() * u**2 + 4 * j * x * u * p - 2 * x * p)
    return tuple(polys)


def mollifier_K0(x):
    """exp(-1/(1-x^2)) on (-1, 1), zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out if out.ndim else float(out)


def _mollifier_log_abs(x, order):
    """log |K0^{(order)}(x)|, -inf outside the support or at zeros of p_j."""
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    inside = np.abs(x) < 1
    xi = x[inside]
    u = 1.0 - xi**2
    p = np.abs(_mollifier_polys(order)[order](xi))
    with np.errstate(divide="ignore"):
        out[inside] = np.log(p) - 2 * order * np.log(u) - 1.0 / u
    return out


def mollifier_derivative(x, order):
    """K0^{(order)}(x) by the exact polynomial recurrence, evaluated in log space."""
    if order > MAX_ORDER:
        raise CapabilityError(f"mollifier derivatives available up to order {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    sign = np.sign(_mollifier_polys(order)[order](x[inside]))
    out[inside] = sign * np.exp(_mollifier_log_abs(x[inside], order))
    return out if out.ndim else float(out)


def mollifier_ratio_bound(beta, grid=10_000):
    """sup over the grid and 1 <= j <= floor(beta) of |K0^{(j)}| / K0^{(beta-j)/beta}."""
    x = np.linspace(-1, 1, grid + 1)[1:-1] if np.isscalar(grid) else np.asarray(grid)
    x = x[np.abs(x) < 1]
    best = 0.0
    for j in range(1, max(1, floor_strict(beta)) + 1):
        logk = -1.0 / (1.0 - x**2)
        val = _mollifier_log_abs(x, j) - (beta - j) / beta * logk
        best = max(best, float(np.exp(np.max(val))))
    return best


# ---------------------------------------------------------- descriptors


class FunctionDescriptor:
    """Base class.  Subclasses implement ``_eval(x, order)`` on numpy arrays."""

    max_order = MAX_ORDER

    def __call__(self, x):
        return self.derivative(x, 0)

    def evaluate(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, order=0):
        if order < 0:
            raise ConfigurationError("derivative order must be >= 0")
        if order > self.max_order:
            raise CapabilityError(
                f"{type(self).__name__} supports derivatives up to order {self.max_order}")
        arr = np.asarray(x, dtype=float)
        out = self._eval(np.atleast_1d(arr), order)
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    def log_abs_derivative(self, x, order):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.derivative(np.asarray(x, dtype=float), order)))

    def breakpoints(self):
        return ()

    def critical_points(self):
        return ()

    def antiderivative(self):
        """Closed-form antiderivative vanishing at 0, or None."""
        return None

    def spec(self):
        raise CapabilityError(f"{type(self).__name__} has no text form")

    def __add__(self, other):
        return Sum((self, other), (1.0, 1.0))

    def scaled(self, factor):
        return Sum((self,), (float(factor),))


def _fmt(v):
    return repr(float(v))


@dataclass(frozen=True)
class Constant(FunctionDescriptor):
    c: float

    def _eval(self, x, order):
        return np.full(x.shape, float(self.c) if order == 0 else 0.0)

    def critical_points(self):
        return ()

    def antiderivative(self):
        return Polynomial1D((0.0, float(self.c)))

    def spec(self):
        return f"constant:c={_fmt(self.c)}"


@dataclass(frozen=True)
class Linear(FunctionDescriptor):
    """a*x + b."""

    a: float
    b: float = 0.0

    def _eval(self, x, order):
        if order == 0:
            return self.a * x + self.b
        return np.full(x.shape, float(self.a) if order == 1 else 0.0)

    def critical_points(self):
        if self.a != 0 and 0 <= -self.b / self.a <= 1:
            return (-self.b / self.a,)
        return ()

    def antiderivative(self):
        return Polynomial1D((0.0, float(self.b), self.a / 2.0))

    def spec(self):
        return f"linear:a={_fmt(self.a)},b={_fmt(self.b)}"


@dataclass(frozen=True)
class Polynomial1D(FunctionDescriptor):
    """sum_i coeffs[i] x^i."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def _eval(self, x, order):
        return Polynomial(self.coeffs).deriv(order)(x) if order else Polynomial(self.coeffs)(x)

    def critical_points(self):
        pts = []
        p = Polynomial(self.coeffs)
        for q in (p, p.deriv()):
            if q.degree() >= 1:
                for r in q.roots():
                    if abs(r.imag) < 1e-12 and 0 <= r.real <= 1:
                        pts.append(float(r.real))
        return tuple(sorted(pts))

    def antiderivative(self):
        return Polynomial1D(tuple(Polynomial(self.coeffs).integ().coef))

    def spec(self):
        return "polynomial:coeffs=" + ";".join(_fmt(c) for c in self.coeffs)


@dataclass(frozen=True)
class PowerBump(FunctionDescriptor):
    """|x - x0|^beta * g(x) with g a smooth descriptor (default g = 1)."""

    x0: float
    beta: float
    g: FunctionDescriptor = field(default_factory=lambda: Constant(1.0))

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigurationError("PowerBump exponent must be positive")

    @property
    def _even_integer(self):
        return float(self.beta).is_integer() and int(self.beta) % 2 == 0

    def _power_derivative(self, x, order):
        t = x - self.x0
        coef = 1.0
        for i in range(order):
            coef *= self.beta - i
        if coef == 0.0:
            return np.zeros_like(x)
        if self._even_integer:
            # factored form; expanding the polynomial cancels badly near x0
            return coef * t ** int(self.beta - order)
        at = np.abs(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            mag = at ** (self.beta - order)
        sign = np.sign(t) ** order if order else np.ones_like(t)
        with np.errstate(invalid="ignore"):
            out = coef * mag * sign
        out = np.where(np.isnan(out), np.inf, out)
        # exponent exactly zero: the derivative jumps at x0; take the average there
        if self.beta - order == 0:
            out = np.where(t == 0, 0.0 if order % 2 else coef, out)
        return out

    def _eval(self, x, order):
        total = np.zeros_like(x)
        for i in range(order + 1):
            gi = self.g.derivative(x, order - i)
            if np.all(gi == 0):
                continue
            total = total + math.comb(order, i) * self._power_derivative(x, i) * gi
        return total

    def breakpoints(self):
        return () if self._even_integer else (float(self.x0),)

    def critical_points(self):
        return (float(self.x0), *self.g.critical_points())

    def spec(self):
        text = f"powerbump:x0={_fmt(self.x0)},beta={_fmt(self.beta)}"
        if self.g != Constant(1.0):
            if isinstance(self.g, Linear):
                text += f",gconst={_fmt(self.g.b)},gslope={_fmt(self.g.a)}"
            elif isinstance(self.g, Constant):
                text += f",gconst={_fmt(self.g.c)}"
            else:
                raise CapabilityError("only constant or linear g factors have a text form")
        return text


@dataclass(frozen=True)
class MollifierBump(FunctionDescriptor):
    """amplitude * K0((x - center) / bandwidth)."""

    center: float
    bandwidth: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ConfigurationError("bandwidth must be positive")

    def _eval(self, x, order):
        z = (x - self.center) / self.bandwidth
        scale = self.amplitude / self.bandwidth**order
        return scale * np.atleast_1d(mollifier_derivative(z, order))

    def log_abs_derivative(self, x, order):
        z = (np.asarray(x, dtype=float) - self.center) / self.bandwidth
        with np.errstate(divide="ignore"):
            return (np.log(abs(self.amplitude)) - order * np.log(self.bandwidth)
                    + _mollifier_log_abs(z, order))

    def breakpoints(self):
        return tuple(p for p in (self.center - self.bandwidth, self.center + self.bandwidth))

    def critical_points(self):
        return (self.center - self.bandwidth, float(self.center), self.center + self.bandwidth)

    def spec(self):
        return (f"mollifier:center={_fmt(self.center)},h={_fmt(self.bandwidth)},"
                f"A={_fmt(self.amplitude)}")


@dataclass(frozen=True)
class Sinusoid(FunctionDescriptor):
    """offset + amplitude * sin(2 pi freq x + phase)."""

    offset: float
    amplitude: float
    freq: float = 1.0
    phase: float = 0.0

    def _eval(self, x, order):
        w = 2 * math.pi * self.freq
        out = self.amplitude * w**order * np.sin(w * x + self.phase + order * math.pi / 2)
        return out + self.offset if order == 0 else out

    def critical_points(self):
        if self.freq == 0 or self.amplitude == 0:
            return ()
        w = 2 * math.pi * self.freq
        thetas = []
        lo, hi = sorted((self.phase, w + self.phase))
        # zeros of the derivative: theta = pi/2 + k pi
        k = math.ceil((lo - math.pi / 2) / math.pi)
        while math.pi / 2 + k * math.pi <= hi:
            thetas.append(math.pi / 2 + k * math.pi)
            k += 1
        ratio = -self.offset / self.amplitude
        if abs(ratio) <= 1:
            base = math.asin(ratio)
            for root in (base, math.pi - base):
                k = math.ceil((lo - root) / (2 * math.pi))
                while root + 2 * math.pi * k <= hi:
                    thetas.append(root + 2 * math.pi * k)
                    k += 1
        pts = sorted((t - self.phase) / w for t in thetas)
        return tuple(p for p in pts if 0 <= p <= 1)

    def antiderivative(self):
        if self.freq == 0:
            return Polynomial1D((0.0, self.offset + self.amplitude * math.sin(self.phase)))
        w = 2 * math.pi * self.freq
        a = self.amplitude / w
        # -a cos(wx + phase) + a cos(phase) = a sin(wx + phase - pi/2) + a cos(phase)
        return Sum((Polynomial1D((a * math.cos(self.phase), self.offset)),
                    Sinusoid(0.0, a, self.freq, self.phase - math.pi / 2)), (1.0, 1.0))

    def spec(self):
        return (f"sinusoid:offset={_fmt(self.offset)},amplitude={_fmt(self.amplitude)},"
                f"freq={_fmt(self.freq)},phase={_fmt(self.phase)}")


@dataclass(frozen=True)
class SquaredTrig(FunctionDescriptor):
    """sin(omega x)^2, or cos(omega x)^2 with ``cosine=True``.

    Evaluated as a square so values near the zeros keep full relative accuracy.
    """

    omega: float
    cosine: bool = False

    def _eval(self, x, order):
        w = self.omega
        if order == 0:
            return (np.cos(w * x) if self.cosine else np.sin(w * x)) ** 2
        # d/dx sin^2(wx) = w sin(2wx); sine form keeps the zero at x = 0 exact
        sign = -1.0 if self.cosine else 1.0
        return sign * w * (2 * w) ** (order - 1) * np.sin(2 * w * x + (order - 1) * math.pi / 2)

    def complement(self):
        return SquaredTrig(self.omega, not self.cosine)

    def critical_points(self):
        if self.omega == 0:
            return ()
        step = math.pi / (2 * abs(self.omega))
        k = np.arange(0, math.floor(1 / step) + 1)
        return tuple(float(v) for v in k * step)

    def spec(self):
        return f"squaredtrig:omega={_fmt(self.omega)},cosine={int(self.cosine)}"


@dataclass(frozen=True)
class Exponential(FunctionDescriptor):
    """scale * exp(rate * x)."""

    scale: float
    rate: float

    def _eval(self, x, order):
        return self.scale * self.rate**order * np.exp(self.rate * x)

    def antiderivative(self):
        if self.rate == 0:
            return Polynomial1D((0.0, self.scale))
        c = self.scale / self.rate
        return Sum((Exponential(c, self.rate), Constant(-c)), (1.0, 1.0))

    def spec(self):
        return f"exponential:scale={_fmt(self.scale)},rate={_fmt(self.rate)}"


@dataclass(frozen=True)
class Sum(FunctionDescriptor):
    """Weighted sum of descriptors."""

    terms: tuple
    weights: tuple = None

    def __post_init__(self):
        terms = tuple(self.terms)
        weights = (1.0,) * len(terms) if self.weights is None else tuple(float(w) for w in self.weights)
        if len(weights) != len(terms) or not terms:
            raise ConfigurationError("Sum needs one weight per term and at least one term")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "weights", weights)

    @property
    def max_order(self):
        return min(t.max_order for t in self.terms)

    def _eval(self, x, order):
        out = np.zeros_like(x)
        for w, t in zip(self.weights, self.terms):
            out = out + w * t.derivative(x, order)
        return out

    def breakpoints(self):
        return tuple(sorted({p for t in self.terms for p in t.breakpoints()}))

    def critical_points(self):
        return tuple(sorted({p for t in self.terms for p in t.critical_points()}))

    def complement(self):
        """1 - self, built from an accurate complement of a unit-weight term when one exists."""
        for i, (w, t) in enumerate(zip(self.weights, self.terms)):
            comp = getattr(t, "complement", None)
            if w == 1.0 and comp is not None and comp() is not None:
                rest = [(-wk, tk) for k, (wk, tk) in enumerate(zip(self.weights, self.terms)) if k != i]
                return Sum((comp(), *(tk for _, tk in rest)), (1.0, *(wk for wk, _ in rest)))
        return None

    def antiderivative(self):
        parts = [t.antiderivative() for t in self.terms]
        if any(p is None for p in parts):
            return None
        return Sum(tuple(parts), self.weights)

    def spec(self):
        parts = []
        for w, t in zip(self.weights, self.terms):
            if w == 1.0:
                parts.append(t.spec())
            else:
                parts.append(f"{_fmt(w)}*{t.spec()}")
        return " + ".join(parts)


class GridFunction(FunctionDescriptor):
    """Samples on the uniform grid i/(m-1) of [0, 1], linearly interpolated.

    Derivatives of order 1 and 2 are central differences with step equal to
    the grid spacing, taken on the interpolant.
    """

    max_order = 2

    def __init__(self, samples):
        s = np.array(samples, dtype=float)
        if s.ndim != 1 or s.size < 3:
            raise ConfigurationError("GridFunction needs at least 3 samples")
        s.flags.writeable = False
        self.samples = s
        self.step = 1.0 / (s.size - 1)
        self._grid = np.linspace(0.0, 1.0, s.size)
        self._key = hash(s.tobytes())

    def __eq__(self, other):
        return isinstance(other, GridFunction) and np.array_equal(self.samples, other.samples)

    def __hash__(self):
        return self._key

    def __repr__(self):
        return f"GridFunction(<{self.samples.size} samples>)"

    def _interp(self, x):
        return np.interp(x, self._grid, self.samples)

    def _eval(self, x, order):
        if order == 0:
            return self._interp(x)
        d = self.step
        lo = np.clip(x - d, 0, 1)
        hi = np.clip(x + d, 0, 1)
        if order == 1:
            return (self._interp(hi) - self._interp(lo)) / (hi - lo)
        mid = (lo + hi) / 2
        half = (hi - lo) / 2
        return (self._interp(hi) - 2 * self._interp(mid) + self._interp(lo)) / half**2

    def spec(self):
        raise CapabilityError("GridFunction has no text form")


def evaluate(desc, x):
    return desc.evaluate(x)


def derivative(desc, x, order):
    return desc.derivative(x, order)


# ------------------------------------------------------------------ norms


@dataclass(frozen=True)
class SpaceNormReport:
    c_beta_norm: float
    flat_seminorm: float
    hb_extra: float
    grid_size: int

    @property
    def total(self):
        return self.c_beta_norm + self.flat_seminorm + self.hb_extra


def norm_grid(desc, grid_size=2**14 + 1, focus=None):
    """Uniform grid plus critical points and geometric clusters around them.

    ``focus=(a, b)`` adds a second uniform grid of the same size on [a, b].
    """
    pts = [np.linspace(0.0, 1.0, grid_size)]
    if focus is not None:
        pts.append(np.linspace(max(focus[0], 0.0), min(focus[1], 1.0), grid_size))
    offsets = np.geomspace(1e-9, 0.05, 120)
    for c in (*desc.critical_points(), *desc.breakpoints()):
        pts.append(np.array([c]))
        pts.append(c + offsets)
        pts.append(c - offsets)
    x = np.unique(np.concatenate(pts))
    return x[(x >= 0) & (x <= 1)]


def flat_seminorm(desc, beta, grid_size=2**14 + 1, focus=None):
    """max over 1 <= j < beta of sup (|f^(j)|^beta / |f|^(beta-j))^(1/j); 0/0 counts as 0.

    Returns +inf when any ratio exceeds 1e12.
    """
    if beta <= 0:
        raise ConfigurationError("beta must be positive")
    if beta <= 1:
        return 0.0
    if isinstance(desc, GridFunction) and beta > 3:
        raise CapabilityError("GridFunction supports the flat seminorm only for beta <= 3")
    x = norm_grid(desc, grid_size, focus)
    logf = desc.log_abs_derivative(x, 0)
    best = 0.0
    j = 1
    while j < beta:
        logd = desc.log_abs_derivative(x, j)
        both_zero = np.isneginf(logd)
        with np.errstate(invalid="ignore"):
            logratio = (beta * logd - (beta - j) * logf) / j
        logratio = np.where(both_zero, -np.inf, logratio)
        if np.any(np.isnan(logratio)):
            logratio = np.where(np.isnan(logratio), np.inf, logratio)
        top = float(np.max(logratio))
        if top > math.log(INFINITE_RATIO):
            return math.inf
        best = max(best, math.exp(top))
        j += 1
    return best


def c_beta_norm(desc, beta, grid_size=2**14 + 1, max_lag=32, focus=None):
    """sup|f| + sup|f^(m)| + Hölder quotient of f^(m) with exponent beta - m, m = floor_strict(beta).

    The Hölder quotient only looks at pairs at most ``max_lag`` grid steps
    apart.  ``focus=(a, b)`` repeats the computation on a uniform grid over
    [a, b] and keeps the larger values.
    """
    m = floor_strict(beta)
    gamma = beta - m
    grids = [np.linspace(0.0, 1.0, grid_size)]
    if focus is not None:
        grids.append(np.linspace(max(focus[0], 0.0), min(focus[1], 1.0), grid_size))
    sup_f = sup_d = quotient = 0.0
    for x in grids:
        f = desc.derivative(x, 0)
        dm = desc.derivative(x, m) if m > 0 else f
        sup_f = max(sup_f, float(np.max(np.abs(f))))
        if m > 0:
            sup_d = max(sup_d, float(np.max(np.abs(dm))))
        step = x[1] - x[0]
        for lag in range(1, max_lag + 1):
            diff = np.abs(dm[lag:] - dm[:-lag])
            quotient = max(quotient, float(np.max(diff)) / (lag * step) ** gamma)
    return sup_f + sup_d + quotient


def _complement(desc):
    comp = desc.complement() if hasattr(desc, "complement") else None
    if comp is not None:
        return comp
    return Sum((Constant(1.0), desc), (1.0, -1.0))


def hb_norm(desc, beta, grid_size=2**14 + 1, focus=None):
    """Norm report for a [0, 1]-valued function, including |1 - f| flatness."""
    x = np.linspace(0.0, 1.0, grid_size)
    f = desc(x)
    bad = (f < 0) | (f > 1) | ~np.isfinite(f)
    if np.any(bad):
        xb = float(x[np.argmax(bad)])
        raise DomainError(f"function leaves [0, 1] at x = {xb:.6g}", value=xb)
    return SpaceNormReport(c_beta_norm(desc, beta, grid_size, focus=focus),
                           flat_seminorm(desc, beta, grid_size, focus),
                           flat_seminorm(_complement(desc), beta, grid_size, focus), grid_size)


def space_norm(desc, beta, link_kind="poisson", grid_size=2**14 + 1, focus=None):
    """Norm report for the space attached to a link (the [0, 1] variant for Bernoulli)."""
    kind = getattr(link_kind, "value", link_kind)
    if kind == "bernoulli":
        return hb_norm(desc, beta, grid_size, focus)
    return SpaceNormReport(c_beta_norm(desc, beta, grid_size, focus=focus),
                           flat_seminorm(desc, beta, grid_size, focus), 0.0, grid_size)


# -------------------------------------------------------- local fluctuation


@lru_cache(maxsize=None)
def fluctuation_constant(beta):
    """Largest a >= 0 with (e^a - 1) + a^beta / floor_strict(beta)! <= 1/2."""
    fact = math.factorial(floor_strict(beta))

    def excess(a):
        return math.expm1(a) + a**beta / fact - 0.5

    return optimize.bisect(excess, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def local_fluctuation_check(desc, beta, x, h, norm=None):
    """True iff |f(x+h) - f(x)| <= |f(x)|/2 for an admissible step h.

    Admissible means |h| <= a(beta) (|f(x)| / ||f||)^(1/beta) and x + h in [0, 1].
    ``norm`` defaults to c_beta_norm + flat_seminorm.
    """
    if norm is None:
        norm = c_beta_norm(desc, beta) + flat_seminorm(desc, beta)
    fx = float(desc(x))
    if norm == 0:
        limit = math.inf
    else:
        limit = fluctuation_constant(beta) * (abs(fx) / norm) ** (1 / beta)
    if abs(h) > limit or not 0.0 <= x + h <= 1.0:
        raise PreconditionError(f"step h={h!r} not admissible at x={x!r} (limit {limit:.3g})")
    return abs(float(desc(x + h)) - fx) <= abs(fx) / 2


# ----------------------------------------------------------- text specs


def _parse_params(text):
    params = {}
    if not text:
        return params
    for item in text.split(","):
        if "=" not in item:
            raise ConfigurationError(f"expected key=value in descriptor, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip().lower()] = v.strip()
    return params


def _num(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigurationError(f"descriptor parameter {key!r} missing")
        return default
    try:
        return float(params.pop(key))
    except ValueError:
        raise ConfigurationError(f"descriptor parameter {key}={params[key]!r} is not a number") from None


def _parse_term(text):
    text = text.strip()
    weight = 1.0
    head, sep, rest = text.partition("*")
    if sep and ":" not in head:
        try:
            weight = float(head)
            text = rest.strip()
        except ValueError:
            pass
    name, _, args = text.partition(":")
    name = name.strip().lower()
    p = _parse_params(args)
    if name == "constant":
        d = Constant(_num(p, "c"))
    elif name == "linear":
        d = Linear(_num(p, "a"), _num(p, "b", 0.0))
    elif name in ("polynomial", "poly"):
        raw = p.pop("coeffs", None)
        if raw is None:
            raise ConfigurationError("polynomial needs coeffs=c0;c1;...")
        d = Polynomial1D(tuple(float(c) for c in raw.split(";")))
    elif name == "powerbump":
        x0, beta = _num(p, "x0"), _num(p, "beta")
        gconst, gslope = _num(p, "gconst", 1.0), _num(p, "gslope", 0.0)
        g = Constant(gconst) if gslope == 0.0 else Linear(gslope, gconst)
        d = PowerBump(x0, beta, g)
    elif name == "mollifier":
        d = MollifierBump(_num(p, "center"), _num(p, "h"), _num(p, "a", 1.0))
    elif name == "sinusoid":
        d = Sinusoid(_num(p, "offset"), _num(p, "amplitude"), _num(p, "freq", 1.0), _num(p, "phase", 0.0))
    elif name == "squaredtrig":
        d = SquaredTrig(_num(p, "omega"), bool(_num(p, "cosine", 0.0)))
    elif name == "exponential":
        d = Exponential(_num(p, "scale"), _num(p, "rate"))
    elif name in _NAMED:
        d = _NAMED[name]()
    else:
        raise ConfigurationError(f"unknown descriptor {name!r}")
    if p:
        raise ConfigurationError(f"unknown parameters for {name}: {sorted(p)}")
    return weight, d


def parse_descriptor(text):
    """Build a descriptor from text such as ``"powerbump:x0=0.5,beta=2"``.

    Terms joined by `` + `` form a Sum; a term may carry a ``weight*`` prefix.
    """
    parts = [t for t in text.split(" + ")]
    terms = [_parse_term(t) for t in parts]
    if len(terms) == 1 and terms[0][0] == 1.0:
        return terms[0][1]
    return Sum(tuple(d for _, d in terms), tuple(w for w, _ in terms))


_NAMED = {
    "halfsine": lambda: SquaredTrig(math.pi / 2),
    "wave": lambda: Sinusoid(0.5, 0.25, 1.0, 0.0),
    "growth": lambda: Exponential(0.25, 1.0),
}


def builtin_descriptors():
    """Named [0, 1]-valued test functions with the smoothness they are used at.

    Returns a dict name -> (descriptor, beta).
    """
    return {
        "constant": (Constant(0.5), 2.0),
        "powerbump-1.5": (PowerBump(0.5, 1.5, Linear(1.0, 1.0)), 1.5),
        "powerbump-2": (PowerBump(0.5, 2.0, Linear(1.0, 1.0)), 2.0),
        "powerbump-4": (PowerBump(0.5, 4.0, Linear(1.0, 1.0)), 4.0),
        "mollifier": (MollifierBump(0.5, 0.3, 0.5), 2.0),
        "wave": (_NAMED["wave"](), 2.0),
        "growth": (_NAMED["growth"](), 2.0),
        "halfsine": (_NAMED["halfsine"](), 2.0),
    }
