"""Monte Carlo runner: sup-ratio statistics, coverage, rate slopes, persistence.

Every replication is a pure function of (config, n, rep): its noise comes
from the substream owned by ``rep`` (see :mod:`presmooth.model`), so results
do not depend on how replications are spread over worker processes.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ConfigurationError, PresmoothError
from .estimators import (EstimatorConfig, bias_corrected_poisson, default_grid, detector_on_grid,
                         gaussvar_estimate, plugin_estimate, threshold_value)
from .function_spaces import parse_descriptor
from .links import LinkKind, get_link
from .model import simulate
from .rates import upper_rate_array
from .wavelet import WaveletBasis

__all__ = ["ExperimentConfig", "RunResult", "StudySummary", "SlopeResult", "CSV_HEADER",
           "run_replication", "run_all", "mc_study", "summarize", "rate_slope", "export",
           "import_results", "emit_plots", "load_config_file", "config_from_mapping"]

CSV_HEADER = ["rep", "n", "link", "beta", "tau", "sigma", "seed", "sup_ratio", "an_event",
              "probe_x", "probe_err", "runtime_ms"]


@dataclass(frozen=True)
class ExperimentConfig:
    link_kind: str = "poisson"
    descriptor: str = "constant:c=1"
    beta: float = 1.0
    R: float = 10.0
    n_grid: tuple = (1024,)
    replications: int = 100
    tau: float = 4.0
    sigma: float = 1.5
    seed: int = 20240611
    eval_margin: float = 0.05
    probe_points: tuple = (0.5,)
    basis: str = "db4"
    grid_size: int = 2**12 + 1
    estimator: str = "plugin"
    mn_constant: float = 1.0
    coverage_constant: float = 1.0
    antithetic: bool = False
    noise_scale: float = 1.0
    jobs: int = 1
    timing: bool = False
    out: str | None = None
    plots: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "link_kind", get_link(self.link_kind).kind.value)
        object.__setattr__(self, "n_grid", tuple(int(v) for v in self.n_grid))
        object.__setattr__(self, "probe_points", tuple(float(v) for v in self.probe_points))
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if not self.n_grid or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigurationError("n_grid must be non-empty and strictly increasing")
        if not 0 <= self.eval_margin < 0.5:
            raise ConfigurationError("eval_margin must lie in [0, 0.5)")
        for p in self.probe_points:
            if not self.eval_margin < p < 1 - self.eval_margin:
                raise ConfigurationError(f"probe point {p} outside ({self.eval_margin}, {1 - self.eval_margin})")
        if self.estimator not in ("plugin", "bias_corrected"):
            raise ConfigurationError("estimator must be 'plugin' or 'bias_corrected'")
        if self.estimator == "bias_corrected" and self.link_kind != "poisson":
            raise ConfigurationError("the bias-corrected estimator needs the Poisson link")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be >= 1")
        EstimatorConfig(self.tau, self.sigma, self.beta, self.grid_size, self.mn_constant)
        self.wavelet_basis()
        self.function()

    def function(self):
        return parse_descriptor(self.descriptor)

    def wavelet_basis(self):
        return WaveletBasis.parse(self.basis)

    def estimator_config(self):
        return EstimatorConfig(self.tau, self.sigma, self.beta, self.grid_size, self.mn_constant)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class RunResult:
    rep: int
    n: int
    sup_ratio: float
    an_event: bool
    probe_x: tuple
    probe_err: tuple
    runtime_ms: float | None = None
    detector_off: bool | None = None
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


_INT_FIELDS = {
    "n_grid": int, "replications": int, "seed": int, "grid_size": int, "jobs": int,
}
_FLOAT_FIELDS = {"beta", "R", "tau", "sigma", "eval_margin", "mn_constant",
                 "coverage_constant", "noise_scale"}
_BOOL_FIELDS = {"antithetic", "timing"}


def _parse_list(text, cast):
    text = str(text).strip()
    if ".." in text:
        # 2^10..2^18 style ranges step by doubling
        lo, hi = (cast(_power(t)) for t in text.split(".."))
        out = []
        v = lo
        while v <= hi:
            out.append(v)
            v *= 2
        return tuple(out)
    return tuple(cast(_power(t)) for t in text.replace(";", ",").split(",") if t.strip())


def _power(token):
    token = token.strip()
    if "^" in token:
        base, exp = token.split("^")
        return float(base) ** float(exp)
    return float(token)


def config_from_mapping(mapping, base=None):
    """Build a config from string-valued keys (config file or CLI), over ``base``."""
    fields = {f.name for f in dataclasses.fields(ExperimentConfig)}
    values = dataclasses.asdict(base) if base is not None else {}
    for key, raw in mapping.items():
        if raw is None:
            continue
        if key not in fields:
            raise ConfigurationError(f"unknown config key {key!r}")
        if key == "n_grid":
            values[key] = _parse_list(raw, lambda v: int(round(v))) if isinstance(raw, str) else tuple(raw)
        elif key == "probe_points":
            values[key] = _parse_list(raw, float) if isinstance(raw, str) else tuple(raw)
        elif key in _INT_FIELDS:
            values[key] = int(round(_power(str(raw)))) if isinstance(raw, str) else int(raw)
        elif key in _FLOAT_FIELDS:
            values[key] = float(raw)
        elif key in _BOOL_FIELDS:
            values[key] = raw if isinstance(raw, bool) else str(raw).strip().lower() in ("1", "true", "yes", "on")
        else:
            values[key] = raw
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PresmoothError):
            raise
        raise ConfigurationError(str(exc)) from None


def load_config_file(path):
    """Read flat ``key = value`` lines; ``#`` starts a comment."""
    mapping = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            mapping[key.strip()] = value.strip()
    return mapping


# --------------------------------------------------------------- running


def _estimate(obs, config, grid):
    est = config.estimator_config()
    if obs.link.kind is LinkKind.GAUSSVAR:
        return gaussvar_estimate(obs, est, grid)
    if config.estimator == "bias_corrected":
        return bias_corrected_poisson(obs, est, grid)
    return plugin_estimate(obs, est, grid)


def run_replication(config: ExperimentConfig, rep_index: int, n: int | None = None) -> RunResult:
    """simulate -> estimate -> sup ratio, probe errors and the A_n indicator for one replication."""
    n = config.n_grid[0] if n is None else int(n)
    probes = config.probe_points
    start = time.perf_counter()
    try:
        f = config.function()
        obs = simulate(f, config.link_kind, n, config.wavelet_basis(), config.seed, rep_index,
                       noise_scale=config.noise_scale, antithetic=config.antithetic)
        grid = default_grid(config.grid_size)
        fhat = _estimate(obs, config, grid)
        ftrue = f(grid)
        inside = (grid >= config.eval_margin) & (grid <= 1 - config.eval_margin)
        rate = upper_rate_array(config.link_kind, ftrue[inside], config.beta, n,
                                config.sigma, config.mn_constant)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(fhat[inside] - ftrue[inside]) / rate
        ratio = np.where(np.abs(fhat[inside] - ftrue[inside]) == 0, 0.0, ratio)
        sup_ratio = float(np.max(ratio))
        pvals = _estimate(obs, config, np.array(probes))
        perr = tuple(float(abs(a - b)) for a, b in zip(pvals, f(np.array(probes))))
        resid = np.abs(obs.y_tree.flat() - obs.clean_tree.flat())
        an_event = bool(np.max(resid) <= threshold_value(n, config.tau))
        off = None
        if obs.link.kind is LinkKind.GAUSSVAR:
            off = bool(not np.all(detector_on_grid(obs, config.estimator_config(), grid[inside])))
        elapsed = (time.perf_counter() - start) * 1000 if config.timing else None
        return RunResult(rep_index, n, sup_ratio, an_event, probes, perr, elapsed, off)
    except PresmoothError as exc:
        elapsed = (time.perf_counter() - start) * 1000 if config.timing else None
        return RunResult(rep_index, n, math.nan, False, probes, tuple(math.nan for _ in probes),
                         elapsed, None, f"{type(exc).__name__}: {exc}")


def _run_chunk(args):
    config, tasks = args
    return [run_replication(config, rep, n) for n, rep in tasks]


def run_all(config: ExperimentConfig):
    """All (n, rep) replications, ordered by n then rep regardless of worker count."""
    tasks = [(n, rep) for n in config.n_grid for rep in range(config.replications)]
    if config.jobs == 1 or len(tasks) == 1:
        return _run_chunk((config, tasks))
    size = max(1, math.ceil(len(tasks) / (4 * config.jobs)))
    chunks = [(config, tasks[i:i + size]) for i in range(0, len(tasks), size)]
    results = []
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        for part in pool.map(_run_chunk, chunks):
            results.extend(part)
    order = {n: i for i, n in enumerate(config.n_grid)}
    return sorted(results, key=lambda r: (order[r.n], r.rep))


@dataclass(frozen=True)
class StudySummary:
    n: int
    replications: int
    failures: int
    quantiles: dict
    coverage: float
    an_frequency: float
    median_probe_err: tuple
    detector_off_frequency: float | None = None


def summarize(config: ExperimentConfig, results) -> list:
    out = []
    for n in config.n_grid:
        rows = [r for r in results if r.n == n]
        good = [r for r in rows if r.ok]
        s = np.array([r.sup_ratio for r in good], dtype=float)
        q = {f"{p:g}": float(np.quantile(s, p)) if s.size else math.nan for p in (0.5, 0.9, 0.95)}
        cov = float(np.mean(s <= config.coverage_constant)) if s.size else math.nan
        an = float(np.mean([r.an_event for r in good])) if good else math.nan
        med = tuple(float(np.median([r.probe_err[i] for r in good])) if good else math.nan
                    for i in range(len(config.probe_points)))
        det = None
        if config.link_kind == "gaussvar" and good:
            det = float(np.mean([bool(r.detector_off) for r in good]))
        out.append(StudySummary(n, len(rows), len(rows) - len(good), q, cov, an, med, det))
    return out


def mc_study(config: ExperimentConfig):
    """Run every replication and summarize per sample size.  Returns (summaries, results)."""
    results = run_all(config)
    return summarize(config, results), results


@dataclass(frozen=True)
class SlopeResult:
    slope: float
    stderr: float
    n_grid: tuple
    medians: tuple
    exact_recovery: bool = False


# median errors at this level are rounding noise, not estimation error
EXACT_TOL = 1e-12


def slope_from_medians(n_grid, medians):
    n_arr = np.asarray(n_grid, dtype=float)
    m = np.asarray(medians, dtype=float)
    if np.any(m <= EXACT_TOL):
        return SlopeResult(math.nan, math.nan, tuple(n_grid), tuple(medians), True)
    fit = stats.linregress(np.log(n_arr), np.log(m))
    return SlopeResult(float(fit.slope), float(fit.stderr), tuple(n_grid), tuple(medians))


def rate_slope(config: ExperimentConfig, probe_index=0, results=None):
    """Least-squares slope of log(median probe error) against log n."""
    if len(config.n_grid) < 4:
        raise ConfigurationError("a slope fit needs at least 4 sample sizes")
    if results is None:
        results = run_all(config)
    summaries = summarize(config, results)
    medians = [s.median_probe_err[probe_index] for s in summaries]
    return slope_from_medians(config.n_grid, medians)


# ----------------------------------------------------------- persistence


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _rows(config, results):
    for r in results:
        for px, pe in zip(r.probe_x, r.probe_err):
            yield [r.rep, r.n, config.link_kind, config.beta, config.tau, config.sigma, config.seed,
                   r.sup_ratio, r.an_event, px, pe, r.runtime_ms]


def results_csv(config, results):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in _rows(config, results):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def results_json(config, results):
    payload = {
        "config": config.to_dict(),
        "results": [dict(zip(CSV_HEADER, row)) for row in _rows(config, results)],
    }
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"


def export(config, results, path, fmt=None):
    """Write results as CSV or JSON (chosen by ``fmt`` or the file suffix)."""
    fmt = fmt or ("json" if str(path).endswith(".json") else "csv")
    text = results_json(config, results) if fmt == "json" else results_csv(config, results)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def import_results(path):
    """Read a CSV or JSON export back into RunResult objects (one per rep and n)."""
    if str(path).endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            rows = json.load(fh)["results"]
        rows = [{k: ("" if v is None else v) for k, v in r.items()} for r in rows]
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    grouped = {}
    for r in rows:
        key = (int(r["n"]), int(r["rep"]))
        entry = grouped.setdefault(key, {"sup": float(r["sup_ratio"]),
                                         "an": str(r["an_event"]) in ("1", "True", "true"),
                                         "px": [], "pe": [],
                                         "ms": float(r["runtime_ms"]) if r["runtime_ms"] != "" else None})
        entry["px"].append(float(r["probe_x"]))
        entry["pe"].append(float(r["probe_err"]))
    return [RunResult(rep, n, e["sup"], e["an"], tuple(e["px"]), tuple(e["pe"]), e["ms"])
            for (n, rep), e in grouped.items()]


def emit_plots(config, results, directory):
    """Log-log median probe error against n, and sup-ratio histograms, as SVG files."""
    from . import plotting

    os.makedirs(directory, exist_ok=True)
    summaries = summarize(config, results)
    paths = [plotting.error_vs_n(config, summaries, os.path.join(directory, "error_vs_n.svg")),
             plotting.sup_ratio_histogram(config, results, os.path.join(directory, "sup_ratio_hist.svg"))]
    return paths
