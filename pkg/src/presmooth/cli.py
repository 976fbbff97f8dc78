"""Command line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 domain or
precondition error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings

import numpy as np

from . import harness
from .errors import ConfigurationError, PresmoothError
from .estimators import (EstimatorConfig, bias_corrected_poisson, default_grid, detector_on_grid,
                         estimate_h, gaussvar_estimate, plugin_estimate, zn_process, _window_index)
from .function_spaces import parse_descriptor, space_norm
from .links import LinkKind, get_link
from .lower_bounds import build_pair, verify_conditions
from .model import simulate
from .rates import RateQuery, rate_lower, rate_upper, regime
from .wavelet import WaveletBasis

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4
HELP_WIDTH = 88

_D = harness.ExperimentConfig()


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _formatter(prog):
    return argparse.HelpFormatter(prog, width=HELP_WIDTH, max_help_position=30)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------- parser


def _add_link(p, required=True):
    p.add_argument("--link", choices=[k.value for k in LinkKind], required=required,
                   help="link function" + ("" if required else f" (default: {_D.link_kind})"))


def _add_common_sim(p):
    p.add_argument("--f", "--fstar", dest="descriptor", required=True,
                   help='function descriptor, e.g. "powerbump:x0=0.5,beta=2"')
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--seed", type=int, default=_D.seed, help=f"RNG seed (default: {_D.seed})")
    p.add_argument("--rep", type=int, default=0, help="replication index (default: 0)")
    p.add_argument("--basis", default=_D.basis, help=f"haar or dbS (default: {_D.basis})")
    p.add_argument("--out", help="output file (default: standard output)")


def _add_study(p):
    p.add_argument("--config", help="flat key = value file; flags override its values")
    _add_link(p, required=False)
    p.add_argument("--f", "--fstar", dest="descriptor", help=f'function descriptor (default: "{_D.descriptor}")')
    p.add_argument("--beta", type=float, help=f"smoothness (default: {_D.beta})")
    p.add_argument("--R", type=float, help=f"norm radius (default: {_D.R})")
    p.add_argument("--n-grid", dest="n_grid", help='sample sizes, "1024,4096" or "2^10..2^14" (default: 1024)')
    p.add_argument("--reps", dest="replications", type=int, help=f"replications (default: {_D.replications})")
    p.add_argument("--tau", type=float, help=f"threshold constant (default: {_D.tau})")
    p.add_argument("--sigma", type=float, help=f"detector constant (default: {_D.sigma})")
    p.add_argument("--seed", type=int, help=f"RNG seed (default: {_D.seed})")
    p.add_argument("--jobs", type=int, help=f"worker processes (default: {_D.jobs})")
    p.add_argument("--probes", dest="probe_points", help="probe points, comma separated (default: 0.5)")
    p.add_argument("--margin", dest="eval_margin", type=float,
                   help=f"boundary exclusion for the sup ratio (default: {_D.eval_margin})")
    p.add_argument("--basis", help=f"haar or dbS (default: {_D.basis})")
    p.add_argument("--estimator", choices=["plugin", "bias_corrected"],
                   help=f"Poisson estimator variant (default: {_D.estimator})")
    p.add_argument("--antithetic", action="store_const", const=True, default=None,
                   help="flip the sign of all noise")
    p.add_argument("--timing", action="store_const", const=True, default=None,
                   help="fill the runtime_ms column (makes output non-reproducible)")
    p.add_argument("--out", help="results file, .csv or .json (default: CSV on standard output)")
    p.add_argument("--plots", help="directory for SVG figures")


def build_parser():
    root = _Parser(prog="presmooth", formatter_class=_formatter,
                   description="Wavelet pre-smoothing laboratory for nonlinear inverse problems.")
    sub = root.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", formatter_class=_formatter, help="simulate noisy wavelet coefficients",
                       description="Write clean and noisy wavelet coefficients of h(f) as CSV.")
    _add_link(p)
    _add_common_sim(p)

    p = sub.add_parser("estimate", formatter_class=_formatter, help="estimate f on a grid",
                       description="Simulate, threshold and invert; write the estimate on a grid as CSV.")
    _add_link(p)
    _add_common_sim(p)
    p.add_argument("--tau", type=float, default=4.0, help="threshold constant (default: 4.0)")
    p.add_argument("--sigma", type=float, default=1.5, help="detector constant (default: 1.5)")
    p.add_argument("--beta", type=float, help="smoothness; required for the gaussvar link")
    p.add_argument("--grid-size", type=int, default=2**12 + 1, help="grid points (default: 4097)")

    p = sub.add_parser("rates", formatter_class=_formatter, help="local rates and regime",
                       description="Print the upper and lower local rates and the regime at f(x) = fx.")
    _add_link(p)
    p.add_argument("--beta", type=float, required=True, help="smoothness")
    p.add_argument("--n", type=int, required=True, help="sample size")
    p.add_argument("--fx", type=float, help="function value (required unless --table)")
    p.add_argument("--sigma", type=float, default=1.5, help="detector constant (default: 1.5)")
    p.add_argument("--table", action="store_true", help="CSV sweep over fx instead of one value")
    p.add_argument("--points", type=int, default=101, help="rows in the --table sweep (default: 101)")
    p.add_argument("--out", help="output file (default: standard output)")

    p = sub.add_parser("lowerbound", formatter_class=_formatter, help="two-hypothesis construction",
                       description="Build the lower-bound pair around f* and verify its three conditions.")
    _add_link(p)
    p.add_argument("--f", "--fstar", dest="descriptor", required=True, help="reference function f*")
    p.add_argument("--x0", type=float, required=True, help="location of the perturbation")
    p.add_argument("--beta", type=float, required=True, help="smoothness")
    p.add_argument("--R", type=float, help="norm radius (default: 2 * norm(f*) + 1)")
    p.add_argument("--n", type=int, help="sample size (required unless --sweep)")
    p.add_argument("--sweep", action="store_true", help="CSV over the sample sizes in --n-grid")
    p.add_argument("--n-grid", dest="n_grid", default="2^8..2^14",
                   help='sample sizes for --sweep (default: "2^8..2^14")')
    p.add_argument("--out", help="output file (default: standard output)")

    p = sub.add_parser("mc", formatter_class=_formatter, help="Monte Carlo sup-ratio study",
                       description="Run replications over the n grid; write per-replication results.")
    _add_study(p)
    p.add_argument("--coverage", dest="coverage_constant", type=float,
                   help=f"constant C* for the coverage frequency (default: {_D.coverage_constant})")

    p = sub.add_parser("slope", formatter_class=_formatter, help="empirical rate slope",
                       description="Fit log median probe error against log n (needs 4+ sample sizes).")
    _add_study(p)
    p.add_argument("--probe-index", type=int, default=0, help="which probe to fit (default: 0)")
    return root


# ------------------------------------------------------------ commands


def _cmd_simulate(a):
    obs = simulate(parse_descriptor(a.descriptor), a.link, a.n, WaveletBasis.parse(a.basis), a.seed, a.rep)
    rows = []
    j0 = obs.y_tree.j0
    for k, (c, y) in enumerate(zip(obs.clean_tree.scaling, obs.y_tree.scaling)):
        rows.append((j0, k, "scaling", float(c), float(y)))
    for j in range(j0, obs.J_n + 1):
        for k, (c, y) in enumerate(zip(obs.clean_tree.level(j), obs.y_tree.level(j))):
            rows.append((j, k, "detail", float(c), float(y)))
    _emit(_csv(["level", "index", "type", "clean", "noisy"], rows), a.out)


def _cmd_estimate(a):
    kind = get_link(a.link).kind
    if kind is LinkKind.GAUSSVAR and a.beta is None:
        raise ConfigurationError("the gaussvar estimator is not adaptive: --beta is required")
    f = parse_descriptor(a.descriptor)
    cfg = EstimatorConfig(a.tau, a.sigma, a.beta, a.grid_size)
    obs = simulate(f, kind, a.n, WaveletBasis.parse(a.basis), a.seed, a.rep)
    x = default_grid(a.grid_size)
    header = ["x", "f_true", "h_hat", "f_hat"]
    cols = [x, f(x), estimate_h(obs, cfg, x)]
    if kind is LinkKind.GAUSSVAR:
        cols.append(gaussvar_estimate(obs, cfg, x))
        header += ["z_n", "detector"]
        cols += [zn_process(obs)[_window_index(x, obs.n)], detector_on_grid(obs, cfg, x).astype(int)]
    else:
        cols.append(plugin_estimate(obs, cfg, x))
        if kind is LinkKind.POISSON:
            header.append("f_tilde")
            cols.append(bias_corrected_poisson(obs, cfg, x))
    rows = zip(*[[v.item() for v in np.asarray(c)] for c in cols])
    _emit(_csv(header, rows), a.out)


def _cmd_rates(a):
    kind = get_link(a.link).kind
    if a.table:
        top = 1.0 if kind is LinkKind.BERNOULLI else 2.0
        rows = []
        for fx in np.linspace(0.0, top, a.points):
            q = RateQuery(kind, a.beta, a.n, float(fx), sigma=a.sigma)
            rows.append((float(fx), rate_upper(q), rate_lower(q), regime(q).value))
        _emit(_csv(["fx", "rate_upper", "rate_lower", "regime"], rows), a.out)
        return
    if a.fx is None:
        raise _UsageError("rates: error: --fx is required unless --table is given")
    q = RateQuery(kind, a.beta, a.n, a.fx, sigma=a.sigma)
    text = (f"rate_upper {rate_upper(q)!r}\n"
            f"rate_lower {rate_lower(q)!r}\n"
            f"regime {regime(q).value}\n")
    _emit(text, a.out)


def _pair_row(pair, report):
    return [pair.n, pair.case, pair.x0, pair.h_n, pair.c0, pair.eta, pair.kl, pair.separation,
            report.separation_ratio, report.rate_ratio, report.norm_f0, report.norm_f1,
            int(report.cond_i), int(report.cond_ii), int(report.cond_iii)]


_PAIR_HEADER = ["n", "case", "x0", "h_n", "c0", "eta", "kl", "separation", "separation_ratio",
                "rate_ratio", "norm_f0", "norm_f1", "cond_i", "cond_ii", "cond_iii"]


def _cmd_lowerbound(a):
    kind = get_link(a.link).kind
    f = parse_descriptor(a.descriptor)
    R = a.R if a.R is not None else 2 * space_norm(f, a.beta, kind, 2**12 + 1).total + 1
    if a.sweep:
        grid = harness._parse_list(a.n_grid, lambda v: int(round(v)))
    elif a.n is None:
        raise _UsageError("lowerbound: error: --n is required unless --sweep is given")
    else:
        grid = (a.n,)
    rows = []
    for n in grid:
        pair = build_pair(kind, f, a.x0, a.beta, R, n)
        rows.append(_pair_row(pair, verify_conditions(pair)))
    if a.sweep:
        _emit(_csv(_PAIR_HEADER, rows), a.out)
        return
    text = "".join(f"{k} {_fmt(v)}\n" for k, v in zip(_PAIR_HEADER, rows[0]))
    text += f"R {float(R)!r}\npassed {int(all(rows[0][-3:]))}\n"
    _emit(text, a.out)


_STUDY_KEYS = ["link", "descriptor", "beta", "R", "n_grid", "replications", "tau", "sigma", "seed",
               "jobs", "probe_points", "eval_margin", "basis", "estimator", "antithetic", "timing",
               "out", "plots", "coverage_constant"]


def _study_config(a):
    mapping = harness.load_config_file(a.config) if a.config else {}
    if "link" in mapping:
        mapping["link_kind"] = mapping.pop("link")
    for key in _STUDY_KEYS:
        val = getattr(a, key, None)
        if val is not None:
            mapping["link_kind" if key == "link" else key] = val
    return harness.config_from_mapping(mapping)


def _write_study(config, results):
    if config.out:
        harness.export(config, results, config.out)
    else:
        sys.stdout.write(harness.results_csv(config, results))
    if config.plots:
        harness.emit_plots(config, results, config.plots)


def _cmd_mc(a):
    config = _study_config(a)
    summaries, results = harness.mc_study(config)
    _write_study(config, results)
    if config.out:
        for s in summaries:
            q = " ".join(f"q{k}={v!r}" for k, v in s.quantiles.items())
            det = "" if s.detector_off_frequency is None else f" detector_off={s.detector_off_frequency!r}"
            print(f"n={s.n} reps={s.replications} failures={s.failures} {q} "
                  f"coverage={s.coverage!r} an_frequency={s.an_frequency!r}{det}")


def _cmd_slope(a):
    config = _study_config(a)
    results = harness.run_all(config)
    fit = harness.rate_slope(config, a.probe_index, results)
    _write_study(config, results)
    stream = sys.stdout if config.out else sys.stderr
    if fit.exact_recovery:
        print("slope exact-recovery (a median error is zero)", file=stream)
    else:
        print(f"slope {fit.slope!r} stderr {fit.stderr!r}", file=stream)
    print("medians " + ",".join(repr(m) for m in fit.medians), file=stream)


_COMMANDS = {"simulate": _cmd_simulate, "estimate": _cmd_estimate, "rates": _cmd_rates,
             "lowerbound": _cmd_lowerbound, "mc": _cmd_mc, "slope": _cmd_slope}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            _COMMANDS[args.command](args)
        return EXIT_OK
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except ConfigurationError as exc:
        print(f"presmooth: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PresmoothError as exc:
        print(f"presmooth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"presmooth: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
