"""Standalone SVG figures.  Output is byte-stable: fixed hash salt, no date stamp."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.hashsalt": "presmooth", "svg.fonttype": "path", "figure.figsize": (5.0, 3.6)}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def error_vs_n(config, summaries, path):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        n = np.array([s.n for s in summaries], dtype=float)
        for i, x in enumerate(config.probe_points):
            med = np.array([s.median_probe_err[i] for s in summaries], dtype=float)
            ok = med > 0
            ax.loglog(n[ok], med[ok], marker="o", label=f"x = {x:g}")
        ax.set_xlabel("n")
        ax.set_ylabel("median |f_hat(x) - f(x)|")
        ax.set_title(f"{config.link_kind}, beta = {config.beta:g}")
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def sup_ratio_histogram(config, results, path):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for n in config.n_grid:
            s = np.array([r.sup_ratio for r in results if r.n == n and r.ok], dtype=float)
            if s.size:
                ax.hist(s, bins=20, histtype="step", label=f"n = {n}")
        ax.set_xlabel("sup ratio S")
        ax.set_ylabel("count")
        if config.n_grid:
            ax.legend()
        fig.tight_layout()
        return _save(fig, path)
