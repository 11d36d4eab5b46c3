"""Figures for the path and benchmark reports.

Figures are built with the object-oriented matplotlib API (no pyplot state)
and written as SVG. Every data series carries an SVG group id of the form
``series-<name>`` so the files can be checked mechanically.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

STYLE = {
    "svg.fonttype": "none",
    "svg.hashsalt": "marriage-hact",
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "lines.linewidth": 1.6,
}
COLORS = {"ct": "#1f5fa8", "dt": "#c4452b"}
LABELS = {"ct": "Continuous time", "dt": "Discrete time"}


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    return path


def _series(ax, x, y, gid, **kw):
    (line,) = ax.plot(x, y, **kw)
    line.set_gid(f"series-{gid}")
    return line


def _by_method(rows):
    out = {}
    for row in rows:
        out.setdefault(row.method, []).append(row)
    return out


def plot_share_and_gap(rows, path: Path) -> Path:
    """Married share by method (left) and the utility gain from marriage (right)."""
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(9, 3.6), layout="constrained")
        left, right = fig.subplots(1, 2)
        groups = _by_method(rows)
        for method, rs in groups.items():
            _series(
                left,
                [r.year for r in rs],
                [r.married_share for r in rs],
                f"married-share-{method}",
                color=COLORS.get(method),
                label=LABELS.get(method, method),
            )
        left.set_xlabel("Year")
        left.set_ylabel("Share married")
        left.legend()
        # utility gap does not depend on the method
        rs = next(iter(groups.values()))
        _series(right, [r.year for r in rs], [r.utility_gap for r in rs], "utility-gap", color="0.2")
        right.set_xlabel("Year")
        right.set_ylabel("v(p, w, 2) - v(p, w, 1)")
        return _save(fig, path)


def plot_flow_rates(rows, path: Path) -> Path:
    """Annual marriage (left) and divorce (right) probabilities by method."""
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(9, 3.6), layout="constrained")
        left, right = fig.subplots(1, 2)
        for method, rs in _by_method(rows).items():
            years = [r.year for r in rs]
            kw = dict(color=COLORS.get(method), label=LABELS.get(method, method))
            _series(left, years, [r.prob_marriage for r in rs], f"marriage-{method}", **kw)
            _series(right, years, [r.prob_divorce for r in rs], f"divorce-{method}", **kw)
        left.set_ylabel("Marriage probability (annual)")
        right.set_ylabel("Divorce probability (annual)")
        for ax in (left, right):
            ax.set_xlabel("Year")
        left.legend()
        return _save(fig, path)


def plot_benchmark(cells, slopes, path: Path) -> Path:
    """Log-log time and memory against grid size with fitted slopes in the legends."""
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=(9, 3.6), layout="constrained")
        ax_t, ax_m = fig.subplots(1, 2)
        for method in sorted({c.method for c in cells}):
            ok = [c for c in cells if c.method == method and not c.timed_out]
            if not ok:
                continue
            ns = [c.n for c in ok]
            sl = slopes.get(method)
            name = LABELS.get(method, method)
            kw = dict(color=COLORS.get(method), marker="o")
            _series(
                ax_t, ns, [c.median_time_s for c in ok], f"time-{method}",
                label=f"{name} (slope {sl.time:.2f})" if sl else name, **kw,
            )
            _series(
                ax_m, ns, [c.peak_bytes / 2**20 for c in ok], f"memory-{method}",
                label=f"{name} (slope {sl.memory:.2f})" if sl else name, **kw,
            )
        for ax, ylabel in ((ax_t, "Median time (s)"), (ax_m, "Peak memory (MiB)")):
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("Grid points N")
            ax.set_ylabel(ylabel)
            if ax.lines:
                ax.legend()
        return _save(fig, path)
