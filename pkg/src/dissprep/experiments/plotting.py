"""Figures rendered next to the CSV output of each sweep."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweeps import SweepResult  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 11,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.5,
    "lines.markersize": 4,
    "savefig.dpi": 150,
    "figure.autolayout": True,
}


def _ok(rows):
    return [r for r in rows if r.get("status") == "ok"]


def _curves(rows, group_key, x_key, y_key):
    groups = {}
    for r in _ok(rows):
        groups.setdefault(r[group_key], []).append((r[x_key], r[y_key]))
    return {g: sorted(pts) for g, pts in sorted(groups.items(), key=lambda kv: str(kv[0]))}


def _plot_vs_gamma(ax, rows, group_key, y_key, label_fmt):
    for g, pts in _curves(rows, group_key, "gamma_over_kappa", y_key).items():
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=label_fmt.format(g))
    ax.set_xscale("log")
    ax.set_xlabel(r"$\gamma/\kappa$")


def plot_panel_a(result: SweepResult, ax=None):
    ax = ax or plt.gca()
    _plot_vs_gamma(ax, result.rows, "nbar", "fidelity", r"$\bar n$ = {}")
    ax.set_ylabel(r"$\mathcal{F}_{steady}$")
    ax.legend()
    return ax


def plot_panel_bcd(result: SweepResult, axes=None):
    if axes is None:
        _, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    ylabels = {"fidelity": r"$\mathcal{F}_{steady}$", "purity": r"$\mathcal{P}_{steady}$",
               "concurrence": "concurrence"}
    for ax, key in zip(axes, ylabels):
        _plot_vs_gamma(ax, result.rows, "reservoir_count", key, "{} reservoirs")
        ax.set_ylabel(ylabels[key])
    axes[0].legend()
    return axes


def plot_robustness(result: SweepResult, axes=None):
    if axes is None:
        _, axes = plt.subplots(1, 2, figsize=(9, 3.6))
    means = [r for r in result.rows if r["trial"] == -1]
    for key, ax in zip(("fidelity", "purity"), axes):
        for p, pts in _curves(means, "percent", "tau", key).items():
            xs, ys = zip(*pts)
            ax.plot(xs, ys, label=f"{100 * p:g}%")
        ax.set_xlabel(r"$\tau = \gamma t$")
        ax.set_ylabel(key)
    axes[0].legend()
    return axes


def plot_scaling(result: SweepResult, ax=None):
    ax = ax or plt.gca()
    ok = sorted(_ok(result.rows), key=lambda r: r["N"])
    Ns = [r["N"] for r in ok]
    ax.plot(Ns, [r["fidelity"] for r in ok], marker="o", label="fidelity")
    ax.plot(Ns, [r["purity"] for r in ok], marker="s", label="purity")
    ax.set_xlabel("N")
    ax.legend()
    return ax


def plot_evolution(result: SweepResult, ax=None):
    ax = ax or plt.gca()
    ok = _ok(result.rows)
    taus = [r["tau"] for r in ok]
    for key in ("fidelity", "purity", "concurrence"):
        ys = [r[key] for r in ok]
        if not all(isinstance(y, float) and math.isnan(y) for y in ys):
            ax.plot(taus, ys, label=key)
    ax.set_xlabel(r"$\tau = \gamma t$")
    ax.legend()
    return ax


def plot_steady(result: SweepResult, ax=None):
    ax = ax or plt.gca()
    ok = _ok(result.rows)
    keys = [k for k in result.columns if k in ("N", "reservoir_count", "gamma_over_kappa",
                                               "nbar", "kappa_phi")]
    if keys:
        x = keys[-1]
        pts = sorted((r[x], r["fidelity"], r["purity"]) for r in ok)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o", label="fidelity")
        ax.plot([p[0] for p in pts], [p[2] for p in pts], "s", label="purity")
        ax.set_xlabel(x)
        if x == "gamma_over_kappa":
            ax.set_xscale("log")
        ax.legend()
    else:
        row = ok[0] if ok else {"fidelity": math.nan, "purity": math.nan}
        ax.bar(["fidelity", "purity"], [row["fidelity"], row["purity"]])
    return ax


_PLOTTERS = {
    "panel-a": (plot_panel_a, (5, 3.6)),
    "panel-bcd": (plot_panel_bcd, None),
    "robustness": (plot_robustness, None),
    "scaling": (plot_scaling, (5, 3.6)),
    "evolve": (plot_evolution, (5, 3.6)),
    "steady": (plot_steady, (5, 3.6)),
}


def render(result: SweepResult, path) -> Path:
    """Draw the figure matching ``result.kind`` and save it to ``path``."""
    plotter, size = _PLOTTERS[result.kind]
    with plt.rc_context(RC):
        if size is None:
            plotter(result)
            fig = plt.gcf()
        else:
            fig, ax = plt.subplots(figsize=size)
            plotter(result, ax)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path
