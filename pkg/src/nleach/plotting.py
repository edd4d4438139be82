"""PNG figures for the analysis tables (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap, TwoSlopeNorm  # noqa: E402

from .analysis import NO_POLICY, POLICY_ORDER  # noqa: E402

RC = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "figure.dpi": 100,
}
POLICY_COLORS = {"A": "#1b9e77", "B": "#d95f02", "C": "#7570b3", "D": "#e7298a", "D*": "#e6ab02",
                 "A+B+D": "#1f78b4", "A+B+D*": "#666666", NO_POLICY: "#d9d9d9"}
RATIO_LINES = (25.0, 3.0, 2.0, 1.0)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def _cell_size(lon):
    steps = np.diff(np.unique(np.round(lon, 9)))
    return float(steps.min()) if len(steps) else 1.0


def leaching_change_map(report, path):
    """Per-cell change in leaching (tons); diverging colors centred on zero."""
    c = report.cells
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        d = c.d_leaching.to_numpy()
        lim = max(float(np.max(np.abs(d))), 1e-12)
        size = _cell_size(c.lon.to_numpy())
        sc = ax.scatter(c.lon, c.lat, c=d, s=(72 * size) ** 2, marker="s", cmap="RdBu_r",
                        norm=TwoSlopeNorm(0.0, -lim, lim), linewidths=0)
        fig.colorbar(sc, ax=ax, label="change in N leached (t per cell)")
        ax.set(xlabel="longitude", ylabel="latitude", title=f"Scenario {report.label}")
        ax.set_aspect("equal")
        return _save(fig, path)


def best_policy_figure(best, path):
    labels = [p for p in (*POLICY_ORDER, NO_POLICY) if p in set(best.best_policy)]
    idx = {p: i for i, p in enumerate(labels)}
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        size = _cell_size(best.lon.to_numpy())
        cmap = ListedColormap([POLICY_COLORS.get(p, "#999999") for p in labels])
        ax.scatter(best.lon, best.lat, c=best.best_policy.map(idx), cmap=cmap, vmin=-0.5,
                   vmax=len(labels) - 0.5, s=(72 * size) ** 2, marker="s", linewidths=0)
        for p in labels:
            ax.scatter([], [], color=POLICY_COLORS.get(p, "#999999"), marker="s", label=p)
        ax.legend(title="largest reduction", loc="upper left", bbox_to_anchor=(1.0, 1.0), frameon=False)
        ax.set(xlabel="longitude", ylabel="latitude")
        ax.set_aspect("equal")
        fig.tight_layout()
        return _save(fig, path)


def state_reduction_figure(states_by_label: dict, path):
    """Grouped bars of leaching reduction (tons) by state and scenario."""
    labels = list(states_by_label)
    states = sorted(set().union(*(set(s.state_code) for s in states_by_label.values())))
    x = np.arange(len(states))
    width = 0.8 / max(len(labels), 1)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(max(5.0, 0.45 * len(states) * max(1, len(labels)) ** 0.5), 3.5))
        for i, lab in enumerate(labels):
            s = states_by_label[lab].set_index("state_code").reindex(states)
            ax.bar(x + (i - (len(labels) - 1) / 2) * width, -s.d_leaching.fillna(0.0), width,
                   label=lab, color=POLICY_COLORS.get(lab))
        ax.set_xticks(x, states, rotation=90)
        ax.axhline(0, color="k", lw=0.5)
        ax.set_ylabel("N leaching reduction (t)")
        ax.legend(frameon=False, ncol=min(len(labels), 4))
        fig.tight_layout()
        return _save(fig, path)


def cumulative_figure(curves: dict, path):
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 4))
        for lab, cur in curves.items():
            t = cur.table
            ax.plot(np.r_[0.0, t.pct_cells], np.r_[0.0, t.pct_reduction], label=f"{lab} ({cur.half_point:.1f}%)",
                    color=POLICY_COLORS.get(lab))
        ax.axhline(50, color="0.6", lw=0.6, ls=":")
        ax.set(xlabel="grid cells, sorted by reduction (%)", ylabel="cumulative share of reduction (%)",
               xlim=(0, 100), ylim=(0, 101))
        ax.legend(title="cells for 50%", frameon=False, loc="lower right")
        fig.tight_layout()
        return _save(fig, path)


def ratio_figure(table, path):
    """State-level percent change in leaching against percent change in N use."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 4))
        for lab, g in table.groupby("scenario", sort=False):
            ax.scatter(-g.pct_n_use, -g.pct_leaching, s=14, label=lab, color=POLICY_COLORS.get(lab))
        top = float(np.nanmax(np.abs(table.pct_leaching))) if len(table) else 1.0
        xs = np.linspace(0, top, 50)
        for r in RATIO_LINES:
            ax.plot(xs / r, xs, color="0.5", lw=0.6, ls="--")
            ax.annotate(f"{r:g}:1", (top / r, top), fontsize=7, color="0.4")
        ax.set(xlabel="N use reduction (%)", ylabel="N leaching reduction (%)")
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path)


__all__ = ["leaching_change_map", "best_policy_figure", "state_reduction_figure", "cumulative_figure",
           "ratio_figure"]
