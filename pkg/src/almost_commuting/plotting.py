"""Figures for sweep results, written straight to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_epsilon_delta(records, path, title=None):
    """Log-log scatter of epsilon against measured delta, with per-cell medians."""
    groups = {}
    for r in records:
        if r.status == "Converged" and r.epsilon is not None:
            groups.setdefault((r.kind.value, r.dim), []).append(r)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for i, ((kind, dim), rows) in enumerate(sorted(groups.items())):
        color = f"C{i % 10}"
        d = np.array([r.measured_delta for r in rows])
        e = np.array([r.epsilon for r in rows])
        ax.scatter(d, e, s=8, alpha=0.35, color=color)
        targets = sorted({r.target_delta for r in rows})
        med_d = [np.median(d[[r.target_delta == t for r in rows]]) for t in targets]
        med_e = [np.median(e[[r.target_delta == t for r in rows]]) for t in targets]
        ax.plot(med_d, med_e, "o-", color=color, label=f"{kind}, n={dim}")
    if groups:
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.legend(fontsize=8)
    ax.set_xlabel(r"$\delta$ (measured commutator)")
    ax.set_ylabel(r"$\varepsilon$ (distance to output)")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
