"""Figure rendering for experiment reports.

Renders alongside the CSV output: success rate against fleet size and user
count, and the training score curves. Uses the Agg backend so reports work
headless.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .harness import ResultTable  # noqa: E402

_MARKERS = ["o", "s", "^", "d", "v", "*"]


def _methods(table: ResultTable) -> list[str]:
    return sorted({r.method for r in table.ok_rows()})


def render_figures(table: ResultTable, path) -> list[Path]:
    """Write the standard report figures; returns the files created."""
    outdir = Path(path)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    rows = table.ok_rows()
    if rows:
        users_values = sorted({r.users for r in rows})
        fleet_values = sorted({r.fleet for r in rows})
        methods = _methods(table)

        if len(fleet_values) > 1:
            fig, axes = plt.subplots(1, len(users_values),
                                     figsize=(4.2 * len(users_values), 3.4),
                                     sharey=True, squeeze=False)
            for ax, users in zip(axes[0], users_values):
                for m, marker in zip(methods, _MARKERS):
                    ys = [table.mean_success(m, users, f) for f in fleet_values]
                    ax.plot(fleet_values, ys, marker=marker, label=m)
                ax.set_title(f"{users} users")
                ax.set_xlabel("serving UAVs")
                ax.grid(True, alpha=0.4)
            axes[0][0].set_ylabel("task success rate")
            axes[0][-1].legend(fontsize=8)
            fig.tight_layout()
            p = outdir / "success_vs_fleet.png"
            fig.savefig(p, dpi=120)
            plt.close(fig)
            written.append(p)

        if len(users_values) > 1:
            fleet = fleet_values[-1]
            fig, ax = plt.subplots(figsize=(4.8, 3.4))
            for m, marker in zip(methods, _MARKERS):
                ys = [table.mean_success(m, u, fleet) for u in users_values]
                ax.plot(users_values, ys, marker=marker, label=m)
            ax.set_xlabel("users")
            ax.set_ylabel("task success rate")
            ax.set_title(f"{fleet} serving UAVs")
            ax.grid(True, alpha=0.4)
            ax.legend(fontsize=8)
            fig.tight_layout()
            p = outdir / "success_vs_users.png"
            fig.savefig(p, dpi=120)
            plt.close(fig)
            written.append(p)

    if table.curves:
        fig, ax = plt.subplots(figsize=(5.2, 3.4))
        for c in table.curves[:8]:
            ax.plot(range(len(c.scores)), c.scores, linewidth=0.9,
                    label=f"seed {c.seed} it {c.iteration}")
        ax.set_xlabel("episode")
        ax.set_ylabel("score")
        ax.grid(True, alpha=0.4)
        ax.legend(fontsize=7)
        fig.tight_layout()
        p = outdir / "training_scores.png"
        fig.savefig(p, dpi=120)
        plt.close(fig)
        written.append(p)
    return written
