"""Figure rendering for the report paths (rank and evaluate commands).

Figures are written next to the delimited output; the CSVs stay the
authoritative record.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}  # keep PNG bytes reproducible


def save_cmc_figure(curve, path, title="Cumulative match curve") -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    ranks = range(1, len(curve) + 1)
    ax.plot(ranks, curve, marker="o", color="tab:red")
    ax.set_xlabel("rank")
    ax.set_ylabel("fraction of queries matched")
    ax.set_xticks(list(ranks))
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def save_sweep_figure(rows, path) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    ratios = [r.ratio for r in rows]
    axes[0].plot(ratios, [r.mean_accuracy for r in rows], marker="o", color="tab:blue")
    axes[0].set_xlabel("ego-to-top completeness ratio")
    axes[0].set_ylabel("mean assignment accuracy")
    axes[0].set_ylim(0.0, 1.05)
    axes[0].grid(True, alpha=0.3)
    axes[1].plot(ratios, [r.mean_rank for r in rows], marker="s", color="tab:green")
    axes[1].set_xlabel("ego-to-top completeness ratio")
    axes[1].set_ylabel("mean rank of true viewer")
    axes[1].grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def save_rank_figure(ranked, path) -> None:
    fig, ax = plt.subplots(figsize=(max(5, 0.6 * len(ranked)), 4))
    feasible = [r for r in ranked if r.feasible]
    labels = [r.candidate_id for r in feasible]
    scores = [r.score for r in feasible]
    ax.bar(range(len(feasible)), scores, color="tab:orange")
    ax.set_xticks(range(len(feasible)))
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylabel("graph matching score")
    ax.set_title("Candidate top-view videos by score")
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def save_accuracy_figure(rows, path) -> None:
    """Bar chart of per-result assignment accuracy."""
    fig, ax = plt.subplots(figsize=(max(5, 0.6 * len(rows)), 4))
    ax.bar(range(len(rows)), [acc for _, _, _, acc, _ in rows], color="tab:blue")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels([rid for rid, *_ in rows], rotation=45, ha="right")
    ax.set_ylabel("assignment accuracy")
    ax.set_ylim(0.0, 1.05)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
