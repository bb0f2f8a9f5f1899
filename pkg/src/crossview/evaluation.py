"""Evaluation metrics: accuracy, cumulative match curves, subset sweeps."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InvalidInputError
from .graph import build_ego_graph, build_top_graph
from .matching import (SoftAssignment, SpectralConfig, hard_assignment,
                       indicator_score, leading_eigenvector, soft_assignment)
from .xcorr import XCorrConfig


def assignment_accuracy(pred, truth: dict) -> float:
    """Fraction of ego videos assigned to their true top-view viewer.

    ``pred`` is an ego_id -> top_id mapping (or anything with an
    ``assignment`` attribute holding one). Every predicted ego id must
    appear in ``truth``.
    """
    mapping = getattr(pred, "assignment", pred)
    if not mapping:
        raise InvalidInputError("empty prediction")
    missing = [e for e in mapping if e not in truth]
    if missing:
        raise InvalidInputError(f"no ground truth for ego ids {missing}")
    hits = sum(1 for e, t in mapping.items() if truth[e] == t)
    return hits / len(mapping)


def cmc_curve(ranks, n: int) -> np.ndarray:
    """Cumulative match curve: entry k is the fraction of queries whose
    true match ranked within the top k+1."""
    r = np.asarray(list(ranks), dtype=np.int64)
    if r.size == 0:
        raise InvalidInputError("no ranks given")
    if r.min() < 1 or r.max() > n:
        raise InvalidInputError(f"ranks must lie in [1, {n}]")
    return np.array([(r <= k).mean() for k in range(1, n + 1)])


def ranks_of_truth(soft: SoftAssignment, truth_cols) -> list:
    """1-based rank of the true column in each soft-assignment row.

    Columns are ordered by descending probability; ties go to the lower
    column index.
    """
    mat = soft.matrix if isinstance(soft, SoftAssignment) else np.asarray(soft)
    out = []
    for row, t in zip(mat, truth_cols):
        order = np.lexsort((np.arange(row.size), -row))
        out.append(int(np.nonzero(order == t)[0][0]) + 1)
    return out


@dataclass(frozen=True)
class SubsetPolicy:
    """How many ego subsets a sweep evaluates, and with what seed."""

    cap: int = 255
    seed: int = 0

    def __post_init__(self):
        if self.cap < 1:
            raise InvalidInputError("cap must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    ratio: float
    mean_accuracy: float
    mean_rank: float
    n_subsets: int


def _enumerate_subsets(n: int, policy: SubsetPolicy) -> list:
    total = (1 << n) - 1
    if total <= policy.cap:
        subsets = []
        for size in range(1, n + 1):
            subsets.extend(combinations(range(n), size))
        return subsets
    rng = np.random.default_rng(policy.seed)
    masks = rng.choice(total, size=policy.cap, replace=False) + 1
    subsets = [tuple(i for i in range(n) if (int(m) >> i) & 1) for m in masks]
    return sorted(subsets, key=lambda s: (len(s), s))


def completeness_sweep(scenario, policy: SubsetPolicy, geo_cfg, xcorr_cfg: XCorrConfig,
                       spectral_cfg: SpectralConfig = SpectralConfig()) -> list:
    """Pipeline accuracy as a function of the ego-to-top completeness ratio.

    Evaluates every non-empty subset of the scenario's ego videos (or a
    seeded sample when there are more than ``policy.cap``), reusing the
    full affinity matrix: the affinity of a subset is its principal
    submatrix, since all entries are pairwise. Rows are grouped by the
    subset's ratio of ego videos to top-view viewers.
    """
    if not scenario.truth:
        raise InvalidInputError("scenario has no ground truth")
    ego = build_ego_graph(scenario.ego_descriptors, scenario.ego_detections, xcorr_cfg)
    top = build_top_graph(scenario.trajectories, geo_cfg)
    from .graph import assemble_affinity  # local to keep module deps one-way
    full = assemble_affinity(ego, top, xcorr_cfg)
    ne, nt = full.n_ego, full.n_top
    top_index = {vid: k for k, vid in enumerate(full.top_ids)}
    truth_col = [top_index[scenario.truth[e]] for e in full.ego_ids]

    by_ratio: dict = {}
    for subset in _enumerate_subsets(ne, policy):
        idx = np.array([i * nt + k for i in subset for k in range(nt)], dtype=np.intp)
        sub = full.values[np.ix_(idx, idx)]
        eig = leading_eigenvector(sub, spectral_cfg)
        soft = soft_assignment(eig.vector, len(subset), nt)
        hard = hard_assignment(soft, sub)
        correct = sum(1 for row, k in hard.pairs if truth_col[subset[row]] == k)
        accuracy = correct / len(subset)
        ranks = ranks_of_truth(soft, [truth_col[i] for i in subset])
        ratio = len(subset) / nt
        by_ratio.setdefault(ratio, []).append((accuracy, float(np.mean(ranks))))

    rows = []
    for ratio in sorted(by_ratio):
        entries = by_ratio[ratio]
        rows.append(SweepRow(
            ratio=ratio,
            mean_accuracy=float(np.mean([a for a, _ in entries])),
            mean_rank=float(np.mean([r for _, r in entries])),
            n_subsets=len(entries)))
    return rows
