"""Spectral soft assignment and Munkres hard assignment.

The affinity matrix's leading eigenvector (deterministic power iteration
from a uniform start) is reshaped into a row-normalized soft assignment;
the hard assignment maximizes total soft probability with a lexicographic
tie-break and is scored by the induced quadratic affinity sum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateAffinityError, InvalidInputError, InvalidProblemError
from .graph import (AffinityMatrix, ViewGraph, assemble_affinity,
                    node_affinity_detail)
from .xcorr import FFTCache, XCorrConfig


@dataclass(frozen=True)
class SpectralConfig:
    tolerance: float = 1e-9
    max_iterations: int = 1000

    def __post_init__(self):
        if self.tolerance <= 0.0:
            raise InvalidInputError("tolerance must be positive")
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")


class EigenResult(NamedTuple):
    vector: np.ndarray
    eigenvalue: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class SoftAssignment:
    """Row-normalized pairing probabilities; all-zero rows are flagged
    instead of normalized."""

    matrix: np.ndarray      # (n_ego, n_top)
    zero_rows: np.ndarray   # (n_ego,) bool


@dataclass(frozen=True)
class HardAssignment:
    """Injective ego -> top matching by node index, with its xT A x score."""

    pairs: list   # [(ego_index, top_index)]
    score: float


@dataclass(frozen=True)
class AssignmentResult:
    """Full output of matching one ego graph against one top graph."""

    ego_ids: list
    top_ids: list
    soft: SoftAssignment
    hard: HardAssignment
    assignment: dict          # ego_id -> top_id
    score: float
    shifts: dict              # ego_id -> (dr, dc) recovered matrix-term shift
    eigenvalue: float
    residual: float
    iterations: int
    affinity: AffinityMatrix


def _affinity_values(a) -> np.ndarray:
    vals = np.asarray(getattr(a, "values", a), dtype=np.float64)
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1] or vals.size == 0:
        raise InvalidInputError("affinity must be a nonempty square matrix")
    return vals


def leading_eigenvector(a, cfg: SpectralConfig = SpectralConfig()) -> EigenResult:
    """Dominant eigenpair by power iteration from the uniform positive vector.

    Stops when the iterate changes by at most ``cfg.tolerance`` in L2 norm
    or after ``cfg.max_iterations``; the achieved residual ||A p - lam p||
    is reported either way. Raises DegenerateAffinityError on a zero matrix.
    """
    vals = _affinity_values(a)
    n = vals.shape[0]
    if not vals.any():
        raise DegenerateAffinityError("affinity matrix is identically zero")
    x = np.full(n, 1.0 / math.sqrt(n))
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        y = vals @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            raise DegenerateAffinityError("power iteration hit the null space")
        x_new = y / norm
        delta = float(np.linalg.norm(x_new - x))
        x = x_new
        if delta <= cfg.tolerance:
            break
    lam = float(x @ (vals @ x))
    residual = float(np.linalg.norm(vals @ x - lam * x))
    return EigenResult(vector=x, eigenvalue=lam, residual=residual, iterations=iterations)


def soft_assignment(p: np.ndarray, n_ego: int, n_top: int) -> SoftAssignment:
    """Reshape an assignment-probability vector row-major and normalize rows."""
    vec = np.asarray(p, dtype=np.float64).ravel()
    if vec.size != n_ego * n_top:
        raise InvalidInputError(f"vector length {vec.size} != {n_ego} * {n_top}")
    if vec.min() < 0.0:
        raise InvalidInputError("assignment probabilities must be nonnegative")
    mat = vec.reshape(n_ego, n_top).copy()
    sums = mat.sum(axis=1)
    zero = sums == 0.0
    mat[~zero] /= sums[~zero, None]
    return SoftAssignment(matrix=mat, zero_rows=zero)


def _lap_max_total(profit: np.ndarray) -> float:
    if profit.shape[0] == 0:
        return 0.0
    rows, cols = linear_sum_assignment(profit, maximize=True)
    return float(profit[rows, cols].sum())


def _lex_max_assignment(profit: np.ndarray) -> list:
    """Maximum-total assignment, lexicographically smallest among optima.

    Rows are fixed in order; each row takes the smallest column that still
    admits an optimal completion (exact float comparison, so genuine ties
    fall to the lower top index).
    """
    ne, nt = profit.shape
    if ne > nt:
        raise InvalidProblemError(f"cannot assign {ne} rows into {nt} columns")
    available = list(range(nt))
    pairs = []
    for i in range(ne):
        best_j = None
        best_total = -np.inf
        for pos, j in enumerate(available):
            rest = [c for c in available if c != j]
            total = profit[i, j] + _lap_max_total(profit[i + 1:, rest])
            if total > best_total:
                best_total = total
                best_j = j
        pairs.append((i, best_j))
        available.remove(best_j)
    return pairs


def indicator_score(a, pairs, n_top: int | None = None) -> float:
    """Quadratic score of a hard assignment: sum of affinity entries over
    all selected pairing-index combinations."""
    vals = _affinity_values(a)
    nt = n_top if n_top is not None else getattr(a, "n_top", None)
    if nt is None:
        raise InvalidInputError("n_top required to index the affinity matrix")
    idx = np.array([i * nt + k for i, k in pairs], dtype=np.intp)
    return float(vals[np.ix_(idx, idx)].sum())


def hard_assignment(p: SoftAssignment, a) -> HardAssignment:
    """Munkres-style maximum-probability matching scored against the
    affinity matrix."""
    profit = p.matrix if isinstance(p, SoftAssignment) else np.asarray(p, dtype=np.float64)
    pairs = _lex_max_assignment(profit)
    score = indicator_score(a, pairs, n_top=profit.shape[1])
    return HardAssignment(pairs=pairs, score=score)


def match_graphs(ego: ViewGraph, top: ViewGraph, xcorr_cfg: XCorrConfig,
                 spectral_cfg: SpectralConfig = SpectralConfig()) -> AssignmentResult:
    """Run the full pipeline: affinity, eigenvector, soft and hard assignment."""
    aff = assemble_affinity(ego, top, xcorr_cfg)
    eig = leading_eigenvector(aff, spectral_cfg)
    soft = soft_assignment(eig.vector, aff.n_ego, aff.n_top)
    hard = hard_assignment(soft, aff)
    assignment = {aff.ego_ids[i]: aff.top_ids[k] for i, k in hard.pairs}
    shifts = {aff.ego_ids[i]: aff.node_diag[(i, k)].matrix_shift for i, k in hard.pairs}
    return AssignmentResult(
        ego_ids=aff.ego_ids, top_ids=aff.top_ids, soft=soft, hard=hard,
        assignment=assignment, score=hard.score, shifts=shifts,
        eigenvalue=eig.eigenvalue, residual=eig.residual,
        iterations=eig.iterations, affinity=aff)


def node_profit_matrix(ego: ViewGraph, top: ViewGraph, cfg: XCorrConfig,
                       mode: str = "combined") -> np.ndarray:
    """Node-affinity profit matrix for bipartite baselines.

    mode: "combined" (alpha blend), "matrix" (2D unary term only) or
    "counts" (1D count term only).
    """
    if mode not in ("combined", "matrix", "counts"):
        raise InvalidInputError(f"unknown profit mode {mode!r}")
    cache = FFTCache()
    out = np.zeros((ego.n_nodes, top.n_nodes))
    for i, en in enumerate(ego.nodes):
        for k, tn in enumerate(top.nodes):
            d = node_affinity_detail(en, tn, cfg, cache=cache)
            if mode == "combined":
                out[i, k] = d.value
            elif mode == "matrix":
                out[i, k] = d.matrix_term
            else:
                out[i, k] = d.counts_term
    return out


def baseline_assignment(ego: ViewGraph, top: ViewGraph, cfg: XCorrConfig,
                        mode: str) -> dict:
    """Hungarian matching on node affinities alone (no edge terms)."""
    if ego.n_nodes > top.n_nodes:
        raise InvalidProblemError("more ego videos than top-view viewers")
    profit = node_profit_matrix(ego, top, cfg, mode=mode)
    pairs = _lex_max_assignment(profit)
    return {ego.node_ids[i]: top.node_ids[k] for i, k in pairs}


@dataclass(frozen=True)
class RankedCandidate:
    candidate_id: str
    score: float
    score_normalized: float
    feasible: bool
    rank: int
    n_top: int


def _score_one_candidate(ego, cand, xcorr_cfg, spectral_cfg, use_edges):
    if cand.n_nodes < ego.n_nodes:
        return -np.inf, -np.inf
    if use_edges:
        res = match_graphs(ego, cand, xcorr_cfg, spectral_cfg)
        score = res.score
    else:
        profit = node_profit_matrix(ego, cand, xcorr_cfg, mode="combined")
        pairs = _lex_max_assignment(profit)
        score = float(sum(profit[i, k] for i, k in pairs))
    return score, score / float(ego.n_nodes ** 2)


def rank_top_videos(ego: ViewGraph, candidates: list, xcorr_cfg: XCorrConfig,
                    spectral_cfg: SpectralConfig = SpectralConfig(),
                    use_edges: bool = True, jobs: int = 1) -> list:
    """Score every candidate top-view graph against the ego graph and rank
    them by descending quadratic score.

    Candidates with fewer viewers than ego videos are infeasible: flagged,
    scored -inf, and ranked last. The normalized score divides by the
    squared number of ego videos for cross-size comparisons (reported, not
    used for ordering).
    """
    if not candidates:
        raise InvalidInputError("no candidate top-view graphs")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(
                lambda c: _score_one_candidate(ego, c, xcorr_cfg, spectral_cfg, use_edges),
                candidates))
    else:
        scored = [_score_one_candidate(ego, c, xcorr_cfg, spectral_cfg, use_edges)
                  for c in candidates]
    order = sorted(range(len(candidates)), key=lambda idx: (-scored[idx][0], idx))
    ranked = []
    for rank, idx in enumerate(order, start=1):
        cand = candidates[idx]
        score, norm = scored[idx]
        ranked.append(RankedCandidate(
            candidate_id=cand.graph_id or f"candidate{idx}",
            score=float(score), score_normalized=float(norm),
            feasible=bool(np.isfinite(score)), rank=rank, n_top=cand.n_nodes))
    return ranked
