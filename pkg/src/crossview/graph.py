"""Per-view graphs and the pairwise-assignment affinity matrix.

Each view is one graph: a node per viewer (self-similarity matrix plus a
people-count series) and an edge per viewer pair (cross matrix). Candidate
pairings (ego i -> top k) are scored by the peak of the mean-normalized
cross-correlation between the corresponding matrices, and the scores are
arranged into the symmetric affinity matrix driving the spectral match.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientOverlapError, InvalidInputError, InvalidProblemError
from .features import (CountSeries, FeatureMatrix, FrameDescriptorSequence,
                       DetectionSeries, descriptor_similarity, ego_count_series,
                       fov_overlap_matrix, top_count_series)
from .geometry import GeometryConfig, Trajectory, orient
from .xcorr import FFTCache, XCorrConfig, xcorr1_max, xcorr2_max

VIEW_EGO = "ego"
VIEW_TOP = "top"


@dataclass(frozen=True)
class GraphNode:
    node_id: str
    unary: FeatureMatrix
    counts: CountSeries


@dataclass(frozen=True)
class ViewGraph:
    """One view (ego or top) as nodes plus one edge matrix per pair."""

    view: str
    nodes: list
    edges: dict  # (i, j) with i < j -> FeatureMatrix
    graph_id: str = ""

    def __post_init__(self):
        if self.view not in (VIEW_EGO, VIEW_TOP):
            raise InvalidInputError(f"unknown view {self.view!r}")
        n = len(self.nodes)
        if n < 1:
            raise InvalidInputError("a view graph needs at least one node")
        want = {(i, j) for i in range(n) for j in range(i + 1, n)}
        if set(self.edges.keys()) != want:
            raise InvalidInputError("edge set must cover exactly all unordered node pairs")
        if self.view == VIEW_TOP:
            sizes = {node.unary.values.shape[0] for node in self.nodes}
            if len(sizes) != 1:
                raise InvalidInputError("top-view matrices must share the frame count")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def node_ids(self) -> list:
        return [node.node_id for node in self.nodes]


@dataclass
class NodeDiagnostics:
    value: float
    matrix_term: float
    matrix_shift: tuple
    counts_term: float
    counts_shift: int
    overlap_failures: list = field(default_factory=list)


@dataclass(frozen=True)
class AffinityMatrix:
    """Square matrix over candidate pairings; row index = i * n_top + k."""

    values: np.ndarray
    n_ego: int
    n_top: int
    ego_ids: list
    top_ids: list
    node_diag: dict = field(default_factory=dict)   # (i, k) -> NodeDiagnostics
    edge_diag: dict = field(default_factory=dict)   # ((i, j), (k, l)) -> (value, shift)

    def pair_index(self, i: int, k: int) -> int:
        return i * self.n_top + k


def build_ego_graph(descriptors: list, detections: list,
                    cfg: XCorrConfig, graph_id: str = "") -> ViewGraph:
    """Graph over egocentric videos, nodes ordered by video id."""
    if not descriptors:
        raise InvalidInputError("no egocentric descriptor sequences")
    descriptors = sorted(descriptors, key=lambda d: d.video_id)
    det_by_id = {d.video_id: d for d in detections}
    if set(det_by_id) != {d.video_id for d in descriptors}:
        raise InvalidInputError("descriptor and detection video ids do not match")
    nodes = []
    for d in descriptors:
        unary = descriptor_similarity(d, d, cfg.gamma)
        counts = ego_count_series(det_by_id[d.video_id])
        if counts.values.size != d.n_frames:
            raise InvalidInputError(
                f"detections for {d.video_id!r} cover {counts.values.size} frames, "
                f"descriptors cover {d.n_frames}")
        nodes.append(GraphNode(node_id=d.video_id, unary=unary, counts=counts))
    edges = {}
    for i in range(len(descriptors)):
        for j in range(i + 1, len(descriptors)):
            edges[(i, j)] = descriptor_similarity(descriptors[i], descriptors[j], cfg.gamma)
    return ViewGraph(view=VIEW_EGO, nodes=nodes, edges=edges, graph_id=graph_id)


def build_top_graph(trajectories: list, geo: GeometryConfig,
                    graph_id: str = "") -> ViewGraph:
    """Graph over tracked top-view viewers, nodes ordered by viewer id."""
    if not trajectories:
        raise InvalidInputError("no top-view trajectories")
    trajectories = sorted(trajectories, key=lambda t: t.viewer_id)
    geo = geo.resolved_for(trajectories)
    tracks = [orient(t, geo) for t in trajectories]
    nodes = []
    for idx, track in enumerate(tracks):
        unary = fov_overlap_matrix(track, track, geo)
        others = [t for j, t in enumerate(trajectories) if j != idx]
        counts = top_count_series(track, others, geo)
        nodes.append(GraphNode(node_id=track.viewer_id, unary=unary, counts=counts))
    edges = {}
    for i in range(len(tracks)):
        for j in range(i + 1, len(tracks)):
            edges[(i, j)] = fov_overlap_matrix(tracks[i], tracks[j], geo)
    return ViewGraph(view=VIEW_TOP, nodes=nodes, edges=edges, graph_id=graph_id)


def node_affinity_detail(ego_node: GraphNode, top_node: GraphNode,
                         cfg: XCorrConfig, cache: FFTCache | None = None) -> NodeDiagnostics:
    """Blended node compatibility with per-term diagnostics.

    alpha weighs the matrix cross-correlation term against the count-series
    term; a term whose overlap requirement cannot be met contributes zero
    and is flagged.
    """
    failures = []
    try:
        m = xcorr2_max(ego_node.unary, top_node.unary, cfg, cache=cache)
        m_val, m_shift = m.value, m.shift
    except InsufficientOverlapError:
        m_val, m_shift = 0.0, (0, 0)
        failures.append("matrix")
    try:
        c = xcorr1_max(ego_node.counts, top_node.counts, cfg)
        c_val, c_shift = c.value, c.shift
    except InsufficientOverlapError:
        c_val, c_shift = 0.0, 0
        failures.append("counts")
    value = cfg.alpha * m_val + (1.0 - cfg.alpha) * c_val
    return NodeDiagnostics(value=value, matrix_term=m_val, matrix_shift=m_shift,
                           counts_term=c_val, counts_shift=c_shift,
                           overlap_failures=failures)


def node_affinity(ego_node: GraphNode, top_node: GraphNode, cfg: XCorrConfig) -> float:
    return node_affinity_detail(ego_node, top_node, cfg).value


def edge_affinity_detail(ego_edge: FeatureMatrix, top_edge: FeatureMatrix,
                         cfg: XCorrConfig, cache: FFTCache | None = None):
    res = xcorr2_max(ego_edge, top_edge, cfg, cache=cache)
    return res.value, res.shift


def edge_affinity(ego_edge: FeatureMatrix, top_edge: FeatureMatrix,
                  cfg: XCorrConfig) -> float:
    return edge_affinity_detail(ego_edge, top_edge, cfg)[0]


def _ordered_top_edges(top: ViewGraph) -> dict:
    """Edge matrices for all ordered top pairs; (l, k) is the stored (k, l)
    transposed so rows always follow the first index."""
    out = {}
    for (k, l), mat in top.edges.items():
        out[(k, l)] = mat
        out[(l, k)] = FeatureMatrix(values=np.ascontiguousarray(mat.values.T),
                                    kind=mat.kind, row_id=mat.col_id, col_id=mat.row_id)
    return out


def assemble_affinity(ego: ViewGraph, top: ViewGraph, cfg: XCorrConfig) -> AffinityMatrix:
    """Affinity over all candidate pairings of ego nodes to top nodes.

    Diagonal entries hold node affinities; entries coupling two distinct
    ego nodes with two distinct top nodes hold edge affinities; entries
    that would reuse a node on either side stay zero. The result is
    symmetric and nonnegative.
    """
    ne, nt = ego.n_nodes, top.n_nodes
    if ne > nt:
        raise InvalidProblemError(
            f"{ne} egocentric videos cannot match into {nt} top-view viewers")
    n = ne * nt
    values = np.zeros((n, n))
    cache = FFTCache()
    node_diag = {}
    edge_diag = {}

    for i in range(ne):
        for k in range(nt):
            diag = node_affinity_detail(ego.nodes[i], top.nodes[k], cfg, cache=cache)
            node_diag[(i, k)] = diag
            p = i * nt + k
            values[p, p] = diag.value

    if ne >= 2:
        top_edges = _ordered_top_edges(top)
        for (i, j), ego_edge in sorted(ego.edges.items()):
            for k in range(nt):
                for l in range(nt):
                    if k == l:
                        continue
                    v, shift = edge_affinity_detail(ego_edge, top_edges[(k, l)],
                                                    cfg, cache=cache)
                    edge_diag[((i, j), (k, l))] = (v, shift)
                    p = i * nt + k
                    q = j * nt + l
                    values[p, q] = v
                    values[q, p] = v

    return AffinityMatrix(values=values, n_ego=ne, n_top=nt,
                          ego_ids=ego.node_ids, top_ids=top.node_ids,
                          node_diag=node_diag, edge_diag=edge_diag)


def dump_affinity_debug(aff: AffinityMatrix, path) -> None:
    """Write the affinity matrix and per-pair correlation diagnostics to JSON."""
    doc = {
        "n_ego": aff.n_ego,
        "n_top": aff.n_top,
        "ego_ids": aff.ego_ids,
        "top_ids": aff.top_ids,
        "values": aff.values.tolist(),
        "nodes": [
            {
                "ego": aff.ego_ids[i], "top": aff.top_ids[k],
                "value": d.value,
                "matrix_term": d.matrix_term, "matrix_shift": list(d.matrix_shift),
                "counts_term": d.counts_term, "counts_shift": d.counts_shift,
                "overlap_failures": d.overlap_failures,
            }
            for (i, k), d in sorted(aff.node_diag.items())
        ],
        "edges": [
            {
                "ego_pair": [aff.ego_ids[i], aff.ego_ids[j]],
                "top_pair": [aff.top_ids[k], aff.top_ids[l]],
                "value": v, "shift": list(shift),
            }
            for ((i, j), (k, l)), (v, shift) in sorted(aff.edge_diag.items())
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
