"""Unary and pairwise feature construction for both views.

Descriptor-similarity matrices for egocentric videos, sector-overlap (IOU)
matrices for top-view tracks, and the people-count time series each view
contributes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .errors import InvalidInputError
from .geometry import (GeometryConfig, OrientedTrajectory, Trajectory,
                       points_in_polygons_batch, sector_polygons)

KIND_DESCRIPTOR = "descriptor-similarity"
KIND_FOV_IOU = "fov-iou"


@dataclass(frozen=True)
class FrameDescriptorSequence:
    """One fixed-dimension appearance vector per frame of an ego video."""

    video_id: str
    vectors: np.ndarray  # (T, D)
    fps: float = 30.0

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 1:
            raise InvalidInputError(f"descriptor array must be (T>=2, D>=1), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError(f"non-finite descriptors in {self.video_id!r}")
        object.__setattr__(self, "vectors", v)

    @property
    def n_frames(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class DetectionSeries:
    """Per-frame person detections (score, box height) for one ego video."""

    video_id: str
    frames: list  # list of (k, 2) float arrays, one per frame
    min_box_height: float = 0.0

    def __post_init__(self):
        cleaned = []
        for f, det in enumerate(self.frames):
            arr = np.asarray(det, dtype=np.float64).reshape(-1, 2)
            if arr.size and (arr[:, 0].min() < 0.0 or arr[:, 0].max() > 1.0):
                raise InvalidInputError(f"detection scores outside [0, 1] at frame {f}")
            if arr.size and arr[:, 1].min() <= 0.0:
                raise InvalidInputError(f"non-positive box height at frame {f}")
            cleaned.append(arr)
        object.__setattr__(self, "frames", cleaned)

    @property
    def n_frames(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class FeatureMatrix:
    """2D feature matrix; rows index frames of one entity, columns another."""

    values: np.ndarray
    kind: str
    row_id: str
    col_id: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.size == 0:
            raise InvalidInputError("feature matrix must be a nonempty 2D array")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("non-finite feature values")
        if v.min() < 0.0 or v.max() > 1.0:
            raise InvalidInputError("feature values must lie in [0, 1]")
        if self.kind not in (KIND_DESCRIPTOR, KIND_FOV_IOU):
            raise InvalidInputError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "values", v)

    @property
    def is_self(self) -> bool:
        return self.row_id == self.col_id


@dataclass(frozen=True)
class CountSeries:
    """People-count time series; integer counts (top) or score sums (ego)."""

    values: np.ndarray
    source: str  # "top" | "ego"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if v.size == 0 or not np.all(np.isfinite(v)) or v.min() < 0.0:
            raise InvalidInputError("count series must be nonempty, finite, nonnegative")
        if self.source not in ("top", "ego"):
            raise InvalidInputError(f"unknown count source {self.source!r}")
        if self.source == "top" and not np.all(v == np.round(v)):
            raise InvalidInputError("top-view counts must be integers")
        object.__setattr__(self, "values", v)


def descriptor_similarity(a: FrameDescriptorSequence, b: FrameDescriptorSequence,
                          gamma: float) -> FeatureMatrix:
    """exp(-gamma * ||a_p - b_q||) for every frame pair (p, q)."""
    if gamma <= 0.0:
        raise InvalidInputError("gamma must be positive")
    if a.dim != b.dim:
        raise InvalidInputError(f"descriptor dimensions differ: {a.dim} vs {b.dim}")
    dist = cdist(a.vectors, b.vectors, metric="euclidean")
    return FeatureMatrix(values=np.exp(-gamma * dist), kind=KIND_DESCRIPTOR,
                         row_id=a.video_id, col_id=b.video_id)


def fov_overlap_matrix(ti: OrientedTrajectory, tj: OrientedTrajectory,
                       cfg: GeometryConfig) -> FeatureMatrix:
    """Sector IOU for every frame pair of two top-view tracks.

    With ``ti is tj`` this is the track's self-overlap matrix (symmetric,
    unit diagonal); otherwise the pairwise matrix of viewers i and j.
    """
    if ti.n_frames != tj.n_frames:
        raise InvalidInputError("top-view tracks must share the frame count")
    polys_i, areas_i, boxes_i = sector_polygons(ti, cfg)
    if ti is tj:
        out = np.empty((ti.n_frames, ti.n_frames))
        _kernels.iou_matrix_symmetric(polys_i, areas_i, boxes_i, out)
    else:
        polys_j, areas_j, boxes_j = sector_polygons(tj, cfg)
        out = np.empty((ti.n_frames, tj.n_frames))
        _kernels.iou_matrix(polys_i, areas_i, boxes_i, polys_j, areas_j, boxes_j, out)
    np.clip(out, 0.0, 1.0, out=out)
    return FeatureMatrix(values=out, kind=KIND_FOV_IOU,
                         row_id=ti.viewer_id, col_id=tj.viewer_id)


def ego_count_series(d: DetectionSeries) -> CountSeries:
    """Per-frame sum of detection scores, ignoring boxes below the
    minimum height."""
    out = np.zeros(d.n_frames)
    for f, det in enumerate(d.frames):
        if det.size:
            keep = det[:, 1] >= d.min_box_height
            out[f] = det[keep, 0].sum()
    return CountSeries(values=out, source="ego")


def top_count_series(viewer: OrientedTrajectory, others: list[Trajectory],
                     cfg: GeometryConfig) -> CountSeries:
    """Number of other viewers inside the viewer's sector at each frame.

    The viewer's own trajectory must not be in ``others``.
    """
    t = viewer.n_frames
    if not others:
        return CountSeries(values=np.zeros(t), source="top")
    for o in others:
        if o.n_frames != t:
            raise InvalidInputError("all trajectories must share the frame count")
    polys, _, _ = sector_polygons(viewer, cfg)
    pts = np.stack([o.positions for o in others], axis=1)  # (T, K, 2)
    inside = points_in_polygons_batch(polys, pts)
    return CountSeries(values=inside.sum(axis=1).astype(np.float64), source="top")
