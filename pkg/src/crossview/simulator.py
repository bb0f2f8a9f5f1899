"""Synthetic scenario generator with ground-truth identity labels.

Viewers follow seeded random-waypoint trajectories inside a square arena.
A static random appearance field over the arena supplies per-frame ego
descriptors: each frame's descriptor is the sector-area-weighted mean of
the field cells the viewer's FOV covers, so FOV overlap and descriptor
similarity agree by construction. Detection series mimic a person
detector looking out of the same FOV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidInputError
from .features import DetectionSeries, FrameDescriptorSequence
from .geometry import (FovSector, GeometryConfig, OrientedTrajectory,
                       Trajectory, orient, points_in_polygons_batch,
                       sector_polygons)

GRID_CELLS = 32  # square arena split into cells of arena_radius / 16

# Detection box heights scale as height_at_radius * radius / distance, so
# every true detection clears the minimum height exactly at max range.
HEIGHT_AT_RADIUS = 170.0


@dataclass(frozen=True)
class ScenarioConfig:
    arena_radius: float
    n_viewers: int
    n_ego: int
    n_frames: int
    descriptor_dim: int = 32
    waypoint_speed: tuple = (1.0, 3.0)
    descriptor_noise_sigma: float = 0.0
    detection_fp_rate: float = 0.0
    detection_fn_rate: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.arena_radius <= 0:
            raise InvalidInputError("arena_radius must be positive")
        if self.n_viewers < 1:
            raise InvalidInputError("n_viewers must be >= 1")
        if not (1 <= self.n_ego <= self.n_viewers):
            raise InvalidInputError("n_ego must be in [1, n_viewers]")
        if self.n_frames < 2:
            raise InvalidInputError("n_frames must be >= 2")
        if self.descriptor_dim < 1:
            raise InvalidInputError("descriptor_dim must be >= 1")
        lo, hi = self.waypoint_speed
        if not (0.0 < lo <= hi):
            raise InvalidInputError("waypoint_speed must satisfy 0 < lo <= hi")
        if self.descriptor_noise_sigma < 0:
            raise InvalidInputError("descriptor_noise_sigma must be >= 0")
        for rate in (self.detection_fp_rate, self.detection_fn_rate):
            if not (0.0 <= rate < 1.0):
                raise InvalidInputError("detection rates must be in [0, 1)")


@dataclass(frozen=True)
class AppearanceField:
    """Static unit-norm descriptor per grid cell, indexed [ix, iy]."""

    origin: tuple        # lower-left corner of the grid
    cell_size: float
    vectors: np.ndarray  # (GRID_CELLS, GRID_CELLS, D)


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    geometry: GeometryConfig
    trajectories: list        # all viewers, ids v0..v{n-1}
    ego_descriptors: list     # FrameDescriptorSequence, ids e0..e{k-1}
    ego_detections: list      # DetectionSeries, matching ids
    truth: dict               # ego_id -> viewer_id
    field: AppearanceField


def _random_waypoint_positions(rng: np.random.Generator, half: float,
                               speed_lo: float, speed_hi: float, t: int) -> np.ndarray:
    pos = np.empty((t, 2))
    p = rng.uniform(-half, half, 2)
    wp = rng.uniform(-half, half, 2)
    speed = rng.uniform(speed_lo, speed_hi)
    for frame in range(t):
        pos[frame] = p
        d = wp - p
        dist = math.hypot(d[0], d[1])
        if dist <= speed:
            p = wp.copy()
            while True:
                wp = rng.uniform(-half, half, 2)
                if math.hypot(wp[0] - p[0], wp[1] - p[1]) > 1e-9:
                    break
            speed = rng.uniform(speed_lo, speed_hi)
        else:
            p = p + d * (speed / dist)
        np.clip(p, -half, half, out=p)  # safety; waypoints are interior
    return pos


def render_ego_descriptor(field: AppearanceField, sector: FovSector,
                          noise_sigma: float, rng: np.random.Generator) -> np.ndarray:
    """Area-weighted mean of the field cells a sector covers, plus optional
    Gaussian noise, renormalized to unit norm.

    A sector with no arena overlap yields the all-zeros sentinel.
    """
    w = _kernels.cell_overlap_weights(
        np.ascontiguousarray(sector.polygon),
        field.origin[0], field.origin[1], field.cell_size, GRID_CELLS)
    total = w.sum()
    dim = field.vectors.shape[2]
    if total <= 0.0:
        return np.zeros(dim)
    v = np.einsum("xy,xyd->d", w, field.vectors) / total
    if noise_sigma > 0.0:
        v = v + rng.normal(0.0, noise_sigma, dim)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return np.zeros(dim)
    return v / norm


def render_detections(viewer: OrientedTrajectory, others: list, cfg: ScenarioConfig,
                      geo: GeometryConfig, rng: np.random.Generator) -> DetectionSeries:
    """Detector-like output: one detection per other viewer inside the FOV
    (dropped with the false-negative rate), plus per-frame spurious
    detections with the false-positive rate."""
    t = viewer.n_frames
    for o in others:
        if o.n_frames != t:
            raise InvalidInputError("all trajectories must share the frame count")
    radius = geo.require_radius()
    h_min = HEIGHT_AT_RADIUS
    polys, _, _ = sector_polygons(viewer, geo)
    if others:
        pts = np.stack([o.positions for o in others], axis=1)
        inside = points_in_polygons_batch(polys, pts)
    else:
        inside = np.zeros((t, 0), dtype=bool)
    own = viewer.trajectory.positions
    frames = []
    for f in range(t):
        dets = []
        for k in range(inside.shape[1]):
            if not inside[f, k]:
                continue
            if cfg.detection_fn_rate > 0.0 and rng.uniform() < cfg.detection_fn_rate:
                continue
            dist = math.hypot(pts[f, k, 0] - own[f, 0], pts[f, k, 1] - own[f, 1])
            height = h_min * radius / max(dist, 1.0)
            dets.append((rng.uniform(0.7, 1.0), height))
        if cfg.detection_fp_rate > 0.0 and rng.uniform() < cfg.detection_fp_rate:
            dets.append((rng.uniform(0.1, 0.5), rng.uniform(h_min, 4.0 * h_min)))
        frames.append(np.array(dets, dtype=np.float64).reshape(-1, 2))
    return DetectionSeries(video_id=viewer.viewer_id, frames=frames,
                           min_box_height=h_min)


def generate_scenario(cfg: ScenarioConfig,
                      geo: GeometryConfig | None = None) -> Scenario:
    """Fully seeded scenario: trajectories, appearance field, ego data.

    The draw order is fixed (trajectories viewer by viewer, then the
    field, the ego-to-viewer labels, then each ego video's descriptors
    and detections), so equal configs give bit-identical scenarios.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    half = cfg.arena_radius
    lo, hi = cfg.waypoint_speed

    trajectories = [
        Trajectory(viewer_id=f"v{i}",
                   positions=_random_waypoint_positions(rng, half, lo, hi, cfg.n_frames))
        for i in range(cfg.n_viewers)
    ]

    vecs = rng.normal(size=(GRID_CELLS, GRID_CELLS, cfg.descriptor_dim))
    vecs /= np.linalg.norm(vecs, axis=2, keepdims=True)
    field = AppearanceField(origin=(-half, -half),
                            cell_size=half / 16.0, vectors=vecs)

    chosen = rng.permutation(cfg.n_viewers)[:cfg.n_ego]
    truth = {f"e{j}": f"v{int(v)}" for j, v in enumerate(chosen)}

    geo = (geo or GeometryConfig()).resolved_for(trajectories)
    descriptors = []
    detections = []
    for j, v in enumerate(chosen):
        track = orient(trajectories[int(v)], geo)
        polys, _, _ = sector_polygons(track, geo)
        frames = np.empty((cfg.n_frames, cfg.descriptor_dim))
        for f in range(cfg.n_frames):
            sector = FovSector(apex=track.trajectory.positions[f], polygon=polys[f],
                               half_angle=geo.theta_d, radius=geo.require_radius())
            frames[f] = render_ego_descriptor(field, sector,
                                              cfg.descriptor_noise_sigma, rng)
        descriptors.append(FrameDescriptorSequence(video_id=f"e{j}", vectors=frames))
        others = [t for t in trajectories if t.viewer_id != track.viewer_id]
        det = render_detections(track, others, cfg, geo, rng)
        detections.append(DetectionSeries(video_id=f"e{j}", frames=det.frames,
                                          min_box_height=det.min_box_height))
    return Scenario(config=cfg, geometry=geo, trajectories=trajectories,
                    ego_descriptors=descriptors, ego_detections=detections,
                    truth=truth, field=field)


def delayed_ego_views(scenario: Scenario, delay: int):
    """Ego data as if every ego camera started ``delay`` frames after the
    top-view camera: the first ``delay`` frames are dropped."""
    if delay < 0 or delay >= scenario.config.n_frames - 1:
        raise InvalidInputError("delay must leave at least 2 overlapping frames")
    descriptors = [FrameDescriptorSequence(video_id=d.video_id, vectors=d.vectors[delay:])
                   for d in scenario.ego_descriptors]
    detections = [DetectionSeries(video_id=d.video_id, frames=d.frames[delay:],
                                  min_box_height=d.min_box_height)
                  for d in scenario.ego_detections]
    return descriptors, detections
