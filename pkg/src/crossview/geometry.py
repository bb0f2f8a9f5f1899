"""Top-view viewing geometry.

Turns tracked 2D trajectories into per-frame camera headings, truncated
field-of-view sectors (convex polygons), sector intersection-over-union
values, and people-in-view counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import DegenerateTrajectoryError, InvalidInputError


@dataclass(frozen=True)
class Trajectory:
    """Per-frame 2D position of one tracked viewer in top-view pixels."""

    viewer_id: str
    positions: np.ndarray  # (T, 2) float64
    fps: float = 30.0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise InvalidInputError(f"positions must be (T, 2), got {pos.shape}")
        if pos.shape[0] < 2:
            raise InvalidInputError("trajectory needs at least 2 frames")
        if not np.all(np.isfinite(pos)):
            raise InvalidInputError(f"non-finite coordinates in trajectory {self.viewer_id!r}")
        object.__setattr__(self, "positions", pos)

    @property
    def n_frames(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class OrientationSeries:
    """Camera heading per frame, radians in [-pi, pi).

    ``valid`` is False for leading frames before the first measurable
    motion; those frames copy the first valid angle.
    """

    angles: np.ndarray  # (T,) float64
    valid: np.ndarray   # (T,) bool


@dataclass(frozen=True)
class FovSector:
    """Truncated viewing cone: apex plus a sampled circular arc."""

    apex: np.ndarray      # (2,)
    polygon: np.ndarray   # (V, 2), CCW, apex first
    half_angle: float
    radius: float


@dataclass(frozen=True)
class GeometryConfig:
    """Knobs for heading estimation and sector construction.

    ``radius`` of None means "resolve from the scene", see
    :meth:`resolved_for`.
    """

    theta_d: float = math.pi / 6
    radius: float | None = None
    smoothing_window: int = 5
    speed_epsilon: float = 0.1
    arc_samples: int = 16

    def __post_init__(self):
        if not (0.0 < self.theta_d <= math.pi / 2):
            raise InvalidInputError("theta_d must be in (0, pi/2]")
        if self.radius is not None and not (self.radius > 0):
            raise InvalidInputError("radius must be positive")
        if self.smoothing_window < 3 or self.smoothing_window % 2 == 0:
            raise InvalidInputError("smoothing_window must be odd and >= 3")
        if self.arc_samples < 4:
            raise InvalidInputError("arc_samples must be >= 4")

    def resolved_for(self, trajectories) -> "GeometryConfig":
        """Fill a None radius with the scene bounding-box half-diagonal."""
        if self.radius is not None:
            return self
        return replace(self, radius=scene_radius(trajectories))

    def require_radius(self) -> float:
        if self.radius is None:
            raise InvalidInputError("geometry radius is unresolved; call resolved_for() first")
        return self.radius


@dataclass(frozen=True)
class OrientedTrajectory:
    """A trajectory bundled with its estimated orientation series."""

    trajectory: Trajectory
    orientation: OrientationSeries

    @property
    def viewer_id(self) -> str:
        return self.trajectory.viewer_id

    @property
    def n_frames(self) -> int:
        return self.trajectory.n_frames


def scene_radius(trajectories) -> float:
    """Half-diagonal of the bounding box of all trajectory positions."""
    pts = np.concatenate([t.positions for t in trajectories], axis=0)
    span = pts.max(axis=0) - pts.min(axis=0)
    r = 0.5 * float(np.hypot(span[0], span[1]))
    if r <= 0.0:
        raise InvalidInputError("scene has zero extent; cannot derive a sector radius")
    return r


def wrap_angle(a):
    """Wrap angles to [-pi, pi)."""
    return np.mod(np.asarray(a) + math.pi, 2.0 * math.pi) - math.pi


def estimate_orientation(traj: Trajectory, cfg: GeometryConfig) -> OrientationSeries:
    """Per-frame camera heading from the smoothed velocity direction.

    Central-difference velocities are averaged over a centered window of
    ``cfg.smoothing_window`` frames (truncated at the ends). Frames whose
    window-mean speed falls below ``cfg.speed_epsilon`` reuse the last
    valid heading; leading frames copy the first valid heading with
    ``valid`` False.
    """
    pos = traj.positions
    t = pos.shape[0]
    if t < 2:
        raise InvalidInputError("trajectory needs at least 2 frames")

    vel = np.empty_like(pos)
    vel[0] = pos[1] - pos[0]
    vel[-1] = pos[-1] - pos[-2]
    if t > 2:
        vel[1:-1] = 0.5 * (pos[2:] - pos[:-2])

    half = cfg.smoothing_window // 2
    csum = np.concatenate([np.zeros((1, 2)), np.cumsum(vel, axis=0)])
    lo = np.maximum(np.arange(t) - half, 0)
    hi = np.minimum(np.arange(t) + half + 1, t)
    mean_vel = (csum[hi] - csum[lo]) / (hi - lo)[:, None]

    speed = np.hypot(mean_vel[:, 0], mean_vel[:, 1])
    measurable = speed >= cfg.speed_epsilon
    if not measurable.any():
        raise DegenerateTrajectoryError(
            f"trajectory {traj.viewer_id!r} never moves; no orientation measurable")

    raw = np.arctan2(mean_vel[:, 1], mean_vel[:, 0])
    first = int(np.argmax(measurable))
    angles = np.empty(t)
    angles[:first + 1] = raw[first]
    for i in range(first + 1, t):
        angles[i] = raw[i] if measurable[i] else angles[i - 1]

    valid = np.zeros(t, dtype=bool)
    valid[first:] = True
    return OrientationSeries(angles=wrap_angle(angles), valid=valid)


def orient(traj: Trajectory, cfg: GeometryConfig) -> OrientedTrajectory:
    """Convenience: bundle a trajectory with its estimated orientation."""
    return OrientedTrajectory(trajectory=traj, orientation=estimate_orientation(traj, cfg))


def _sector_polygon(px, py, angle, cfg: GeometryConfig) -> np.ndarray:
    r = cfg.require_radius()
    arc = angle + np.linspace(-cfg.theta_d, cfg.theta_d, cfg.arc_samples)
    poly = np.empty((cfg.arc_samples + 1, 2))
    poly[0, 0] = px
    poly[0, 1] = py
    poly[1:, 0] = px + r * np.cos(arc)
    poly[1:, 1] = py + r * np.sin(arc)
    return poly


def fov_sector(position, angle: float, cfg: GeometryConfig) -> FovSector:
    """Convex sector polygon with apex at ``position`` spanning
    [angle - theta_d, angle + theta_d] at the configured radius."""
    if not np.all(np.isfinite(position)) or not math.isfinite(angle):
        raise InvalidInputError("position and angle must be finite")
    apex = np.asarray(position, dtype=np.float64)
    poly = _sector_polygon(apex[0], apex[1], angle, cfg)
    return FovSector(apex=apex, polygon=poly,
                     half_angle=cfg.theta_d, radius=cfg.require_radius())


def sector_polygons(track: OrientedTrajectory, cfg: GeometryConfig):
    """All per-frame sector polygons of a track, with areas and bboxes.

    Returns (polys (T, V, 2), areas (T,), boxes (T, 4)); the batch analogue
    of calling :func:`fov_sector` once per frame.
    """
    pos = track.trajectory.positions
    ang = track.orientation.angles
    r = cfg.require_radius()
    arc_off = np.linspace(-cfg.theta_d, cfg.theta_d, cfg.arc_samples)
    arc = ang[:, None] + arc_off[None, :]
    t = pos.shape[0]
    polys = np.empty((t, cfg.arc_samples + 1, 2))
    polys[:, 0, :] = pos
    polys[:, 1:, 0] = pos[:, 0:1] + r * np.cos(arc)
    polys[:, 1:, 1] = pos[:, 1:2] + r * np.sin(arc)
    areas = polygon_area_batch(polys)
    boxes = np.concatenate([polys.min(axis=1), polys.max(axis=1)], axis=1)
    return polys, areas, boxes


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area of a simple polygon (V, 2)."""
    x = poly[:, 0]
    y = poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def polygon_area_batch(polys: np.ndarray) -> np.ndarray:
    x = polys[:, :, 0]
    y = polys[:, :, 1]
    return 0.5 * np.abs(np.einsum("ij,ij->i", x, np.roll(y, -1, axis=1))
                        - np.einsum("ij,ij->i", np.roll(x, -1, axis=1), y))


def sector_iou(a: FovSector, b: FovSector) -> float:
    """Intersection-over-union of two sectors via convex clipping.

    Zero when disjoint; exactly 1.0 for identical polygons.
    """
    area_a = polygon_area(a.polygon)
    area_b = polygon_area(b.polygon)
    if area_a <= 0.0 or area_b <= 0.0:
        raise InvalidInputError("degenerate zero-area sector")
    inter = float(_kernels.convex_intersection_area(
        np.ascontiguousarray(a.polygon), np.ascontiguousarray(b.polygon)))
    denom = area_a + area_b - inter
    return inter / denom if denom > 0.0 else 0.0


def points_in_polygon(poly: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Boolean mask of points inside or on a convex CCW polygon.

    Boundary points count as inside, up to a tolerance that scales with
    the polygon extent.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    e0 = poly
    e1 = np.roll(poly, -1, axis=0)
    d = e1 - e0
    rel = pts[:, None, :] - e0[None, :, :]
    cross = d[None, :, 0] * rel[:, :, 1] - d[None, :, 1] * rel[:, :, 0]
    span = float(np.max(np.abs(poly)))
    tol = 1e-12 * max(1.0, span * span)
    return np.all(cross >= -tol, axis=1)


def count_in_fov(sector: FovSector, others) -> int:
    """Number of points inside (or on) a sector polygon."""
    pts = np.asarray(others, dtype=np.float64)
    if pts.size == 0:
        return 0
    if not np.all(np.isfinite(pts)):
        raise InvalidInputError("non-finite points")
    return int(np.count_nonzero(points_in_polygon(sector.polygon, pts)))


def points_in_polygons_batch(polys: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Per-frame convex containment test.

    polys (T, V, 2) against points (T, K, 2); returns (T, K) bool with the
    same boundary tolerance as :func:`points_in_polygon`.
    """
    e0 = polys
    e1 = np.roll(polys, -1, axis=1)
    d = e1 - e0                                   # (T, V, 2)
    rel = points[:, :, None, :] - e0[:, None, :, :]  # (T, K, V, 2)
    cross = d[:, None, :, 0] * rel[:, :, :, 1] - d[:, None, :, 1] * rel[:, :, :, 0]
    span = float(np.max(np.abs(polys)))
    tol = 1e-12 * max(1.0, span * span)
    return np.all(cross >= -tol, axis=2)
