"""File formats: trajectory/descriptor/detection CSVs, result and truth JSON.

All floats are written with shortest round-trip repr so rewriting identical
inputs produces byte-identical files.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import asdict

import numpy as np

from .errors import InvalidInputError
from .features import DetectionSeries, FrameDescriptorSequence
from .geometry import Trajectory

log = logging.getLogger("crossview")

DESCRIPTOR_SUFFIX = "_descriptors.csv"
DETECTION_SUFFIX = "_detections.csv"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trajectories_csv(path, trajectories) -> None:
    trajectories = sorted(trajectories, key=lambda t: t.viewer_id)
    with open(path, "w", newline="") as fh:
        fh.write("frame,viewer_id,x,y\n")
        n = trajectories[0].n_frames
        for frame in range(n):
            for t in trajectories:
                fh.write(f"{frame},{t.viewer_id},{_fmt(t.positions[frame, 0])},"
                         f"{_fmt(t.positions[frame, 1])}\n")


def read_trajectories_csv(path, fps: float = 30.0) -> list:
    """Read `frame,viewer_id,x,y` rows; frames must be dense 0..T-1 per
    viewer and all viewers must share T."""
    per_viewer: dict = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["frame", "viewer_id", "x", "y"]:
            raise InvalidInputError(f"{path}: expected header frame,viewer_id,x,y")
        for row in reader:
            try:
                frame = int(row["frame"])
                x = float(row["x"])
                y = float(row["y"])
            except (TypeError, ValueError) as exc:
                raise InvalidInputError(f"{path}: bad row {row}") from exc
            per_viewer.setdefault(row["viewer_id"], []).append((frame, x, y))
    if not per_viewer:
        raise InvalidInputError(f"{path}: no trajectory rows")
    out = []
    lengths = set()
    for vid in sorted(per_viewer):
        rows = sorted(per_viewer[vid])
        frames = [r[0] for r in rows]
        if frames != list(range(len(rows))):
            raise InvalidInputError(f"{path}: frames for {vid!r} are not dense 0..T-1")
        pos = np.array([(x, y) for _, x, y in rows])
        lengths.add(len(rows))
        out.append(Trajectory(viewer_id=vid, positions=pos, fps=fps))
    if len(lengths) != 1:
        raise InvalidInputError(f"{path}: viewers disagree on frame count {sorted(lengths)}")
    return out


def write_descriptors_csv(path, seq: FrameDescriptorSequence) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("frame," + ",".join(f"f{i}" for i in range(seq.dim)) + "\n")
        for frame in range(seq.n_frames):
            fh.write(str(frame) + "," + ",".join(_fmt(v) for v in seq.vectors[frame]) + "\n")


def read_descriptors_csv(path, video_id: str, fps: float = 30.0) -> FrameDescriptorSequence:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "frame" or len(header) < 2:
            raise InvalidInputError(f"{path}: expected header frame,f0,...")
        dim = len(header) - 1
        rows = []
        for row in reader:
            if len(row) != dim + 1:
                raise InvalidInputError(f"{path}: row width mismatch")
            rows.append((int(row[0]), [float(v) for v in row[1:]]))
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise InvalidInputError(f"{path}: frames are not dense 0..T-1")
    return FrameDescriptorSequence(video_id=video_id,
                                   vectors=np.array([r[1] for r in rows]), fps=fps)


def write_detections_csv(path, det: DetectionSeries) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("frame,score,box_height\n")
        for frame, arr in enumerate(det.frames):
            for score, height in arr:
                fh.write(f"{frame},{_fmt(score)},{_fmt(height)}\n")


def read_detections_csv(path, video_id: str, n_frames: int,
                        min_box_height: float = 0.0) -> DetectionSeries:
    """Rows are (frame, one detection); frames with no detections may be
    absent, which is why the frame count comes from the descriptor file."""
    frames = [[] for _ in range(n_frames)]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["frame", "score", "box_height"]:
            raise InvalidInputError(f"{path}: expected header frame,score,box_height")
        for row in reader:
            try:
                frame = int(row["frame"])
                score = float(row["score"])
                height = float(row["box_height"])
            except (TypeError, ValueError) as exc:
                raise InvalidInputError(f"{path}: bad row {row}") from exc
            if not (0 <= frame < n_frames):
                raise InvalidInputError(f"{path}: frame {frame} outside 0..{n_frames - 1}")
            frames[frame].append((score, height))
    return DetectionSeries(video_id=video_id, frames=frames,
                           min_box_height=min_box_height)


def load_ego_dir(ego_dir, min_box_height: float | None = None):
    """Load all `<id>_descriptors.csv` (+ optional `<id>_detections.csv`)
    from a directory.

    When ``min_box_height`` is None it is taken from a sibling
    scenario.json if present, else 0 (no exclusion).
    """
    if not os.path.isdir(ego_dir):
        raise InvalidInputError(f"not a directory: {ego_dir}")
    if min_box_height is None:
        min_box_height = 0.0
        for probe in (os.path.join(ego_dir, "scenario.json"),
                      os.path.join(os.path.dirname(os.path.abspath(ego_dir)), "scenario.json")):
            if os.path.isfile(probe):
                with open(probe) as fh:
                    min_box_height = float(json.load(fh).get("min_box_height", 0.0))
                break
    names = sorted(n for n in os.listdir(ego_dir) if n.endswith(DESCRIPTOR_SUFFIX))
    if not names:
        raise InvalidInputError(f"no *{DESCRIPTOR_SUFFIX} files in {ego_dir}")
    descriptors = []
    detections = []
    for name in names:
        vid = name[:-len(DESCRIPTOR_SUFFIX)]
        seq = read_descriptors_csv(os.path.join(ego_dir, name), vid)
        descriptors.append(seq)
        det_path = os.path.join(ego_dir, vid + DETECTION_SUFFIX)
        if os.path.isfile(det_path):
            detections.append(read_detections_csv(det_path, vid, seq.n_frames,
                                                  min_box_height))
        else:
            log.warning("no detections file for %s; using empty series", vid)
            detections.append(DetectionSeries(video_id=vid,
                                              frames=[[] for _ in range(seq.n_frames)],
                                              min_box_height=min_box_height))
    return descriptors, detections


def load_scenario_dir(path, min_box_height: float | None = None):
    """Load a scenario directory written by :func:`write_scenario` into a
    pipeline-ready bundle (trajectories, ego data, truth)."""
    top_csv = os.path.join(path, "top_trajectories.csv")
    ego_dir = os.path.join(path, "ego")
    truth_path = os.path.join(path, "truth.json")
    for p in (top_csv, ego_dir, truth_path):
        if not os.path.exists(p):
            raise InvalidInputError(f"scenario directory is missing {p}")
    descriptors, detections = load_ego_dir(ego_dir, min_box_height)

    class _Bundle:
        pass

    bundle = _Bundle()
    bundle.trajectories = read_trajectories_csv(top_csv)
    bundle.ego_descriptors = descriptors
    bundle.ego_detections = detections
    bundle.truth = read_truth_json(truth_path)
    return bundle


def write_truth_json(path, truth: dict) -> None:
    with open(path, "w") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_truth_json(path) -> dict:
    with open(path) as fh:
        truth = json.load(fh)
    if not isinstance(truth, dict) or not truth:
        raise InvalidInputError(f"{path}: truth must be a nonempty ego->viewer mapping")
    return {str(k): str(v) for k, v in truth.items()}


def write_scenario(scenario, out_dir) -> None:
    """Write a scenario as the CSV/JSON bundle the pipeline consumes."""
    os.makedirs(out_dir, exist_ok=True)
    ego_dir = os.path.join(out_dir, "ego")
    os.makedirs(ego_dir, exist_ok=True)
    write_trajectories_csv(os.path.join(out_dir, "top_trajectories.csv"),
                           scenario.trajectories)
    for seq in scenario.ego_descriptors:
        write_descriptors_csv(os.path.join(ego_dir, seq.video_id + DESCRIPTOR_SUFFIX), seq)
    for det in scenario.ego_detections:
        write_detections_csv(os.path.join(ego_dir, det.video_id + DETECTION_SUFFIX), det)
    write_truth_json(os.path.join(out_dir, "truth.json"), scenario.truth)
    cfg = asdict(scenario.config)
    cfg["waypoint_speed"] = list(cfg["waypoint_speed"])
    doc = {
        "config": cfg,
        "geometry": asdict(scenario.geometry),
        "min_box_height": scenario.ego_detections[0].min_box_height
        if scenario.ego_detections else 0.0,
        "viewer_ids": [t.viewer_id for t in scenario.trajectories],
        "ego_ids": [d.video_id for d in scenario.ego_descriptors],
    }
    with open(os.path.join(out_dir, "scenario.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_assignment_json(path, result, config_echo: dict) -> None:
    doc = {
        "kind": "assignment",
        "ego_ids": result.ego_ids,
        "top_ids": result.top_ids,
        "soft": result.soft.matrix.tolist(),
        "zero_rows": result.soft.zero_rows.tolist(),
        "pairs": result.assignment,
        "score": result.score,
        "score_normalized": result.score / float(len(result.ego_ids) ** 2),
        "shifts": {e: list(s) for e, s in result.shifts.items()},
        "eigenvalue": result.eigenvalue,
        "residual": result.residual,
        "iterations": result.iterations,
        "config": config_echo,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_assignment_json(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("kind") != "assignment":
        raise InvalidInputError(f"{path}: not an assignment result")
    return doc


def read_manifest(path) -> list:
    """Candidate manifest: {"candidates": [{"id":..., "trajectories": path}]}.

    Relative paths resolve against the manifest's directory; every path
    must exist.
    """
    with open(path) as fh:
        doc = json.load(fh)
    entries = doc.get("candidates")
    if not isinstance(entries, list) or not entries:
        raise InvalidInputError(f"{path}: manifest needs a nonempty 'candidates' list")
    base = os.path.dirname(os.path.abspath(path))
    out = []
    for e in entries:
        if "id" not in e or "trajectories" not in e:
            raise InvalidInputError(f"{path}: candidate entries need 'id' and 'trajectories'")
        p = e["trajectories"]
        if not os.path.isabs(p):
            p = os.path.join(base, p)
        if not os.path.isfile(p):
            raise InvalidInputError(f"{path}: missing candidate file {p}")
        out.append((str(e["id"]), p))
    return out


def write_rank_csv(path, ranked) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("rank,candidate_id,score,score_normalized,feasible,n_top\n")
        for r in ranked:
            fh.write(f"{r.rank},{r.candidate_id},{_fmt(r.score)},"
                     f"{_fmt(r.score_normalized)},{int(r.feasible)},{r.n_top}\n")


def write_metrics_csv(path, rows) -> None:
    """rows: (result_id, n_ego, n_top, accuracy, score)."""
    with open(path, "w", newline="") as fh:
        fh.write("result_id,n_ego,n_top,accuracy,score\n")
        for rid, ne, nt, acc, score in rows:
            fh.write(f"{rid},{ne},{nt},{_fmt(acc)},{_fmt(score)}\n")


def write_cmc_csv(path, curve) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("rank,fraction\n")
        for k, frac in enumerate(curve, start=1):
            fh.write(f"{k},{_fmt(frac)}\n")


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("ratio,mean_accuracy,mean_rank,n_subsets\n")
        for r in rows:
            fh.write(f"{_fmt(r.ratio)},{_fmt(r.mean_accuracy)},"
                     f"{_fmt(r.mean_rank)},{r.n_subsets}\n")
