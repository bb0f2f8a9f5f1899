"""Command-line front end: simulate, assign, rank, evaluate.

Exit codes: 0 success, 2 input or configuration error, 3 infeasible
problem (more ego videos than top-view viewers).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .config import load_run_config
from .errors import CrossviewError, InvalidInputError, InvalidProblemError
from .evaluation import (SubsetPolicy, assignment_accuracy, cmc_curve,
                         completeness_sweep, ranks_of_truth)
from .graph import build_ego_graph, build_top_graph, dump_affinity_debug
from .matching import match_graphs, rank_top_videos
from .simulator import generate_scenario
from . import io as cvio

log = logging.getLogger("crossview")


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--theta-d", type=float, dest="theta_d",
                   help="FOV half-angle in radians")
    p.add_argument("--alpha", type=float, help="matrix-vs-counts blend weight")
    p.add_argument("--gamma", type=float, help="descriptor similarity decay")
    p.add_argument("--min-overlap", type=float, dest="min_overlap",
                   help="minimum overlap fraction for cross-correlation")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--jobs", type=int, help="parallel candidate jobs")


def _load_cfg(args):
    return load_run_config(args.config, theta_d=args.theta_d, alpha=args.alpha,
                           gamma=args.gamma, min_overlap=args.min_overlap,
                           seed=args.seed, jobs=args.jobs)


def cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    scenario = generate_scenario(cfg.scenario_config(), geo=cfg.geometry)
    cvio.write_scenario(scenario, args.out)
    print(f"wrote scenario to {args.out}")
    return 0


def _load_ego_graph(args, cfg):
    descriptors, detections = cvio.load_ego_dir(args.ego_dir, cfg.min_box_height)
    return build_ego_graph(descriptors, detections, cfg.xcorr)


def cmd_assign(args) -> int:
    cfg = _load_cfg(args)
    ego = _load_ego_graph(args, cfg)
    top = build_top_graph(cvio.read_trajectories_csv(args.top), cfg.geometry)
    result = match_graphs(ego, top, cfg.xcorr, cfg.spectral)
    cvio.write_assignment_json(args.out, result, cfg.echo())
    if args.dump_affinity:
        dump_affinity_debug(result.affinity, args.dump_affinity)
    print(f"wrote assignment to {args.out} (score {result.score:.6g})")
    return 0


def cmd_rank(args) -> int:
    cfg = _load_cfg(args)
    ego = _load_ego_graph(args, cfg)
    entries = cvio.read_manifest(args.manifest)
    candidates = [
        build_top_graph(cvio.read_trajectories_csv(path), cfg.geometry, graph_id=cid)
        for cid, path in entries
    ]
    ranked = rank_top_videos(ego, candidates, cfg.xcorr, cfg.spectral,
                             jobs=max(1, cfg.jobs))
    cvio.write_rank_csv(args.out, ranked)
    if not args.no_figures:
        from . import reports
        reports.save_rank_figure(ranked, os.path.splitext(args.out)[0] + ".png")
    print(f"wrote ranking of {len(ranked)} candidates to {args.out}")
    return 0


def _merge_truth(paths) -> dict:
    truth: dict = {}
    for p in paths:
        part = cvio.read_truth_json(p)
        for k, v in part.items():
            if truth.get(k, v) != v:
                raise InvalidInputError(f"conflicting truth for ego id {k!r}")
            truth[k] = v
    return truth


def cmd_evaluate(args) -> int:
    cfg = _load_cfg(args)
    truth = _merge_truth(args.truth)
    results = []
    for name in sorted(os.listdir(args.results)):
        if not name.endswith(".json"):
            continue
        path = os.path.join(args.results, name)
        try:
            doc = cvio.read_assignment_json(path)
        except (InvalidInputError, json.JSONDecodeError):
            continue  # unrelated json file
        results.append((os.path.splitext(name)[0], doc))
    if not results:
        raise InvalidInputError(f"no assignment results in {args.results}")

    os.makedirs(args.out, exist_ok=True)
    metric_rows = []
    all_ranks = []
    max_n_top = 0
    for rid, doc in results:
        accuracy = assignment_accuracy(doc["pairs"], truth)
        metric_rows.append((rid, len(doc["ego_ids"]), len(doc["top_ids"]),
                            accuracy, doc["score"]))
        top_index = {vid: k for k, vid in enumerate(doc["top_ids"])}
        cols = []
        for ego_id in doc["ego_ids"]:
            if truth[ego_id] not in top_index:
                raise InvalidInputError(
                    f"true viewer {truth[ego_id]!r} absent from result {rid!r}")
            cols.append(top_index[truth[ego_id]])
        all_ranks.extend(ranks_of_truth(np.asarray(doc["soft"]), cols))
        max_n_top = max(max_n_top, len(doc["top_ids"]))

    cvio.write_metrics_csv(os.path.join(args.out, "metrics.csv"), metric_rows)
    curve = cmc_curve(all_ranks, max_n_top)
    cvio.write_cmc_csv(os.path.join(args.out, "cmc.csv"), curve)

    sweep_rows = None
    if args.scenario:
        scenario = cvio.load_scenario_dir(args.scenario, cfg.min_box_height)
        sweep_rows = completeness_sweep(scenario, SubsetPolicy(), cfg.geometry,
                                        cfg.xcorr, cfg.spectral)
        cvio.write_sweep_csv(os.path.join(args.out, "sweep.csv"), sweep_rows)

    if not args.no_figures:
        from . import reports
        reports.save_cmc_figure(curve, os.path.join(args.out, "cmc.png"))
        reports.save_accuracy_figure(metric_rows, os.path.join(args.out, "accuracy.png"))
        if sweep_rows is not None:
            reports.save_sweep_figure(sweep_rows, os.path.join(args.out, "sweep.png"))
    mean_acc = sum(r[3] for r in metric_rows) / len(metric_rows)
    print(f"evaluated {len(metric_rows)} results; mean accuracy {mean_acc:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossview",
        description="Match egocentric video recorders to viewers in a top-view video.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic scenario directory")
    _common_flags(p)
    p.add_argument("--out", required=True, help="output scenario directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("assign", help="assign ego videos to top-view viewers")
    _common_flags(p)
    p.add_argument("--top", required=True, help="top-view trajectory CSV")
    p.add_argument("--ego-dir", required=True, dest="ego_dir",
                   help="directory of ego descriptor/detection CSVs")
    p.add_argument("--out", required=True, help="output result JSON")
    p.add_argument("--dump-affinity", dest="dump_affinity",
                   help="also dump the affinity matrix and per-pair diagnostics")
    p.set_defaults(func=cmd_assign)

    p = sub.add_parser("rank", help="rank candidate top-view videos by match score")
    _common_flags(p)
    p.add_argument("--ego-dir", required=True, dest="ego_dir")
    p.add_argument("--manifest", required=True, help="candidate manifest JSON")
    p.add_argument("--out", required=True, help="output ranking CSV")
    p.add_argument("--no-figures", action="store_true", dest="no_figures")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("evaluate", help="compute accuracy, CMC and sweep tables")
    _common_flags(p)
    p.add_argument("--results", required=True, help="directory of assignment JSONs")
    p.add_argument("--truth", required=True, action="append",
                   help="truth JSON (repeatable)")
    p.add_argument("--out", required=True, help="output directory for tables/figures")
    p.add_argument("--scenario", help="scenario directory for the completeness sweep")
    p.add_argument("--no-figures", action="store_true", dest="no_figures")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("CROSSVIEW_LOG_LEVEL", "WARNING"))
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (CrossviewError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
