"""Run configuration: one JSON file, flag overrides, paper-default values."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

from .errors import InvalidInputError
from .geometry import GeometryConfig
from .matching import SpectralConfig
from .simulator import ScenarioConfig
from .xcorr import XCorrConfig

_SECTIONS = ("geometry", "xcorr", "spectral", "features", "scenario")


@dataclass(frozen=True)
class RunConfig:
    geometry: GeometryConfig
    xcorr: XCorrConfig
    spectral: SpectralConfig
    min_box_height: float | None = None
    scenario: dict | None = None
    jobs: int = 1
    seed: int | None = None

    def echo(self) -> dict:
        doc = {
            "geometry": asdict(self.geometry),
            "xcorr": asdict(self.xcorr),
            "spectral": asdict(self.spectral),
            "features": {"min_box_height": self.min_box_height},
            "jobs": self.jobs,
        }
        if self.scenario is not None:
            doc["scenario"] = self.scenario
        return doc

    def scenario_config(self) -> ScenarioConfig:
        if not self.scenario:
            raise InvalidInputError("config has no 'scenario' section")
        sec = dict(self.scenario)
        for required in ("arena_radius", "n_viewers", "n_ego", "n_frames"):
            if required not in sec:
                raise InvalidInputError(f"scenario config is missing {required!r}")
        if "waypoint_speed" in sec:
            sec["waypoint_speed"] = tuple(sec["waypoint_speed"])
        if self.seed is not None:
            sec["rng_seed"] = self.seed
        try:
            return ScenarioConfig(**sec)
        except TypeError as exc:
            raise InvalidInputError(f"bad scenario config: {exc}") from exc


def _build_section(cls, data: dict, name: str):
    try:
        return cls(**data)
    except TypeError as exc:
        raise InvalidInputError(f"bad {name} config: {exc}") from exc


def load_run_config(path: str | None = None, *, theta_d: float | None = None,
                    alpha: float | None = None, gamma: float | None = None,
                    min_overlap: float | None = None, seed: int | None = None,
                    jobs: int | None = None) -> RunConfig:
    """Load a config file (all sections optional) and apply flag overrides."""
    doc = {}
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidInputError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise InvalidInputError(f"{path}: config must be a JSON object")
        unknown = set(doc) - set(_SECTIONS) - {"jobs", "seed"}
        if unknown:
            raise InvalidInputError(f"{path}: unknown config sections {sorted(unknown)}")

    geometry = _build_section(GeometryConfig, doc.get("geometry", {}), "geometry")
    xcorr = _build_section(XCorrConfig, doc.get("xcorr", {}), "xcorr")
    spectral = _build_section(SpectralConfig, doc.get("spectral", {}), "spectral")
    features = doc.get("features", {})
    unknown = set(features) - {"min_box_height"}
    if unknown:
        raise InvalidInputError(f"unknown features config keys {sorted(unknown)}")

    if theta_d is not None:
        geometry = replace(geometry, theta_d=theta_d)
    if alpha is not None:
        xcorr = replace(xcorr, alpha=alpha)
    if gamma is not None:
        xcorr = replace(xcorr, gamma=gamma)
    if min_overlap is not None:
        xcorr = replace(xcorr, min_overlap_fraction=min_overlap)

    return RunConfig(
        geometry=geometry, xcorr=xcorr, spectral=spectral,
        min_box_height=features.get("min_box_height"),
        scenario=doc.get("scenario"),
        jobs=jobs if jobs is not None else int(doc.get("jobs", 1)),
        seed=seed if seed is not None else doc.get("seed"))
