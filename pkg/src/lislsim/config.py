"""Run configuration: JSON loading, flag overrides and the reproducibility sidecar."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Tuple

from .errors import ConfigurationError
from .links import LinkParams, PlaneRelationMap, SimulationWindow
from .orbit import ConstellationConfig, PhysicalConstants, SatelliteId, format_id, parse_id

DEFAULT_RANGES_KM = (659.0, 1319.0, 1500.0, 1700.0, 5016.0)


@dataclass(frozen=True)
class RunConfig:
    constellation: ConstellationConfig = field(default_factory=ConstellationConfig)
    ranges_km: Tuple[float, ...] = DEFAULT_RANGES_KM
    window: SimulationWindow = field(default_factory=SimulationWindow)
    scan_step_s: float = 1.0
    refine_tol_s: float = 1e-3
    reference_satellite: SatelliteId = SatelliteId(1, 1)
    other_satellite: Optional[SatelliteId] = None
    plane_relation_map: Optional[PlaneRelationMap] = None
    format: str = "csv"
    out: Optional[str] = None
    n_jobs: int = 1

    def relation_map(self) -> PlaneRelationMap:
        if self.plane_relation_map is not None:
            if self.plane_relation_map.num_planes != self.constellation.num_planes:
                raise ConfigurationError(
                    "plane_relation_map",
                    f"map covers {self.plane_relation_map.num_planes} planes, "
                    f"constellation has {self.constellation.num_planes}",
                )
            return self.plane_relation_map
        return PlaneRelationMap.for_planes(self.constellation.num_planes)

    def link_params(self) -> LinkParams:
        return LinkParams(
            scan_step_s=self.scan_step_s,
            refine_tol_s=self.refine_tol_s,
            constants=self.constellation.constants,
            relation_map=self.relation_map(),
            n_jobs=self.n_jobs,
        )

    def check_satellite(self, sat_id: SatelliteId, name: str) -> SatelliteId:
        c = self.constellation
        if not (1 <= sat_id.plane <= c.num_planes and 1 <= sat_id.slot <= c.sats_per_plane):
            raise ConfigurationError(name, f"{sat_id} is outside the {c.num_planes}x{c.sats_per_plane} shell")
        return sat_id

    def to_dict(self) -> dict:
        """JSON-ready dict that :func:`run_config_from_dict` reads back."""
        doc = {
            "constellation": asdict(self.constellation),
            "ranges_km": list(self.ranges_km),
            "window": {"start_s": self.window.start_s, "stop_s": self.window.stop_s},
            "scan_step_s": self.scan_step_s,
            "refine_tol_s": self.refine_tol_s,
            "reference_satellite": format_id(self.reference_satellite),
            "other_satellite": None if self.other_satellite is None else format_id(self.other_satellite),
            "format": self.format,
            "out": self.out,
            "n_jobs": self.n_jobs,
        }
        if self.plane_relation_map is not None:
            m = self.plane_relation_map
            doc["plane_relation_map"] = {
                "num_planes": m.num_planes,
                "adjacent": sorted(m.adjacent_offsets),
                "nearby": sorted(m.nearby_offsets),
                "crossing": sorted(m.crossing_offsets),
            }
        return doc


def _check_keys(doc: dict, allowed, where: str):
    if not isinstance(doc, dict):
        raise ConfigurationError(where, "must be a JSON object")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigurationError(f"{where}.{sorted(unknown)[0]}" if where else sorted(unknown)[0], "unknown field")


def _build(cls, doc, where):
    try:
        return cls(**doc)
    except TypeError as exc:
        raise ConfigurationError(where, str(exc)) from exc


def run_config_from_dict(doc: dict) -> RunConfig:
    """RunConfig from a parsed JSON document; absent fields keep their defaults."""
    _check_keys(doc, [f.name for f in fields(RunConfig)] + ["window_hours"], "")
    changes = {}

    if "constellation" in doc:
        cdoc = dict(doc["constellation"])
        _check_keys(cdoc, [f.name for f in fields(ConstellationConfig)], "constellation")
        if "constants" in cdoc:
            kdoc = cdoc["constants"]
            _check_keys(kdoc, [f.name for f in fields(PhysicalConstants)], "constellation.constants")
            cdoc["constants"] = _build(PhysicalConstants, kdoc, "constellation.constants")
        changes["constellation"] = _build(ConstellationConfig, cdoc, "constellation")

    if "ranges_km" in doc:
        changes["ranges_km"] = parse_ranges(doc["ranges_km"])

    if "window" in doc and "window_hours" in doc:
        raise ConfigurationError("window", "give either window or window_hours, not both")
    if "window" in doc:
        wdoc = doc["window"]
        _check_keys(wdoc, ["start_s", "stop_s"], "window")
        changes["window"] = _build(SimulationWindow, wdoc, "window")
    if "window_hours" in doc:
        changes["window"] = window_from_hours(doc["window_hours"])

    for name in ("scan_step_s", "refine_tol_s"):
        if name in doc:
            value = doc[name]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigurationError(name, f"must be a number, got {value!r}")
            changes[name] = float(value)

    for name in ("reference_satellite", "other_satellite"):
        if doc.get(name) is not None:
            changes[name] = parse_satellite(doc[name], name)

    if doc.get("plane_relation_map") is not None:
        mdoc = doc["plane_relation_map"]
        _check_keys(mdoc, ["num_planes", "adjacent", "nearby", "crossing"], "plane_relation_map")
        num_planes = mdoc.get(
            "num_planes", changes.get("constellation", ConstellationConfig()).num_planes
        )
        changes["plane_relation_map"] = PlaneRelationMap(
            num_planes,
            frozenset(mdoc.get("adjacent", ())),
            frozenset(mdoc.get("nearby", ())),
            frozenset(mdoc.get("crossing", ())),
        )

    if "format" in doc:
        changes["format"] = parse_format(doc["format"])
    if "out" in doc:
        changes["out"] = doc["out"]
    if "n_jobs" in doc:
        changes["n_jobs"] = doc["n_jobs"]
    return validate(RunConfig(**changes))


def load_run_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError("config", f"{path} is not valid JSON: {exc}") from exc
    return run_config_from_dict(doc)


def parse_ranges(value) -> Tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    else:
        parts = list(value)
    try:
        ranges = tuple(float(p) for p in parts)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError("ranges_km", f"not a list of numbers: {value!r}") from exc
    if any(not r > 0 for r in ranges):
        raise ConfigurationError("ranges_km", "ranges must be positive")
    return ranges


def window_from_hours(hours) -> SimulationWindow:
    try:
        hours = float(hours)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError("window_hours", f"not a number: {hours!r}") from exc
    if not hours > 0:
        raise ConfigurationError("window_hours", "must be positive")
    return SimulationWindow(0.0, hours * 3600.0)


def parse_satellite(text, name: str) -> SatelliteId:
    try:
        return parse_id(text)
    except ValueError as exc:
        raise ConfigurationError(name, str(exc)) from exc


def parse_format(fmt) -> str:
    if fmt not in ("csv", "json"):
        raise ConfigurationError("format", f"must be csv or json, got {fmt!r}")
    return fmt


def validate(config: RunConfig) -> RunConfig:
    """Check field values; the relation map is checked later by :meth:`RunConfig.link_params`."""
    LinkParams(
        scan_step_s=config.scan_step_s,
        refine_tol_s=config.refine_tol_s,
        constants=config.constellation.constants,
        n_jobs=config.n_jobs,
    )
    if config.plane_relation_map is not None:
        config.relation_map()
    config.check_satellite(config.reference_satellite, "reference_satellite")
    if config.other_satellite is not None:
        config.check_satellite(config.other_satellite, "other_satellite")
    return config


def with_overrides(config: RunConfig, **changes) -> RunConfig:
    """Apply non-None overrides; ``constellation`` and ``constants`` keys nest."""
    changes = {k: v for k, v in changes.items() if v is not None}
    constants = changes.pop("constants", {})
    constellation = changes.pop("constellation", {})
    if constants:
        constellation["constants"] = replace(config.constellation.constants, **constants)
    if constellation:
        changes["constellation"] = replace(config.constellation, **constellation)
    return validate(replace(config, **changes))


def dump_run_config(config: RunConfig, **extra) -> str:
    doc = config.to_dict()
    doc.update(extra)
    return json.dumps(doc, indent=2) + "\n"
