"""
Link classification, contact-interval detection and range studies.

Contact detection is a two-stage root search on the boolean in-range
predicate: a compiled scan at ``scan_step_s`` resolution finds each change of
state, then a vectorized bisection on the reference geometry kernels narrows
every boundary to ``refine_tol_s``. Contacts (and gaps) shorter than the scan
step can be missed.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from ._scan import scan_block
from .errors import ConfigurationError, UsageError
from .geometry import segment_grazing_altitude, segment_length
from .orbit import (
    OrbitArrays,
    PhysicalConstants,
    SatelliteId,
    SatelliteRecord,
    orbit_basis,
)


class PlaneRelation(enum.Enum):
    SAME = "same"
    ADJACENT = "adjacent"
    NEARBY = "nearby"
    CROSSING = "crossing"


class Permanence(enum.Enum):
    PERMANENT = "permanent"
    TEMPORARY = "temporary"
    NONE = "none"


def normalize_offset(offset: int, num_planes: int) -> int:
    """Map a plane offset into the cyclic range (-P/2, P/2]."""
    m = offset % num_planes
    if 2 * m > num_planes:
        m -= num_planes
    return m


@dataclass(frozen=True)
class PlaneRelationMap:
    """Plane relation by cyclic offset from a reference plane.

    The three offset sets together with ``{0}`` must partition the offsets
    of a ``num_planes`` shell, each offset given in (-P/2, P/2].
    """

    num_planes: int
    adjacent_offsets: FrozenSet[int] = frozenset()
    nearby_offsets: FrozenSet[int] = frozenset()
    crossing_offsets: FrozenSet[int] = frozenset()

    def __post_init__(self):
        P = self.num_planes
        if not isinstance(P, int) or P < 1:
            raise ConfigurationError("plane_relation_map.num_planes", f"must be >= 1, got {P!r}")
        for name in ("adjacent_offsets", "nearby_offsets", "crossing_offsets"):
            object.__setattr__(self, name, frozenset(int(o) for o in getattr(self, name)))
        sets = (self.adjacent_offsets, self.nearby_offsets, self.crossing_offsets)
        universe = {normalize_offset(o, P) for o in range(P)}
        seen = {0}
        for name, offsets in zip(("adjacent", "nearby", "crossing"), sets):
            bad = {o for o in offsets if o not in universe}
            if bad:
                raise ConfigurationError(
                    f"plane_relation_map.{name}",
                    f"offsets {sorted(bad)} are not in (-{P / 2:g}, {P / 2:g}] or are zero",
                )
            overlap = seen & offsets
            if overlap:
                raise ConfigurationError(
                    f"plane_relation_map.{name}", f"offsets {sorted(overlap)} assigned twice"
                )
            seen |= offsets
        missing = universe - seen
        if missing:
            raise ConfigurationError(
                "plane_relation_map", f"offsets {sorted(missing)} have no relation"
            )

    @classmethod
    def starlink(cls) -> "PlaneRelationMap":
        """Designation relative to plane x101 of the 24-plane Starlink shell.

        Adjacent: x102, x124. Nearby: x103..x107 and x120..x123.
        Crossing: x108..x119.
        """
        return cls(
            num_planes=24,
            adjacent_offsets=frozenset({1, -1}),
            nearby_offsets=frozenset({2, 3, 4, 5, 6, -5, -4, -3, -2}),
            crossing_offsets=frozenset(set(range(7, 13)) | set(range(-11, -5))),
        )

    @classmethod
    def for_planes(cls, num_planes: int) -> "PlaneRelationMap":
        """Built-in map for ``num_planes``; only P=24 and the trivial P=1 exist."""
        if num_planes == 24:
            return cls.starlink()
        if num_planes == 1:
            return cls(num_planes=1)
        raise ConfigurationError(
            "plane_relation_map",
            f"no built-in plane relation map for {num_planes} planes; supply one explicitly",
        )

    def relation(self, offset: int) -> PlaneRelation:
        offset = normalize_offset(offset, self.num_planes)
        if offset == 0:
            return PlaneRelation.SAME
        if offset in self.adjacent_offsets:
            return PlaneRelation.ADJACENT
        if offset in self.nearby_offsets:
            return PlaneRelation.NEARBY
        if offset in self.crossing_offsets:
            return PlaneRelation.CROSSING
        raise ConfigurationError("plane_relation_map", f"offset {offset} has no relation")


def classify_plane_relation(
    ref_plane: int, other_plane: int, relation_map: PlaneRelationMap, num_planes: Optional[int] = None
) -> PlaneRelation:
    P = relation_map.num_planes if num_planes is None else num_planes
    if P != relation_map.num_planes:
        raise ConfigurationError(
            "plane_relation_map",
            f"map is for {relation_map.num_planes} planes, constellation has {P}",
        )
    for plane in (ref_plane, other_plane):
        if not 1 <= plane <= P:
            raise ConfigurationError("plane", f"plane index {plane} outside 1..{P}")
    if ref_plane == other_plane:
        return PlaneRelation.SAME
    return relation_map.relation(other_plane - ref_plane)


@dataclass(frozen=True)
class SimulationWindow:
    start_s: float = 0.0
    stop_s: float = 86400.0

    def __post_init__(self):
        if not (math.isfinite(self.start_s) and math.isfinite(self.stop_s)):
            raise ConfigurationError("window", "bounds must be finite")
        if not self.start_s < self.stop_s:
            raise ConfigurationError("window", f"start {self.start_s} must precede stop {self.stop_s}")

    @property
    def duration_s(self) -> float:
        return self.stop_s - self.start_s

    def sample_times(self, step_s: float) -> np.ndarray:
        """Uniform grid from start with the stop time always included last."""
        n = int(math.floor(self.duration_s / step_s + 1e-9))
        times = self.start_s + step_s * np.arange(n + 1, dtype=float)
        if times[-1] < self.stop_s - 1e-9 * max(1.0, abs(self.stop_s)):
            times = np.append(times, self.stop_s)
        else:
            times[-1] = self.stop_s
        return times


@dataclass(frozen=True)
class ContactInterval:
    start_s: float
    stop_s: float

    @property
    def duration_s(self) -> float:
        return self.stop_s - self.start_s


@dataclass(frozen=True)
class LinkParams:
    """Knobs shared by link analyses.

    ``n_jobs`` splits pair scans across threads; results do not depend on it.
    """

    scan_step_s: float = 1.0
    refine_tol_s: float = 1e-3
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    relation_map: PlaneRelationMap = field(default_factory=PlaneRelationMap.starlink)
    n_jobs: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.scan_step_s) and self.scan_step_s > 0):
            raise ConfigurationError("scan_step_s", f"must be positive, got {self.scan_step_s!r}")
        if not (self.refine_tol_s > 0 and self.refine_tol_s <= self.scan_step_s):
            raise ConfigurationError(
                "refine_tol_s", f"must lie in (0, scan_step_s], got {self.refine_tol_s!r}"
            )
        if not isinstance(self.n_jobs, int) or self.n_jobs == 0 or self.n_jobs < -1:
            raise ConfigurationError("n_jobs", f"must be a positive integer or -1, got {self.n_jobs!r}")


@dataclass(frozen=True)
class LinkRecord:
    id_a: SatelliteId
    id_b: SatelliteId
    relation: PlaneRelation
    range_km: float
    permanence: Permanence
    intervals: Tuple[ContactInterval, ...]


def in_range(
    rec_a: SatelliteRecord,
    rec_b: SatelliteRecord,
    t,
    range_km: float,
    constants: Optional[PhysicalConstants] = None,
):
    """Whether the pair can hold a link at time(s) ``t``.

    True when the separation is at most ``range_km`` and the line of sight
    stays at or above the atmosphere height. Returns a bool for scalar ``t``
    and a boolean array otherwise.
    """
    constants = constants or PhysicalConstants()
    t = np.asarray(t, dtype=float)
    a = OrbitArrays.from_records([rec_a]).take(0).positions(t)
    b = OrbitArrays.from_records([rec_b]).take(0).positions(t)
    result = _predicate(a, b, range_km, constants)
    return bool(result) if result.ndim == 0 else result


def _predicate(a, b, range_km, constants: PhysicalConstants):
    return (segment_length(a, b) <= range_km) & (
        segment_grazing_altitude(a, b, constants.earth_radius_km) >= constants.atmosphere_height_km
    )


def _bisect(ref: OrbitArrays, others: OrbitArrays, ranges, t_in, t_out, tol, constants):
    """Narrow [t_in, t_out] brackets (predicate true at t_in) to width <= tol.

    Returns the in-range end of each final bracket.
    """
    t_in = t_in.copy()
    t_out = t_out.copy()
    if t_in.size == 0:
        return t_in
    width = np.max(np.abs(t_out - t_in))
    iterations = max(0, int(math.ceil(math.log2(width / tol)))) if width > tol else 0
    for _ in range(iterations):
        mid = 0.5 * (t_in + t_out)
        hit = _predicate(ref.positions(mid), others.positions(mid), ranges, constants)
        t_in = np.where(hit, mid, t_in)
        t_out = np.where(hit, t_out, mid)
    return t_in


def _resolve_jobs(n_jobs: int) -> int:
    return (os.cpu_count() or 1) if n_jobs == -1 else n_jobs


def _scan(ref: OrbitArrays, others: OrbitArrays, ranges, times, constants, n_jobs):
    """Run the compiled scan over all pairs; returns per-(range, pair) run lists."""
    n_pairs = len(others)
    ranges = np.asarray(ranges, dtype=float)
    ref_pos = np.ascontiguousarray(ref.positions(times))
    p_hat, q_hat = orbit_basis(others.raan, others.inclination)
    motions, motion_idx = np.unique(others.mean_motion, return_inverse=True)
    phase = motions[:, None] * times[None, :]
    cos_nt, sin_nt = np.cos(phase), np.sin(phase)
    range_sq = ranges * ranges
    shell_sq = (constants.earth_radius_km + constants.atmosphere_height_km) ** 2
    args = (
        np.ascontiguousarray(p_hat), np.ascontiguousarray(q_hat), others.radius,
        np.cos(others.u0), np.sin(others.u0), motion_idx.astype(np.int64),
    )

    def run_block(lo, hi, cap):
        starts = np.zeros((len(ranges), hi - lo, cap), dtype=np.int64)
        stops = np.zeros_like(starts)
        counts = np.zeros((len(ranges), hi - lo), dtype=np.int64)
        scan_block(
            ref_pos, *(x[lo:hi] for x in args), cos_nt, sin_nt,
            range_sq, shell_sq, starts, stops, counts,
        )
        if counts.size and counts.max() > cap:
            return run_block(lo, hi, int(counts.max()))
        return starts, stops, counts

    jobs = max(1, min(_resolve_jobs(n_jobs), n_pairs))
    bounds = np.linspace(0, n_pairs, min(n_pairs, 4 * jobs) + 1).astype(int) if n_pairs else [0, 0]
    blocks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    if jobs == 1:
        results = [run_block(lo, hi, 64) for lo, hi in blocks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda b: run_block(b[0], b[1], 64), blocks))

    runs = [[None] * n_pairs for _ in ranges]
    for (lo, _), (starts, stops, counts) in zip(blocks, results):
        for k in range(len(ranges)):
            for j in range(counts.shape[1]):
                n = counts[k, j]
                runs[k][lo + j] = (starts[k, j, :n], stops[k, j, :n])
    return runs


def contact_intervals_many(
    ref_record: SatelliteRecord,
    others: Sequence[SatelliteRecord],
    ranges_km: Sequence[float],
    window: SimulationWindow,
    params: LinkParams,
) -> List[List[List[ContactInterval]]]:
    """Contact intervals of ``ref_record`` with each of ``others`` at each range.

    Indexed ``[range][other]``.
    """
    ranges = [float(r) for r in ranges_km]
    if not others or not ranges:
        return [[[] for _ in others] for _ in ranges]
    times = window.sample_times(params.scan_step_s)
    ref = OrbitArrays.from_records([ref_record])
    other_arrays = OrbitArrays.from_records(others)
    runs = _scan(ref.take(0), other_arrays, ranges, times, params.constants, params.n_jobs)

    # Flatten all boundaries that need refinement into one bisection batch.
    pair_idx, range_val, t_in, t_out, slots = [], [], [], [], []
    boundaries = []
    for k, r in enumerate(ranges):
        per_range = []
        for j in range(len(others)):
            starts, stops = runs[k][j]
            b = []
            for first, last in zip(starts, stops):
                entry = [times[first], times[last]]
                if first > 0:
                    slots.append((entry, 0))
                    pair_idx.append(j); range_val.append(r)
                    t_in.append(times[first]); t_out.append(times[first - 1])
                if last < len(times) - 1:
                    slots.append((entry, 1))
                    pair_idx.append(j); range_val.append(r)
                    t_in.append(times[last]); t_out.append(times[last + 1])
                b.append(entry)
            per_range.append(b)
        boundaries.append(per_range)

    if slots:
        idx = np.asarray(pair_idx)
        refined = _bisect(
            ref.take(np.zeros(len(idx), dtype=int)), other_arrays.take(idx),
            np.asarray(range_val), np.asarray(t_in), np.asarray(t_out),
            params.refine_tol_s, params.constants,
        )
        for (entry, side), value in zip(slots, refined):
            entry[side] = float(value)

    return [
        [
            [ContactInterval(float(a), float(b)) for a, b in per_pair if b > a]
            for per_pair in per_range
        ]
        for per_range in boundaries
    ]


def _ordered(rec_a, rec_b):
    if rec_a.id == rec_b.id:
        raise UsageError(f"a link needs two distinct satellites, got {rec_a.id} twice")
    return (rec_a, rec_b) if rec_a.id < rec_b.id else (rec_b, rec_a)


def find_contact_intervals(
    rec_a: SatelliteRecord,
    rec_b: SatelliteRecord,
    range_km: float,
    window: SimulationWindow,
    scan_step_s: float = 1.0,
    refine_tol_s: float = 1e-3,
    constants: Optional[PhysicalConstants] = None,
) -> List[ContactInterval]:
    """Sorted, disjoint windows during which the pair is in range.

    Boundaries are the in-range side of a bracket no wider than
    ``refine_tol_s``; intervals touching the window edges are clipped to it.
    """
    params = LinkParams(scan_step_s, refine_tol_s, constants or PhysicalConstants())
    first, second = _ordered(rec_a, rec_b)
    return contact_intervals_many(first, [second], [range_km], window, params)[0][0]


def classify_permanence(
    intervals: Sequence[ContactInterval], window: SimulationWindow, refine_tol_s: float = 1e-3
) -> Permanence:
    if not intervals:
        return Permanence.NONE
    if (
        len(intervals) == 1
        and intervals[0].start_s <= window.start_s + refine_tol_s
        and intervals[0].stop_s >= window.stop_s - refine_tol_s
    ):
        return Permanence.PERMANENT
    return Permanence.TEMPORARY


def _link_record(ref, other, range_km, intervals, window, params) -> LinkRecord:
    relation = classify_plane_relation(ref.id.plane, other.id.plane, params.relation_map)
    return LinkRecord(
        id_a=ref.id,
        id_b=other.id,
        relation=relation,
        range_km=range_km,
        permanence=classify_permanence(intervals, window, params.refine_tol_s),
        intervals=tuple(intervals),
    )


def analyze_link(
    rec_a: SatelliteRecord,
    rec_b: SatelliteRecord,
    range_km: float,
    window: SimulationWindow,
    params: Optional[LinkParams] = None,
) -> LinkRecord:
    """Relation, permanence and intervals for one pair.

    The pair is put in ID order first and the plane relation is taken
    relative to the lower ID, so swapping the arguments changes nothing.
    """
    params = params or LinkParams()
    first, second = _ordered(rec_a, rec_b)
    intervals = contact_intervals_many(first, [second], [range_km], window, params)[0][0]
    return _link_record(first, second, float(range_km), intervals, window, params)


def survey_links(
    ref_record: SatelliteRecord,
    records: Sequence[SatelliteRecord],
    ranges_km: Sequence[float],
    window: SimulationWindow,
    params: Optional[LinkParams] = None,
) -> Dict[float, List[LinkRecord]]:
    """LinkRecords of ``ref_record`` against every other satellite, per range.

    Relations are taken relative to ``ref_record``'s plane. Records come back
    sorted by the other satellite's ID.
    """
    params = params or LinkParams()
    others = sorted((r for r in records if r.id != ref_record.id), key=lambda r: r.id)
    ranges = sorted({float(r) for r in ranges_km})
    for r in ranges:
        if not (math.isfinite(r) and r >= 0):
            raise ConfigurationError("ranges_km", f"ranges must be non-negative, got {r!r}")
    found = contact_intervals_many(ref_record, others, ranges, window, params)
    return {
        r: [
            _link_record(ref_record, other, r, found[k][j], window, params)
            for j, other in enumerate(others)
        ]
        for k, r in enumerate(ranges)
    }


@dataclass(frozen=True)
class RangeCounts:
    """Link counts at one range.

    ``temp_intra`` and ``perm_crossing`` are diagnostics that stay zero in a
    well-behaved shell.
    """

    range_km: float
    perm_intra: int = 0
    perm_adjacent: int = 0
    perm_nearby: int = 0
    temp_adjacent: int = 0
    temp_nearby: int = 0
    temp_crossing: int = 0
    temp_intra: int = 0
    perm_crossing: int = 0

    @property
    def perm_total(self) -> int:
        return self.perm_intra + self.perm_adjacent + self.perm_nearby + self.perm_crossing

    @property
    def temp_total(self) -> int:
        return self.temp_adjacent + self.temp_nearby + self.temp_crossing + self.temp_intra

    def count(self, relation: PlaneRelation, permanence: Permanence) -> int:
        prefix = {Permanence.PERMANENT: "perm", Permanence.TEMPORARY: "temp"}[permanence]
        suffix = "intra" if relation is PlaneRelation.SAME else relation.value
        return getattr(self, f"{prefix}_{suffix}")


@dataclass(frozen=True)
class RangeStudyReport:
    reference: SatelliteId
    rows: Tuple[RangeCounts, ...]

    def row(self, range_km: float) -> RangeCounts:
        for row in self.rows:
            if row.range_km == float(range_km):
                return row
        raise KeyError(range_km)


def count_links(range_km: float, links: Sequence[LinkRecord]) -> RangeCounts:
    counts = {}
    for link in sorted(links, key=lambda l: l.id_b):
        if link.permanence is Permanence.NONE:
            continue
        prefix = "perm" if link.permanence is Permanence.PERMANENT else "temp"
        suffix = "intra" if link.relation is PlaneRelation.SAME else link.relation.value
        key = f"{prefix}_{suffix}"
        counts[key] = counts.get(key, 0) + 1
    return RangeCounts(range_km=float(range_km), **counts)


def range_study(
    ref_record: SatelliteRecord,
    records: Sequence[SatelliteRecord],
    ranges_km: Sequence[float],
    window: SimulationWindow,
    params: Optional[LinkParams] = None,
) -> RangeStudyReport:
    """Permanent/temporary link counts per plane relation for each range."""
    if len(ranges_km) == 0:
        return RangeStudyReport(ref_record.id, ())
    surveyed = survey_links(ref_record, records, ranges_km, window, params)
    rows = tuple(count_links(r, surveyed[r]) for r in sorted(surveyed))
    return RangeStudyReport(ref_record.id, rows)


@dataclass(frozen=True)
class ContactRow:
    instance: int
    start_s: float
    stop_s: float
    duration_s: float


def contact_table(
    ref_record: SatelliteRecord,
    other_record: SatelliteRecord,
    range_km: float,
    window: SimulationWindow,
    params: Optional[LinkParams] = None,
) -> List[ContactRow]:
    """Chronological contact instances of a pair, numbered from 1."""
    link = analyze_link(ref_record, other_record, range_km, window, params)
    return [
        ContactRow(i, iv.start_s, iv.stop_s, iv.duration_s)
        for i, iv in enumerate(link.intervals, start=1)
    ]
