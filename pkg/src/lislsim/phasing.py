"""Walker phasing sweep scored against published Starlink link counts."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from .links import LinkParams, RangeCounts, RangeStudyReport, SimulationWindow, range_study
from .orbit import ConstellationConfig, SatelliteId, build_constellation, find_record

# Published counts for x10101 in the Starlink Phase I shell over 24 h.
REFERENCE_COUNTS: Dict[float, RangeCounts] = {
    r.range_km: r
    for r in (
        RangeCounts(659.0, perm_intra=2, temp_adjacent=4, temp_nearby=21, temp_crossing=37),
        RangeCounts(1319.0, perm_intra=4, temp_adjacent=8, temp_nearby=41, temp_crossing=67),
        RangeCounts(1500.0, perm_intra=4, perm_adjacent=2, temp_adjacent=8, temp_nearby=43, temp_crossing=85),
        RangeCounts(1700.0, perm_intra=4, perm_adjacent=6, temp_adjacent=4, temp_nearby=53, temp_crossing=87),
        RangeCounts(
            5016.0, perm_intra=14, perm_adjacent=30, perm_nearby=44,
            temp_adjacent=2, temp_nearby=113, temp_crossing=281,
        ),
    )
}

PERMANENT_CELLS = ("perm_intra", "perm_adjacent", "perm_nearby")
TEMPORARY_CELLS = ("temp_adjacent", "temp_nearby", "temp_crossing")


def match_score(report: RangeStudyReport, reference: Dict[float, RangeCounts] = REFERENCE_COUNTS) -> int:
    """Sum of absolute count differences over the reference cells.

    Ranges without a reference row are ignored.
    """
    score = 0
    for row in report.rows:
        target = reference.get(row.range_km)
        if target is None:
            continue
        for cell in PERMANENT_CELLS + TEMPORARY_CELLS:
            score += abs(getattr(row, cell) - getattr(target, cell))
    return score


def worst_temporary_error(
    report: RangeStudyReport, reference: Dict[float, RangeCounts] = REFERENCE_COUNTS
) -> float:
    """Largest relative deviation of a temporary cell from its reference value."""
    worst = 0.0
    for row in report.rows:
        target = reference.get(row.range_km)
        if target is None:
            continue
        for cell in TEMPORARY_CELLS:
            want, got = getattr(target, cell), getattr(row, cell)
            err = abs(got - want) / want if want else float(got != 0)
            worst = max(worst, err)
    return worst


def permanent_exact(
    report: RangeStudyReport, reference: Dict[float, RangeCounts] = REFERENCE_COUNTS
) -> bool:
    return all(
        getattr(row, cell) == getattr(reference[row.range_km], cell)
        for row in report.rows
        if row.range_km in reference
        for cell in PERMANENT_CELLS
    )


@dataclass(frozen=True)
class SweepEntry:
    phasing_factor: int
    score: int
    worst_temporary_error: float
    permanent_exact: bool
    report: RangeStudyReport


def phasing_sweep(
    config: ConstellationConfig,
    ranges_km: Sequence[float],
    window: SimulationWindow,
    params: LinkParams,
    reference_id: SatelliteId = SatelliteId(1, 1),
    factors: Optional[Iterable[int]] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> List[SweepEntry]:
    """Range study for each phasing factor (all of 0..S-1 by default)."""
    factors = list(range(config.sats_per_plane) if factors is None else factors)
    entries = []
    for i, F in enumerate(factors):
        records = build_constellation(config.replace(phasing_factor=F))
        report = range_study(find_record(records, reference_id), records, ranges_km, window, params)
        entries.append(
            SweepEntry(F, match_score(report), worst_temporary_error(report), permanent_exact(report), report)
        )
        if progress is not None:
            progress(i + 1, len(factors))
    return entries


def best_match(entries: Sequence[SweepEntry]) -> SweepEntry:
    """Lowest score; ties go to the smallest phasing factor."""
    if not entries:
        raise ValueError("empty sweep")
    return min(entries, key=lambda e: (e.score, e.phasing_factor))


def render_sweep(entries: Sequence[SweepEntry]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["phasing_factor", "score", "worst_temporary_error", "permanent_exact"])
    for e in sorted(entries, key=lambda e: e.phasing_factor):
        writer.writerow([e.phasing_factor, e.score, f"{e.worst_temporary_error:.4f}", int(e.permanent_exact)])
    return buf.getvalue()
