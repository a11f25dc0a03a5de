"""CSV/JSON rendering of range studies and contact tables."""

from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timedelta, timezone
from typing import Iterable, List, Sequence, Union

from .errors import UsageError
from .links import LinkRecord, PlaneRelation, Permanence, RangeCounts, RangeStudyReport
from .orbit import format_id, parse_id

RANGE_STUDY_COLUMNS = (
    "range_km",
    "perm_intra",
    "perm_adjacent",
    "perm_nearby",
    "perm_total",
    "temp_adjacent",
    "temp_nearby",
    "temp_crossing",
    "temp_total",
    "temp_intra",
    "perm_crossing",
)

CONTACT_COLUMNS = ("instance", "start", "stop", "duration_s", "start_iso", "stop_iso")

SERIES_COLUMNS = ("range_km", "category", "permanence", "count")

_CATEGORIES = (
    PlaneRelation.SAME,
    PlaneRelation.ADJACENT,
    PlaneRelation.NEARBY,
    PlaneRelation.CROSSING,
)

FORMATS = ("csv", "json")


def _check_format(fmt: str):
    if fmt not in FORMATS:
        raise UsageError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


def parse_epoch(epoch: Union[str, datetime]) -> datetime:
    """UTC datetime from an ISO-8601 string such as ``2020-08-25T16:00:00.000Z``."""
    if isinstance(epoch, datetime):
        dt = epoch
    else:
        text = epoch.strip()
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError as exc:
            raise UsageError(f"invalid epoch {epoch!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def _to_ms(t_s: float) -> int:
    return int(round(t_s * 1000.0))


def _stamp(t_s: float, epoch) -> datetime:
    return parse_epoch(epoch) + timedelta(milliseconds=_to_ms(t_s))


def format_wall_clock(t_s: float, epoch) -> str:
    """Time of day ``HH:MM:SS.mmm`` of ``t_s`` seconds after ``epoch``.

    Rolls over at midnight, so the day is not encoded.
    """
    stamp = _stamp(t_s, epoch)
    return stamp.strftime("%H:%M:%S.") + f"{stamp.microsecond // 1000:03d}"


def format_timestamp(t_s: float, epoch) -> str:
    """Full ISO-8601 UTC timestamp with millisecond precision."""
    stamp = _stamp(t_s, epoch)
    return stamp.strftime("%Y-%m-%dT%H:%M:%S.") + f"{stamp.microsecond // 1000:03d}Z"


def parse_timestamp(text: str, epoch) -> float:
    """Seconds after ``epoch`` of an ISO timestamp from :func:`format_timestamp`."""
    delta = parse_epoch(text) - parse_epoch(epoch)
    return round(delta / timedelta(milliseconds=1)) / 1000.0


def parse_wall_clock(text: str, epoch, not_before_s: float = 0.0) -> float:
    """Earliest time >= ``not_before_s`` whose wall clock reads ``text``."""
    try:
        clock = datetime.strptime(text.strip(), "%H:%M:%S.%f")
    except ValueError as exc:
        raise UsageError(f"invalid wall-clock time {text!r}") from exc
    base = parse_epoch(epoch)
    floor = base + timedelta(milliseconds=_to_ms(not_before_s))
    candidate = floor.replace(
        hour=clock.hour, minute=clock.minute, second=clock.second, microsecond=clock.microsecond
    )
    if candidate < floor:
        candidate += timedelta(days=1)
    return round((candidate - base) / timedelta(milliseconds=1)) / 1000.0


def _format_range(r: float) -> str:
    return str(int(r)) if float(r).is_integer() else repr(float(r))


def _row_values(row: RangeCounts) -> dict:
    values = {name: getattr(row, name) for name in RANGE_STUDY_COLUMNS[1:]}
    values["range_km"] = row.range_km
    return values


def render_range_study(report: RangeStudyReport, fmt: str = "csv") -> str:
    """Count table of a range study, rows sorted by range."""
    _check_format(fmt)
    rows = sorted(report.rows, key=lambda r: r.range_km)
    if fmt == "json":
        doc = {
            "reference": format_id(report.reference),
            "columns": list(RANGE_STUDY_COLUMNS),
            "rows": [
                {name: _row_values(row)[name] for name in RANGE_STUDY_COLUMNS} for row in rows
            ],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RANGE_STUDY_COLUMNS)
    for row in rows:
        values = _row_values(row)
        writer.writerow(
            [_format_range(row.range_km)] + [values[name] for name in RANGE_STUDY_COLUMNS[1:]]
        )
    return buf.getvalue()


def _counts_from_mapping(mapping) -> RangeCounts:
    fields = {
        name: int(mapping[name])
        for name in RANGE_STUDY_COLUMNS[1:]
        if name not in ("perm_total", "temp_total")
    }
    counts = RangeCounts(range_km=float(mapping["range_km"]), **fields)
    if counts.perm_total != int(mapping["perm_total"]) or counts.temp_total != int(mapping["temp_total"]):
        raise ValueError(f"totals do not add up for range {mapping['range_km']}")
    return counts


def parse_range_study(text: str, fmt: str = "csv", reference: str = "x10101") -> RangeStudyReport:
    """Inverse of :func:`render_range_study`."""
    _check_format(fmt)
    if fmt == "json":
        doc = json.loads(text)
        rows = tuple(_counts_from_mapping(row) for row in doc["rows"])
        return RangeStudyReport(parse_id(doc["reference"]), rows)
    reader = csv.DictReader(io.StringIO(text))
    rows = tuple(_counts_from_mapping(row) for row in reader)
    return RangeStudyReport(parse_id(reference), rows)


def contact_rows(record: LinkRecord, epoch) -> List[dict]:
    rows = []
    for i, iv in enumerate(sorted(record.intervals, key=lambda iv: iv.start_s), start=1):
        duration_ms = _to_ms(iv.stop_s) - _to_ms(iv.start_s)
        rows.append(
            {
                "instance": i,
                "start": format_wall_clock(iv.start_s, epoch),
                "stop": format_wall_clock(iv.stop_s, epoch),
                "duration_s": f"{duration_ms / 1000:.3f}",
                "start_iso": format_timestamp(iv.start_s, epoch),
                "stop_iso": format_timestamp(iv.stop_s, epoch),
            }
        )
    return rows


def render_contact_table(record: LinkRecord, epoch, fmt: str = "csv") -> str:
    """Instance listing with wall-clock start/stop and 3-decimal durations."""
    _check_format(fmt)
    rows = contact_rows(record, epoch)
    if fmt == "json":
        doc = {
            "id_a": format_id(record.id_a),
            "id_b": format_id(record.id_b),
            "relation": record.relation.value,
            "permanence": record.permanence.value,
            "range_km": record.range_km,
            "instances": rows,
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CONTACT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def counts_vs_range_series(reports: Union[RangeStudyReport, Iterable[RangeStudyReport]]) -> str:
    """Long-format ``range_km,category,permanence,count`` CSV for plotting."""
    if isinstance(reports, RangeStudyReport):
        reports = [reports]
    rows: Sequence[RangeCounts] = sorted(
        (row for report in reports for row in report.rows), key=lambda r: r.range_km
    )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SERIES_COLUMNS)
    for row in rows:
        for relation in _CATEGORIES:
            for permanence in (Permanence.PERMANENT, Permanence.TEMPORARY):
                category = "intra" if relation is PlaneRelation.SAME else relation.value
                writer.writerow(
                    [_format_range(row.range_km), category, permanence.value, row.count(relation, permanence)]
                )
    return buf.getvalue()
