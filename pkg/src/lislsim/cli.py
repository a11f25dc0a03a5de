"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import phasing, reporting
from .config import (
    DEFAULT_RANGES_KM,
    RunConfig,
    dump_run_config,
    load_run_config,
    parse_format,
    parse_ranges,
    parse_satellite,
    window_from_hours,
    with_overrides,
)
from .errors import ConfigurationError, LislError
from .geometry import max_lisl_range
from .links import analyze_link, range_study
from .orbit import build_constellation, constellation_to_csv, find_record, orbital_period

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3

DEFAULT_CONTACT_RANGE_KM = 1700.0


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--ranges", metavar="KM[,KM...]", help="LISL ranges in km")
    p.add_argument("--window-hours", type=float, metavar="N", help="simulation window length")
    p.add_argument("--step", type=float, metavar="S", help="scan step in seconds")
    p.add_argument("--refine-tol", type=float, metavar="S", help="boundary refinement tolerance in seconds")
    p.add_argument("--ref", metavar="ID", help="reference satellite, e.g. x10101")
    p.add_argument("--other", metavar="ID", help="second satellite for contacts")
    p.add_argument("--phasing", type=int, metavar="F", help="Walker phasing factor")
    p.add_argument("--planes", type=int, metavar="P", help="number of orbital planes")
    p.add_argument("--sats", type=int, metavar="S", help="satellites per plane")
    p.add_argument("--altitude", type=float, metavar="KM", help="orbit altitude")
    p.add_argument("--inclination", type=float, metavar="DEG", help="orbit inclination")
    p.add_argument("--earth-radius", type=float, metavar="KM", help="spherical Earth radius")
    p.add_argument("--atmosphere", type=float, metavar="KM", help="atmosphere shell height")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    p.add_argument("--jobs", type=int, metavar="N", help="worker threads (-1 for all cores)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lislsim", description="Laser inter-satellite link analysis for Walker-delta shells."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    sub.add_parser("constellation", parents=[common], help="export the satellite list as CSV")
    study = sub.add_parser("range-study", parents=[common], help="count links per range")
    study.add_argument(
        "--phasing-sweep", action="store_true",
        help="run the study for every phasing factor and score it against reference counts",
    )
    sub.add_parser("contacts", parents=[common], help="contact table for one satellite pair")
    sub.add_parser("period", parents=[common], help="print the orbital period in seconds")
    sub.add_parser("max-range", parents=[common], help="print the maximum LISL range in km")
    return parser


def effective_config(args: argparse.Namespace) -> RunConfig:
    """Config file values overridden by command-line flags."""
    config = load_run_config(args.config) if args.config else RunConfig()
    return with_overrides(
        config,
        ranges_km=parse_ranges(args.ranges) if args.ranges is not None else None,
        window=window_from_hours(args.window_hours) if args.window_hours is not None else None,
        scan_step_s=args.step,
        refine_tol_s=args.refine_tol,
        reference_satellite=parse_satellite(args.ref, "reference_satellite") if args.ref else None,
        other_satellite=parse_satellite(args.other, "other_satellite") if args.other else None,
        format=parse_format(args.format) if args.format else None,
        out=args.out,
        n_jobs=args.jobs,
        constellation={
            k: v
            for k, v in (
                ("num_planes", args.planes),
                ("sats_per_plane", args.sats),
                ("phasing_factor", args.phasing),
                ("altitude_km", args.altitude),
                ("inclination_deg", args.inclination),
            )
            if v is not None
        },
        constants={
            k: v
            for k, v in (("earth_radius_km", args.earth_radius), ("atmosphere_height_km", args.atmosphere))
            if v is not None
        },
    )


def _emit(text: str, path: Optional[str]):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _sidecar(config: RunConfig, path: str, **extra):
    Path(path).with_suffix(".config.json").write_text(
        dump_run_config(config, **extra), encoding="utf-8", newline="\n"
    )


def _progress(done: int, total: int):
    print(f"phasing sweep: {done}/{total}", file=sys.stderr, flush=True)


def cmd_constellation(config: RunConfig) -> int:
    _emit(constellation_to_csv(build_constellation(config.constellation)), config.out)
    if config.out:
        _sidecar(config, config.out)
    return EXIT_OK


def cmd_range_study(config: RunConfig, sweep: bool = False) -> int:
    params = config.link_params()
    extra = {}
    if sweep:
        entries = phasing.phasing_sweep(
            config.constellation, config.ranges_km, config.window, params,
            reference_id=config.reference_satellite, progress=_progress,
        )
        best = phasing.best_match(entries)
        print(
            f"best phasing factor {best.phasing_factor} (score {best.score}, "
            f"worst temporary error {best.worst_temporary_error:.1%})",
            file=sys.stderr,
        )
        summary = phasing.render_sweep(entries)
        if config.out is None:
            sys.stdout.write(summary)
            return EXIT_OK
        Path(config.out).with_suffix(".sweep.csv").write_text(summary, encoding="utf-8", newline="\n")
        report = best.report
        config = replace(config, constellation=config.constellation.replace(phasing_factor=best.phasing_factor))
        extra = {"phasing_sweep": {"best_phasing_factor": best.phasing_factor, "score": best.score}}
    else:
        records = build_constellation(config.constellation)
        ref = find_record(records, config.reference_satellite)
        report = range_study(ref, records, config.ranges_km, config.window, params)

    if config.out is None:
        sys.stdout.write(reporting.render_range_study(report, config.format))
        return EXIT_OK
    base = Path(config.out)
    for fmt in ("csv", "json"):
        base.with_suffix(f".{fmt}").write_text(
            reporting.render_range_study(report, fmt), encoding="utf-8", newline="\n"
        )
    _sidecar(config, config.out, **extra)
    return EXIT_OK


def cmd_contacts(config: RunConfig) -> int:
    if config.other_satellite is None:
        raise ConfigurationError("other_satellite", "contacts needs --other")
    if config.other_satellite == config.reference_satellite:
        raise ConfigurationError("other_satellite", "must differ from the reference satellite")
    if len(config.ranges_km) != 1:
        raise ConfigurationError("ranges_km", "contacts needs exactly one range (use --ranges KM)")
    records = build_constellation(config.constellation)
    ref = find_record(records, config.reference_satellite)
    other = find_record(records, config.other_satellite)
    link = analyze_link(ref, other, config.ranges_km[0], config.window, config.link_params())
    _emit(reporting.render_contact_table(link, config.constellation.epoch, config.format), config.out)
    if config.out:
        _sidecar(config, config.out)
    return EXIT_OK


def cmd_scalar(config: RunConfig, which: str) -> int:
    c = config.constellation
    if which == "period":
        value = orbital_period(c.orbit_radius_km, c.constants)
    else:
        value = max_lisl_range(c.altitude_km, c.constants.atmosphere_height_km, c.constants.earth_radius_km)
    print(f"{value:.2f}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = effective_config(args)
        if args.command == "contacts" and args.ranges is None and config.ranges_km == DEFAULT_RANGES_KM:
            config = replace(config, ranges_km=(DEFAULT_CONTACT_RANGE_KM,))
        if args.command == "constellation":
            return cmd_constellation(config)
        if args.command == "range-study":
            return cmd_range_study(config, sweep=args.phasing_sweep)
        if args.command == "contacts":
            return cmd_contacts(config)
        return cmd_scalar(config, args.command)
    except LislError as exc:
        print(f"lislsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"lislsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
