"""
Walker-delta constellation construction and circular two-body propagation.

Positions are Earth-centered inertial (ECI) in km. Only relative geometry
between satellites matters downstream, so the inertial frame is not tied to
any Earth-fixed or sidereal reference.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError, IdParseError

DEFAULT_EPOCH = "2020-08-25T16:00:00.000Z"

CONSTELLATION_CSV_HEADER = (
    "id",
    "plane",
    "slot",
    "raan_deg",
    "inclination_deg",
    "initial_arg_latitude_deg",
    "orbit_radius_km",
)


@dataclass(frozen=True)
class PhysicalConstants:
    """Gravitational and Earth-model constants.

    The gravitational constant and Earth mass are in SI units; lengths are
    in km.
    """

    gravitational_constant: float = 6.673e-11  # m^3 / (kg s^2)
    earth_mass: float = 5.98e24  # kg
    earth_radius_km: float = 6371.0
    atmosphere_height_km: float = 80.0

    def __post_init__(self):
        for name in (
            "gravitational_constant",
            "earth_mass",
            "earth_radius_km",
            "atmosphere_height_km",
        ):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(name, f"must be a positive finite number, got {value!r}")

    @property
    def mu(self) -> float:
        """Earth's gravitational parameter G*M in m^3/s^2."""
        return self.gravitational_constant * self.earth_mass


@dataclass(frozen=True)
class ConstellationConfig:
    """Walker-delta shell parameters.

    Defaults describe the Starlink Phase I shell: 53 deg inclination, 550 km
    altitude, 24 planes of 66 satellites. ``phasing_factor`` (Walker F)
    shifts the slots of plane p by ``(p-1) * F * 360 / (P*S)`` degrees.
    """

    inclination_deg: float = 53.0
    altitude_km: float = 550.0
    num_planes: int = 24
    sats_per_plane: int = 66
    phasing_factor: int = 0
    raan_spread_deg: float = 360.0
    epoch: str = DEFAULT_EPOCH
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        for name in ("num_planes", "sats_per_plane"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigurationError(name, f"must be an integer >= 1, got {value!r}")
        F = self.phasing_factor
        if isinstance(F, bool) or not isinstance(F, int) or not 0 <= F < self.sats_per_plane:
            raise ConfigurationError(
                "phasing_factor",
                f"must be an integer in [0, {self.sats_per_plane - 1}], got {F!r}",
            )
        if not (math.isfinite(self.inclination_deg) and 0 <= self.inclination_deg <= 180):
            raise ConfigurationError("inclination_deg", f"must lie in [0, 180], got {self.inclination_deg!r}")
        if not (math.isfinite(self.altitude_km) and self.altitude_km > 0):
            raise ConfigurationError("altitude_km", f"must be positive, got {self.altitude_km!r}")
        if not (math.isfinite(self.raan_spread_deg) and 0 < self.raan_spread_deg <= 360):
            raise ConfigurationError("raan_spread_deg", f"must lie in (0, 360], got {self.raan_spread_deg!r}")
        if not isinstance(self.constants, PhysicalConstants):
            raise ConfigurationError("constants", "must be a PhysicalConstants instance")

    @property
    def plane_spacing_deg(self) -> float:
        return self.raan_spread_deg / self.num_planes

    @property
    def slot_spacing_deg(self) -> float:
        return 360.0 / self.sats_per_plane

    @property
    def orbit_radius_km(self) -> float:
        return self.constants.earth_radius_km + self.altitude_km

    @property
    def num_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane

    def replace(self, **changes) -> "ConstellationConfig":
        return replace(self, **changes)


@dataclass(frozen=True, order=True)
class SatelliteId:
    """Plane and slot indices, both 1-based."""

    plane: int
    slot: int

    def __str__(self):
        return format_id(self)


_ID_PATTERN = re.compile(r"^x1(\d{2})(\d{2})$")


def format_plane_id(plane: int) -> str:
    """Plane identifier such as ``x101``."""
    if not 1 <= plane <= 99:
        raise IdParseError(f"plane index {plane} cannot be encoded in two digits")
    return f"x1{plane:02d}"


def format_id(sat_id: SatelliteId) -> str:
    """Canonical string form, e.g. ``SatelliteId(1, 1) -> "x10101"``."""
    if not (1 <= sat_id.plane <= 99 and 1 <= sat_id.slot <= 99):
        raise IdParseError(f"{sat_id!r} cannot be encoded in the x1PPSS form")
    return f"x1{sat_id.plane:02d}{sat_id.slot:02d}"


def parse_id(
    text: str,
    num_planes: Optional[int] = None,
    sats_per_plane: Optional[int] = None,
) -> SatelliteId:
    """Parse an ``x1PPSS`` identifier, optionally checking it against a shell size."""
    match = _ID_PATTERN.match(text.strip()) if isinstance(text, str) else None
    if match is None:
        raise IdParseError(f"malformed satellite id {text!r}; expected x1PPSS")
    plane, slot = int(match.group(1)), int(match.group(2))
    if plane < 1 or slot < 1:
        raise IdParseError(f"satellite id {text!r} has a zero plane or slot index")
    if num_planes is not None and plane > num_planes:
        raise IdParseError(f"satellite id {text!r}: plane {plane} exceeds {num_planes} planes")
    if sats_per_plane is not None and slot > sats_per_plane:
        raise IdParseError(f"satellite id {text!r}: slot {slot} exceeds {sats_per_plane} slots")
    return SatelliteId(plane, slot)


@dataclass(frozen=True)
class SatelliteRecord:
    """A satellite on a circular orbit, angles in radians."""

    id: SatelliteId
    raan_rad: float
    inclination_rad: float
    initial_arg_latitude_rad: float
    orbit_radius_km: float
    mean_motion_rad_s: float


@dataclass(frozen=True)
class EciPosition:
    x: float
    y: float
    z: float
    t: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


def orbital_period(orbit_radius_km: float, constants: Optional[PhysicalConstants] = None) -> float:
    """Period in seconds of a circular orbit, ``2*pi*sqrt(R^3 / (G*M))``."""
    if not orbit_radius_km > 0:
        raise DomainError(f"orbit radius must be positive, got {orbit_radius_km!r}")
    constants = constants or PhysicalConstants()
    radius_m = orbit_radius_km * 1e3
    return 2.0 * math.pi * math.sqrt(radius_m**3 / constants.mu)


def build_constellation(config: ConstellationConfig) -> List[SatelliteRecord]:
    """All P*S satellites of a Walker-delta shell, ordered by (plane, slot)."""
    P, S, F = config.num_planes, config.sats_per_plane, config.phasing_factor
    radius = config.orbit_radius_km
    if radius <= config.constants.earth_radius_km:
        raise ConfigurationError("altitude_km", "orbit radius must exceed the Earth radius")
    mean_motion = 2.0 * math.pi / orbital_period(radius, config.constants)
    inclination = math.radians(config.inclination_deg)

    records = []
    for p in range(1, P + 1):
        raan_deg = (p - 1) * config.raan_spread_deg / P
        phase_offset_deg = (p - 1) * F * 360.0 / (P * S)
        for s in range(1, S + 1):
            u0_deg = math.fmod((s - 1) * 360.0 / S + phase_offset_deg, 360.0)
            records.append(
                SatelliteRecord(
                    id=SatelliteId(p, s),
                    raan_rad=math.radians(raan_deg),
                    inclination_rad=inclination,
                    initial_arg_latitude_rad=math.radians(u0_deg),
                    orbit_radius_km=radius,
                    mean_motion_rad_s=mean_motion,
                )
            )
    return records


def orbit_basis(raan, inclination):
    """In-plane unit vectors (node direction, 90 deg ahead) for each orbit.

    A circular orbit at argument of latitude u sits at
    ``radius * (cos(u) * p_hat + sin(u) * q_hat)``. This is the
    ``[cos u, sin u, 0]`` vector rotated by the inclination about x and then
    by the RAAN about z.
    """
    raan = np.asarray(raan, dtype=float)
    inclination = np.asarray(inclination, dtype=float)
    cos_o, sin_o = np.cos(raan), np.sin(raan)
    cos_i, sin_i = np.cos(inclination), np.sin(inclination)
    p_hat = np.stack([cos_o, sin_o, np.zeros_like(cos_o)], axis=-1)
    q_hat = np.stack([-sin_o * cos_i, cos_o * cos_i, np.broadcast_to(sin_i, cos_o.shape)], axis=-1)
    return p_hat, q_hat


@dataclass(frozen=True)
class OrbitArrays:
    """Column-wise orbital elements of many records, for vectorized propagation."""

    raan: np.ndarray
    inclination: np.ndarray
    u0: np.ndarray
    radius: np.ndarray
    mean_motion: np.ndarray

    @classmethod
    def from_records(cls, records: Sequence[SatelliteRecord]) -> "OrbitArrays":
        return cls(
            raan=np.array([r.raan_rad for r in records], dtype=float),
            inclination=np.array([r.inclination_rad for r in records], dtype=float),
            u0=np.array([r.initial_arg_latitude_rad for r in records], dtype=float),
            radius=np.array([r.orbit_radius_km for r in records], dtype=float),
            mean_motion=np.array([r.mean_motion_rad_s for r in records], dtype=float),
        )

    def take(self, index) -> "OrbitArrays":
        return OrbitArrays(
            self.raan[index], self.inclination[index], self.u0[index],
            self.radius[index], self.mean_motion[index],
        )

    def __len__(self):
        return len(self.raan)

    def positions(self, t) -> np.ndarray:
        """ECI positions, shape ``broadcast(elements, t) + (3,)``."""
        u = self.u0 + self.mean_motion * np.asarray(t, dtype=float)
        p_hat, q_hat = orbit_basis(self.raan, self.inclination)
        radius = self.radius
        return (radius * np.cos(u))[..., None] * p_hat + (radius * np.sin(u))[..., None] * q_hat


def propagate(record: SatelliteRecord, t_seconds: float) -> EciPosition:
    """ECI position of ``record`` at ``t_seconds`` after the epoch."""
    u = record.initial_arg_latitude_rad + record.mean_motion_rad_s * t_seconds
    p_hat, q_hat = orbit_basis(record.raan_rad, record.inclination_rad)
    xyz = record.orbit_radius_km * (math.cos(u) * p_hat + math.sin(u) * q_hat)
    return EciPosition(float(xyz[0]), float(xyz[1]), float(xyz[2]), float(t_seconds))


def find_record(records: Iterable[SatelliteRecord], sat_id: SatelliteId) -> SatelliteRecord:
    for record in records:
        if record.id == sat_id:
            return record
    raise IdParseError(f"satellite {sat_id} is not part of the constellation")


def constellation_to_csv(records: Iterable[SatelliteRecord]) -> str:
    """Constellation export, one row per satellite sorted by (plane, slot)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CONSTELLATION_CSV_HEADER)
    for rec in sorted(records, key=lambda r: r.id):
        writer.writerow(
            [
                format_id(rec.id),
                rec.id.plane,
                rec.id.slot,
                repr(round(math.degrees(rec.raan_rad), 9)),
                repr(round(math.degrees(rec.inclination_rad), 9)),
                repr(round(math.degrees(rec.initial_arg_latitude_rad), 9)),
                repr(rec.orbit_radius_km),
            ]
        )
    return buf.getvalue()
