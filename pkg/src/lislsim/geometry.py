"""
Geometric kernels for laser inter-satellite links.

The array kernels (``segment_length``, ``segment_grazing_altitude``) accept
positions shaped ``(..., 3)`` and broadcast; the public point functions wrap
them for single :class:`~lislsim.orbit.EciPosition` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError
from .orbit import EciPosition


@dataclass(frozen=True)
class LinkGeometry:
    distance_km: float
    grazing_altitude_km: float


def segment_length(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.sqrt(np.sum((a - b) ** 2, axis=-1))


def _lexicographic_greater(a, b):
    ax, ay, az = a[..., 0], a[..., 1], a[..., 2]
    bx, by, bz = b[..., 0], b[..., 1], b[..., 2]
    return (ax > bx) | ((ax == bx) & ((ay > by) | ((ay == by) & (az > bz))))


def segment_grazing_altitude(a, b, earth_radius_km: float) -> np.ndarray:
    """Lowest altitude above a spherical Earth reached by the segment a-b.

    The closest-approach parameter is clamped to [0, 1], so short segments
    whose perigee lies beyond an endpoint report that endpoint's altitude.
    Endpoints are put in a canonical order first, which makes the result
    bitwise symmetric in its arguments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    swap = _lexicographic_greater(a, b)[..., None]
    a, b = np.where(swap, b, a), np.where(swap, a, b)

    d = b - a
    dd = np.sum(d * d, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(dd > 0, -np.sum(a * d, axis=-1) / dd, 0.0)
    s = np.clip(s, 0.0, 1.0)
    closest = a + s[..., None] * d
    return np.sqrt(np.sum(closest * closest, axis=-1)) - earth_radius_km


def _check_same_time(pos_a: EciPosition, pos_b: EciPosition):
    if pos_a.t != pos_b.t:
        raise UsageError(f"positions sampled at different times ({pos_a.t} s vs {pos_b.t} s)")


def distance(pos_a: EciPosition, pos_b: EciPosition) -> float:
    """Straight-line distance in km between two simultaneous positions."""
    _check_same_time(pos_a, pos_b)
    return float(segment_length(pos_a.as_array(), pos_b.as_array()))


def grazing_altitude(pos_a: EciPosition, pos_b: EciPosition, earth_radius_km: float) -> float:
    """Minimum altitude (km) of the line of sight between two positions.

    Negative when the segment passes through the Earth.
    """
    _check_same_time(pos_a, pos_b)
    return float(segment_grazing_altitude(pos_a.as_array(), pos_b.as_array(), earth_radius_km))


def link_geometry(pos_a: EciPosition, pos_b: EciPosition, earth_radius_km: float) -> LinkGeometry:
    return LinkGeometry(distance(pos_a, pos_b), grazing_altitude(pos_a, pos_b, earth_radius_km))


def max_lisl_range(altitude_km: float, atmosphere_height_km: float, earth_radius_km: float) -> float:
    """Longest link between two satellites at ``altitude_km`` that clears the atmosphere.

    Twice the tangent length from the orbit sphere to the sphere of radius
    ``earth_radius_km + atmosphere_height_km``.
    """
    if atmosphere_height_km < 0:
        raise DomainError(f"atmosphere height must be non-negative, got {atmosphere_height_km!r}")
    if altitude_km < atmosphere_height_km:
        raise DomainError(
            f"altitude {altitude_km} km is below the atmosphere height {atmosphere_height_km} km"
        )
    orbit = earth_radius_km + altitude_km
    shell = earth_radius_km + atmosphere_height_km
    return 2.0 * math.sqrt(orbit * orbit - shell * shell)


def intra_plane_chord(slot_separation_k: int, orbit_radius_km: float, sats_per_plane: int) -> float:
    """Distance between two satellites of one plane that are k slots apart."""
    if not 1 <= slot_separation_k <= sats_per_plane / 2:
        raise DomainError(
            f"slot separation must lie in [1, {sats_per_plane / 2:g}], got {slot_separation_k}"
        )
    return 2.0 * orbit_radius_km * math.sin(slot_separation_k * math.pi / sats_per_plane)
