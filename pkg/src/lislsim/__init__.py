"""Laser inter-satellite link (LISL) contact analysis for Walker-delta constellations."""

from .errors import ConfigurationError, DomainError, IdParseError, LislError, UsageError
from .geometry import (
    LinkGeometry,
    distance,
    grazing_altitude,
    intra_plane_chord,
    link_geometry,
    max_lisl_range,
)
from .links import (
    ContactInterval,
    LinkParams,
    LinkRecord,
    Permanence,
    PlaneRelation,
    PlaneRelationMap,
    RangeCounts,
    RangeStudyReport,
    SimulationWindow,
    analyze_link,
    classify_permanence,
    classify_plane_relation,
    contact_table,
    find_contact_intervals,
    in_range,
    range_study,
    survey_links,
)
from .orbit import (
    ConstellationConfig,
    EciPosition,
    PhysicalConstants,
    SatelliteId,
    SatelliteRecord,
    build_constellation,
    find_record,
    format_id,
    orbital_period,
    parse_id,
    propagate,
)

__version__ = "0.1.0"
