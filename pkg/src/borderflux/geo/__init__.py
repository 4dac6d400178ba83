"""Antennas, partitions, events, population and the Voronoi tessellation."""

from borderflux.geo.colocation import (
    CollapseResult,
    collapse_colocated,
    remap_partition,
)
from borderflux.geo.distance import (
    EARTH_RADIUS_KM,
    LocalProjection,
    haversine,
    haversine_array,
    pairwise_haversine,
)
from borderflux.geo.loaders import (
    load_antennas,
    load_boundary,
    load_events,
    load_partition,
    load_population,
)
from borderflux.geo.models import (
    AntennaRegistry,
    AntennaSite,
    CdrEvent,
    EventLog,
    PartitionScheme,
    PopulationRaster,
    Trajectory,
    VoronoiTessellation,
    make_site,
)
from borderflux.geo.population import assign_population, sample_areas
from borderflux.geo.voronoi import build_voronoi

__all__ = [
    "EARTH_RADIUS_KM",
    "AntennaRegistry",
    "AntennaSite",
    "CdrEvent",
    "CollapseResult",
    "EventLog",
    "LocalProjection",
    "PartitionScheme",
    "PopulationRaster",
    "Trajectory",
    "VoronoiTessellation",
    "assign_population",
    "build_voronoi",
    "collapse_colocated",
    "haversine",
    "haversine_array",
    "load_antennas",
    "load_boundary",
    "load_events",
    "load_partition",
    "load_population",
    "make_site",
    "pairwise_haversine",
    "remap_partition",
    "sample_areas",
]
