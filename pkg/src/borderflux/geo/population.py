"""
Assignment of raster population to Voronoi cells.
"""

import numpy as np
import shapely
from scipy.spatial import cKDTree

from borderflux.config.logging import get_logger
from borderflux.geo.distance import EARTH_RADIUS_KM
from borderflux.geo.models import AntennaRegistry, PopulationRaster, VoronoiTessellation

log = get_logger(__name__)


def sample_areas(raster: PopulationRaster) -> np.ndarray:
    """Spherical area (km^2) of the grid cell centred on each raster sample."""
    half = np.radians(raster.spacing_deg) / 2
    lat = np.radians(raster.lat)
    lo = np.clip(lat - half, -np.pi / 2, np.pi / 2)
    hi = np.clip(lat + half, -np.pi / 2, np.pi / 2)
    return EARTH_RADIUS_KM**2 * 2 * half * (np.sin(hi) - np.sin(lo))


def assign_population(
    tess: VoronoiTessellation, raster: PopulationRaster
) -> AntennaRegistry:
    """Sum density times sample area into the cell holding each raster point.

    Points outside the bounding region are discarded. Inside it, a point's
    cell is the one of its nearest site in the projection, which is the
    defining property of the Voronoi cell.
    """
    registry = tess.registry
    mass = raster.density * sample_areas(raster)
    inside = shapely.contains_xy(registry.bounding_region, raster.lon, raster.lat)

    xy = registry.projection.forward(raster.lon[inside], raster.lat[inside])
    _, nearest = cKDTree(registry.xy).query(xy, k=1)
    populations = np.bincount(nearest, weights=mass[inside], minlength=len(registry))

    log.info(
        "population_assigned",
        total=float(populations.sum()),
        outside_points=int((~inside).sum()),
        outside_mass=float(mass[~inside].sum()),
    )
    return registry.with_populations(populations)
