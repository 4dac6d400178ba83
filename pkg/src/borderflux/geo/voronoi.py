"""
Planar Voronoi tessellation of antenna sites in the local projection.
"""

import numpy as np
import shapely
from shapely.geometry import MultiPoint, box
from shapely.ops import voronoi_diagram

from borderflux.config.logging import get_logger
from borderflux.exceptions import DegenerateInputError
from borderflux.geo.models import AntennaRegistry, VoronoiTessellation

log = get_logger(__name__)

# Shared edges shorter than this (km) are treated as point contacts.
EDGE_EPS_KM = 1e-9


def build_voronoi(registry: AntennaRegistry) -> VoronoiTessellation:
    """Build Voronoi cells clipped to the registry's bounding region.

    Raises:
        DegenerateInputError: fewer than two distinct site positions, or
            repeated positions (collapse co-located sites first).
    """
    xy = registry.xy
    distinct = np.unique(xy, axis=0)
    if len(distinct) < 2:
        raise DegenerateInputError(
            "all antenna sites coincide; a tessellation needs 2 distinct positions"
        )
    if len(distinct) < len(xy):
        raise DegenerateInputError(
            f"{len(xy) - len(distinct)} antenna(s) share a position with another; "
            "collapse co-located sites first"
        )

    projection = registry.projection
    region = shapely.transform(registry.bounding_region, projection.forward_coords)
    minx, miny, maxx, maxy = region.bounds
    minx, miny = min(minx, xy[:, 0].min()), min(miny, xy[:, 1].min())
    maxx, maxy = max(maxx, xy[:, 0].max()), max(maxy, xy[:, 1].max())
    pad = max(maxx - minx, maxy - miny)
    envelope = box(minx - pad, miny - pad, maxx + pad, maxy + pad)

    diagram = voronoi_diagram(MultiPoint(xy), envelope=envelope)
    polygons = np.array(list(diagram.geoms), dtype=object)

    # match each raw cell to the site it contains
    tree = shapely.STRtree(polygons)
    point_idx, poly_idx = tree.query(shapely.points(xy), predicate="intersects")
    raw = np.empty(len(xy), dtype=object)
    hits = np.zeros(len(xy), dtype=int)
    for p, c in zip(point_idx, poly_idx):
        raw[p] = polygons[c]
        hits[p] += 1
    if (hits != 1).any():
        raise DegenerateInputError("could not match Voronoi cells to sites")

    clipped = shapely.intersection(raw, region)

    ids = registry.ids
    left, right = tree_pairs(raw)
    edges = {}
    if len(left):
        shared = shapely.intersection(raw[left], raw[right])
        shared = shapely.intersection(shared, region)
        lengths = shapely.length(shared)
        for i, j, edge, length in zip(left, right, shared, lengths):
            if length > EDGE_EPS_KM:
                a, b = sorted((ids[i], ids[j]))
                if edge.geom_type == "MultiLineString":
                    edge = shapely.line_merge(edge)
                edges[(a, b)] = edge

    projected_cells = {ids[k]: clipped[k] for k in range(len(ids))}
    cells = {
        ids[k]: shapely.transform(clipped[k], projection.inverse_coords)
        for k in range(len(ids))
    }
    log.debug("voronoi_built", cells=len(cells), neighbor_pairs=len(edges))
    return VoronoiTessellation(
        registry=registry,
        cells=cells,
        projected_cells=projected_cells,
        neighbor_pairs=frozenset(edges),
        shared_edges=edges,
    )


def tree_pairs(polygons: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i < j) of polygons whose geometries touch or overlap."""
    tree = shapely.STRtree(polygons)
    left, right = tree.query(polygons, predicate="intersects")
    keep = left < right
    return left[keep], right[keep]
