"""
Merging of co-located antennas into single sites.
"""

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from borderflux.config.logging import get_logger
from borderflux.exceptions import ValidationError
from borderflux.geo.models import AntennaRegistry, PartitionScheme, make_site

log = get_logger(__name__)


@dataclass(frozen=True)
class CollapseResult:
    """Collapsed registry plus the mapping from every input id to its survivor."""

    registry: AntennaRegistry
    id_map: Mapping[str, str]

    @property
    def merged_count(self) -> int:
        return sum(1 for old, new in self.id_map.items() if old != new)


def _merge_once(
    registry: AntennaRegistry, tol_km: float
) -> tuple[AntennaRegistry, dict[str, str]]:
    pairs = cKDTree(registry.xy).query_pairs(r=tol_km, output_type="ndarray")
    n = len(registry)
    if len(pairs) == 0:
        return registry, {i: i for i in registry.ids}

    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, component = connected_components(graph, directed=False)

    groups: dict[int, list[int]] = {}
    for k, c in enumerate(component):
        groups.setdefault(int(c), []).append(k)

    sites = []
    id_map: dict[str, str] = {}
    for members in sorted(groups.values(), key=lambda m: m[0]):
        ids = [registry.ids[k] for k in members]
        survivor = min(ids)
        for i in ids:
            id_map[i] = survivor
        if len(members) == 1:
            sites.append(registry.sites[members[0]])
            continue
        sites.append(
            make_site(
                survivor,
                float(registry.lon[members].mean()),
                float(registry.lat[members].mean()),
                float(registry.populations[members].sum()),
            )
        )
    collapsed = AntennaRegistry(
        sites=tuple(sites), bounding_region=registry.bounding_region
    )
    return collapsed, id_map


def collapse_colocated(registry: AntennaRegistry, tol: float = 1.0) -> CollapseResult:
    """Merge sites within ``tol`` metres of each other, transitively.

    A merged site sits at the member centroid, takes the lexicographically
    smallest member id and the summed population. Merging repeats until no
    two sites are within ``tol``, so the operation is idempotent.
    """
    if tol < 0:
        raise ValidationError(f"co-location tolerance must be >= 0, got {tol}")

    id_map = {i: i for i in registry.ids}
    current = registry
    while True:
        merged, step = _merge_once(current, tol / 1000.0)
        if len(merged) == len(current):
            break
        id_map = {old: step[new] for old, new in id_map.items()}
        current = merged

    result = CollapseResult(registry=current, id_map=id_map)
    if result.merged_count:
        log.info(
            "antennas_collapsed",
            before=len(registry),
            after=len(current),
            merged=result.merged_count,
        )
    return result


def remap_partition(scheme: PartitionScheme, result: CollapseResult) -> PartitionScheme:
    """Carry a scheme over to the collapsed registry.

    Survivors are the smallest member id, so sorted iteration lets a
    survivor's own label win.
    """
    assignment: dict[str, str] = {}
    for old in sorted(scheme.assignment):
        new = result.id_map.get(old, old)
        if old == new or new not in assignment:
            assignment[new] = scheme.assignment[old]
    return PartitionScheme(name=scheme.name, assignment=assignment)
