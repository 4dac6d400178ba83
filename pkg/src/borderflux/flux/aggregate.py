"""
Region profiles and aggregation of antenna transitions into region flux.
"""

from typing import Mapping

import numpy as np
from scipy import sparse

from borderflux.config.logging import get_logger
from borderflux.flux.models import FluxKind, FluxMatrix, RegionProfile
from borderflux.geo.models import AntennaRegistry, PartitionScheme
from borderflux.network.graph import MobilityNetwork

log = get_logger(__name__)


def _membership(
    node_ids, scheme: PartitionScheme
) -> tuple[tuple[str, ...], sparse.csr_matrix]:
    scheme.require_total(node_ids)
    regions = scheme.labels
    column = {label: k for k, label in enumerate(regions)}
    cols = np.array([column[scheme[n]] for n in node_ids], dtype=np.int64)
    M = sparse.csr_matrix(
        (np.ones(len(cols)), (np.arange(len(cols)), cols)),
        shape=(len(cols), len(regions)),
    )
    return regions, M


def aggregate_flux(net: MobilityNetwork, scheme: PartitionScheme) -> FluxMatrix:
    """``T[r, s]`` sums ``W[i, j]`` over i in r and j in s; regions sorted by label."""
    regions, M = _membership(net.node_ids, scheme)
    T = (M.T @ net.W @ M).toarray()
    return FluxMatrix(regions=regions, T=T, kind=FluxKind.OBSERVED)


def build_region_profiles(
    registry: AntennaRegistry, scheme: PartitionScheme
) -> list[RegionProfile]:
    """One profile per label, centroids weighted by antenna population.

    A region without population falls back to the plain mean position.
    """
    scheme.require_total(registry.ids)
    profiles = []
    for label in scheme.labels:
        members = tuple(a for a in registry.ids if scheme[a] == label)
        idx = np.array([registry.index[a] for a in members])
        weights = registry.populations[idx]
        total = float(weights.sum())
        if total > 0:
            lon = float(np.average(registry.lon[idx], weights=weights))
            lat = float(np.average(registry.lat[idx], weights=weights))
        else:
            log.warning("region_without_population", region=label)
            lon = float(registry.lon[idx].mean())
            lat = float(registry.lat[idx].mean())
        profiles.append(
            RegionProfile(
                region_label=label,
                population=total,
                lon=lon,
                lat=lat,
                member_antennas=members,
            )
        )
    return profiles


def derive_level1(scheme: PartitionScheme, level1: PartitionScheme) -> dict[str, str]:
    """Map each region to the level-1 label holding most of its antennas.

    Ties go to the smallest label.
    """
    votes: dict[str, dict[str, int]] = {label: {} for label in scheme.labels}
    for antenna, region in scheme.assignment.items():
        parent = level1[antenna]
        votes[region][parent] = votes[region].get(parent, 0) + 1
    return {
        region: min(counts, key=lambda lab: (-counts[lab], lab))
        for region, counts in votes.items()
    }


def level1_vector(flux: FluxMatrix, level1: Mapping[str, str]) -> np.ndarray:
    return np.array([level1[r] for r in flux.regions], dtype=object)
