"""Mobility network, community detection and partition similarity."""

from borderflux.network.detection import (
    LOUVAIN_THRESHOLD,
    DetectorRegistry,
    constrained_subcommunities,
    get_detector,
    louvain,
)
from borderflux.network.graph import (
    CommunityAssignment,
    CommunityEdge,
    MobilityNetwork,
    build_mobility_network,
    community_flux_edges,
    modularity,
)
from borderflux.network.similarity import (
    INDEX_NAMES,
    INDEX_NOTES,
    PairCounts,
    pair_counts,
    similarity_indices,
)

__all__ = [
    "INDEX_NAMES",
    "INDEX_NOTES",
    "LOUVAIN_THRESHOLD",
    "CommunityAssignment",
    "CommunityEdge",
    "DetectorRegistry",
    "MobilityNetwork",
    "PairCounts",
    "build_mobility_network",
    "community_flux_edges",
    "constrained_subcommunities",
    "get_detector",
    "louvain",
    "modularity",
    "pair_counts",
    "similarity_indices",
]
