"""
Community detectors and partition-constrained sub-community detection.
"""

from typing import Callable, Dict

import networkx as nx

from borderflux.config.logging import get_logger
from borderflux.exceptions import DegenerateInputError, ValidationError
from borderflux.geo.models import PartitionScheme
from borderflux.network.graph import CommunityAssignment, MobilityNetwork

log = get_logger(__name__)

# Minimum modularity gain for Louvain to keep aggregating levels.
LOUVAIN_THRESHOLD = 1e-12

Detector = Callable[[MobilityNetwork, int], CommunityAssignment]


def to_undirected_graph(net: MobilityNetwork) -> nx.Graph:
    """Undirected graph with weights W_ij + W_ji and self-loop weight W_ii."""
    graph = nx.Graph()
    graph.add_nodes_from(net.node_ids)
    A = net.symmetrized().tocoo()
    for i, j, w in zip(A.row, A.col, A.data):
        if i < j and w > 0:
            graph.add_edge(net.node_ids[i], net.node_ids[j], weight=float(w))
        elif i == j and w > 0:
            graph.add_edge(net.node_ids[i], net.node_ids[i], weight=float(w) / 2)
    return graph


def louvain(net: MobilityNetwork, seed: int) -> CommunityAssignment:
    """Two-phase Louvain on the symmetrized network, deterministic per seed."""
    if net.total_weight <= 0:
        raise DegenerateInputError("Louvain needs a network with positive weight")
    graph = to_undirected_graph(net)
    communities = nx.community.louvain_communities(
        graph, weight="weight", resolution=1.0, threshold=LOUVAIN_THRESHOLD, seed=seed
    )
    return CommunityAssignment.from_groups(net.node_ids, communities)


class DetectorRegistry:
    """Registry of community detection algorithms by name."""

    DETECTORS: Dict[str, Dict] = {
        "louvain": {"function": louvain, "version": f"networkx-{nx.__version__}"},
    }

    @classmethod
    def get(cls, name: str) -> Detector:
        if name not in cls.DETECTORS:
            raise ValidationError(
                f"Unknown detector '{name}'. Available detectors: {list(cls.DETECTORS)}"
            )
        return cls.DETECTORS[name]["function"]

    @classmethod
    def version(cls, name: str) -> str:
        cls.get(name)
        return f"{name}/{cls.DETECTORS[name]['version']}"

    @classmethod
    def names(cls) -> list[str]:
        return list(cls.DETECTORS)

    @classmethod
    def register(cls, name: str, function: Detector, version: str = "1") -> None:
        cls.DETECTORS[name] = {"function": function, "version": version}


def get_detector(name: str) -> Detector:
    return DetectorRegistry.get(name)


def constrained_subcommunities(
    net: MobilityNetwork,
    level1: PartitionScheme,
    seed: int,
    detector: str = "louvain",
) -> CommunityAssignment:
    """Detect communities inside each level-1 region separately.

    Cross-region edges are ignored, so every sub-community is nested in one
    region. Regions without internal weight become one sub-community and are
    listed in ``degenerate_groups``.
    """
    level1.require_total(net.node_ids)
    detect = get_detector(detector)

    groups: list[list[str]] = []
    degenerate: list[str] = []
    for region in level1.labels:
        nodes = [n for n in net.node_ids if level1[n] == region]
        sub = net.subgraph(nodes)
        if sub.total_weight <= 0:
            degenerate.append(region)
            groups.append(nodes)
            continue
        found = detect(sub, seed)
        for c in range(found.number_of_communities):
            groups.append(found.members(c))

    if degenerate:
        log.warning("regions_without_internal_flow", regions=degenerate)
    asg = CommunityAssignment.from_groups(
        net.node_ids, groups, degenerate_groups=tuple(degenerate)
    )
    log.info(
        "subcommunities_detected",
        regions=len(level1.labels),
        communities=asg.number_of_communities,
    )
    return asg
