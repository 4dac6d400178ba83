"""
Antenna-level mobility network and modularity.
"""

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from borderflux.config.logging import get_logger
from borderflux.exceptions import DegenerateInputError, ValidationError
from borderflux.geo.models import AntennaRegistry, PartitionScheme, Trajectory

log = get_logger(__name__)


@dataclass(frozen=True)
class MobilityNetwork:
    """Directed transition counts: ``W[i, j]`` counts moves from node i to node j."""

    node_ids: tuple[str, ...]
    W: sparse.csr_matrix

    def __post_init__(self):
        n = len(self.node_ids)
        if self.W.shape != (n, n):
            raise ValidationError(f"W has shape {self.W.shape}, expected ({n}, {n})")
        if self.W.nnz and self.W.data.min() < 0:
            raise ValidationError("transition weights must be non-negative")

    @classmethod
    def from_dense(cls, node_ids: Sequence[str], W) -> "MobilityNetwork":
        return cls(node_ids=tuple(node_ids), W=sparse.csr_matrix(np.asarray(W, float)))

    def __len__(self) -> int:
        return len(self.node_ids)

    @cached_property
    def index(self) -> dict[str, int]:
        return {node: k for k, node in enumerate(self.node_ids)}

    @property
    def total_weight(self) -> float:
        return float(self.W.sum())

    def dense(self) -> np.ndarray:
        return self.W.toarray()

    def symmetrized(self) -> sparse.csr_matrix:
        """Undirected weights ``A = W + W^T``."""
        return (self.W + self.W.T).tocsr()

    def subgraph(self, nodes: Sequence[str]) -> "MobilityNetwork":
        idx = [self.index[n] for n in nodes]
        return MobilityNetwork(node_ids=tuple(nodes), W=self.W[idx][:, idx].tocsr())


@dataclass(frozen=True)
class CommunityAssignment:
    """Contiguous integer community labels over network nodes."""

    labels: Mapping[str, int]
    degenerate_groups: tuple[str, ...] = field(default=())

    @property
    def number_of_communities(self) -> int:
        return len(set(self.labels.values()))

    def __getitem__(self, node: str) -> int:
        return self.labels[node]

    def members(self, label: int) -> list[str]:
        return [n for n, lab in self.labels.items() if lab == label]

    def as_scheme(self, name: str = "communities") -> PartitionScheme:
        return PartitionScheme(
            name=name, assignment={n: str(lab) for n, lab in self.labels.items()}
        )

    @classmethod
    def from_groups(
        cls,
        node_ids: Sequence[str],
        groups: Iterable[Iterable[str]],
        degenerate_groups: tuple[str, ...] = (),
    ) -> "CommunityAssignment":
        """Label groups 0..k-1 in order of their first node in ``node_ids``."""
        position = {n: k for k, n in enumerate(node_ids)}
        ordered = sorted(
            (sorted(g, key=position.__getitem__) for g in groups),
            key=lambda g: position[g[0]],
        )
        labels = {n: c for c, group in enumerate(ordered) for n in group}
        missing = [n for n in node_ids if n not in labels]
        if missing:
            raise ValidationError(f"{len(missing)} node(s) have no community")
        return cls(
            labels={n: labels[n] for n in node_ids},
            degenerate_groups=degenerate_groups,
        )

    @classmethod
    def from_scheme(
        cls, node_ids: Sequence[str], scheme: PartitionScheme
    ) -> "CommunityAssignment":
        groups: dict[str, list[str]] = {}
        for n in node_ids:
            groups.setdefault(scheme[n], []).append(n)
        return cls.from_groups(node_ids, groups.values())


def build_mobility_network(
    trajs: Iterable[Trajectory], registry: AntennaRegistry, window_hours: float = 24.0
) -> MobilityNetwork:
    """Count consecutive same-user transitions with ``0 < dt <= window_hours``.

    Repeated calls at one antenna increment the diagonal.
    """
    window_s = window_hours * 3600
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    for traj in sorted(trajs, key=lambda t: t.user_id):
        if len(traj) < 2:
            continue
        idx = np.array([registry.index[a] for a in traj.antenna_ids], dtype=np.int64)
        gap = np.diff(traj.timestamps.astype(np.int64))
        keep = (gap > 0) & (gap <= window_s)
        rows.append(idx[:-1][keep])
        cols.append(idx[1:][keep])

    n = len(registry)
    r = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    c = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    W = sparse.coo_matrix((np.ones(len(r)), (r, c)), shape=(n, n)).tocsr()
    W.sum_duplicates()
    log.info("mobility_network_built", nodes=n, transitions=int(W.sum()), edges=W.nnz)
    return MobilityNetwork(node_ids=registry.ids, W=W)


def label_vector(net: MobilityNetwork, asg: CommunityAssignment) -> np.ndarray:
    missing = [n for n in net.node_ids if n not in asg.labels]
    if missing:
        raise ValidationError(
            f"assignment misses {len(missing)} node(s), e.g. {', '.join(missing[:5])}"
        )
    return np.array([asg.labels[n] for n in net.node_ids], dtype=np.int64)


def modularity(net: MobilityNetwork, asg: CommunityAssignment) -> float:
    """Newman modularity of an assignment on ``A = W + W^T``."""
    labels = label_vector(net, asg)
    A = net.symmetrized().tocoo()
    two_m = float(A.sum())
    if two_m <= 0:
        raise DegenerateInputError(
            "modularity is undefined for a network without weight"
        )

    intra = float(A.data[labels[A.row] == labels[A.col]].sum())
    k = np.asarray(A.sum(axis=1)).ravel()
    _, inverse = np.unique(labels, return_inverse=True)
    K = np.bincount(inverse, weights=k)
    return intra / two_m - float(np.sum((K / two_m) ** 2))


@dataclass(frozen=True)
class CommunityEdge:
    source: int
    target: int
    weight: float
    kind: str


def community_flux_edges(
    net: MobilityNetwork, asg: CommunityAssignment, level1: PartitionScheme
) -> list[CommunityEdge]:
    """Directed community-to-community flux, tagged intra or inter level-1 region.

    A community belongs to the level-1 region holding most of its nodes
    (smallest label on ties).
    """
    labels = label_vector(net, asg)
    k = int(labels.max()) + 1
    M = sparse.csr_matrix(
        (np.ones(len(labels)), (np.arange(len(labels)), labels)), shape=(len(labels), k)
    )
    C = (M.T @ net.W @ M).toarray()

    home: dict[int, str] = {}
    for c in range(k):
        votes: dict[str, int] = {}
        for node in asg.members(c):
            votes[level1[node]] = votes.get(level1[node], 0) + 1
        home[c] = min(votes, key=lambda lab: (-votes[lab], lab))

    edges = []
    for i, j in zip(*np.nonzero(C)):
        if i == j:
            continue
        kind = "intra" if home[int(i)] == home[int(j)] else "inter"
        edges.append(CommunityEdge(int(i), int(j), float(C[i, j]), kind))
    return edges
