"""Tests for the mobility network, community detection and partition similarity."""

from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from borderflux.exceptions import DegenerateInputError, ValidationError
from borderflux.geo import PartitionScheme
from borderflux.network import (
    INDEX_NAMES,
    CommunityAssignment,
    DetectorRegistry,
    MobilityNetwork,
    build_mobility_network,
    community_flux_edges,
    constrained_subcommunities,
    louvain,
    modularity,
    pair_counts,
    similarity_indices,
)
from tests.conftest import event_log, trajectory, two_block_network


def scheme(name: str, labels: dict[str, str]) -> PartitionScheme:
    return PartitionScheme(name=name, assignment=labels)


def set_partitions(items: list[str]):
    """Every partition of ``items`` (Bell-number many)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in set_partitions(rest):
        yield [[first], *partition]
        for k in range(len(partition)):
            yield [*partition[:k], [first, *partition[k]], *partition[k + 1 :]]


def best_modularity(net: MobilityNetwork) -> float:
    return max(
        modularity(net, CommunityAssignment.from_groups(net.node_ids, groups))
        for groups in set_partitions(list(net.node_ids))
    )


def undirected(n: int, edges: list[tuple[int, int]], weight: float = 1.0):
    W = np.zeros((n, n))
    for i, j in edges:
        W[i, j] = W[j, i] = weight
    return W


def two_triangles() -> MobilityNetwork:
    W = undirected(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    return MobilityNetwork.from_dense([f"n{k}" for k in range(6)], W)


def complete_graph(n: int) -> MobilityNetwork:
    W = np.ones((n, n)) - np.eye(n)
    return MobilityNetwork.from_dense([f"n{k}" for k in range(n)], W)


class TestBuildNetwork:
    """Tests for transition counting."""

    def test_counts_transitions_and_self_loops(self, registry):
        log = event_log(
            trajectory("u", [(0, "a00"), (10, "a01"), (20, "a01"), (30, "a00")]),
            trajectory("v", [(0, "a00"), (5, "a01")]),
        )
        net = build_mobility_network(log, registry)
        W = net.dense()
        i, j = registry.index["a00"], registry.index["a01"]
        assert W[i, j] == 2
        assert W[j, j] == 1
        assert W[j, i] == 1
        assert net.total_weight == 4

    def test_gap_limits(self, registry):
        log = event_log(
            trajectory(
                "u",
                [(0, "a00"), (0, "a01"), (25 * 3600, "a02"), (26 * 3600, "a12")],
            )
        )
        net = build_mobility_network(log, registry, window_hours=24.0)
        assert net.total_weight == 1
        assert net.dense()[registry.index["a02"], registry.index["a12"]] == 1

    def test_node_order_follows_registry(self, registry):
        net = build_mobility_network(event_log(), registry)
        assert net.node_ids == registry.ids
        assert net.total_weight == 0

    def test_negative_weights_rejected(self):
        with pytest.raises(ValidationError):
            MobilityNetwork.from_dense(["a", "b"], [[0, -1], [1, 0]])


class TestModularity:
    """Tests for Newman modularity."""

    def test_two_blocks(self, block_network):
        asg = CommunityAssignment.from_groups(
            block_network.node_ids, [["n0", "n1", "n2"], ["n3", "n4", "n5"]]
        )
        # intra weight 240 of 2m = 244; each block has degree sum 122
        expected = 240 / 244 - 2 * (122 / 244) ** 2
        assert modularity(block_network, asg) == pytest.approx(expected)

    def test_single_community_is_zero(self, block_network):
        asg = CommunityAssignment.from_groups(
            block_network.node_ids, [list(block_network.node_ids)]
        )
        assert modularity(block_network, asg) == pytest.approx(0.0)

    def test_two_triangles_hand_value(self):
        net = two_triangles()
        asg = CommunityAssignment.from_groups(
            net.node_ids, [["n0", "n1", "n2"], ["n3", "n4", "n5"]]
        )
        assert modularity(net, asg) == pytest.approx(0.5, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(
        st.lists(st.integers(min_value=0, max_value=5), min_size=36, max_size=36),
        st.lists(st.integers(min_value=0, max_value=2), min_size=6, max_size=6),
    )
    def test_matches_networkx(self, weights, labels):
        W = np.array(weights, dtype=float).reshape(6, 6)
        np.fill_diagonal(W, 0.0)
        if W.sum() == 0:
            W[0, 1] = 1.0
        net = MobilityNetwork.from_dense([f"n{k}" for k in range(6)], W)
        groups: dict[int, list[str]] = {}
        for node, label in zip(net.node_ids, labels):
            groups.setdefault(label, []).append(node)
        asg = CommunityAssignment.from_groups(net.node_ids, groups.values())
        graph = nx.from_numpy_array(W + W.T)
        expected = nx.community.modularity(
            graph,
            [{int(n[1:]) for n in g} for g in groups.values()],
            weight="weight",
        )
        assert modularity(net, asg) == pytest.approx(expected, abs=1e-12)

    def test_empty_network(self):
        net = MobilityNetwork.from_dense(["a", "b"], np.zeros((2, 2)))
        asg = CommunityAssignment.from_groups(net.node_ids, [["a"], ["b"]])
        with pytest.raises(DegenerateInputError):
            modularity(net, asg)


class TestLouvain:
    """Tests for Louvain detection and the detector registry."""

    def test_finds_blocks(self, block_network):
        asg = louvain(block_network, seed=1)
        assert asg.number_of_communities == 2
        assert asg.members(0) == ["n0", "n1", "n2"]
        assert asg.members(1) == ["n3", "n4", "n5"]

    @settings(max_examples=10, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_deterministic_per_seed(self, seed):
        net = two_block_network()
        assert louvain(net, seed).labels == louvain(net, seed).labels

    @pytest.mark.parametrize(
        "net",
        [two_triangles(), two_block_network(), complete_graph(5)],
        ids=["two-triangles", "two-blocks", "k5"],
    )
    def test_reaches_exhaustive_maximum(self, net):
        found = modularity(net, louvain(net, seed=0))
        assert found == pytest.approx(best_modularity(net), abs=1e-9)

    def test_two_triangles_split(self):
        net = two_triangles()
        asg = louvain(net, seed=4)
        assert asg.number_of_communities == 2
        assert modularity(net, asg) == pytest.approx(0.5, abs=1e-12)

    def test_complete_graph_stays_whole(self):
        net = complete_graph(5)
        asg = louvain(net, seed=2)
        assert asg.number_of_communities == 1
        assert modularity(net, asg) == pytest.approx(0.0, abs=1e-12)

    def test_recovers_sixteen_node_blocks(self):
        blocks = [list(range(b * 4, b * 4 + 4)) for b in range(4)]
        edges = [(i, j) for block in blocks for i, j in combinations(block, 2)]
        W = undirected(16, edges, weight=10.0)
        # a weak ring between consecutive blocks
        for b in range(4):
            i, j = blocks[b][-1], blocks[(b + 1) % 4][0]
            W[i, j] = W[j, i] = 1.0
        net = MobilityNetwork.from_dense([f"n{k:02d}" for k in range(16)], W)
        asg = louvain(net, seed=7)
        found = sorted(sorted(int(n[1:]) for n in asg.members(c)) for c in range(4))
        assert asg.number_of_communities == 4
        assert found == blocks

    @settings(max_examples=15, deadline=None)
    @given(
        st.lists(st.integers(min_value=0, max_value=3), min_size=49, max_size=49),
        st.integers(min_value=0, max_value=2**16),
    )
    def test_never_beats_exhaustive_maximum(self, weights, seed):
        W = np.array(weights, dtype=float).reshape(7, 7)
        np.fill_diagonal(W, 0.0)
        if W.sum() == 0:
            W[0, 1] = 1.0
        net = MobilityNetwork.from_dense([f"n{k}" for k in range(7)], W)
        found = modularity(net, louvain(net, seed))
        assert found <= best_modularity(net) + 1e-12

    def test_zero_weight_network(self):
        net = MobilityNetwork.from_dense(["a", "b"], np.zeros((2, 2)))
        with pytest.raises(DegenerateInputError):
            louvain(net, seed=0)

    def test_unknown_detector(self):
        with pytest.raises(ValidationError, match="Available detectors"):
            DetectorRegistry.get("infomap")

    def test_register_detector(self, block_network):
        def singletons(net, seed):
            return CommunityAssignment.from_groups(
                net.node_ids, [[n] for n in net.node_ids]
            )

        DetectorRegistry.register("singletons", singletons, version="test")
        try:
            asg = DetectorRegistry.get("singletons")(block_network, 0)
            assert asg.number_of_communities == 6
            assert DetectorRegistry.version("singletons") == "singletons/test"
        finally:
            DetectorRegistry.DETECTORS.pop("singletons")


class TestConstrainedSubcommunities:
    """Tests for detection inside level-1 regions."""

    @pytest.fixture
    def padded(self, block_network):
        W = np.zeros((7, 7))
        W[:6, :6] = block_network.dense()
        return MobilityNetwork.from_dense([*block_network.node_ids, "n6"], W)

    def test_nested_and_degenerate(self, padded):
        level1 = scheme(
            "regions",
            {
                "n0": "X",
                "n1": "X",
                "n2": "X",
                "n3": "X",
                "n4": "Y",
                "n5": "Y",
                "n6": "Z",
            },
        )
        asg = constrained_subcommunities(padded, level1, seed=3)
        assert asg.degenerate_groups == ("Z",)
        for c in range(asg.number_of_communities):
            assert len({level1[n] for n in asg.members(c)}) == 1
        assert asg["n3"] != asg["n4"]
        assert asg.members(asg["n6"]) == ["n6"]

    def test_level1_must_cover_nodes(self, padded):
        with pytest.raises(ValidationError, match="no label"):
            constrained_subcommunities(padded, scheme("r", {"n0": "X"}), seed=0)

    def test_community_flux_edges(self, block_network):
        asg = louvain(block_network, seed=1)
        level1 = scheme(
            "regions", {n: ("X" if n < "n3" else "Y") for n in asg.labels}
        )
        edges = community_flux_edges(block_network, asg, level1)
        assert {(e.source, e.target, e.weight, e.kind) for e in edges} == {
            (0, 1, 1.0, "inter"),
            (1, 0, 1.0, "inter"),
        }


class TestSimilarity:
    """Tests for the pair-counting and matching indices."""

    @pytest.fixture
    def pair(self):
        p1 = scheme("p1", {"x": "A", "y": "A", "z": "B", "w": "B"})
        p2 = scheme("p2", {"x": "A", "y": "B", "z": "B", "w": "B"})
        return p1, p2

    def test_pair_counts(self, pair):
        counts = pair_counts(*pair)
        assert (counts.a, counts.b, counts.c, counts.d) == (1, 1, 2, 2)

    def test_worked_example(self, pair):
        indices = similarity_indices(*pair, verbose=True)
        assert indices["rand"] == pytest.approx(0.5)
        assert indices["jaccard"] == pytest.approx(0.25)
        assert indices["wallace"] == pytest.approx(0.5)
        assert indices["wallace_reverse"] == pytest.approx(1 / 3)
        assert indices["fowlkes_mallows"] == pytest.approx(1 / np.sqrt(6))
        assert indices["hubert"] == pytest.approx(0.0)
        assert indices["meila_heckerman"] == pytest.approx(0.75)
        assert indices["larsen"] == pytest.approx((2 / 3 + 4 / 5) / 2)

    def test_identical_partitions_score_one(self, pair):
        indices = similarity_indices(pair[0], pair[0])
        assert set(indices) == set(INDEX_NAMES)
        for name in INDEX_NAMES:
            assert indices[name] == pytest.approx(1.0), name

    @settings(max_examples=30)
    @given(
        st.lists(st.sampled_from("ABC"), min_size=3, max_size=20),
        st.lists(st.sampled_from("XYZ"), min_size=3, max_size=20),
    )
    def test_bounded_indices(self, first, second):
        n = min(len(first), len(second))
        p1 = scheme("p1", {f"e{k}": first[k] for k in range(n)})
        p2 = scheme("p2", {f"e{k}": second[k] for k in range(n)})
        indices = similarity_indices(p1, p2)
        for name in ("rand", "jaccard", "fowlkes_mallows", "wallace", "larsen"):
            assert 0.0 <= indices[name] <= 1.0 + 1e-12
        assert -1.0 <= indices["hubert"] <= 1.0

    @staticmethod
    def brute_pairs(first: list[str], second: list[str]) -> tuple[int, ...]:
        a = b = c = d = 0
        for i, j in combinations(range(len(first)), 2):
            same1, same2 = first[i] == first[j], second[i] == second[j]
            a += same1 and same2
            b += same1 and not same2
            c += same2 and not same1
            d += not same1 and not same2
        return a, b, c, d

    @pytest.mark.parametrize("seed", range(20))
    def test_pair_indices_match_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        first = [f"A{k}" for k in rng.integers(0, 4, 50)]
        second = [f"B{k}" for k in rng.integers(0, 6, 50)]
        p1 = scheme("p1", {f"e{k:02d}": first[k] for k in range(50)})
        p2 = scheme("p2", {f"e{k:02d}": second[k] for k in range(50)})
        a, b, c, d = self.brute_pairs(first, second)
        n = a + b + c + d
        assert n == 50 * 49 // 2

        counts = pair_counts(p1, p2)
        assert (counts.a, counts.b, counts.c, counts.d) == (a, b, c, d)
        indices = similarity_indices(p1, p2, verbose=True)
        assert indices["rand"] == (a + d) / n
        assert indices["jaccard"] == a / (a + b + c)
        assert indices["wallace"] == a / (a + b)
        assert indices["wallace_reverse"] == a / (a + c)
        assert indices["hubert"] == (a + d - b - c) / n
        assert indices["fowlkes_mallows"] == pytest.approx(
            a / np.sqrt((a + b) * (a + c)), rel=1e-15
        )
        ari = 2.0 * (a * d - b * c) / ((a + b) * (b + d) + (a + c) * (c + d))
        assert indices["adjusted_rand"] == pytest.approx(ari, abs=1e-12)

    def test_random_labels_have_zero_adjusted_rand(self):
        rng = np.random.default_rng(5)
        first, second = rng.integers(0, 5, (2, 4000))
        p1 = scheme("p1", {f"e{k}": f"A{v}" for k, v in enumerate(first)})
        p2 = scheme("p2", {f"e{k}": f"B{v}" for k, v in enumerate(second)})
        assert abs(similarity_indices(p1, p2)["adjusted_rand"]) < 0.01

    def test_relabelled_copy_scores_one(self, pair):
        labels = pair[0].assignment
        renamed = scheme("p1b", {e: f"x{label}" for e, label in labels.items()})
        indices = similarity_indices(pair[0], renamed)
        for name in INDEX_NAMES:
            assert indices[name] == pytest.approx(1.0, abs=1e-12), name

    def test_different_elements(self, pair):
        other = scheme("p3", {"x": "A", "y": "A", "q": "B", "w": "B"})
        with pytest.raises(ValidationError, match="different elements"):
            similarity_indices(pair[0], other)
