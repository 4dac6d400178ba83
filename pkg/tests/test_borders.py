"""Tests for the border strength field, border tracing and sampling."""

import numpy as np
import pytest
from scipy.spatial import cKDTree

from borderflux.borders import (
    BorderSample,
    BorderSampleSet,
    BorderStrengthField,
    border_histogram,
    border_polylines,
    connectedness,
    edge_excess,
    idw_interpolate,
    normalize_flows,
    sample_border_strength,
    sample_offsets,
    strength_field,
)
from borderflux.exceptions import DegenerateInputError, ValidationError
from borderflux.geo import PartitionScheme, build_voronoi
from borderflux.network import MobilityNetwork

BLOCKS = {"n0": "X", "n1": "X", "n2": "X", "n3": "Y", "n4": "Y", "n5": "Y"}


def blocks(**overrides: str) -> PartitionScheme:
    return PartitionScheme("blocks", {**BLOCKS, **overrides})


def constant_field(registry, value: float) -> BorderStrengthField:
    return BorderStrengthField(
        scheme_name="const",
        node_ids=registry.ids,
        labels=("L", "R"),
        values={a: value for a in registry.ids},
        assigned={a: "L" for a in registry.ids},
        best_foreign={a: "R" for a in registry.ids},
        connectedness=np.zeros((len(registry), 2)),
    )


class TestNormalizedFlows:
    """Tests for flow normalization and the excess over independence."""

    def test_uniform(self):
        flows = normalize_flows(MobilityNetwork.from_dense(["a", "b"], np.ones((2, 2))))
        np.testing.assert_allclose(flows.m, 0.25)
        np.testing.assert_allclose(flows.S, [0.5, 0.5])
        np.testing.assert_allclose(flows.T, [0.5, 0.5])

    def test_one_way_flow_has_no_excess(self):
        net = MobilityNetwork.from_dense(["a", "b"], [[0, 3], [0, 0]])
        flows = normalize_flows(net)
        np.testing.assert_allclose(edge_excess(flows.m, flows.S, flows.T), 0.0)

    def test_excess_sums_to_zero(self):
        W = np.random.default_rng(5).integers(0, 20, size=(6, 6))
        net = MobilityNetwork.from_dense([f"k{i}" for i in range(6)], W)
        flows = normalize_flows(net)
        e = edge_excess(flows.m, flows.S, flows.T)
        assert e.sum() == pytest.approx(0.0, abs=1e-12)

    def test_zero_weight(self):
        with pytest.raises(DegenerateInputError):
            normalize_flows(MobilityNetwork.from_dense(["a", "b"], np.zeros((2, 2))))


class TestStrengthField:
    """Tests for per-node connectedness margins."""

    def test_aligned_blocks_are_positive(self, block_network):
        field = strength_field(block_network, blocks())
        assert all(field[n] > 0 for n in field.node_ids)
        assert field.best_foreign["n0"] == "Y"
        assert field.best_foreign["n5"] == "X"

    def test_planted_misassignment_flips_one_sign(self, block_network):
        field = strength_field(block_network, blocks(n2="Y"))
        assert field["n2"] < 0
        assert all(field[n] > 0 for n in field.node_ids if n != "n2")

    def test_rank_one_flow_has_zero_strength(self):
        w = np.array([1.0, 2.0, 3.0, 4.0])
        net = MobilityNetwork.from_dense(["a", "b", "c", "d"], np.outer(w, w))
        scheme = PartitionScheme("s", {"a": "P", "b": "P", "c": "Q", "d": "Q"})
        field = strength_field(net, scheme)
        for node in field.node_ids:
            assert field[node] == pytest.approx(0.0, abs=1e-12)
        assert field.violations == ()

    def test_matrix_matches_single_node_connectedness(self, block_network):
        field = strength_field(block_network, blocks())
        flows = normalize_flows(block_network)
        e = edge_excess(flows.m, flows.S, flows.T)
        for col, label in enumerate(field.labels):
            members = [k for k, n in enumerate(field.node_ids) if BLOCKS[n] == label]
            value = connectedness(0, members, e, flows.S, flows.T, flows.m)
            assert field.connectedness[0, col] == pytest.approx(value, abs=1e-12)

    def test_connectedness_sums_to_node_constant(self, block_network):
        three = blocks(n2="Z", n5="Z")
        C = strength_field(block_network, three).connectedness
        flows = normalize_flows(block_network)
        e = edge_excess(flows.m, flows.S, flows.T)
        for i in range(len(block_network)):
            others = [j for j in range(len(block_network)) if j != i]
            total = connectedness(i, others + [i], e, flows.S, flows.T, flows.m)
            assert C[i].sum() == pytest.approx(total, abs=1e-12)

    def test_relabeling_invariance(self, block_network):
        renamed = PartitionScheme(
            "renamed", {n: ("B" if g == "X" else "A") for n, g in BLOCKS.items()}
        )
        original = strength_field(block_network, blocks())
        relabeled = strength_field(block_network, renamed)
        for node in original.node_ids:
            assert relabeled[node] == pytest.approx(original[node], abs=1e-12)

    def test_isolated_node_is_missing(self, block_network):
        W = np.zeros((7, 7))
        W[:6, :6] = block_network.dense()
        W[6, 6] = 4.0
        net = MobilityNetwork.from_dense([*block_network.node_ids, "n6"], W)
        field = strength_field(net, blocks(n6="Y"))
        assert field.missing == ["n6"]
        assert field["n6"] is None
        assert np.isnan(field.array()[-1])

    def test_single_partition(self, block_network):
        scheme = PartitionScheme("one", {n: "X" for n in BLOCKS})
        with pytest.raises(ValidationError):
            strength_field(block_network, scheme)


class TestBorderPolylines:
    """Tests for tracing region borders over Voronoi edges."""

    @pytest.fixture
    def tess(self, registry):
        return build_voronoi(registry)

    def test_halves_border_is_vertical(self, tess, halves, registry):
        polylines = border_polylines(tess, halves)
        assert polylines
        border_x = registry.projection.forward(0.05, 0.1)[0, 0]
        for polyline in polylines:
            assert polyline.border_id == "L|R"
            assert polyline.regions == ("L", "R")
            xs = np.array(polyline.line.coords)[:, 0]
            np.testing.assert_allclose(xs, border_x, atol=1e-3)
        # bounding envelope spans lat -0.05..0.25
        total = sum(p.line.length for p in polylines)
        assert total == pytest.approx(0.3 * registry.projection.ky, rel=1e-3)

    def test_single_region_has_no_border(self, tess, registry):
        scheme = PartitionScheme("one", {a: "X" for a in registry.ids})
        assert border_polylines(tess, scheme) == []


class TestSampling:
    """Tests for inverse-distance interpolation along borders."""

    def test_offsets(self):
        np.testing.assert_allclose(sample_offsets(3.0, 5.0), [1.5])
        np.testing.assert_allclose(sample_offsets(12.0, 5.0), [2.5, 7.5])

    def test_idw_weights(self):
        tree = cKDTree([[0.0, 0.0], [2.0, 0.0]])
        values = np.array([1.0, 3.0])
        points = np.array([[1.0, 0.0], [0.0, 0.0], [0.5, 0.0]])
        np.testing.assert_allclose(
            idw_interpolate(tree, values, points, k=2), [2.0, 1.0, 1.5]
        )

    def test_symmetric_cancellation(self):
        tree = cKDTree([[-1.0, 0.0], [1.0, 0.0]])
        out = idw_interpolate(tree, np.array([0.4, -0.4]), np.array([[0.0, 3.0]]), 2)
        assert out[0] == pytest.approx(0.0, abs=1e-12)

    def test_constant_field(self, registry, halves):
        tess = build_voronoi(registry)
        samples = sample_border_strength(
            constant_field(registry, 0.3),
            border_polylines(tess, halves),
            tess,
            spacing_km=5.0,
            k_neighbors=20,
        )
        assert len(samples) >= 6
        np.testing.assert_allclose(samples.values(), 0.3)
        assert samples.mean_positive == {"L|R": pytest.approx(0.3)}
        assert samples.k_neighbors == len(registry)
        for sample in samples.samples:
            assert sample.lon == pytest.approx(0.05, abs=1e-6)

    def test_capital_grouping(self, registry, halves):
        tess = build_voronoi(registry)
        samples = sample_border_strength(
            constant_field(registry, -0.2),
            border_polylines(tess, halves),
            tess,
            capital_regions=["L"],
        )
        assert samples.groups == ["capital"]
        assert samples.mean_positive["capital"] is None

    def test_no_defined_values(self, registry, halves):
        tess = build_voronoi(registry)
        field = constant_field(registry, 0.0)
        empty = BorderStrengthField(
            scheme_name="none",
            node_ids=field.node_ids,
            labels=field.labels,
            values={a: None for a in registry.ids},
            assigned=field.assigned,
            best_foreign=field.best_foreign,
            connectedness=field.connectedness,
        )
        with pytest.raises(ValidationError, match="no antenna"):
            sample_border_strength(empty, border_polylines(tess, halves), tess)

    def test_bad_spacing(self, registry, halves):
        tess = build_voronoi(registry)
        with pytest.raises(ValidationError, match="spacing"):
            sample_border_strength(
                constant_field(registry, 0.1), [], tess, spacing_km=0
            )


class TestHistogram:
    """Tests for border strength histograms."""

    @staticmethod
    def sample_set(groups: dict[str, list[float]]) -> BorderSampleSet:
        samples = tuple(
            BorderSample(0.0, 0.0, v, border_id=g, group=g)
            for g, values in groups.items()
            for v in values
        )
        return BorderSampleSet(
            samples=samples,
            mean_positive={g: None for g in groups},
            spacing_km=5.0,
            k_neighbors=8,
        )

    def test_counts_and_out_of_range(self):
        hist = border_histogram(self.sample_set({"a": [0.2, 0.7, -0.4, 1.5]}), 0.5)
        np.testing.assert_array_equal(hist.counts["a"], [0, 1, 1, 1])
        assert hist.out_of_range == 1
        np.testing.assert_allclose(hist.bin_edges, [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_symmetric_samples(self):
        hist = border_histogram(self.sample_set({"a": [-0.6, -0.1, 0.1, 0.6]}), 0.25)
        counts = hist.counts["a"]
        np.testing.assert_array_equal(counts, counts[::-1])

    def test_rows_grouped(self):
        hist = border_histogram(self.sample_set({"b": [0.1], "a": [0.9]}), 1.0)
        assert hist.rows() == [
            (-1.0, 0.0, 0, "a"),
            (0.0, 1.0, 1, "a"),
            (-1.0, 0.0, 0, "b"),
            (0.0, 1.0, 1, "b"),
        ]

    def test_bin_width_must_divide_range(self):
        with pytest.raises(ValidationError, match="bin width"):
            border_histogram(self.sample_set({"a": [0.0]}), 0.3)

    @pytest.mark.parametrize("width", [0.0, -0.5, float("nan")])
    def test_non_positive_bin_width(self, width):
        with pytest.raises(ValidationError, match="positive"):
            border_histogram(self.sample_set({"a": [0.0]}), width)

    def test_empty(self):
        with pytest.raises(ValidationError):
            border_histogram(self.sample_set({}))
