"""
Border strength: per-node partition connectedness and its sampling along
region borders of the Voronoi tessellation.

Flows are normalized to ``m = W / sum(W)`` with row sums ``S`` and column sums
``T``. The excess ``e = m - S T^T`` measures flow beyond the independence null.
A node's connectedness to a region is its two-way excess into that region over
its total inter-node flow, and its strength ``s`` is the connectedness to its
own region minus the best foreign one.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import shapely
from scipy.spatial import cKDTree
from shapely.geometry import LineString

from borderflux.config import get_settings
from borderflux.config.logging import get_logger
from borderflux.exceptions import DegenerateInputError, ValidationError
from borderflux.geo.models import PartitionScheme, VoronoiTessellation
from borderflux.network.graph import MobilityNetwork

log = get_logger(__name__)

# Tolerance on the [-1, 1] range before a strength value is reported.
RANGE_TOLERANCE = 1e-12
BORDER_SEPARATOR = "|"


@dataclass(frozen=True)
class NormalizedFlows:
    m: np.ndarray
    S: np.ndarray
    T: np.ndarray


def normalize_flows(net: MobilityNetwork) -> NormalizedFlows:
    """Divide transitions by their total; row and column sums alongside."""
    total = net.total_weight
    if total <= 0:
        raise DegenerateInputError("cannot normalize a network without weight")
    m = net.dense() / total
    return NormalizedFlows(m=m, S=m.sum(axis=1), T=m.sum(axis=0))


def edge_excess(m: np.ndarray, S: np.ndarray, T: np.ndarray) -> np.ndarray:
    return m - np.outer(S, T)


def _denominator(flows: NormalizedFlows) -> np.ndarray:
    return flows.S + flows.T - 2.0 * np.diag(flows.m)


def connectedness(
    i: int,
    members: Sequence[int],
    e: np.ndarray,
    S: np.ndarray,
    T: np.ndarray,
    m: np.ndarray,
) -> Optional[float]:
    """Connectedness of node ``i`` to the node set ``members``.

    Returns None for an isolated node (no inter-node flow).
    """
    denominator = S[i] + T[i] - 2.0 * m[i, i]
    if denominator <= 0:
        return None
    j = np.array([k for k in members if k != i], dtype=np.int64)
    if len(j) == 0:
        return 0.0
    return float((e[i, j].sum() + e[j, i].sum()) / denominator)


@dataclass(frozen=True)
class BorderStrengthField:
    """Per-node strength ``s`` in [-1, 1]; None where the node is isolated."""

    scheme_name: str
    node_ids: tuple[str, ...]
    labels: tuple[str, ...]
    values: Mapping[str, Optional[float]]
    assigned: Mapping[str, str]
    best_foreign: Mapping[str, Optional[str]]
    connectedness: np.ndarray = field(repr=False)
    violations: tuple[str, ...] = ()

    def __getitem__(self, node: str) -> Optional[float]:
        return self.values[node]

    @property
    def defined(self) -> list[str]:
        return [n for n in self.node_ids if self.values[n] is not None]

    @property
    def missing(self) -> list[str]:
        return [n for n in self.node_ids if self.values[n] is None]

    def array(self) -> np.ndarray:
        return np.array(
            [
                np.nan if self.values[n] is None else self.values[n]
                for n in self.node_ids
            ]
        )


def strength_field(
    net: MobilityNetwork, scheme: PartitionScheme
) -> BorderStrengthField:
    """Compute ``s_i`` for every node of ``net`` under ``scheme``.

    Raises:
        ValidationError: the scheme misses a node or has fewer than 2 labels.
        DegenerateInputError: the network carries no weight.
    """
    scheme.require_total(net.node_ids)
    scheme = scheme.restricted_to(net.node_ids)
    scheme.require_labels(2)

    flows = normalize_flows(net)
    e = edge_excess(flows.m, flows.S, flows.T)
    two_way = e + e.T
    np.fill_diagonal(two_way, 0.0)

    labels = scheme.labels
    column = {label: k for k, label in enumerate(labels)}
    own = np.array([column[scheme[n]] for n in net.node_ids])
    indicator = np.zeros((len(net), len(labels)))
    indicator[np.arange(len(net)), own] = 1.0

    denominator = _denominator(flows)
    defined = denominator > 0
    C = np.full((len(net), len(labels)), np.nan)
    C[defined] = (two_way @ indicator)[defined] / denominator[defined, None]

    rows = np.arange(len(net))
    foreign = np.where(indicator > 0, -np.inf, C)
    best = np.argmax(foreign, axis=1)
    s = C[rows, own] - foreign[rows, best]

    values: dict[str, Optional[float]] = {}
    best_foreign: dict[str, Optional[str]] = {}
    violations = []
    for k, node in enumerate(net.node_ids):
        if not defined[k]:
            values[node] = None
            best_foreign[node] = None
            continue
        values[node] = float(s[k])
        best_foreign[node] = labels[best[k]]
        if abs(s[k]) > 1.0 + RANGE_TOLERANCE:
            violations.append(node)

    if violations:
        log.warning("strength_out_of_range", scheme=scheme.name, nodes=violations[:10])
    isolated = int((~defined).sum())
    if isolated:
        log.info("isolated_nodes", scheme=scheme.name, count=isolated)

    return BorderStrengthField(
        scheme_name=scheme.name,
        node_ids=net.node_ids,
        labels=labels,
        values=values,
        assigned={n: scheme[n] for n in net.node_ids},
        best_foreign=best_foreign,
        connectedness=C,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class BorderPolyline:
    """One connected piece of the border between two regions, in km."""

    border_id: str
    regions: tuple[str, str]
    line: LineString


def border_id_for(a: str, b: str) -> str:
    return BORDER_SEPARATOR.join(sorted((a, b)))


def border_polylines(
    tess: VoronoiTessellation, scheme: PartitionScheme
) -> list[BorderPolyline]:
    """Voronoi edges separating differently labeled cells, merged into polylines.

    Ordered by border id, then by the first coordinate of each piece.
    """
    scheme.require_total(tess.registry.ids)
    segments: dict[tuple[str, str], list] = {}
    for a, b in sorted(tess.shared_edges):
        la, lb = scheme[a], scheme[b]
        if la == lb:
            continue
        regions = tuple(sorted((la, lb)))
        parts = shapely.get_parts(tess.shared_edges[(a, b)])
        lines = [p for p in parts if p.geom_type == "LineString"]
        segments.setdefault(regions, []).extend(lines)

    polylines = []
    for regions in sorted(segments):
        if not segments[regions]:
            continue
        merged = shapely.line_merge(shapely.union_all(segments[regions]))
        pieces = list(merged.geoms) if hasattr(merged, "geoms") else [merged]
        pieces = [p for p in pieces if isinstance(p, LineString) and p.length > 0]
        pieces.sort(key=lambda p: tuple(p.coords[0]))
        for piece in pieces:
            polylines.append(
                BorderPolyline(
                    border_id=border_id_for(*regions), regions=regions, line=piece
                )
            )
    log.debug("borders_traced", borders=len(segments), polylines=len(polylines))
    return polylines


@dataclass(frozen=True)
class BorderSample:
    lon: float
    lat: float
    value: float
    border_id: str
    group: str


@dataclass(frozen=True)
class BorderSampleSet:
    """Interpolated strength values along borders, grouped for comparison."""

    samples: tuple[BorderSample, ...]
    mean_positive: Mapping[str, Optional[float]]
    spacing_km: float
    k_neighbors: int
    power: float = 1.0

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def groups(self) -> list[str]:
        return sorted(self.mean_positive)

    def values(self, group: Optional[str] = None) -> np.ndarray:
        return np.array(
            [s.value for s in self.samples if group is None or s.group == group]
        )

    @property
    def overall_mean_positive(self) -> Optional[float]:
        return _mean_positive(self.values())


def _mean_positive(values: np.ndarray) -> Optional[float]:
    positive = values[values > 0]
    return float(positive.mean()) if len(positive) else None


def sample_offsets(length: float, spacing_km: float) -> np.ndarray:
    """Sample positions along a line: the midpoint of each ``spacing_km`` step."""
    if length <= spacing_km:
        return np.array([length / 2.0])
    return np.arange(spacing_km / 2.0, length, spacing_km)


def idw_interpolate(
    tree: cKDTree, values: np.ndarray, points: np.ndarray, k: int, power: float = 1.0
) -> np.ndarray:
    """Inverse-distance weighted average over the k nearest sites.

    A point coinciding with a site takes that site's value.
    """
    dist, idx = tree.query(points, k=k)
    dist = np.asarray(dist).reshape(len(points), k)
    idx = np.asarray(idx).reshape(len(points), k)
    out = np.empty(len(points))
    for p in range(len(points)):
        exact = dist[p] == 0
        if exact.any():
            out[p] = values[idx[p][exact]].mean()
            continue
        w = 1.0 / dist[p] ** power
        out[p] = float(np.sum(w * values[idx[p]]) / np.sum(w))
    return out


def sample_border_strength(
    field: BorderStrengthField,
    polylines: Sequence[BorderPolyline],
    tess: VoronoiTessellation,
    spacing_km: float = 5.0,
    k_neighbors: int = 8,
    capital_regions: Optional[Iterable[str]] = None,
) -> BorderSampleSet:
    """Sample ``field`` every ``spacing_km`` along each border polyline.

    Groups are border ids, or ``capital``/``other`` when ``capital_regions``
    is given (a border touching any capital region is a capital border).

    Raises:
        ValidationError: bad spacing or k, or no site with a defined value.
    """
    if spacing_km <= 0:
        raise ValidationError(f"spacing must be positive, got {spacing_km}")
    if k_neighbors < 1:
        raise ValidationError(f"k_neighbors must be >= 1, got {k_neighbors}")

    registry = tess.registry
    sites = [a for a in registry.ids if field.values.get(a) is not None]
    if not sites:
        raise ValidationError(
            "no antenna with a defined border strength to interpolate"
        )
    k = min(k_neighbors, len(sites))
    xy = registry.xy[[registry.index[a] for a in sites]]
    site_values = np.array([field.values[a] for a in sites])
    tree = cKDTree(xy)

    capital = set(capital_regions) if capital_regions else None

    def group_of(polyline: BorderPolyline) -> str:
        if capital is None:
            return polyline.border_id
        return "capital" if capital & set(polyline.regions) else "other"

    def sample_one(polyline: BorderPolyline) -> list[BorderSample]:
        offsets = sample_offsets(polyline.line.length, spacing_km)
        points = shapely.get_coordinates(
            shapely.line_interpolate_point(polyline.line, offsets)
        )
        interpolated = idw_interpolate(tree, site_values, points, k)
        lonlat = tess.projection.inverse(points[:, 0], points[:, 1])
        group = group_of(polyline)
        return [
            BorderSample(
                lon=float(lon),
                lat=float(lat),
                value=float(v),
                border_id=polyline.border_id,
                group=group,
            )
            for (lon, lat), v in zip(lonlat, interpolated)
        ]

    with ThreadPoolExecutor(max_workers=get_settings().threads) as pool:
        batches = list(pool.map(sample_one, polylines))
    samples = tuple(s for batch in batches for s in batch)

    groups = sorted({group_of(p) for p in polylines})
    mean_positive = {
        g: _mean_positive(np.array([s.value for s in samples if s.group == g]))
        for g in groups
    }
    log.info("borders_sampled", samples=len(samples), groups=len(groups), k=k)
    return BorderSampleSet(
        samples=samples,
        mean_positive=mean_positive,
        spacing_km=spacing_km,
        k_neighbors=k,
    )


@dataclass(frozen=True)
class BorderHistogram:
    bin_edges: np.ndarray
    counts: Mapping[str, np.ndarray]
    mean_positive: Mapping[str, Optional[float]]
    out_of_range: int = 0

    def rows(self) -> list[tuple[float, float, int, str]]:
        """``(bin_lo, bin_hi, count, border_group)`` rows, grouped then by bin."""
        return [
            (float(lo), float(hi), int(c), group)
            for group in sorted(self.counts)
            for lo, hi, c in zip(
                self.bin_edges[:-1], self.bin_edges[1:], self.counts[group]
            )
        ]


def border_histogram(
    samples: BorderSampleSet, bin_width: float = 0.05
) -> BorderHistogram:
    """Counts of sampled strength values per group over [-1, 1]."""
    if len(samples) == 0:
        raise ValidationError("border histogram needs at least one sample")
    if not bin_width > 0:
        raise ValidationError(f"bin width must be positive, got {bin_width}")
    n_bins = int(round(2.0 / bin_width))
    if not np.isclose(n_bins * bin_width, 2.0):
        raise ValidationError(f"bin width must divide 2 evenly, got {bin_width}")
    edges = np.linspace(-1.0, 1.0, n_bins + 1)

    counts = {}
    out_of_range = 0
    for group in samples.groups:
        values = samples.values(group)
        outside = (values < -1.0) | (values > 1.0)
        out_of_range += int(outside.sum())
        counts[group], _ = np.histogram(values[~outside], bins=edges)
    if out_of_range:
        log.warning("histogram_out_of_range", samples=out_of_range)
    return BorderHistogram(
        bin_edges=edges,
        counts=counts,
        mean_positive=dict(samples.mean_positive),
        out_of_range=out_of_range,
    )
