"""
Partition similarity indices.

Pair-counting indices share one basis: for every unordered element pair,
``a`` counts pairs co-clustered in both partitions, ``b`` in the first only,
``c`` in the second only and ``d`` in neither.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.metrics import adjusted_rand_score
from sklearn.metrics.cluster import contingency_matrix, pair_confusion_matrix

from borderflux.exceptions import ValidationError
from borderflux.geo.models import PartitionScheme

INDEX_NAMES = (
    "rand",
    "adjusted_rand",
    "jaccard",
    "fowlkes_mallows",
    "wallace",
    "hubert",
    "meila_heckerman",
    "larsen",
)

INDEX_NOTES = {
    "wallace": "a/(a+b), first partition as reference",
    "meila_heckerman": "greedy one-to-one matching by descending overlap",
    "larsen": "mean over first-partition clusters of the best F-measure",
}


@dataclass(frozen=True)
class PairCounts:
    a: int
    b: int
    c: int
    d: int

    @property
    def n_pairs(self) -> int:
        return self.a + self.b + self.c + self.d


def _aligned(p1: PartitionScheme, p2: PartitionScheme) -> tuple[np.ndarray, np.ndarray]:
    if set(p1.assignment) != set(p2.assignment):
        only1 = len(set(p1.assignment) - set(p2.assignment))
        only2 = len(set(p2.assignment) - set(p1.assignment))
        raise ValidationError(
            f"partitions '{p1.name}' and '{p2.name}' cover different elements "
            f"({only1} only in the first, {only2} only in the second)"
        )
    elements = sorted(p1.assignment)
    return p1.label_array(elements), p2.label_array(elements)


def _ratio(num: float, den: float, counts: PairCounts) -> float:
    """num/den; an empty denominator scores 1 for agreeing partitions, else 0."""
    if den == 0:
        return 1.0 if counts.b == 0 and counts.c == 0 else 0.0
    return num / den


def pair_counts(p1: PartitionScheme, p2: PartitionScheme) -> PairCounts:
    labels1, labels2 = _aligned(p1, p2)
    C = pair_confusion_matrix(labels1.astype(str), labels2.astype(str))
    return PairCounts(
        a=int(C[1, 1]) // 2,
        b=int(C[1, 0]) // 2,
        c=int(C[0, 1]) // 2,
        d=int(C[0, 0]) // 2,
    )


def meila_heckerman(p1: PartitionScheme, p2: PartitionScheme) -> float:
    """Share of elements in greedily matched cluster pairs."""
    labels1, labels2 = _aligned(p1, p2)
    table = contingency_matrix(labels1.astype(str), labels2.astype(str))
    rows, cols = np.nonzero(table)
    order = sorted(zip(rows, cols), key=lambda rc: (-table[rc], rc[0], rc[1]))
    used_rows: set[int] = set()
    used_cols: set[int] = set()
    matched = 0
    for i, j in order:
        if i in used_rows or j in used_cols:
            continue
        used_rows.add(i)
        used_cols.add(j)
        matched += int(table[i, j])
    return matched / len(labels1)


def larsen(p1: PartitionScheme, p2: PartitionScheme) -> float:
    labels1, labels2 = _aligned(p1, p2)
    table = contingency_matrix(labels1.astype(str), labels2.astype(str)).astype(float)
    sizes1 = table.sum(axis=1)
    sizes2 = table.sum(axis=0)
    f = 2 * table / (sizes1[:, None] + sizes2[None, :])
    return float(f.max(axis=1).mean())


def similarity_indices(
    p1: PartitionScheme, p2: PartitionScheme, verbose: bool = False
) -> dict[str, float]:
    """The eight comparison indices, ``p1`` taken as the reference partition.

    With ``verbose`` the reverse Wallace index a/(a+c) is added.
    """
    counts = pair_counts(p1, p2)
    a, b, c, d, n = counts.a, counts.b, counts.c, counts.d, counts.n_pairs
    labels1, labels2 = _aligned(p1, p2)

    indices = {
        "rand": _ratio(a + d, n, counts),
        "adjusted_rand": float(
            adjusted_rand_score(labels1.astype(str), labels2.astype(str))
        ),
        "jaccard": _ratio(a, a + b + c, counts),
        "fowlkes_mallows": _ratio(
            a, float(np.sqrt(float(a + b) * float(a + c))), counts
        ),
        "wallace": _ratio(a, a + b, counts),
        "hubert": _ratio(a + d - b - c, n, counts),
        "meila_heckerman": meila_heckerman(p1, p2),
        "larsen": larsen(p1, p2),
    }
    if verbose:
        indices["wallace_reverse"] = _ratio(a, a + c, counts)
    return indices
