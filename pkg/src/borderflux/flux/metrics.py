"""
Error metrics and intra/inter comparisons between observed and modeled flux.
"""

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from borderflux.exceptions import ValidationError
from borderflux.flux.gravity import centroid_distances
from borderflux.flux.models import AffinityBias, FluxMatrix, RegionProfile


@dataclass(frozen=True)
class MapeResult:
    value: float
    n_compared: int
    excluded_zero_observed: int


@dataclass(frozen=True)
class EntrySplit:
    """Boolean masks over flux entries; together they cover the off-diagonal."""

    regions: tuple[str, ...]
    intra: np.ndarray
    inter: np.ndarray

    def pairs(self, kind: str) -> frozenset[tuple[str, str]]:
        mask = self.intra if kind == "intra" else self.inter
        return frozenset(
            (self.regions[i], self.regions[j]) for i, j in zip(*np.nonzero(mask))
        )


def mape_detail(
    observed: FluxMatrix, modeled: FluxMatrix, entries: Optional[np.ndarray] = None
) -> MapeResult:
    """MAPE over off-diagonal entries with positive observed flux.

    ``entries`` optionally restricts the comparison to a boolean mask.
    """
    observed.require_same_regions(modeled)
    candidates = observed.off_diagonal
    if entries is not None:
        candidates = candidates & entries
    compared = candidates & (observed.T > 0)
    excluded = int((candidates & (observed.T <= 0)).sum())
    if not compared.any():
        raise ValidationError(
            "MAPE comparison set is empty (no positive observed flux)"
        )
    A = observed.T[compared]
    F = modeled.T[compared]
    value = float(100.0 * np.mean(np.abs(A - F) / A))
    return MapeResult(
        value=value,
        n_compared=int(compared.sum()),
        excluded_zero_observed=excluded,
    )


def mape(observed: FluxMatrix, modeled: FluxMatrix) -> float:
    """Mean absolute percentage error in percent."""
    return mape_detail(observed, modeled).value


def split_intra_inter(flux: FluxMatrix, level1: Mapping[str, str]) -> EntrySplit:
    """Off-diagonal entries inside one level-1 group versus across groups."""
    missing = [r for r in flux.regions if r not in level1]
    if missing:
        raise ValidationError(
            f"no level-1 group for region(s): {', '.join(missing[:5])}"
        )
    groups = np.array([level1[r] for r in flux.regions], dtype=object)
    same = groups[:, None] == groups[None, :]
    off = flux.off_diagonal
    return EntrySplit(regions=flux.regions, intra=off & same, inter=off & ~same)


def affinity_bias(
    observed: FluxMatrix, modeled: FluxMatrix, level1: Mapping[str, str]
) -> AffinityBias:
    """Mean modeled/observed ratio over intra and inter entries with observed > 0."""
    observed.require_same_regions(modeled)
    split = split_intra_inter(observed, level1)
    positive = observed.T > 0

    ratios = {}
    counts = {}
    for kind, mask in (("intra", split.intra), ("inter", split.inter)):
        use = mask & positive
        if not use.any():
            raise ValidationError(f"affinity bias: {kind} comparison set is empty")
        ratios[kind] = float(np.mean(modeled.T[use] / observed.T[use]))
        counts[kind] = int(use.sum())
    return AffinityBias(
        S_intra=ratios["intra"],
        S_inter=ratios["inter"],
        n_intra=counts["intra"],
        n_inter=counts["inter"],
    )


def normalized_mape(values: Mapping[str, float]) -> dict[str, float]:
    """Each scheme's MAPE divided by the largest MAPE in the set."""
    if not values:
        return {}
    top = max(values.values())
    if top <= 0:
        return {name: 0.0 for name in values}
    return {name: v / top for name, v in values.items()}


@dataclass(frozen=True)
class DistanceBinnedFlux:
    """Migration probability per log-spaced centroid-distance bin."""

    bin_edges: np.ndarray
    observed: np.ndarray
    modeled: np.ndarray
    mape: Optional[float]


def distance_binned_flux(
    observed: FluxMatrix,
    modeled: FluxMatrix,
    profiles: Sequence[RegionProfile],
    bins_per_decade: int = 5,
) -> DistanceBinnedFlux:
    """Share of off-diagonal flux per distance bin, observed versus modeled.

    ``mape`` compares the two probabilities over bins with observed mass.
    """
    observed.require_same_regions(modeled)
    D = centroid_distances(profiles)
    off = observed.off_diagonal
    d = D[off]
    lo, hi = float(d.min()), float(d.max())
    if hi > lo:
        n_bins = max(1, int(np.ceil(bins_per_decade * np.log10(hi / lo) - 1e-9)))
        edges = lo * 10.0 ** (np.arange(n_bins + 1) / bins_per_decade)
        edges[-1] = max(edges[-1], hi)
    else:
        edges = np.array([lo, lo * 10.0 ** (1.0 / bins_per_decade)])

    def probability(T: np.ndarray) -> np.ndarray:
        mass, _ = np.histogram(d, bins=edges, weights=T[off])
        total = mass.sum()
        return mass / total if total > 0 else np.zeros_like(mass)

    p_obs = probability(observed.T)
    p_mod = probability(modeled.T)
    has_mass = p_obs > 0
    binned = None
    if has_mass.any():
        p, q = p_obs[has_mass], p_mod[has_mass]
        binned = float(100.0 * np.mean(np.abs(p - q) / p))
    return DistanceBinnedFlux(
        bin_edges=edges, observed=p_obs, modeled=p_mod, mape=binned
    )
