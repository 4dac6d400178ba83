"""
Radiation model with intervening-population screening.
"""

from typing import Sequence

import numpy as np

from borderflux.exceptions import ValidationError
from borderflux.flux.gravity import centroid_distances
from borderflux.flux.models import FluxKind, FluxMatrix, RegionProfile


def intervening_population(profiles: Sequence[RegionProfile]) -> np.ndarray:
    """``s[i, j]``: population of regions k not in {i, j} with d(i, k) <= d(i, j)."""
    m = np.array([p.population for p in profiles], dtype=float)
    D = centroid_distances(profiles)
    n = len(profiles)
    s = np.zeros((n, n))
    for i in range(n):
        inside = D[i][:, None] <= D[i][None, :]  # [k, j]
        inside[i, :] = False
        np.fill_diagonal(inside, False)
        s[i] = m @ inside
    np.fill_diagonal(s, 0.0)
    return s


def radiation_predict(
    profiles: Sequence[RegionProfile], outflows: Sequence[float]
) -> FluxMatrix:
    """T_ij = T_i m_i n_j / ((m_i + s_ij)(m_i + n_j + s_ij)) off the diagonal."""
    T_out = np.asarray(outflows, dtype=float)
    if T_out.shape != (len(profiles),):
        raise ValidationError("one outflow per region required")
    if (T_out < 0).any():
        raise ValidationError("outflows must be non-negative")

    m = np.array([p.population for p in profiles], dtype=float)
    s = intervening_population(profiles)
    numerator = T_out[:, None] * m[:, None] * m[None, :]
    denominator = (m[:, None] + s) * (m[:, None] + m[None, :] + s)
    T = np.zeros_like(s)
    np.divide(numerator, denominator, out=T, where=denominator > 0)
    np.fill_diagonal(T, 0.0)
    return FluxMatrix(
        regions=tuple(p.region_label for p in profiles), T=T, kind=FluxKind.MODELED
    )
