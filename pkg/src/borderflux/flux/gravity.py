"""
Gravity model: T_ij = scale * m_i^alpha * n_j^beta_g / r_ij^gamma.
"""

from typing import Sequence

import numpy as np

from borderflux.config.logging import get_logger
from borderflux.exceptions import FitDegeneracyError, ValidationError
from borderflux.flux.models import FluxKind, FluxMatrix, GravityParams, RegionProfile
from borderflux.geo.distance import pairwise_haversine

log = get_logger(__name__)

MIN_FIT_ENTRIES = 10


def centroid_distances(profiles: Sequence[RegionProfile]) -> np.ndarray:
    """Haversine distances between region centroids; distinct centroids required."""
    lon = np.array([p.lon for p in profiles])
    lat = np.array([p.lat for p in profiles])
    D = pairwise_haversine(lon, lat)
    off = ~np.eye(len(profiles), dtype=bool)
    coincident = np.argwhere(off & (D <= 0))
    if len(coincident):
        i, j = coincident[0]
        raise ValidationError(
            f"regions '{profiles[i].region_label}' and '{profiles[j].region_label}' "
            "have coincident centroids"
        )
    return D


def gravity_predict(
    params: GravityParams, profiles: Sequence[RegionProfile]
) -> FluxMatrix:
    m = np.array([p.population for p in profiles], dtype=float)
    D = centroid_distances(profiles)
    off = ~np.eye(len(profiles), dtype=bool)
    T = np.zeros_like(D)
    with np.errstate(divide="ignore"):
        T[off] = (
            params.scale
            * (m[:, None] ** params.alpha * m[None, :] ** params.beta_g)[off]
            / D[off] ** params.gamma
        )
    return FluxMatrix(
        regions=tuple(p.region_label for p in profiles), T=T, kind=FluxKind.MODELED
    )


def gravity_fit(
    observed: FluxMatrix, profiles: Sequence[RegionProfile]
) -> GravityParams:
    """Log-linear least squares over off-diagonal entries with positive flux.

    Raises:
        ValidationError: fewer than 10 usable entries, mismatched regions or
            non-positive populations on a used entry.
        FitDegeneracyError: the design matrix is rank deficient.
    """
    labels = tuple(p.region_label for p in profiles)
    if labels != observed.regions:
        raise ValidationError("profiles and observed flux cover different regions")

    m = np.array([p.population for p in profiles], dtype=float)
    D = centroid_distances(profiles)
    use = observed.off_diagonal & (observed.T > 0)
    if use.sum() < MIN_FIT_ENTRIES:
        raise ValidationError(
            f"gravity fit needs at least {MIN_FIT_ENTRIES} positive off-diagonal "
            f"entries, got {int(use.sum())}"
        )
    i, j = np.nonzero(use)
    if (m[i] <= 0).any() or (m[j] <= 0).any():
        raise ValidationError("gravity fit needs positive population in every region")

    X = np.column_stack(
        [np.ones(len(i)), np.log(m[i]), np.log(m[j]), -np.log(D[i, j])]
    )
    y = np.log(observed.T[i, j])
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise FitDegeneracyError(
            "gravity design matrix is rank deficient "
            "(populations or distances carry no variation)"
        )
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    params = GravityParams(
        alpha=float(coef[1]),
        beta_g=float(coef[2]),
        gamma=float(coef[3]),
        scale=float(np.exp(coef[0])),
    )
    log.debug("gravity_fitted", entries=len(y), **params.to_dict())
    return params
