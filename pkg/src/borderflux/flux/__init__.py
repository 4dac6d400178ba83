"""Region flux aggregation, Gravity and Radiation models and their error metrics."""

from borderflux.flux.aggregate import (
    aggregate_flux,
    build_region_profiles,
    derive_level1,
    level1_vector,
)
from borderflux.flux.evaluation import FluxModelRegistry, evaluate_model
from borderflux.flux.gravity import (
    MIN_FIT_ENTRIES,
    centroid_distances,
    gravity_fit,
    gravity_predict,
)
from borderflux.flux.metrics import (
    DistanceBinnedFlux,
    EntrySplit,
    MapeResult,
    affinity_bias,
    distance_binned_flux,
    mape,
    mape_detail,
    normalized_mape,
    split_intra_inter,
)
from borderflux.flux.models import (
    AffinityBias,
    FluxKind,
    FluxMatrix,
    GravityParams,
    ModelReport,
    RegionProfile,
)
from borderflux.flux.radiation import intervening_population, radiation_predict

__all__ = [
    "MIN_FIT_ENTRIES",
    "AffinityBias",
    "DistanceBinnedFlux",
    "EntrySplit",
    "FluxKind",
    "FluxMatrix",
    "FluxModelRegistry",
    "GravityParams",
    "MapeResult",
    "ModelReport",
    "RegionProfile",
    "affinity_bias",
    "aggregate_flux",
    "build_region_profiles",
    "centroid_distances",
    "derive_level1",
    "distance_binned_flux",
    "evaluate_model",
    "gravity_fit",
    "gravity_predict",
    "intervening_population",
    "level1_vector",
    "mape",
    "mape_detail",
    "normalized_mape",
    "radiation_predict",
    "split_intra_inter",
]
