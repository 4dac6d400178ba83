"""
Flux model registry and one-call evaluation against observed flux.
"""

from typing import Any, Callable, Dict, Mapping, Optional, Sequence

from borderflux.config.logging import get_logger
from borderflux.exceptions import ValidationError
from borderflux.flux.gravity import gravity_fit, gravity_predict
from borderflux.flux.metrics import (
    affinity_bias,
    distance_binned_flux,
    mape_detail,
    split_intra_inter,
)
from borderflux.flux.models import FluxMatrix, ModelReport, RegionProfile
from borderflux.flux.radiation import radiation_predict

log = get_logger(__name__)

# (observed, profiles) -> (parameters, modeled flux)
ModelRunner = Callable[
    [FluxMatrix, Sequence[RegionProfile]], tuple[Dict[str, Any], FluxMatrix]
]


def _run_gravity(observed, profiles):
    params = gravity_fit(observed, profiles)
    return params.to_dict(), gravity_predict(params, profiles)


def _run_radiation(observed, profiles):
    outflows = observed.outflows()
    parameters = {"outflows": "observed off-diagonal row sums"}
    return parameters, radiation_predict(profiles, outflows)


class FluxModelRegistry:
    """Registry of population-based flux models by name."""

    MODELS: Dict[str, Dict] = {
        "gravity": {
            "runner": _run_gravity,
            "description": "log-linear least squares over scale and exponents",
        },
        "radiation": {
            "runner": _run_radiation,
            "description": "parameter-free, outflows taken from observed flux",
        },
    }

    @classmethod
    def get(cls, name: str) -> ModelRunner:
        if name not in cls.MODELS:
            raise ValidationError(
                f"Unknown model '{name}'. Available models: {list(cls.MODELS)}"
            )
        return cls.MODELS[name]["runner"]

    @classmethod
    def names(cls) -> list[str]:
        return list(cls.MODELS)

    @classmethod
    def describe(cls, name: str) -> str:
        cls.get(name)
        return cls.MODELS[name]["description"]


def evaluate_model(
    model: str,
    observed: FluxMatrix,
    profiles: Sequence[RegionProfile],
    level1: Optional[Mapping[str, str]] = None,
    scheme_name: str = "scheme",
    level1_name: Optional[str] = None,
) -> tuple[ModelReport, FluxMatrix]:
    """Fit (where needed) and score ``model`` on one scheme.

    Intra/inter MAPE and the affinity bias are filled only when ``level1``
    is given and the corresponding comparison sets are nonempty.
    """
    runner = FluxModelRegistry.get(model)
    parameters, modeled = runner(observed, profiles)
    overall = mape_detail(observed, modeled)

    mape_intra = mape_inter = None
    affinity = None
    if level1 is not None:
        split = split_intra_inter(observed, level1)
        mape_intra = _optional_mape(observed, modeled, split.intra)
        mape_inter = _optional_mape(observed, modeled, split.inter)
        if mape_intra is not None and mape_inter is not None:
            affinity = affinity_bias(observed, modeled, level1)
        else:
            log.warning("affinity_undefined", scheme=scheme_name, model=model)

    binned = None
    if len(observed) > 1:
        binned = distance_binned_flux(observed, modeled, profiles).mape

    report = ModelReport(
        model=model,
        scheme=scheme_name,
        parameters=parameters,
        mape=overall.value,
        n_compared=overall.n_compared,
        excluded_zero_observed=overall.excluded_zero_observed,
        mape_intra=mape_intra,
        mape_inter=mape_inter,
        affinity=affinity,
        level1=level1_name,
        binned_mape=binned,
        metadata={
            "mape_entries": "off-diagonal, observed > 0",
            "distance": "haversine between population-weighted centroids (km)",
            "model": FluxModelRegistry.describe(model),
        },
    )
    log.info("model_evaluated", model=model, scheme=scheme_name, mape=overall.value)
    return report, modeled


def _optional_mape(observed, modeled, entries) -> Optional[float]:
    try:
        return mape_detail(observed, modeled, entries).value
    except ValidationError:
        return None
