"""
Data types for region-level flux and model parameters.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np

from borderflux.exceptions import ValidationError


class FluxKind(str, Enum):
    OBSERVED = "observed"
    MODELED = "modeled"


@dataclass(frozen=True)
class RegionProfile:
    """Population and population-weighted centroid of one region."""

    region_label: str
    population: float
    lon: float
    lat: float
    member_antennas: tuple[str, ...]

    def __post_init__(self):
        if not self.member_antennas:
            raise ValidationError(f"region '{self.region_label}' has no antennas")


@dataclass(frozen=True)
class FluxMatrix:
    """Origin-destination migrations between ordered regions."""

    regions: tuple[str, ...]
    T: np.ndarray
    kind: FluxKind = FluxKind.OBSERVED

    def __post_init__(self):
        n = len(self.regions)
        if self.T.shape != (n, n):
            raise ValidationError(f"flux has shape {self.T.shape}, expected ({n}, {n})")
        if (self.T < 0).any():
            raise ValidationError("flux must be non-negative")

    def __len__(self) -> int:
        return len(self.regions)

    @property
    def off_diagonal(self) -> np.ndarray:
        return ~np.eye(len(self.regions), dtype=bool)

    def outflows(self) -> np.ndarray:
        """Off-diagonal row sums."""
        return np.where(self.off_diagonal, self.T, 0.0).sum(axis=1)

    def require_same_regions(self, other: "FluxMatrix") -> None:
        if self.regions != other.regions:
            raise ValidationError("flux matrices cover different region sets")


@dataclass(frozen=True)
class GravityParams:
    alpha: float
    beta_g: float
    gamma: float
    scale: float

    def __post_init__(self):
        values = (self.alpha, self.beta_g, self.gamma, self.scale)
        if not all(np.isfinite(values)):
            raise ValidationError(f"gravity parameters must be finite: {values}")
        if self.scale <= 0:
            raise ValidationError(f"gravity scale must be positive, got {self.scale}")

    def to_dict(self) -> dict[str, float]:
        return {
            "alpha": self.alpha,
            "beta_g": self.beta_g,
            "gamma": self.gamma,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class AffinityBias:
    """Mean modeled/observed ratio inside and across level-1 groups."""

    S_intra: float
    S_inter: float
    n_intra: int = 0
    n_inter: int = 0

    @property
    def D(self) -> float:
        """Symmetric percent difference between the two ratios."""
        return 200.0 * abs(self.S_inter - self.S_intra) / (self.S_inter + self.S_intra)

    def to_dict(self) -> dict[str, Any]:
        return {
            "S_intra": self.S_intra,
            "S_inter": self.S_inter,
            "D": self.D,
            "n_intra": self.n_intra,
            "n_inter": self.n_inter,
            "D_formula": "200*|S_inter-S_intra|/(S_inter+S_intra)",
        }


@dataclass(frozen=True)
class ModelReport:
    """Fit and error summary of one flux model on one partition scheme."""

    model: str
    scheme: str
    parameters: dict[str, Any]
    mape: float
    n_compared: int
    excluded_zero_observed: int
    mape_intra: Optional[float] = None
    mape_inter: Optional[float] = None
    affinity: Optional[AffinityBias] = None
    level1: Optional[str] = None
    binned_mape: Optional[float] = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model,
            "scheme": self.scheme,
            "level1": self.level1,
            "parameters": self.parameters,
            "mape": self.mape,
            "mape_intra": self.mape_intra,
            "mape_inter": self.mape_inter,
            "binned_mape": self.binned_mape,
            "n_compared": self.n_compared,
            "excluded_zero_observed": self.excluded_zero_observed,
            "affinity": self.affinity.to_dict() if self.affinity else None,
            "metadata": self.metadata,
        }
