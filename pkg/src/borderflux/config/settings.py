"""Configuration settings for borderflux runs."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables."""

    threads: int = Field(default=1, ge=1, description="Worker pool size cap")
    log_level: str = Field(default="WARNING", description="Logging level")
    log_format: str = Field(default="console", description="console or json")

    # Geometry
    colocation_tolerance_m: float = Field(
        default=1.0, ge=0.0, description="Distance under which antennas are merged"
    )

    # Temporal profiles
    window_minutes: int = Field(default=40, gt=0, description="Profile window width")
    step_minutes: int = Field(default=10, gt=0, description="Profile window stride")

    # Mobility network
    network_window_hours: float = Field(
        default=24.0, gt=0.0, description="Max gap between consecutive calls"
    )

    # Border sampling
    idw_neighbors: int = Field(default=8, ge=1, description="IDW neighbour count")
    border_spacing_km: float = Field(
        default=5.0, gt=0.0, description="Spacing of border sample points"
    )
    histogram_bin_width: float = Field(
        default=0.05, gt=0.0, description="Border strength histogram bin width"
    )

    model_config = {
        "env_file": ".env",
        "env_prefix": "MOBILITY_",
        "case_sensitive": False,
        "extra": "ignore",
    }


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
