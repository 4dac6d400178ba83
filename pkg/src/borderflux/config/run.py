"""Per-run configuration assembled from a YAML file and command-line flags."""

import pathlib
from typing import Any, Optional

import pydantic
import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from borderflux.exceptions import ParseError, ValidationError


class RunConfig(BaseModel):
    """Inputs, window, seeds and output location for one command."""

    antennas: Optional[pathlib.Path] = None
    population: Optional[pathlib.Path] = None
    cdr: Optional[pathlib.Path] = None
    boundary: Optional[pathlib.Path] = None
    partitions: dict[str, pathlib.Path] = Field(default_factory=dict)
    window_start: Optional[int] = None
    window_end: Optional[int] = None
    seed: Optional[int] = None
    out: pathlib.Path = pathlib.Path("out")
    utc_offset_hours: float = Field(default=0.0, ge=-14.0, le=14.0)
    weekdays_only: bool = True
    capital_regions: list[str] = Field(default_factory=list)

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("antennas", "population", "cdr", "boundary")
    @classmethod
    def _file_exists(cls, value: Optional[pathlib.Path]) -> Optional[pathlib.Path]:
        if value is not None and not value.is_file():
            raise ValueError(f"file not found: {value}")
        return value

    @field_validator("partitions")
    @classmethod
    def _partition_files_exist(
        cls, value: dict[str, pathlib.Path]
    ) -> dict[str, pathlib.Path]:
        for name, path in value.items():
            if not path.is_file():
                raise ValueError(f"partition '{name}' file not found: {path}")
        return value

    @model_validator(mode="after")
    def _window_nonempty(self) -> "RunConfig":
        if (
            self.window_start is not None
            and self.window_end is not None
            and self.window_end <= self.window_start
        ):
            raise ValueError("study window is empty")
        return self

    @property
    def window(self) -> Optional[tuple[int, int]]:
        if self.window_start is None and self.window_end is None:
            return None
        lo = self.window_start if self.window_start is not None else -(2**62)
        hi = self.window_end if self.window_end is not None else 2**62
        return lo, hi

    def require(self, *names: str) -> None:
        """Raise when any of the named inputs is missing."""
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise ValidationError(f"missing required input(s): {', '.join(missing)}")

    def partition_path(self, name: str) -> pathlib.Path:
        if name not in self.partitions:
            raise ValidationError(
                f"unknown partition '{name}'. Available: {sorted(self.partitions)}"
            )
        return self.partitions[name]


def load_config_file(path: pathlib.Path) -> dict[str, Any]:
    """Load run defaults from a YAML file."""
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f) or {}
    except (yaml.YAMLError, OSError) as e:
        raise ParseError(f"could not load config: {e}", path=path) from e
    if not isinstance(data, dict):
        raise ParseError("config must be a mapping", path=path)
    return data


def parse_window(text: str) -> tuple[int, int]:
    """Parse a ``start:end`` pair of Unix seconds."""
    try:
        start, end = text.split(":", 1)
        return int(start), int(end)
    except ValueError as e:
        raise ValidationError(
            f"invalid window '{text}'. Expected format: 'start:end' (Unix seconds)"
        ) from e


def build_run_config(
    file_values: Optional[dict[str, Any]] = None, **overrides: Any
) -> RunConfig:
    """Merge YAML defaults with flag overrides; flags set to None are ignored."""
    values = dict(file_values or {})
    for key, value in overrides.items():
        if value is None or value == () or value == {}:
            continue
        values[key] = value
    try:
        return RunConfig(**values)
    except pydantic.ValidationError as e:
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in e.errors()
        )
        raise ValidationError(details) from e
