"""
Domain types for antennas, partitions, tessellations and event streams.
"""

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Mapping, Optional

import numpy as np
import pydantic
import shapely
from pydantic import BaseModel, Field
from shapely.geometry import LineString, MultiPolygon, Polygon, box

from borderflux.exceptions import ValidationError
from borderflux.geo.distance import LocalProjection


class AntennaSite(BaseModel):
    """A geolocated cell tower and the population assigned to it."""

    antenna_id: str = Field(min_length=1)
    lon: float = Field(ge=-180.0, le=180.0)
    lat: float = Field(ge=-90.0, le=90.0)
    population: float = Field(default=0.0, ge=0.0)

    model_config = {"frozen": True}


def make_site(
    antenna_id: str, lon: float, lat: float, population: float = 0.0
) -> AntennaSite:
    """Build a site, reporting bound violations as ``ValidationError``."""
    try:
        return AntennaSite(
            antenna_id=antenna_id, lon=lon, lat=lat, population=population
        )
    except pydantic.ValidationError as e:
        fields = ", ".join(str(err["loc"][0]) for err in e.errors())
        raise ValidationError(
            f"antenna '{antenna_id}': invalid {fields} "
            f"(lon={lon}, lat={lat}, population={population})"
        ) from e


def padded_envelope(lon: np.ndarray, lat: np.ndarray) -> Polygon:
    """Envelope of the points padded by 10% of its extent (at least 0.05 deg)."""
    pad_x = max(0.1 * float(np.ptp(lon)), 0.05)
    pad_y = max(0.1 * float(np.ptp(lat)), 0.05)
    return box(
        max(float(lon.min()) - pad_x, -180.0),
        max(float(lat.min()) - pad_y, -90.0),
        min(float(lon.max()) + pad_x, 180.0),
        min(float(lat.max()) + pad_y, 90.0),
    )


@dataclass(frozen=True)
class AntennaRegistry:
    """Ordered antenna sites inside a lon/lat bounding region."""

    sites: tuple[AntennaSite, ...]
    bounding_region: Polygon | MultiPolygon

    def __post_init__(self):
        if not self.sites:
            raise ValidationError("registry has no sites")
        ids = [site.antenna_id for site in self.sites]
        if len(set(ids)) != len(ids):
            dupes = sorted(i for i, n in Counter(ids).items() if n > 1)
            raise ValidationError(f"duplicate antenna_id: {', '.join(dupes[:5])}")
        inside = shapely.intersects_xy(self.bounding_region, self.lon, self.lat)
        if not inside.all():
            outside = [ids[k] for k in np.flatnonzero(~inside)[:5]]
            raise ValidationError(
                f"sites outside bounding region: {', '.join(outside)}"
            )

    @classmethod
    def from_sites(
        cls,
        sites: list[AntennaSite] | tuple[AntennaSite, ...],
        bounding_region: Optional[Polygon | MultiPolygon] = None,
    ) -> "AntennaRegistry":
        sites = tuple(sites)
        if bounding_region is None:
            if not sites:
                raise ValidationError("registry has no sites")
            bounding_region = padded_envelope(
                np.array([s.lon for s in sites]), np.array([s.lat for s in sites])
            )
        return cls(sites=sites, bounding_region=bounding_region)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[AntennaSite]:
        return iter(self.sites)

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(site.antenna_id for site in self.sites)

    @cached_property
    def index(self) -> dict[str, int]:
        return {antenna_id: k for k, antenna_id in enumerate(self.ids)}

    @cached_property
    def lon(self) -> np.ndarray:
        return np.array([site.lon for site in self.sites], dtype=float)

    @cached_property
    def lat(self) -> np.ndarray:
        return np.array([site.lat for site in self.sites], dtype=float)

    @cached_property
    def populations(self) -> np.ndarray:
        return np.array([site.population for site in self.sites], dtype=float)

    @cached_property
    def projection(self) -> LocalProjection:
        """Equirectangular projection about the registry centroid."""
        return LocalProjection(float(self.lon.mean()), float(self.lat.mean()))

    @cached_property
    def xy(self) -> np.ndarray:
        """Projected site coordinates in km, shape (n, 2)."""
        return self.projection.forward(self.lon, self.lat)

    def site(self, antenna_id: str) -> AntennaSite:
        try:
            return self.sites[self.index[antenna_id]]
        except KeyError:
            raise ValidationError(f"unknown antenna '{antenna_id}'") from None

    def with_populations(self, populations: np.ndarray) -> "AntennaRegistry":
        sites = tuple(
            site.model_copy(update={"population": float(p)})
            for site, p in zip(self.sites, populations)
        )
        return AntennaRegistry(sites=sites, bounding_region=self.bounding_region)


@dataclass(frozen=True)
class PartitionScheme:
    """A named total assignment of antennas to region labels."""

    name: str
    assignment: Mapping[str, str]

    def __post_init__(self):
        if not self.assignment:
            raise ValidationError(f"partition '{self.name}' is empty")

    @cached_property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.assignment.values())))

    def __getitem__(self, antenna_id: str) -> str:
        return self.assignment[antenna_id]

    def __len__(self) -> int:
        return len(self.assignment)

    def members(self, label: str) -> list[str]:
        return sorted(a for a, lab in self.assignment.items() if lab == label)

    def require_total(self, ids) -> None:
        """Raise unless every id has a label."""
        missing = [i for i in ids if i not in self.assignment]
        if missing:
            raise ValidationError(
                f"partition '{self.name}' has no label for "
                f"{len(missing)} antenna(s), e.g. {', '.join(missing[:5])}"
            )

    def require_labels(self, minimum: int = 2) -> None:
        if len(self.labels) < minimum:
            raise ValidationError(
                f"partition '{self.name}' needs at least {minimum} distinct labels, "
                f"got {len(self.labels)}"
            )

    def restricted_to(self, ids) -> "PartitionScheme":
        return PartitionScheme(
            name=self.name, assignment={i: self.assignment[i] for i in ids}
        )

    def label_array(self, ids) -> np.ndarray:
        return np.array([self.assignment[i] for i in ids], dtype=object)


@dataclass(frozen=True)
class VoronoiTessellation:
    """Voronoi cells of a registry clipped to its bounding region.

    ``cells`` are in lon/lat; ``projected_cells`` and ``shared_edges`` are in the
    registry's local projection (km). ``shared_edges`` maps each neighbour pair
    to the clipped edge the two cells share.
    """

    registry: AntennaRegistry
    cells: Mapping[str, Polygon | MultiPolygon]
    projected_cells: Mapping[str, Polygon | MultiPolygon]
    neighbor_pairs: frozenset[tuple[str, str]]
    shared_edges: Mapping[tuple[str, str], LineString] = field(repr=False)

    @property
    def projection(self) -> LocalProjection:
        return self.registry.projection


@dataclass(frozen=True)
class CdrEvent:
    timestamp: int
    user_id: str
    antenna_id: str


@dataclass(frozen=True)
class Trajectory:
    """Time-sorted events of one user."""

    user_id: str
    timestamps: np.ndarray
    antenna_ids: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.antenna_ids)

    def __iter__(self) -> Iterator[CdrEvent]:
        for t, a in zip(self.timestamps, self.antenna_ids):
            yield CdrEvent(timestamp=int(t), user_id=self.user_id, antenna_id=a)

    @classmethod
    def from_events(cls, user_id: str, events: list[tuple[int, str]]) -> "Trajectory":
        """Build from (timestamp, antenna_id) pairs, sorting stably by time."""
        ordered = sorted(events, key=lambda e: e[0])
        return cls(
            user_id=user_id,
            timestamps=np.array([e[0] for e in ordered], dtype=np.int64),
            antenna_ids=tuple(e[1] for e in ordered),
        )


@dataclass(frozen=True)
class EventLog:
    """Per-user trajectories plus loader bookkeeping."""

    trajectories: Mapping[str, Trajectory]
    n_events: int = 0
    dropped_unknown_antenna: int = 0
    dropped_outside_window: int = 0

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self) -> Iterator[Trajectory]:
        return iter(self.trajectories.values())

    def events_per_user(self) -> dict[str, int]:
        return {user: len(traj) for user, traj in self.trajectories.items()}

    def activity_summary(self, registry: AntennaRegistry) -> dict[str, int]:
        """Counts of antennas with no events and with no movement to or from them."""
        used: set[str] = set()
        moved: set[str] = set()
        for traj in self:
            ids = traj.antenna_ids
            used.update(ids)
            for a, b in zip(ids, ids[1:]):
                if a != b:
                    moved.add(a)
                    moved.add(b)
        return {
            "antennas": len(registry),
            "antennas_without_events": sum(1 for a in registry.ids if a not in used),
            "antennas_without_movements": sum(
                1 for a in registry.ids if a not in moved
            ),
        }


@dataclass(frozen=True)
class PopulationRaster:
    """Point-sampled population density (persons/km^2) on a uniform lon/lat grid."""

    lon: np.ndarray
    lat: np.ndarray
    density: np.ndarray
    spacing_deg: float

    def __post_init__(self):
        if len(self.density) == 0:
            raise ValidationError("population raster is empty")
        if self.spacing_deg <= 0:
            raise ValidationError("raster spacing must be positive")
        if (np.asarray(self.density) < 0).any():
            raise ValidationError("population density must be non-negative")

    def __len__(self) -> int:
        return len(self.density)
