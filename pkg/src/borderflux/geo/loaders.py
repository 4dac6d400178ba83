"""
CSV / JSON / GeoJSON loaders for antennas, partitions, events and population.
"""

import json
import pathlib
import re
from typing import Mapping, Optional

import numpy as np
import pandas as pd
from shapely.geometry import MultiPolygon, Polygon, shape

from borderflux.config.logging import get_logger
from borderflux.exceptions import ParseError, ValidationError
from borderflux.geo.models import (
    AntennaRegistry,
    EventLog,
    PartitionScheme,
    PopulationRaster,
    Trajectory,
    make_site,
)

log = get_logger(__name__)

_PANDAS_LINE = re.compile(r"line (\d+)")


def _read_csv(path: pathlib.Path, columns: list[str]) -> pd.DataFrame:
    """Read a headed CSV as strings and check the required columns."""
    path = pathlib.Path(path)
    if not path.is_file():
        raise ValidationError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError as e:
        raise ParseError("empty file, header required", line=1, path=path) from e
    except pd.errors.ParserError as e:
        match = _PANDAS_LINE.search(str(e))
        line = int(match.group(1)) if match else None
        raise ParseError(f"malformed row: {e}", line=line, path=path) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8: {e}", path=path) from e

    frame.columns = [c.strip() for c in frame.columns]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ParseError(
            f"missing column(s) {missing}; expected header {','.join(columns)}",
            line=1,
            path=path,
        )
    return frame[columns]


def _numeric(
    frame: pd.DataFrame, column: str, path: pathlib.Path, integer: bool = False
) -> np.ndarray:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = values.isna().to_numpy()
    if integer:
        bad |= ~np.isclose(values.fillna(0).to_numpy() % 1, 0)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise ParseError(
            f"invalid {column} '{frame[column].iloc[k]}'", line=k + 2, path=path
        )
    return values.to_numpy(dtype=np.int64 if integer else float)


def _text(frame: pd.DataFrame, column: str, path: pathlib.Path) -> np.ndarray:
    values = frame[column].str.strip()
    empty = (values == "").to_numpy()
    if empty.any():
        k = int(np.flatnonzero(empty)[0])
        raise ParseError(f"empty {column}", line=k + 2, path=path)
    return values.to_numpy(dtype=object)


def load_boundary(path: pathlib.Path) -> Polygon | MultiPolygon:
    """Load a bounding region from a GeoJSON Polygon, Feature or FeatureCollection."""
    path = pathlib.Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (json.JSONDecodeError, OSError) as e:
        raise ParseError(f"could not read boundary: {e}", path=path) from e

    if data.get("type") == "FeatureCollection":
        features = data.get("features") or []
        if not features:
            raise ParseError("boundary FeatureCollection has no features", path=path)
        data = features[0]
    if data.get("type") == "Feature":
        data = data.get("geometry") or {}
    try:
        geom = shape(data)
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        raise ParseError(f"invalid boundary geometry: {e}", path=path) from e
    if not isinstance(geom, (Polygon, MultiPolygon)) or geom.is_empty:
        raise ValidationError(f"{path}: boundary must be a non-empty polygon")
    return geom


def load_antennas(
    path: pathlib.Path, boundary: Optional[Polygon | MultiPolygon] = None
) -> AntennaRegistry:
    """Load ``antenna_id,lon,lat`` rows into a registry with zero population."""
    path = pathlib.Path(path)
    frame = _read_csv(path, ["antenna_id", "lon", "lat"])
    ids = _text(frame, "antenna_id", path)
    lon = _numeric(frame, "lon", path)
    lat = _numeric(frame, "lat", path)

    sites = [make_site(str(i), float(x), float(y)) for i, x, y in zip(ids, lon, lat)]
    if len(sites) < 2:
        raise ValidationError(f"{path}: at least 2 antennas required, got {len(sites)}")
    registry = AntennaRegistry.from_sites(sites, boundary)
    log.info("antennas_loaded", path=str(path), sites=len(registry))
    return registry


def load_partition(
    path: pathlib.Path,
    name: str,
    registry: AntennaRegistry,
    id_map: Optional[Mapping[str, str]] = None,
) -> PartitionScheme:
    """Load ``antenna_id,region_label`` rows as a total scheme over the registry.

    Ids merged by co-location are remapped through ``id_map``; a merged site
    keeps the label of its surviving id, or of the smallest member id.
    """
    path = pathlib.Path(path)
    frame = _read_csv(path, ["antenna_id", "region_label"])
    ids = _text(frame, "antenna_id", path)
    labels = _text(frame, "region_label", path)

    raw: dict[str, str] = {}
    for k, (antenna_id, label) in enumerate(zip(ids, labels)):
        if antenna_id in raw and raw[antenna_id] != label:
            raise ParseError(
                f"antenna '{antenna_id}' labelled twice", line=k + 2, path=path
            )
        raw[antenna_id] = label

    assignment: dict[str, str] = {}
    for antenna_id in sorted(raw):
        target = id_map.get(antenna_id, antenna_id) if id_map else antenna_id
        if target not in registry.index:
            raise ValidationError(f"{path}: unknown antenna '{antenna_id}'")
        if target == antenna_id or target not in assignment:
            assignment[target] = raw[antenna_id]

    scheme = PartitionScheme(name=name, assignment=assignment)
    scheme.require_total(registry.ids)
    scheme.require_labels(2)
    return scheme


def load_events(
    path: pathlib.Path,
    registry: AntennaRegistry,
    window: Optional[tuple[int, int]] = None,
    id_map: Optional[Mapping[str, str]] = None,
) -> EventLog:
    """Load ``timestamp,user_id,antenna_id`` rows grouped into per-user trajectories.

    Events at unknown antennas or outside ``[start, end)`` are dropped and
    counted. Trajectories are time-sorted with ties kept in input order.
    """
    path = pathlib.Path(path)
    frame = _read_csv(path, ["timestamp", "user_id", "antenna_id"])
    timestamps = _numeric(frame, "timestamp", path, integer=True)
    users = _text(frame, "user_id", path)
    antennas = _text(frame, "antenna_id", path)
    if id_map:
        antennas = np.array([id_map.get(a, a) for a in antennas], dtype=object)

    known = np.fromiter((a in registry.index for a in antennas), bool, len(antennas))
    in_window = np.ones(len(antennas), dtype=bool)
    if window is not None:
        in_window = (timestamps >= window[0]) & (timestamps < window[1])
    dropped_unknown = int((~known).sum())
    dropped_window = int((known & ~in_window).sum())
    keep = known & in_window

    events = pd.DataFrame(
        {
            "timestamp": timestamps[keep],
            "user_id": users[keep],
            "antenna_id": antennas[keep],
            "order": np.flatnonzero(keep),
        }
    ).sort_values(["user_id", "timestamp", "order"])

    trajectories: dict[str, Trajectory] = {}
    for user_id, group in events.groupby("user_id", sort=True):
        trajectories[str(user_id)] = Trajectory(
            user_id=str(user_id),
            timestamps=group["timestamp"].to_numpy(dtype=np.int64),
            antenna_ids=tuple(group["antenna_id"]),
        )

    if dropped_unknown:
        log.warning("events_dropped_unknown_antenna", count=dropped_unknown)
    log.info(
        "events_loaded",
        path=str(path),
        users=len(trajectories),
        events=int(keep.sum()),
        dropped_outside_window=dropped_window,
    )
    return EventLog(
        trajectories=trajectories,
        n_events=int(keep.sum()),
        dropped_unknown_antenna=dropped_unknown,
        dropped_outside_window=dropped_window,
    )


def load_population(
    path: pathlib.Path, spacing_deg: Optional[float] = None
) -> PopulationRaster:
    """Load a ``lon,lat,density`` raster; spacing comes from the ``.json`` sidecar."""
    path = pathlib.Path(path)
    frame = _read_csv(path, ["lon", "lat", "density"])
    lon = _numeric(frame, "lon", path)
    lat = _numeric(frame, "lat", path)
    density = _numeric(frame, "density", path)
    if len(density) == 0:
        raise ValidationError(f"{path}: population raster is empty")

    if spacing_deg is None:
        sidecar = path.with_suffix(".json")
        if not sidecar.is_file():
            raise ValidationError(f"{path}: missing spacing sidecar {sidecar.name}")
        try:
            with open(sidecar, "r", encoding="utf-8") as f:
                spacing_deg = float(json.load(f)["spacing_deg"])
        except (json.JSONDecodeError, OSError, KeyError, TypeError, ValueError) as e:
            raise ParseError(f"invalid sidecar: {e}", path=sidecar) from e

    return PopulationRaster(
        lon=lon, lat=lat, density=density, spacing_deg=float(spacing_deg)
    )
