"""
Artifact writers: CSV tables, JSON reports with provenance, and GeoJSON layers.

Output is byte-stable for identical inputs: JSON keys are sorted, CSVs use LF
line endings, and no wall-clock values are written.
"""

import hashlib
import json
import pathlib
from typing import Any, Iterable, Mapping, Optional, Sequence

import pandas as pd
from shapely.geometry import mapping

import borderflux
from borderflux.borders import BorderHistogram, BorderSampleSet, BorderStrengthField
from borderflux.flux.models import FluxMatrix
from borderflux.geo.models import AntennaRegistry, VoronoiTessellation
from borderflux.network.graph import CommunityAssignment
from borderflux.trajectories import TemporalProfile


def sha256_file(path: pathlib.Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def provenance(
    seed: Optional[int], inputs: Mapping[str, Optional[pathlib.Path]]
) -> dict[str, Any]:
    """Version, seed and input digests; inputs without a path are skipped."""
    return {
        "version": borderflux.__version__,
        "seed": seed,
        "inputs": {
            name: sha256_file(path)
            for name, path in sorted(inputs.items())
            if path is not None
        },
    }


def write_json(path: pathlib.Path, payload: Any) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, sort_keys=True, indent=2, allow_nan=False)
        f.write("\n")
    return path


def write_report(
    path: pathlib.Path,
    payload: Mapping[str, Any],
    seed: Optional[int],
    inputs: Mapping[str, Optional[pathlib.Path]],
) -> pathlib.Path:
    return write_json(path, {**payload, "provenance": provenance(seed, inputs)})


def write_csv(
    path: pathlib.Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]
) -> pathlib.Path:
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def write_feature_collection(
    path: pathlib.Path, features: Iterable[Mapping[str, Any]]
) -> pathlib.Path:
    return write_json(path, {"type": "FeatureCollection", "features": list(features)})


def _feature(geometry, properties: Mapping[str, Any]) -> dict[str, Any]:
    return {
        "type": "Feature",
        "properties": dict(properties),
        "geometry": mapping(geometry),
    }


def write_tessellation(path: pathlib.Path, tess: VoronoiTessellation) -> pathlib.Path:
    """One lon/lat cell polygon per antenna, with its assigned population."""
    registry = tess.registry
    return write_feature_collection(
        path,
        (
            _feature(
                tess.cells[site.antenna_id],
                {"antenna_id": site.antenna_id, "population": site.population},
            )
            for site in registry
        ),
    )


def write_registry(path: pathlib.Path, registry: AntennaRegistry) -> pathlib.Path:
    return write_csv(
        path,
        ["antenna_id", "lon", "lat", "population"],
        ((s.antenna_id, s.lon, s.lat, s.population) for s in registry),
    )


def profile_rows(profile: TemporalProfile) -> list[tuple]:
    lo, hi = profile.bin_km if profile.bin_km else (None, None)
    return [
        (start, value, profile.statistic_kind.value, lo, hi)
        for start, value in profile.values
    ]


def write_profiles(
    path: pathlib.Path, profiles: Sequence[TemporalProfile]
) -> pathlib.Path:
    """``window_start_min,statistic,kind,bin_lo_km,bin_hi_km``; empty when missing."""
    return write_csv(
        path,
        ["window_start_min", "statistic", "kind", "bin_lo_km", "bin_hi_km"],
        (row for profile in profiles for row in profile_rows(profile)),
    )


def write_communities(
    path: pathlib.Path, node_ids: Sequence[str], asg: CommunityAssignment
) -> pathlib.Path:
    return write_csv(
        path,
        ["antenna_id", "community_label"],
        ((node, asg[node]) for node in node_ids),
    )


def write_flux(path: pathlib.Path, *fluxes: FluxMatrix) -> pathlib.Path:
    """Off-diagonal entries as ``origin,destination,value,kind``."""
    rows = []
    for flux in fluxes:
        for i, origin in enumerate(flux.regions):
            for j, destination in enumerate(flux.regions):
                if i != j:
                    value = float(flux.T[i, j])
                    rows.append((origin, destination, value, flux.kind.value))
    return write_csv(path, ["origin", "destination", "value", "kind"], rows)


def write_strength_field(
    path: pathlib.Path, field: BorderStrengthField
) -> pathlib.Path:
    return write_csv(
        path,
        ["antenna_id", "s_value", "assigned_region", "best_foreign_region"],
        (
            (node, field.values[node], field.assigned[node], field.best_foreign[node])
            for node in field.node_ids
        ),
    )


def write_border_samples(path: pathlib.Path, samples: BorderSampleSet) -> pathlib.Path:
    return write_feature_collection(
        path,
        (
            {
                "type": "Feature",
                "properties": {
                    "s": s.value,
                    "border_id": s.border_id,
                    "group": s.group,
                },
                "geometry": {"type": "Point", "coordinates": [s.lon, s.lat]},
            }
            for s in samples.samples
        ),
    )


def write_histogram(path: pathlib.Path, histogram: BorderHistogram) -> pathlib.Path:
    return write_csv(
        path, ["bin_lo", "bin_hi", "count", "border_group"], histogram.rows()
    )
