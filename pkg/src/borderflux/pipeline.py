"""
Command pipelines: load inputs from a RunConfig, run the analysis and write
artifacts under ``config.out``.

Each ``run_*`` function is what the matching CLI subcommand calls, so library
users get byte-identical artifacts without going through click.
"""

import dataclasses
import pathlib
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from borderflux import artifacts
from borderflux.borders import (
    border_histogram,
    border_polylines,
    sample_border_strength,
    strength_field,
)
from borderflux.config import get_settings
from borderflux.config.logging import get_logger
from borderflux.config.run import RunConfig
from borderflux.distributions import (
    Attribution,
    estimate_pdf,
    fit_truncated_power_law,
    per_region_fits,
)
from borderflux.exceptions import ValidationError
from borderflux.flux import (
    FluxModelRegistry,
    aggregate_flux,
    build_region_profiles,
    derive_level1,
    evaluate_model,
    normalized_mape,
)
from borderflux.geo import (
    AntennaRegistry,
    CollapseResult,
    EventLog,
    PartitionScheme,
    VoronoiTessellation,
    assign_population,
    build_voronoi,
    collapse_colocated,
    load_antennas,
    load_boundary,
    load_events,
    load_partition,
    load_population,
)
from borderflux.network import (
    CommunityAssignment,
    DetectorRegistry,
    MobilityNetwork,
    build_mobility_network,
    community_flux_edges,
    constrained_subcommunities,
    modularity,
    similarity_indices,
)
from borderflux.synth import SocietySpec, write_bundle
from borderflux.trajectories import (
    all_displacements,
    displacement_probability_profile,
    distance_binned_profiles,
    gyration_by_region,
    gyration_samples,
    mean_distance_profile,
)

log = get_logger(__name__)

STATS_KINDS = ("jumps", "gyration", "profiles", "binned-profiles")
DETECTED_SCHEME = "communities"


@dataclass
class CommandResult:
    """Written artifact paths plus a small summary for the console."""

    paths: dict[str, pathlib.Path] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Inputs:
    registry: AntennaRegistry
    collapse: CollapseResult
    tessellation: Optional[VoronoiTessellation] = None


def _inputs(config: RunConfig) -> dict[str, Optional[pathlib.Path]]:
    paths = {
        "antennas": config.antennas,
        "population": config.population,
        "cdr": config.cdr,
        "boundary": config.boundary,
    }
    paths.update({f"partition:{k}": v for k, v in config.partitions.items()})
    return paths


def load_sites(
    config: RunConfig, populated: bool = False, tessellate: bool = False
) -> Inputs:
    """Antennas with co-located sites merged; optionally tessellated and populated."""
    config.require("antennas")
    settings = get_settings()
    boundary = load_boundary(config.boundary) if config.boundary else None
    raw = load_antennas(config.antennas, boundary=boundary)
    collapse = collapse_colocated(raw, tol=settings.colocation_tolerance_m)
    registry = collapse.registry

    tess = None
    if populated or tessellate:
        tess = build_voronoi(registry)
    if populated:
        config.require("population")
        registry = assign_population(tess, load_population(config.population))
        tess = dataclasses.replace(tess, registry=registry)
    log.info(
        "sites_loaded",
        antennas=len(registry),
        merged=collapse.merged_count,
        populated=populated,
    )
    return Inputs(registry=registry, collapse=collapse, tessellation=tess)


def load_scheme(config: RunConfig, name: str, inputs: Inputs) -> PartitionScheme:
    return load_partition(
        config.partition_path(name),
        name,
        inputs.registry,
        id_map=inputs.collapse.id_map,
    )


def load_log(config: RunConfig, inputs: Inputs) -> EventLog:
    config.require("cdr")
    return load_events(
        config.cdr, inputs.registry, window=config.window, id_map=inputs.collapse.id_map
    )


def _network(config: RunConfig, inputs: Inputs) -> MobilityNetwork:
    events = load_log(config, inputs)
    return build_mobility_network(
        events, inputs.registry, window_hours=get_settings().network_window_hours
    )


def _require_seed(config: RunConfig) -> int:
    if config.seed is None:
        raise ValidationError("this command needs an explicit --seed")
    return config.seed


def run_tessellate(config: RunConfig) -> CommandResult:
    """Voronoi cells with population assigned to every antenna."""
    config.require("antennas", "population")
    inputs = load_sites(config, populated=True)
    out = config.out
    tess = inputs.tessellation
    result = CommandResult()
    result.paths["tessellation"] = artifacts.write_tessellation(
        out / "tessellation.geojson", tess
    )
    result.paths["antennas"] = artifacts.write_registry(
        out / "antennas_populated.csv", inputs.registry
    )
    result.summary = {
        "antennas": len(inputs.registry),
        "merged": inputs.collapse.merged_count,
        "neighbor_pairs": len(tess.neighbor_pairs),
        "population": float(inputs.registry.populations.sum()),
    }
    result.paths["report"] = artifacts.write_report(
        out / "tessellation.json", result.summary, config.seed, _inputs(config)
    )
    return result


def run_stats(
    config: RunConfig, which: str, scheme_name: Optional[str] = None
) -> CommandResult:
    """Jump-size, gyration or temporal-profile statistics."""
    if which not in STATS_KINDS:
        raise ValidationError(
            f"Unknown statistic '{which}'. Available: {list(STATS_KINDS)}"
        )
    config.require("antennas", "cdr")
    inputs = load_sites(config)
    events = load_log(config, inputs)
    scheme = load_scheme(config, scheme_name, inputs) if scheme_name else None
    registry = inputs.registry
    out = config.out
    result = CommandResult()

    if which == "jumps":
        displacements = all_displacements(events, registry)
        distances = [d.distance for d in displacements]
        pdf = estimate_pdf(distances)
        result.paths["pdf"] = _write_pdf(out / "jumps_pdf.csv", pdf)
        fit = fit_truncated_power_law(distances)
        report: dict[str, Any] = {"all": fit.to_dict()}
        if scheme is not None:
            fits = per_region_fits(displacements, scheme, Attribution.ORIGIN)
            report["regions"] = {r: f.to_dict() for r, f in fits.fits.items()}
            report["skipped"] = fits.skipped
            report["failed"] = fits.failed
            report["attribution"] = fits.attribution.value
            report["beta_std"] = fits.beta_std
        result.paths["fit"] = artifacts.write_report(
            out / "jumps_fit.json", report, config.seed, _inputs(config)
        )
        result.summary = {"displacements": len(distances), **fit.to_dict()}

    elif which == "gyration":
        samples = gyration_samples(events, registry)
        radii = [s.r_g for s in samples]
        result.paths["samples"] = artifacts.write_csv(
            out / "gyration.csv",
            ["user_id", "r_g_km", "n_events"],
            ((s.user_id, s.r_g, s.n_events) for s in samples),
        )
        result.paths["pdf"] = _write_pdf(out / "gyration_pdf.csv", estimate_pdf(radii))
        if scheme is not None:
            by_region = gyration_by_region(events, registry, scheme)
            rows = []
            for region, values in by_region.items():
                positive = [v for v in values if v > 0]
                if positive:
                    pdf = estimate_pdf(positive)
                    rows.extend(_pdf_rows(pdf, region))
            result.paths["regions"] = artifacts.write_csv(
                out / "gyration_pdf_regions.csv",
                ["bin_lo_km", "bin_hi_km", "density", "count", "region"],
                rows,
            )
        result.summary = {"users": len(samples)}

    else:
        result = _run_profiles(config, events, registry, scheme, which == "profiles")
    return result


def _pdf_rows(pdf, region: Optional[str] = None) -> list[tuple]:
    rows = []
    edges = pdf.bin_edges
    for lo, hi, density, count in zip(edges[:-1], edges[1:], pdf.densities, pdf.counts):
        row = (float(lo), float(hi), float(density), int(count))
        rows.append(row if region is None else row + (region,))
    return rows


def _write_pdf(path: pathlib.Path, pdf) -> pathlib.Path:
    return artifacts.write_csv(
        path, ["bin_lo_km", "bin_hi_km", "density", "count"], _pdf_rows(pdf)
    )


def _run_profiles(
    config: RunConfig,
    events: EventLog,
    registry: AntennaRegistry,
    scheme: Optional[PartitionScheme],
    unbinned: bool,
) -> CommandResult:
    settings = get_settings()
    options = dict(
        window_min=settings.window_minutes,
        step_min=settings.step_minutes,
        weekdays_only=config.weekdays_only,
        utc_offset_hours=config.utc_offset_hours,
    )
    subsets: list[tuple[str, Optional[list[str]]]] = [("", None)]
    if scheme is not None and config.capital_regions:
        capital = [a for a in registry.ids if scheme[a] in set(config.capital_regions)]
        if not capital:
            raise ValidationError(
                f"no antenna of scheme '{scheme.name}' is in "
                f"{sorted(config.capital_regions)}"
            )
        subsets.append(("_capital", capital))

    result = CommandResult()
    peaks: dict[str, Any] = {}
    for suffix, antennas in subsets:
        if unbinned:
            profiles = [
                displacement_probability_profile(
                    events, registry, antennas=antennas, **options
                ),
                mean_distance_profile(events, registry, antennas=antennas, **options),
            ]
            name = f"profiles{suffix}"
        else:
            profiles = distance_binned_profiles(
                events, registry, antennas=antennas, **options
            )
            name = f"profiles_binned{suffix}"
        path = config.out / f"{name}.csv"
        result.paths[name] = artifacts.write_profiles(path, profiles)
        peaks[name] = [
            {
                "kind": p.statistic_kind.value,
                "bin_km": list(p.bin_km) if p.bin_km else None,
                "peaks": [[start, value] for start, value in p.peaks()[:3]],
                "missing_windows": p.missing,
            }
            for p in profiles
        ]
    result.paths["peaks"] = artifacts.write_report(
        config.out / "profile_peaks.json",
        {"profiles": peaks},
        config.seed,
        _inputs(config),
    )
    result.summary = {"profiles": sum(len(v) for v in peaks.values())}
    return result


def detect_communities(
    config: RunConfig,
    inputs: Inputs,
    net: MobilityNetwork,
    within: Optional[str] = None,
    detector: str = "louvain",
) -> CommunityAssignment:
    seed = _require_seed(config)
    if within:
        level1 = load_scheme(config, within, inputs)
        return constrained_subcommunities(net, level1, seed, detector=detector)
    return DetectorRegistry.get(detector)(net, seed)


def run_communities(
    config: RunConfig,
    within: Optional[str] = None,
    detector: str = "louvain",
    verbose_indices: bool = False,
) -> CommandResult:
    """Community detection, modularity and similarity to every loaded partition."""
    config.require("antennas", "cdr")
    inputs = load_sites(config)
    net = _network(config, inputs)
    asg = detect_communities(config, inputs, net, within=within, detector=detector)
    detected = asg.as_scheme(DETECTED_SCHEME)

    similarity = {}
    for name in sorted(config.partitions):
        scheme = load_scheme(config, name, inputs)
        similarity[name] = similarity_indices(scheme, detected, verbose=verbose_indices)

    report: dict[str, Any] = {
        "detector": DetectorRegistry.version(detector),
        "seed": config.seed,
        "within": within,
        "modularity": modularity(net, asg),
        "n_communities": asg.number_of_communities,
        "degenerate_groups": list(asg.degenerate_groups),
        "similarity": similarity,
    }
    if within:
        level1 = load_scheme(config, within, inputs)
        edges = community_flux_edges(net, asg, level1)
        report["community_flux"] = {
            kind: [
                [e.source, e.target, e.weight] for e in edges if e.kind == kind
            ]
            for kind in ("intra", "inter")
        }

    result = CommandResult()
    result.paths["communities"] = artifacts.write_communities(
        config.out / "communities.csv", net.node_ids, asg
    )
    result.paths["report"] = artifacts.write_report(
        config.out / "communities.json", report, config.seed, _inputs(config)
    )
    result.summary = {
        "modularity": report["modularity"],
        "communities": report["n_communities"],
    }
    return result


def _scheme_for_model(
    config: RunConfig, name: str, inputs: Inputs, net: MobilityNetwork
) -> PartitionScheme:
    if name == DETECTED_SCHEME and name not in config.partitions:
        return detect_communities(config, inputs, net).as_scheme(DETECTED_SCHEME)
    return load_scheme(config, name, inputs)


def _split_pair(text: str, within: Optional[str]) -> tuple[str, Optional[str]]:
    """``scheme`` or ``scheme:level1``; a bare scheme falls back to ``within``."""
    if ":" in text:
        scheme, level1 = text.split(":", 1)
        return scheme, level1 or None
    return text, within


def run_model(
    config: RunConfig,
    model: str,
    schemes: Sequence[str],
    within: Optional[str] = None,
) -> CommandResult:
    """Fit and score a flux model on one or more partition schemes."""
    FluxModelRegistry.get(model)
    if not schemes:
        raise ValidationError("at least one --scheme is required")
    config.require("antennas", "population", "cdr")
    inputs = load_sites(config, populated=True)
    net = _network(config, inputs)

    reports = {}
    result = CommandResult()
    for text in schemes:
        name, level1_name = _split_pair(text, within)
        scheme = _scheme_for_model(config, name, inputs, net)
        observed = aggregate_flux(net, scheme)
        profiles = build_region_profiles(inputs.registry, scheme)
        level1 = None
        if level1_name:
            level1 = derive_level1(scheme, load_scheme(config, level1_name, inputs))
        report, modeled = evaluate_model(
            model,
            observed,
            profiles,
            level1=level1,
            scheme_name=name,
            level1_name=level1_name,
        )
        reports[name] = report.to_dict()
        result.paths[f"flux:{name}"] = artifacts.write_flux(
            config.out / f"flux_{model}_{name}.csv", observed, modeled
        )

    normalized = normalized_mape({k: r["mape"] for k, r in reports.items()})
    payload = {
        "model": model,
        "schemes": reports,
        "normalized_mape": normalized,
        "normalization": "mape / max(mape) over the listed schemes",
    }
    result.paths["report"] = artifacts.write_report(
        config.out / f"model_{model}.json", payload, config.seed, _inputs(config)
    )
    result.summary = {name: r["mape"] for name, r in reports.items()}
    return result


def run_affinity(
    config: RunConfig,
    model: str,
    schemes: Sequence[str],
    within: Optional[str] = None,
) -> CommandResult:
    """Regional affinity bias per ``scheme:level1`` pair."""
    FluxModelRegistry.get(model)
    if not schemes:
        raise ValidationError("at least one --scheme is required")
    config.require("antennas", "population", "cdr")
    inputs = load_sites(config, populated=True)
    net = _network(config, inputs)

    biases = {}
    for text in schemes:
        name, level1_name = _split_pair(text, within)
        if not level1_name:
            raise ValidationError(
                f"scheme '{name}' needs a level-1 grouping (NAME:LEVEL1 or --within)"
            )
        scheme = _scheme_for_model(config, name, inputs, net)
        level1 = derive_level1(scheme, load_scheme(config, level1_name, inputs))
        observed = aggregate_flux(net, scheme)
        profiles = build_region_profiles(inputs.registry, scheme)
        report, _ = evaluate_model(
            model, observed, profiles, level1=level1, scheme_name=name
        )
        if report.affinity is None:
            raise ValidationError(
                f"affinity undefined for '{name}' grouped by '{level1_name}': "
                "intra or inter comparison set is empty"
            )
        biases[name] = {"level1": level1_name, **report.affinity.to_dict()}

    largest = max(biases, key=lambda k: (biases[k]["D"], k))
    payload = {"model": model, "schemes": biases, "largest_D": largest}
    result = CommandResult()
    result.paths["report"] = artifacts.write_report(
        config.out / f"affinity_{model}.json", payload, config.seed, _inputs(config)
    )
    result.summary = {name: b["D"] for name, b in biases.items()}
    return result


def run_borders(
    config: RunConfig,
    scheme_name: str,
    spacing_km: Optional[float] = None,
    k_neighbors: Optional[int] = None,
) -> CommandResult:
    """Border-strength field, border samples and histograms."""
    config.require("antennas", "cdr")
    settings = get_settings()
    spacing_km = spacing_km or settings.border_spacing_km
    k_neighbors = k_neighbors or settings.idw_neighbors

    inputs = load_sites(config, tessellate=True)
    scheme = load_scheme(config, scheme_name, inputs)
    net = _network(config, inputs)
    strength = strength_field(net, scheme)
    polylines = border_polylines(inputs.tessellation, scheme)
    samples = sample_border_strength(
        strength,
        polylines,
        inputs.tessellation,
        spacing_km=spacing_km,
        k_neighbors=k_neighbors,
        capital_regions=config.capital_regions or None,
    )
    histogram = border_histogram(samples, bin_width=settings.histogram_bin_width)

    out = config.out
    result = CommandResult()
    result.paths["field"] = artifacts.write_strength_field(
        out / "border_field.csv", strength
    )
    result.paths["samples"] = artifacts.write_border_samples(
        out / "border_samples.geojson", samples
    )
    result.paths["histogram"] = artifacts.write_histogram(
        out / "border_histogram.csv", histogram
    )
    report = {
        "scheme": scheme_name,
        "mean_positive": dict(samples.mean_positive),
        "overall_mean_positive": samples.overall_mean_positive,
        "interpolation": {
            "method": "inverse distance weighting",
            "power": samples.power,
            "k_neighbors": samples.k_neighbors,
            "spacing_km": samples.spacing_km,
        },
        "isolated_nodes": strength.missing,
        "violations": list(strength.violations),
        "histogram_out_of_range": histogram.out_of_range,
        "samples": len(samples),
    }
    result.paths["report"] = artifacts.write_report(
        out / "borders.json", report, config.seed, _inputs(config)
    )
    result.summary = {
        "samples": len(samples),
        **{f"mean_positive[{g}]": v for g, v in samples.mean_positive.items()},
    }
    return result


def run_synth(spec: SocietySpec, out: pathlib.Path) -> CommandResult:
    paths = write_bundle(spec, out)
    return CommandResult(paths=paths, summary={"seed": spec.seed, "files": len(paths)})
