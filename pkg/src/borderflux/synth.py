"""
Deterministic synthetic society: antennas, population, planted partitions and
CDR streams with a ground-truth manifest.

The country is a 5 x 5 degree box. Level-1 region ``T0`` is a disc around the
centre (the capital district); the remaining level-1 regions are angular
wedges centred on the compass directions, so their borders run along the
diagonals and cut across the axis-aligned ``grid`` partition. The default
5 x 5 grid puts the capital inside its centre cell. Each level-1 region is
split into sub-communities by k-means over its sites.

Residents are drawn in proportion to the raster population of each site's
Voronoi cell, the same quantity the tessellation assigns, and the gravity
kernel for destination choice uses those populations as region masses.

Users live at a home antenna. On weekdays they commute out in the morning,
optionally take a short midday trip to a nearby site, and return home in the
evening. Fill-in calls at the user's current location are spread over every
day.
"""

import pathlib
from collections import Counter
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np
import pandas as pd
import pydantic
from pydantic import BaseModel, Field
from scipy.spatial import cKDTree
from shapely.geometry import Polygon, box, mapping
from sklearn.cluster import KMeans

import borderflux
from borderflux.artifacts import write_json
from borderflux.config.logging import get_logger
from borderflux.distributions import sample_truncated_power_law
from borderflux.exceptions import ValidationError
from borderflux.geo.distance import LocalProjection, pairwise_haversine
from borderflux.geo.models import PopulationRaster
from borderflux.geo.population import sample_areas

log = get_logger(__name__)

LON_RANGE = (-8.0, -3.0)
LAT_RANGE = (5.0, 10.0)
CENTER = (-5.5, 7.5)
RASTER_SPACING_DEG = 0.05
POPULATION_PEAK = 1000.0
POPULATION_FLOOR = 10.0
POPULATION_SIGMA_DEG = 1.2
LUNCH_RADIUS_KM = 1.0
MAX_TRANSITION_GAP_S = 86400
GENERATOR = "numpy.random.PCG64"
MAX_PLACEMENT_ROUNDS = 2000
ACCEPTANCE_SEED = 11
ACCEPTANCE_CAPITAL_RHO = 0.8


class ScheduleTemplate(BaseModel):
    """Burst times (hours, local = UTC) with spreads in minutes and day weights."""

    morning_hour: float = Field(default=8.0, ge=0.0, lt=24.0)
    morning_sd_min: float = Field(default=30.0, ge=0.0)
    morning_weight: float = Field(default=1.0, ge=0.0, le=1.0)
    evening_hour: float = Field(default=19.0, ge=0.0, lt=24.0)
    evening_sd_min: float = Field(default=40.0, ge=0.0)
    evening_weight: float = Field(default=1.0, ge=0.0, le=1.0)
    midday_hour: float = Field(default=13.0, ge=0.0, lt=24.0)
    midday_sd_min: float = Field(default=20.0, ge=0.0)
    midday_weight: float = Field(default=1.0, ge=0.0, le=1.0)
    delay_min: tuple[float, float] = (5.0, 30.0)

    model_config = {"frozen": True, "extra": "forbid"}


class SocietySpec(BaseModel):
    """Parameters of one synthetic society."""

    seed: int = 0
    n_level1_regions: int = Field(default=5, ge=1)
    n_subcommunities_per_region: int = Field(default=3, ge=1)
    n_antennas: int = Field(default=200, ge=1)
    n_users: int = Field(default=2000, ge=1)
    days: int = Field(default=14, ge=1)
    rho: float = Field(default=0.9, ge=0.0, le=1.0)
    alpha: float = 1.0
    beta_g: float = 1.0
    gamma: float = 2.0
    delta_r0_km: float = Field(default=1.0, ge=0.0)
    beta: float = Field(default=1.62, gt=0.0)
    kappa_km: float = Field(default=122.0, gt=0.0)
    schedule: ScheduleTemplate = Field(default_factory=ScheduleTemplate)
    local_fraction: float = Field(default=0.7, ge=0.0, le=1.0)
    capital_fraction: float = Field(default=0.25, ge=0.0, le=1.0)
    capital_rho: Optional[float] = Field(
        default=None,
        ge=0.0,
        le=1.0,
        description="Stay probability for capital residents; None uses rho",
    )
    capital_radius_km: float = Field(default=80.0, gt=0.0)
    companion_fraction: float = Field(default=0.15, ge=0.0, lt=1.0)
    n_colocated_groups: int = Field(default=12, ge=0)
    lunch_fraction: float = Field(default=0.3, ge=0.0, le=1.0)
    fill_in_rate_per_day: float = Field(default=4.0, ge=0.0)
    start: int = Field(default=1704067200, description="Unix seconds, 2024-01-01")
    grid_shape: tuple[int, int] = (5, 5)

    model_config = {"frozen": True, "extra": "forbid"}


def make_society_spec(**values: Any) -> SocietySpec:
    """Build a spec, reporting pydantic failures as ``ValidationError``."""
    try:
        return SocietySpec(**values)
    except pydantic.ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}"
            for err in e.errors()
        )
        raise ValidationError(f"invalid society spec: {problems}") from e


def acceptance_society_spec(**overrides: Any) -> SocietySpec:
    """The default society with a porous capital and a fixed seed.

    Capital residents leave their district with probability
    ``1 - ACCEPTANCE_CAPITAL_RHO`` instead of ``1 - rho``.
    """
    values = {"seed": ACCEPTANCE_SEED, "capital_rho": ACCEPTANCE_CAPITAL_RHO}
    return make_society_spec(**{**values, **overrides})


@dataclass(frozen=True)
class SyntheticSociety:
    spec: SocietySpec
    antennas: pd.DataFrame
    raster: PopulationRaster
    partitions: dict[str, dict[str, str]]
    events: pd.DataFrame
    boundary: Polygon
    manifest: dict[str, Any]


def population_density(lon, lat) -> np.ndarray:
    """Gaussian population landscape peaking at the capital."""
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    r2 = (lon - CENTER[0]) ** 2 + (lat - CENTER[1]) ** 2
    return POPULATION_FLOOR + POPULATION_PEAK * np.exp(
        -r2 / (2 * POPULATION_SIGMA_DEG**2)
    )


def population_raster() -> PopulationRaster:
    half = RASTER_SPACING_DEG / 2
    lons = np.arange(LON_RANGE[0] + half, LON_RANGE[1], RASTER_SPACING_DEG)
    lats = np.arange(LAT_RANGE[0] + half, LAT_RANGE[1], RASTER_SPACING_DEG)
    lon, lat = np.meshgrid(lons, lats)
    lon, lat = lon.ravel(), lat.ravel()
    return PopulationRaster(
        lon=lon,
        lat=lat,
        density=population_density(lon, lat),
        spacing_deg=RASTER_SPACING_DEG,
    )


def site_populations(
    lon: np.ndarray, lat: np.ndarray, raster: PopulationRaster
) -> np.ndarray:
    """Raster mass summed into the Voronoi cell (nearest site) of each site."""
    projection = LocalProjection(float(np.mean(lon)), float(np.mean(lat)))
    tree = cKDTree(projection.forward(lon, lat))
    _, nearest = tree.query(projection.forward(raster.lon, raster.lat), k=1)
    mass = raster.density * sample_areas(raster)
    return np.bincount(nearest, weights=mass, minlength=len(lon))


def level1_of(xy: np.ndarray, spec: SocietySpec) -> np.ndarray:
    """Level-1 index per projected point: 0 inside the capital disc, wedges outside."""
    xy = np.atleast_2d(xy)
    if spec.n_level1_regions == 1:
        return np.zeros(len(xy), dtype=int)
    radius = np.hypot(xy[:, 0], xy[:, 1])
    n_wedges = spec.n_level1_regions - 1
    angle = np.mod(np.arctan2(xy[:, 1], xy[:, 0]) - np.pi / 4, 2 * np.pi)
    wedge = np.minimum((angle // (2 * np.pi / n_wedges)).astype(int), n_wedges - 1)
    return np.where(radius <= spec.capital_radius_km, 0, wedge + 1)


def _site_counts(spec: SocietySpec, n_copies: int) -> tuple[int, int, list[int]]:
    """(companions, base sites, base quota per level-1 region)."""
    n_sub = spec.n_subcommunities_per_region
    L = spec.n_level1_regions
    if L * n_sub > spec.n_antennas:
        raise ValidationError(
            f"infeasible spec: {L * n_sub} subcommunities for "
            f"{spec.n_antennas} antennas"
        )
    companions = int(round(spec.companion_fraction * spec.n_antennas))
    base = spec.n_antennas - companions - n_copies
    if L == 1:
        quotas = [base]
    else:
        first = max(n_sub, int(round(spec.capital_fraction * base)))
        rest = base - first
        share, extra = divmod(max(rest, 0), L - 1)
        quotas = [first] + [share + (1 if k < extra else 0) for k in range(L - 1)]
    if base < 1 or min(quotas) < n_sub:
        raise ValidationError(
            f"infeasible spec: {base} independent sites cannot host "
            f"{n_sub} subcommunities in each of {L} regions"
        )
    if spec.n_colocated_groups > base:
        raise ValidationError("more co-located groups than independent sites")
    return companions, base, quotas


def _draw_base_sites(
    rng: np.random.Generator,
    spec: SocietySpec,
    projection: LocalProjection,
    quotas: list[int],
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Density-weighted rejection sampling of sites per level-1 region."""
    lon = [np.zeros(0)] * len(quotas)
    lat = [np.zeros(0)] * len(quotas)
    top = POPULATION_FLOOR + POPULATION_PEAK
    for _ in range(MAX_PLACEMENT_ROUNDS):
        plon = rng.uniform(*LON_RANGE, 4096)
        plat = rng.uniform(*LAT_RANGE, 4096)
        accept = rng.random(4096) < population_density(plon, plat) / top
        plon, plat = plon[accept], plat[accept]
        region = level1_of(projection.forward(plon, plat), spec)
        for t, q in enumerate(quotas):
            need = q - len(lon[t])
            if need > 0:
                pick = np.flatnonzero(region == t)[:need]
                lon[t] = np.concatenate([lon[t], plon[pick]])
                lat[t] = np.concatenate([lat[t], plat[pick]])
        if all(len(lon[t]) >= q for t, q in enumerate(quotas)):
            return lon, lat
    raise ValidationError(
        "infeasible spec: could not place sites in every level-1 region "
        f"(capital radius {spec.capital_radius_km} km)"
    )


@dataclass
class _World:
    spec: SocietySpec
    ids: list[str]
    D: np.ndarray
    level1: np.ndarray
    sub: np.ndarray
    sub_members: list[np.ndarray]
    sub_level1: np.ndarray
    kernel: np.ndarray
    weights: np.ndarray
    lunch_spot: np.ndarray


def _build_world(
    rng: np.random.Generator, spec: SocietySpec, raster: PopulationRaster
):
    # each co-located group is a base site plus one or two copies
    extra = rng.integers(1, 3, size=spec.n_colocated_groups)
    companions, base, quotas = _site_counts(spec, int(extra.sum()))
    projection = LocalProjection(*CENTER)
    base_lon, base_lat = _draw_base_sites(rng, spec, projection, quotas)

    lon = np.concatenate(base_lon)
    lat = np.concatenate(base_lat)
    level1 = np.concatenate([np.full(q, t) for t, q in enumerate(quotas)])

    sub = np.zeros(base, dtype=int)
    offset = 0
    n_sub = spec.n_subcommunities_per_region
    for t in range(spec.n_level1_regions):
        members = np.flatnonzero(level1 == t)
        if n_sub > 1:
            km = KMeans(n_clusters=n_sub, n_init=10, random_state=spec.seed)
            local = km.fit_predict(projection.forward(lon[members], lat[members]))
        else:
            local = np.zeros(len(members), dtype=int)
        sub[members] = offset + local
        offset += n_sub

    # companions sit 0.2-0.9 km from a parent, co-located copies on top of one
    parents = rng.choice(base, size=companions, replace=companions > base)
    dist = rng.uniform(0.2, 0.9, companions)
    theta = rng.uniform(0.0, 2 * np.pi, companions)
    xy = projection.forward(lon[parents], lat[parents])
    xy = xy + np.column_stack([dist * np.cos(theta), dist * np.sin(theta)])
    comp_lonlat = projection.inverse(xy[:, 0], xy[:, 1])
    comp_lonlat[:, 0] = np.clip(comp_lonlat[:, 0], *LON_RANGE)
    comp_lonlat[:, 1] = np.clip(comp_lonlat[:, 1], *LAT_RANGE)
    originals = rng.choice(base, size=spec.n_colocated_groups, replace=False)
    copies = np.repeat(originals, extra)

    lon = np.concatenate([lon, comp_lonlat[:, 0], lon[copies]])
    lat = np.concatenate([lat, comp_lonlat[:, 1], lat[copies]])
    parent_of = np.concatenate([np.arange(base), parents, copies])
    level1 = level1[parent_of]
    sub = sub[parent_of]
    ids = [f"a{k:04d}" for k in range(len(lon))]

    # copies collapse into their original, so they hold no population
    distinct = base + companions
    weights = np.zeros(len(lon))
    weights[:distinct] = site_populations(lon[:distinct], lat[:distinct], raster)

    n_subs = spec.n_level1_regions * n_sub
    sub_members = [np.flatnonzero(sub == s) for s in range(n_subs)]
    sub_level1 = np.array([s // n_sub for s in range(n_subs)])
    mass = np.array([weights[m].sum() for m in sub_members])
    c_lon = np.array([np.average(lon[m], weights=weights[m]) for m in sub_members])
    c_lat = np.array([np.average(lat[m], weights=weights[m]) for m in sub_members])
    r = np.maximum(pairwise_haversine(c_lon, c_lat), 1e-3)
    kernel = mass[:, None] ** spec.alpha * mass[None, :] ** spec.beta_g / r**spec.gamma
    np.fill_diagonal(kernel, 0.0)

    D = pairwise_haversine(lon, lat)
    lunch_spot = np.full(len(lon), -1)
    for k in range(len(lon)):
        near = np.flatnonzero(
            (D[k] > 0) & (D[k] <= LUNCH_RADIUS_KM) & (level1 == level1[k])
        )
        if len(near):
            lunch_spot[k] = near[np.argmin(D[k, near])]

    world = _World(
        spec=spec,
        ids=ids,
        D=D,
        level1=level1,
        sub=sub,
        sub_members=sub_members,
        sub_level1=sub_level1,
        kernel=kernel,
        weights=weights,
        lunch_spot=lunch_spot,
    )
    groups = {
        "companions": {ids[base + k]: ids[p] for k, p in enumerate(parents)},
        "colocated": {ids[distinct + k]: ids[p] for k, p in enumerate(copies)},
    }
    return world, lon, lat, groups


def _choose_destination(
    rng: np.random.Generator, world: _World, home: int, jump_km: float
) -> int:
    spec = world.spec
    home_sub = world.sub[home]
    home_l1 = world.level1[home]
    stay = spec.rho
    sibling_share = 1.0 - spec.local_fraction
    if home_l1 == 0 and spec.capital_rho is not None and spec.n_level1_regions > 1:
        # a porous capital trades home-district trips for foreign ones while
        # its residents visit sibling districts at the usual rate
        stay = spec.capital_rho
        visits = spec.rho * sibling_share
        sibling_share = min(1.0, visits / stay) if stay > 0 else 0.0

    if rng.random() < stay:
        subs = np.arange(len(world.sub_members))
        siblings = np.flatnonzero((world.sub_level1 == home_l1) & (subs != home_sub))
        if rng.random() >= sibling_share or len(siblings) == 0:
            target = home_sub
        else:
            target = _gravity_pick(rng, world, home_sub, siblings)
    else:
        foreign = np.flatnonzero(world.sub_level1 != home_l1)
        target = (
            _gravity_pick(rng, world, home_sub, foreign) if len(foreign) else home_sub
        )

    members = world.sub_members[target]
    return int(members[np.argmin(np.abs(world.D[home, members] - jump_km))])


def _gravity_pick(rng, world: _World, origin_sub: int, candidates: np.ndarray) -> int:
    p = world.kernel[origin_sub, candidates]
    return int(rng.choice(candidates, p=p / p.sum()))


def _clock(rng, hour: float, sd_min: float) -> float:
    return float(np.clip(rng.normal(hour * 3600.0, sd_min * 60.0), 0.0, 86399.0))


def _simulate_user(
    rng: np.random.Generator, world: _World, home: int, lunch_cohort: bool
) -> tuple[list[tuple[int, int]], list[list[Any]]]:
    """Events ``(timestamp, antenna)`` and trips of one user."""
    spec = world.spec
    sched = spec.schedule
    jumps = sample_truncated_power_law(
        rng, spec.days, spec.delta_r0_km, spec.beta, spec.kappa_km
    )
    events: list[tuple[int, int]] = []
    trips: list[list[Any]] = []

    def delay() -> float:
        return rng.uniform(*sched.delay_min) * 60.0

    for day in range(spec.days):
        day_start = spec.start + day * 86400
        weekday = (day_start // 86400 + 3) % 7 < 5
        # (from_second, antenna) segments of the day's location timeline
        timeline = [(0.0, home)]
        day_events: list[tuple[float, int]] = []

        def trip(t_out: float, origin: int, dest: int, kind: str, jump=None):
            t_in = min(t_out + delay(), 86399.0)
            day_events.append((t_out, origin))
            day_events.append((t_in, dest))
            timeline.append((t_in, dest))
            trips.append(
                [int(day_start + t_out), world.ids[origin], world.ids[dest], kind, jump]
            )
            return t_in

        if weekday and rng.random() < sched.morning_weight:
            dest = _choose_destination(rng, world, home, float(jumps[day]))
            t_arrive = trip(
                _clock(rng, sched.morning_hour, sched.morning_sd_min),
                home,
                dest,
                "morning",
                float(jumps[day]),
            )
            t_leave = max(
                _clock(rng, sched.evening_hour, sched.evening_sd_min), t_arrive + 600.0
            )
            spot = world.lunch_spot[dest]
            if lunch_cohort and spot >= 0 and rng.random() < sched.midday_weight:
                t_lunch = _clock(rng, sched.midday_hour, sched.midday_sd_min)
                if t_arrive < t_lunch and t_lunch + 7200.0 < t_leave:
                    back = trip(t_lunch, dest, spot, "lunch")
                    t_back = back + rng.uniform(30.0, 60.0) * 60.0
                    trip(t_back, spot, dest, "lunch_return")
            if t_leave < 86399.0 and rng.random() < sched.evening_weight:
                trip(t_leave, dest, home, "evening")

        n_fill = rng.poisson(spec.fill_in_rate_per_day)
        starts = np.array([t for t, _ in timeline])
        for t in np.sort(rng.uniform(0.0, 86400.0, n_fill)):
            where = timeline[int(np.searchsorted(starts, t, side="right")) - 1][1]
            day_events.append((float(t), where))

        day_events.sort(key=lambda e: e[0])
        events.extend((int(day_start + t), a) for t, a in day_events)
    return events, trips


def _grid_labels(lon: np.ndarray, lat: np.ndarray, shape: tuple[int, int]):
    rows, cols = shape
    col = np.clip(
        ((lon - LON_RANGE[0]) / (LON_RANGE[1] - LON_RANGE[0]) * cols).astype(int),
        0,
        cols - 1,
    )
    row = np.clip(
        ((lat - LAT_RANGE[0]) / (LAT_RANGE[1] - LAT_RANGE[0]) * rows).astype(int),
        0,
        rows - 1,
    )
    grid = [f"G{r}{c}" for r, c in zip(row, col)]
    blocks = [f"B{r * 2 // rows}{c * 2 // cols}" for r, c in zip(row, col)]
    return grid, blocks


def transition_tally(events: pd.DataFrame) -> Counter:
    """Consecutive same-user pairs with ``0 < dt <= 24 h``, keyed by antenna pair."""
    tally: Counter = Counter()
    for _, group in events.groupby("user_id", sort=True):
        t = group["timestamp"].to_numpy(dtype=np.int64)
        a = group["antenna_id"].to_numpy()
        gap = np.diff(t)
        keep = (gap > 0) & (gap <= MAX_TRANSITION_GAP_S)
        tally.update(zip(a[:-1][keep], a[1:][keep]))
    return tally


def generate(spec: SocietySpec) -> SyntheticSociety:
    """Generate a society; identical output for identical specs.

    Raises:
        ValidationError: the society spec cannot be realised (more subcommunities
            than antennas, or too few sites per level-1 region).
    """
    streams = np.random.SeedSequence(spec.seed).spawn(spec.n_users + 1)
    rng = np.random.Generator(np.random.PCG64(streams[0]))
    raster = population_raster()
    world, lon, lat, groups = _build_world(rng, spec, raster)
    ids = world.ids

    n_sub = spec.n_subcommunities_per_region
    grid, blocks = _grid_labels(lon, lat, spec.grid_shape)
    partitions = {
        "tribe": {a: f"T{world.level1[k]}" for k, a in enumerate(ids)},
        "sub": {
            a: f"T{world.level1[k]}S{world.sub[k] % n_sub}" for k, a in enumerate(ids)
        },
        "grid": dict(zip(ids, grid)),
        "grid_blocks": dict(zip(ids, blocks)),
    }

    p_home = world.weights / world.weights.sum()
    homes = rng.choice(len(ids), size=spec.n_users, p=p_home)
    lunch = rng.random(spec.n_users) < spec.lunch_fraction

    rows = []
    users: dict[str, Any] = {}
    trips: dict[str, list] = {}
    for u in range(spec.n_users):
        user_id = f"u{u:05d}"
        user_rng = np.random.Generator(np.random.PCG64(streams[u + 1]))
        events, user_trips = _simulate_user(
            user_rng, world, int(homes[u]), bool(lunch[u])
        )
        rows.extend((t, user_id, ids[a]) for t, a in events)
        users[user_id] = {
            "home": ids[homes[u]],
            "tribe": partitions["tribe"][ids[homes[u]]],
            "sub": partitions["sub"][ids[homes[u]]],
            "lunch_cohort": bool(lunch[u]),
        }
        trips[user_id] = user_trips

    events = pd.DataFrame(rows, columns=["timestamp", "user_id", "antenna_id"])
    tally = transition_tally(events)
    antennas = pd.DataFrame({"antenna_id": ids, "lon": lon, "lat": lat})
    boundary = box(LON_RANGE[0], LAT_RANGE[0], LON_RANGE[1], LAT_RANGE[1])

    manifest = {
        "generator": {
            "name": GENERATOR,
            "streams": "SeedSequence(seed).spawn(n_users + 1); stream 0 geography",
            "numpy": np.__version__,
            "borderflux": borderflux.__version__,
        },
        "spec": spec.model_dump(mode="json"),
        "partitions": partitions,
        "groups": {**groups, "capital_regions": ["T0"]},
        "users": users,
        "trips": trips,
        "tally": [[a, b, n] for (a, b), n in sorted(tally.items())],
        "counts": {
            "antennas": len(ids),
            "events": len(events),
            "transitions": int(sum(tally.values())),
        },
    }
    log.info(
        "society_generated",
        seed=spec.seed,
        antennas=len(ids),
        users=spec.n_users,
        events=len(events),
    )
    return SyntheticSociety(
        spec=spec,
        antennas=antennas,
        raster=raster,
        partitions=partitions,
        events=events,
        boundary=boundary,
        manifest=manifest,
    )


def write_bundle(spec: SocietySpec, out_dir: pathlib.Path) -> dict[str, pathlib.Path]:
    """Generate a society and write it in the loader formats.

    Returns the written paths keyed by role (``antennas``, ``population``,
    ``cdr``, ``boundary``, ``manifest``, ``partition:<name>``).
    """
    society = generate(spec)
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "antennas": out / "antennas.csv",
        "population": out / "population.csv",
        "cdr": out / "cdr.csv",
        "boundary": out / "boundary.geojson",
        "manifest": out / "manifest.json",
    }

    society.antennas.to_csv(
        paths["antennas"], index=False, float_format="%.7f", lineterminator="\n"
    )
    raster = society.raster
    pd.DataFrame(
        {"lon": raster.lon, "lat": raster.lat, "density": raster.density}
    ).to_csv(paths["population"], index=False, float_format="%.6f", lineterminator="\n")
    write_json(out / "population.json", {"spacing_deg": raster.spacing_deg})
    society.events.to_csv(paths["cdr"], index=False, lineterminator="\n")
    write_json(
        paths["boundary"],
        {
            "type": "FeatureCollection",
            "features": [
                {
                    "type": "Feature",
                    "properties": {"name": "country"},
                    "geometry": mapping(society.boundary),
                }
            ],
        },
    )
    for name, assignment in society.partitions.items():
        path = out / f"partition_{name}.csv"
        pd.DataFrame(
            {"antenna_id": list(assignment), "region_label": list(assignment.values())}
        ).to_csv(path, index=False, lineterminator="\n")
        paths[f"partition:{name}"] = path
    write_json(paths["manifest"], society.manifest)
    log.info("bundle_written", out=str(out), files=len(paths))
    return paths
