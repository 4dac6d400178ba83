"""
Displacements, radius of gyration and time-of-day commuting profiles.
"""

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from borderflux.config import get_settings
from borderflux.config.logging import get_logger
from borderflux.exceptions import ValidationError
from borderflux.geo.distance import haversine_array
from borderflux.geo.models import AntennaRegistry, PartitionScheme, Trajectory

log = get_logger(__name__)

MINUTES_PER_DAY = 1440
SECONDS_PER_DAY = 86400
DEFAULT_BINS_KM = ((0.0, 1.0), (1.0, 5.0), (5.0, 10.0), (10.0, 20.0), (20.0, 50.0))


class StatisticKind(str, Enum):
    DISPLACEMENT_PROBABILITY = "displacement_probability"
    MEAN_DISTANCE = "mean_distance_km"


class DayPooling(str, Enum):
    """How qualifying days are combined into one profile."""

    POOLED = "pooled"
    DAILY_MEAN = "daily_mean"


@dataclass(frozen=True)
class Displacement:
    user_id: str
    t_start: int
    t_end: int
    origin: str
    destination: str
    distance: float


@dataclass(frozen=True)
class GyrationSample:
    user_id: str
    r_g: float
    n_events: int


@dataclass(frozen=True)
class TemporalProfile:
    """Statistic per moving window; ``None`` marks a window with no data."""

    window_minutes: int
    step_minutes: int
    values: tuple[tuple[int, Optional[float]], ...]
    statistic_kind: StatisticKind
    bin_km: Optional[tuple[float, float]] = None
    pooling: DayPooling = DayPooling.POOLED

    @property
    def starts(self) -> np.ndarray:
        return np.array([start for start, _ in self.values], dtype=int)

    def array(self) -> np.ndarray:
        """Statistics as floats with NaN for missing windows."""
        return np.array(
            [np.nan if v is None else v for _, v in self.values], dtype=float
        )

    @property
    def missing(self) -> int:
        return sum(1 for _, v in self.values if v is None)

    def peaks(self, min_separation_min: int = 120) -> list[tuple[int, float]]:
        """Local maxima on the circular day, highest first."""
        values = self.array()
        if np.isnan(values).all():
            return []
        filled = np.where(np.isnan(values), np.nanmin(values), values)
        n = len(filled)
        padded = np.concatenate([filled, filled, filled])
        distance = max(1, int(np.ceil(min_separation_min / self.step_minutes)))
        idx, _ = find_peaks(padded, distance=distance)
        idx = sorted({int(i) - n for i in idx if n <= i < 2 * n})
        found = [(int(self.starts[i]), float(filled[i])) for i in idx]
        return sorted(found, key=lambda p: (-p[1], p[0]))


@dataclass(frozen=True)
class CallPairs:
    """Consecutive-call pairs of a trajectory collection, flattened."""

    origin: np.ndarray
    destination: np.ndarray
    minute: np.ndarray
    day: np.ndarray
    distance: np.ndarray

    @property
    def displaced(self) -> np.ndarray:
        return self.origin != self.destination

    def __len__(self) -> int:
        return len(self.minute)


def _sorted(trajs: Iterable[Trajectory]) -> list[Trajectory]:
    return sorted(trajs, key=lambda t: t.user_id)


def _indices(traj: Trajectory, registry: AntennaRegistry) -> np.ndarray:
    try:
        return np.array([registry.index[a] for a in traj.antenna_ids], dtype=int)
    except KeyError as e:
        raise ValidationError(
            f"user '{traj.user_id}' references unknown antenna {e}"
        ) from None


def extract_displacements(
    traj: Trajectory, registry: AntennaRegistry
) -> list[Displacement]:
    """One displacement per consecutive pair at different antennas.

    Pairs with a non-increasing timestamp are skipped.
    """
    if len(traj) < 2:
        return []
    idx = _indices(traj, registry)
    t = traj.timestamps
    moved = (idx[1:] != idx[:-1]) & (t[1:] > t[:-1])
    k = np.flatnonzero(moved)
    a, b = idx[k], idx[k + 1]
    d = haversine_array(
        registry.lon[a], registry.lat[a], registry.lon[b], registry.lat[b]
    )
    return [
        Displacement(
            user_id=traj.user_id,
            t_start=int(t[i]),
            t_end=int(t[i + 1]),
            origin=traj.antenna_ids[i],
            destination=traj.antenna_ids[i + 1],
            distance=float(dist),
        )
        for i, dist in zip(k, d)
    ]


def all_displacements(
    trajs: Iterable[Trajectory], registry: AntennaRegistry
) -> list[Displacement]:
    ordered = _sorted(trajs)
    with ThreadPoolExecutor(max_workers=get_settings().threads) as pool:
        chunks = list(pool.map(lambda t: extract_displacements(t, registry), ordered))
    return [d for chunk in chunks for d in chunk]


def radius_of_gyration(traj: Trajectory, registry: AntennaRegistry) -> GyrationSample:
    """Root-mean-square projected distance of every event from the centre of mass."""
    if len(traj) == 0:
        raise ValidationError(f"user '{traj.user_id}' has no events")
    xy = registry.xy[_indices(traj, registry)]
    centre = xy.mean(axis=0)
    r_g = float(np.sqrt(np.mean(np.sum((xy - centre) ** 2, axis=1))))
    return GyrationSample(user_id=traj.user_id, r_g=r_g, n_events=len(traj))


def gyration_samples(
    trajs: Iterable[Trajectory], registry: AntennaRegistry
) -> list[GyrationSample]:
    return [
        radius_of_gyration(t, registry) for t in _sorted(trajs) if len(t) > 0
    ]


def home_antenna(traj: Trajectory) -> str:
    """Most frequent antenna of a trajectory, smallest id on ties."""
    counts = Counter(traj.antenna_ids)
    return min(counts, key=lambda a: (-counts[a], a))


def gyration_by_region(
    trajs: Iterable[Trajectory], registry: AntennaRegistry, scheme: PartitionScheme
) -> dict[str, list[float]]:
    """Gyration radii grouped by the region of each user's home antenna."""
    groups: dict[str, list[float]] = {label: [] for label in scheme.labels}
    for traj in _sorted(trajs):
        if len(traj) == 0:
            continue
        label = scheme[home_antenna(traj)]
        groups[label].append(radius_of_gyration(traj, registry).r_g)
    return groups


def call_pairs(
    trajs: Iterable[Trajectory],
    registry: AntennaRegistry,
    *,
    weekdays_only: bool = False,
    utc_offset_hours: float = 0.0,
    antennas: Optional[Iterable[str]] = None,
    max_gap_hours: float = 24.0,
) -> CallPairs:
    """Consecutive same-user call pairs eligible for temporal profiles.

    A pair is dated by its first call in local time. Pairs with a
    non-positive gap or a gap above ``max_gap_hours`` are excluded.
    """
    offset_s = int(round(utc_offset_hours * 3600))
    max_gap_s = max_gap_hours * 3600
    subset = None
    if antennas is not None:
        subset = np.zeros(len(registry), dtype=bool)
        subset[[registry.index[a] for a in antennas]] = True

    def one(traj: Trajectory) -> tuple[np.ndarray, ...]:
        idx = _indices(traj, registry)
        t = traj.timestamps.astype(np.int64)
        gap = t[1:] - t[:-1]
        keep = (gap > 0) & (gap <= max_gap_s)
        local = t[:-1] + offset_s
        day = np.floor_divide(local, SECONDS_PER_DAY)
        if weekdays_only:
            # 1970-01-01 was a Thursday; Monday = 0
            keep &= (day + 3) % 7 < 5
        if subset is not None:
            keep &= subset[idx[:-1]]
        minute = np.floor_divide(local, 60) % MINUTES_PER_DAY
        return idx[:-1][keep], idx[1:][keep], minute[keep], day[keep]

    ordered = [t for t in _sorted(trajs) if len(t) >= 2]
    with ThreadPoolExecutor(max_workers=get_settings().threads) as pool:
        parts = list(pool.map(one, ordered))

    if parts:
        origin, destination, minute, day = (
            np.concatenate([p[k] for p in parts]) for k in range(4)
        )
    else:
        origin = destination = minute = day = np.zeros(0, dtype=np.int64)
    distance = haversine_array(
        registry.lon[origin],
        registry.lat[origin],
        registry.lon[destination],
        registry.lat[destination],
    )
    distance = np.where(origin == destination, 0.0, distance)
    return CallPairs(
        origin=origin,
        destination=destination,
        minute=minute,
        day=day,
        distance=distance,
    )


def _window_matrix(window_min: int, step_min: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < window_min <= MINUTES_PER_DAY:
        raise ValidationError(f"window must be in (0, 1440] minutes, got {window_min}")
    if step_min <= 0:
        raise ValidationError(f"step must be positive, got {step_min}")
    starts = np.arange(0, MINUTES_PER_DAY, step_min)
    minutes = np.arange(MINUTES_PER_DAY)
    member = (minutes[None, :] - starts[:, None]) % MINUTES_PER_DAY < window_min
    return starts, member.astype(np.int64)


def _per_minute(pairs: CallPairs, mask: np.ndarray, days: Optional[np.ndarray]):
    """Per-minute counts, shape (1440,) or (n_days, 1440)."""
    if days is None:
        return np.bincount(pairs.minute[mask], minlength=MINUTES_PER_DAY)
    row = np.searchsorted(days, pairs.day[mask])
    flat = row * MINUTES_PER_DAY + pairs.minute[mask]
    counts = np.bincount(flat, minlength=len(days) * MINUTES_PER_DAY)
    return counts.reshape(len(days), MINUTES_PER_DAY)


def _per_minute_sum(pairs: CallPairs, mask: np.ndarray, days: Optional[np.ndarray]):
    if days is None:
        return np.bincount(
            pairs.minute[mask], weights=pairs.distance[mask], minlength=MINUTES_PER_DAY
        )
    row = np.searchsorted(days, pairs.day[mask])
    flat = row * MINUTES_PER_DAY + pairs.minute[mask]
    sums = np.bincount(
        flat, weights=pairs.distance[mask], minlength=len(days) * MINUTES_PER_DAY
    )
    return sums.reshape(len(days), MINUTES_PER_DAY)


def _ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """Elementwise ratio with NaN where the denominator is zero."""
    out = np.full(numerator.shape, np.nan)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def _profile(
    pairs: CallPairs,
    numerator_mask: np.ndarray,
    denominator_mask: np.ndarray,
    kind: StatisticKind,
    window_min: int,
    step_min: int,
    pooling: DayPooling,
    bin_km: Optional[tuple[float, float]] = None,
) -> TemporalProfile:
    starts, member = _window_matrix(window_min, step_min)
    days = np.unique(pairs.day) if pooling == DayPooling.DAILY_MEAN else None

    if kind == StatisticKind.DISPLACEMENT_PROBABILITY:
        num = _per_minute(pairs, numerator_mask, days) @ member.T
    else:
        num = _per_minute_sum(pairs, numerator_mask, days) @ member.T
    den = _per_minute(pairs, denominator_mask, days) @ member.T
    stat = _ratio(num, den)

    if days is not None:
        defined = ~np.isnan(stat)
        n_defined = defined.sum(axis=0)
        total = np.where(defined, stat, 0.0).sum(axis=0)
        stat = _ratio(total, n_defined)

    values = tuple(
        (int(s), None if np.isnan(v) else float(v)) for s, v in zip(starts, stat)
    )
    return TemporalProfile(
        window_minutes=window_min,
        step_minutes=step_min,
        values=values,
        statistic_kind=kind,
        bin_km=bin_km,
        pooling=pooling,
    )


def _check_span(pairs: CallPairs) -> None:
    if len(pairs) and pairs.day.max() == pairs.day.min():
        log.warning("profile_span_below_one_day", days=1)


def displacement_probability_profile(
    trajs: Iterable[Trajectory],
    registry: AntennaRegistry,
    window_min: int = 40,
    step_min: int = 10,
    weekdays_only: bool = False,
    *,
    utc_offset_hours: float = 0.0,
    pooling: DayPooling = DayPooling.POOLED,
    antennas: Optional[Iterable[str]] = None,
) -> TemporalProfile:
    """Share of consecutive-call pairs starting in each window that moved antenna."""
    pairs = call_pairs(
        trajs,
        registry,
        weekdays_only=weekdays_only,
        utc_offset_hours=utc_offset_hours,
        antennas=antennas,
    )
    _check_span(pairs)
    everything = np.ones(len(pairs), dtype=bool)
    return _profile(
        pairs,
        pairs.displaced,
        everything,
        StatisticKind.DISPLACEMENT_PROBABILITY,
        window_min,
        step_min,
        pooling,
    )


def mean_distance_profile(
    trajs: Iterable[Trajectory],
    registry: AntennaRegistry,
    window_min: int = 40,
    step_min: int = 10,
    weekdays_only: bool = False,
    *,
    utc_offset_hours: float = 0.0,
    pooling: DayPooling = DayPooling.POOLED,
    antennas: Optional[Iterable[str]] = None,
) -> TemporalProfile:
    """Mean displacement distance over displaced pairs starting in each window."""
    pairs = call_pairs(
        trajs,
        registry,
        weekdays_only=weekdays_only,
        utc_offset_hours=utc_offset_hours,
        antennas=antennas,
    )
    _check_span(pairs)
    return _profile(
        pairs,
        pairs.displaced,
        pairs.displaced,
        StatisticKind.MEAN_DISTANCE,
        window_min,
        step_min,
        pooling,
    )


def validate_bins(bins_km: Sequence[tuple[float, float]]) -> None:
    """Bins must be non-empty, ascending and pairwise disjoint."""
    if not bins_km:
        raise ValidationError("at least one distance bin is required")
    for lo, hi in bins_km:
        if not lo < hi:
            raise ValidationError(f"empty distance bin [{lo}, {hi})")
    for (lo1, hi1), (lo2, hi2) in zip(bins_km, bins_km[1:]):
        if lo2 < hi1:
            raise ValidationError(
                f"distance bins [{lo1}, {hi1}) and [{lo2}, {hi2}) overlap "
                "or are not ascending"
            )


def distance_binned_profiles(
    trajs: Iterable[Trajectory],
    registry: AntennaRegistry,
    bins_km: Sequence[tuple[float, float]] = DEFAULT_BINS_KM,
    window_min: int = 40,
    step_min: int = 10,
    weekdays_only: bool = False,
    *,
    utc_offset_hours: float = 0.0,
    pooling: DayPooling = DayPooling.POOLED,
    antennas: Optional[Iterable[str]] = None,
) -> list[TemporalProfile]:
    """Displacement probability per half-open distance bin, sharing one denominator."""
    bins_km = [(float(lo), float(hi)) for lo, hi in bins_km]
    validate_bins(bins_km)
    pairs = call_pairs(
        trajs,
        registry,
        weekdays_only=weekdays_only,
        utc_offset_hours=utc_offset_hours,
        antennas=antennas,
    )
    _check_span(pairs)
    everything = np.ones(len(pairs), dtype=bool)
    profiles = []
    for lo, hi in bins_km:
        in_bin = pairs.displaced & (pairs.distance >= lo) & (pairs.distance < hi)
        profiles.append(
            _profile(
                pairs,
                in_bin,
                everything,
                StatisticKind.DISPLACEMENT_PROBABILITY,
                window_min,
                step_min,
                pooling,
                bin_km=(lo, hi),
            )
        )
    return profiles
