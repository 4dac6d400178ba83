"""Shared fixtures: small hand-built registries, partitions and event logs."""

import pathlib

import numpy as np
import pytest

from borderflux.geo import (
    AntennaRegistry,
    EventLog,
    PartitionScheme,
    Trajectory,
    make_site,
)
from borderflux.network import MobilityNetwork

GRID_STEP_DEG = 0.1


def write_rows(path: pathlib.Path, header: str, rows: list[str]) -> pathlib.Path:
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


def grid_registry(rows: int = 3, cols: int = 3, population: float = 0.0):
    """Antennas ``a{r}{c}`` on a regular lon/lat grid near the equator."""
    sites = [
        make_site(f"a{r}{c}", c * GRID_STEP_DEG, r * GRID_STEP_DEG, population)
        for r in range(rows)
        for c in range(cols)
    ]
    return AntennaRegistry.from_sites(sites)


def trajectory(user_id: str, events: list[tuple[int, str]]) -> Trajectory:
    return Trajectory.from_events(user_id, events)


def event_log(*trajs: Trajectory) -> EventLog:
    return EventLog(
        trajectories={t.user_id: t for t in trajs},
        n_events=sum(len(t) for t in trajs),
    )


def two_block_network() -> MobilityNetwork:
    """Two dense 3-node blocks joined by one weak link."""
    W = np.zeros((6, 6))
    for block in ((0, 1, 2), (3, 4, 5)):
        for i in block:
            for j in block:
                if i != j:
                    W[i, j] = 10.0
    W[2, 3] = W[3, 2] = 1.0
    return MobilityNetwork.from_dense([f"n{k}" for k in range(6)], W)


@pytest.fixture
def registry():
    return grid_registry()


@pytest.fixture
def halves(registry):
    """Left column and the rest: a two-region scheme over the 3x3 grid."""
    return PartitionScheme(
        name="halves",
        assignment={a: ("L" if a.endswith("0") else "R") for a in registry.ids},
    )


@pytest.fixture
def block_network():
    return two_block_network()
