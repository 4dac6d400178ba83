"""
Great-circle distances and the local planar projection.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

EARTH_RADIUS_KM = 6371.0


def haversine(a: Sequence[float], b: Sequence[float]) -> float:
    """Great-circle distance in km between two (lon, lat) points in degrees."""
    return float(haversine_array(a[0], a[1], b[0], b[1]))


def haversine_array(lon1, lat1, lon2, lat2) -> np.ndarray:
    """Vectorized haversine over broadcastable lon/lat arrays, in km."""
    lon1, lat1, lon2, lat2 = map(np.radians, (lon1, lat1, lon2, lat2))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = np.sin(dlat / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2) ** 2
    h = np.clip(h, 0.0, 1.0)
    return EARTH_RADIUS_KM * 2 * np.arctan2(np.sqrt(h), np.sqrt(1 - h))


def pairwise_haversine(lon: np.ndarray, lat: np.ndarray) -> np.ndarray:
    """Symmetric (n, n) distance matrix with an exact zero diagonal."""
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    d = haversine_array(lon[:, None], lat[:, None], lon[None, :], lat[None, :])
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


@dataclass(frozen=True)
class LocalProjection:
    """Equirectangular projection in km about (lon0, lat0)."""

    lon0: float
    lat0: float

    @property
    def kx(self) -> float:
        return EARTH_RADIUS_KM * np.pi / 180.0 * np.cos(np.radians(self.lat0))

    @property
    def ky(self) -> float:
        return EARTH_RADIUS_KM * np.pi / 180.0

    def forward(self, lon, lat) -> np.ndarray:
        lon = np.asarray(lon, dtype=float)
        lat = np.asarray(lat, dtype=float)
        return np.column_stack(
            [(lon - self.lon0) * self.kx, (lat - self.lat0) * self.ky]
        )

    def inverse(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.column_stack([x / self.kx + self.lon0, y / self.ky + self.lat0])

    def forward_coords(self, coords: np.ndarray) -> np.ndarray:
        """(n, 2) lon/lat array to km, for ``shapely.transform``."""
        return self.forward(coords[:, 0], coords[:, 1])

    def inverse_coords(self, coords: np.ndarray) -> np.ndarray:
        return self.inverse(coords[:, 0], coords[:, 1])
