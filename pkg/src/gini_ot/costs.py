"""Ground-cost constructors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvalidCoordinate, NonPositiveExponent

EARTH_RADIUS_KM = 6371.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (np.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise InvalidCoordinate(f"latitude {self.lat} outside [-90, 90]")
        if not (np.isfinite(self.lon) and -180.0 <= self.lon <= 180.0):
            raise InvalidCoordinate(f"longitude {self.lon} outside [-180, 180]")


def grid_cost(n: int, k: int, p: float = 2.0) -> np.ndarray:
    """|i - j|**p on 0-indexed integer grids of sizes ``n`` and ``k``."""
    if n < 1 or k < 1:
        raise InputError(f"grid sizes must be >= 1, got ({n}, {k})")
    if not p > 0:
        raise NonPositiveExponent(f"exponent must be > 0, got {p}")
    i = np.arange(n, dtype=float)[:, None]
    j = np.arange(k, dtype=float)[None, :]
    return np.abs(i - j) ** p


def _latlon(points) -> np.ndarray:
    pts = [pt if isinstance(pt, GeoPoint) else GeoPoint(*pt) for pt in points]
    if not pts:
        raise InputError("point list is empty")
    return np.radians(np.array([(pt.lat, pt.lon) for pt in pts], dtype=float))


def haversine_cost(src, dst, radius_km: float = EARTH_RADIUS_KM) -> np.ndarray:
    """Great-circle distances (km) between every ``src`` and ``dst`` point.

    Points are GeoPoint instances or (lat, lon) pairs in degrees.
    """
    if not radius_km > 0:
        raise InputError(f"radius must be > 0, got {radius_km}")
    a = _latlon(src)
    b = _latlon(dst)
    lat1, lon1 = a[:, 0:1], a[:, 1:2]
    lat2, lon2 = b[None, :, 0], b[None, :, 1]
    h = (
        np.sin((lat2 - lat1) / 2) ** 2
        + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    )
    return 2.0 * radius_km * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0)))


def make_rng(seed) -> np.random.Generator:
    """numpy ``Generator`` on PCG64 (stable stream for a given numpy major version)."""
    return np.random.Generator(np.random.PCG64(seed))


def random_uniform_cost(n: int, k: int, scale: float = 1.0, seed=0) -> np.ndarray:
    """i.i.d. Uniform[0, scale] entries from a PCG64 stream seeded with ``seed``."""
    if n < 1 or k < 1:
        raise InputError(f"sizes must be >= 1, got ({n}, {k})")
    if scale < 0:
        raise InputError(f"scale must be >= 0, got {scale}")
    return make_rng(seed).uniform(0.0, 1.0, size=(n, k)) * scale
