"""Parsing and geometry helpers for the solver's CSV exports.

The map dataset comes from `grasshopper verify` (one row per grid point:
lon_deg, lat_deg, coloured, p_i); curve data comes from the results CSV of
`grasshopper solve`/`sweep`. This package only visualizes those columns,
it never recomputes probabilities.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class PlotDataError(Exception):
    """The input CSV is missing, empty, truncated or out of range."""


MAP_COLUMNS = ["lon_deg", "lat_deg", "coloured", "p_i"]
CURVE_COLUMNS = ["theta", "p", "p_hem", "p_minus_hem"]


@dataclass
class MapDataset:
    lon: np.ndarray  # degrees in [-180, 180)
    lat: np.ndarray  # degrees in [-90, 90]
    coloured: np.ndarray  # {0, 1}
    p_i: np.ndarray  # [0, 1]

    def __len__(self):
        return len(self.lon)


def _read_rows(path: str, required: list[str]) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise PlotDataError(f"{path}: empty file")
            missing = [c for c in required if c not in reader.fieldnames]
            if missing:
                raise PlotDataError(f"{path}: missing columns {missing}")
            rows = list(reader)
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise PlotDataError(f"{path}: no data rows")
    return rows


def _column(rows: list[dict], name: str, path: str) -> np.ndarray:
    out = np.empty(len(rows))
    for k, row in enumerate(rows):
        raw = row.get(name)
        if raw is None or raw == "":
            raise PlotDataError(f"{path}: row {k + 2} lacks a {name} value")
        try:
            out[k] = float(raw)
        except ValueError as exc:
            raise PlotDataError(f"{path}: row {k + 2}: {exc}") from exc
    return out


def read_map_csv(path: str) -> MapDataset:
    rows = _read_rows(path, MAP_COLUMNS)
    lon = _column(rows, "lon_deg", path)
    lat = _column(rows, "lat_deg", path)
    coloured = _column(rows, "coloured", path)
    p_i = _column(rows, "p_i", path)
    if lon.min() < -180.0 or lon.max() >= 180.0:
        raise PlotDataError(f"{path}: longitudes outside [-180, 180)")
    if lat.min() < -90.0 or lat.max() > 90.0:
        raise PlotDataError(f"{path}: latitudes outside [-90, 90]")
    if not np.all((coloured == 0.0) | (coloured == 1.0)):
        raise PlotDataError(f"{path}: coloured flags must be 0 or 1")
    if p_i.min() < 0.0 or p_i.max() > 1.0:
        raise PlotDataError(f"{path}: p_i outside [0, 1]")
    return MapDataset(lon=lon, lat=lat, coloured=coloured.astype(int), p_i=p_i)


def read_results_csv(path: str) -> dict[str, np.ndarray]:
    rows = _read_rows(path, CURVE_COLUMNS)
    return {name: _column(rows, name, path) for name in CURVE_COLUMNS}


def to_unit_vectors(lon_deg: np.ndarray, lat_deg: np.ndarray) -> np.ndarray:
    lon = np.radians(lon_deg)
    lat = np.radians(lat_deg)
    return np.column_stack([
        np.cos(lat) * np.cos(lon),
        np.cos(lat) * np.sin(lon),
        np.sin(lat),
    ])


def to_lon_lat(vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    lon = np.degrees(np.arctan2(vectors[:, 1], vectors[:, 0]))
    lon = np.where(lon >= 180.0, lon - 360.0, lon)
    lat = np.degrees(np.arcsin(np.clip(vectors[:, 2], -1.0, 1.0)))
    return lon, lat


def rotate_coloured_to_north(dataset: MapDataset) -> MapDataset:
    """Rigidly rotate so the coloured points' centroid sits at the pole."""
    if not dataset.coloured.any():
        return dataset
    vectors = to_unit_vectors(dataset.lon, dataset.lat)
    centroid = vectors[dataset.coloured == 1].mean(axis=0)
    norm = np.linalg.norm(centroid)
    if norm < 1e-12:
        return dataset  # perfectly balanced colouring: nothing to align
    centroid = centroid / norm
    pole = np.array([0.0, 0.0, 1.0])
    axis = np.cross(centroid, pole)
    sin_a = np.linalg.norm(axis)
    cos_a = float(centroid @ pole)
    if sin_a < 1e-12:
        if cos_a > 0:
            return dataset
        rot = np.diag([1.0, -1.0, -1.0])  # centroid at the south pole
    else:
        k = axis / sin_a
        kx = np.array([
            [0.0, -k[2], k[1]],
            [k[2], 0.0, -k[0]],
            [-k[1], k[0], 0.0],
        ])
        rot = np.eye(3) + sin_a * kx + (1.0 - cos_a) * (kx @ kx)
    lon, lat = to_lon_lat(vectors @ rot.T)
    return MapDataset(lon=lon, lat=lat, coloured=dataset.coloured, p_i=dataset.p_i)


def count_boundary_lobes(dataset: MapDataset, bins: int = 72,
                         min_amplitude_deg: float = 1.0) -> int:
    """Lobe count of the coloured region's edge, for cog-style colourings.

    Rotates the coloured mass to the pole and takes the southernmost
    coloured latitude per longitude bin; the lobe count is the dominant
    angular harmonic of that edge profile. A boundary whose strongest
    harmonic is weak (below min_amplitude_deg, or not standing out of the
    sampling noise floor) counts as lobe-free.
    """
    rotated = rotate_coloured_to_north(dataset)
    mask = rotated.coloured == 1
    if not mask.any():
        return 0
    bin_idx = np.clip(((rotated.lon + 180.0) / 360.0 * bins).astype(int), 0, bins - 1)
    profile = np.full(bins, np.nan)
    for b in range(bins):
        sel = mask & (bin_idx == b)
        if sel.any():
            profile[b] = rotated.lat[sel].min()
    good = ~np.isnan(profile)
    if good.sum() < bins // 2:
        return 0
    centers = np.arange(bins, dtype=float)
    profile = np.interp(centers, centers[good], profile[good], period=bins)
    spectrum = np.abs(np.fft.rfft(profile - profile.mean()))
    if len(spectrum) < 3:
        return 0
    power = spectrum[1:] ** 2
    k = int(np.argmax(power)) + 1
    amplitude = 2.0 * spectrum[k] / bins
    rest = np.delete(power, k - 1)
    noise_floor = rest.mean() if len(rest) else 0.0
    if amplitude < min_amplitude_deg or power[k - 1] < 4.0 * noise_floor:
        return 0
    return k
