"""File formats: GRIDv1 grids, COLv1 colourings, results CSV, index cache.

Floats are written with 17 significant digits, which round-trips float64
exactly, so files parse back to bit-identical in-memory values. All writes
go through a temp file in the target directory followed by an atomic
rename.
"""
from __future__ import annotations

import csv
import math
import os
import tempfile
from typing import Iterable, Optional

import numpy as np

from .colouring import Colouring
from .errors import FileFormatError
from .grid import SphereGrid, grid_from_arrays, num_points
from .kernel import KernelIndex

F17 = ".17g"

RESULT_COLUMNS = [
    "theta", "c", "algorithm", "seed", "init", "p", "p_hem",
    "p_minus_hem", "p_over_hem", "bell_c", "steps", "accepted", "wall_time",
]

POINT_COLUMNS = ["lon_deg", "lat_deg", "coloured", "p_i"]


def _atomic_write(path: str, write_body) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write_body(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_header(line: str, tag: str, keys: list[str]) -> dict[str, str]:
    parts = line.split()
    if not parts or parts[0] != tag:
        raise FileFormatError(f"expected {tag} header, got {line[:60]!r}")
    fields = {}
    for tok in parts[1:]:
        if "=" not in tok:
            raise FileFormatError(f"bad header token {tok!r} in {tag} file")
        key, val = tok.split("=", 1)
        fields[key] = val
    missing = [k for k in keys if k not in fields]
    if missing:
        raise FileFormatError(f"{tag} header missing {missing}")
    return fields


def write_grid(grid: SphereGrid, path: str) -> None:
    def body(fh):
        fh.write(f"GRIDv1 depth={grid.depth} n2={grid.n_points}\n")
        for (x, y, z), a in zip(grid.points, grid.antipode):
            fh.write(f"{x:{F17}} {y:{F17}} {z:{F17}} {a}\n")

    _atomic_write(path, body)


def read_grid(path: str) -> SphereGrid:
    try:
        with open(path) as fh:
            header = _parse_header(fh.readline().rstrip("\n"), "GRIDv1", ["depth", "n2"])
            try:
                depth = int(header["depth"])
                n2 = int(header["n2"])
            except ValueError as exc:
                raise FileFormatError(f"bad GRIDv1 header numbers: {exc}") from exc
            if n2 != num_points(depth):
                raise FileFormatError(
                    f"GRIDv1 header inconsistent: depth {depth} implies "
                    f"{num_points(depth)} points, header says {n2}"
                )
            points = np.empty((n2, 3))
            antipode = np.empty(n2, dtype=np.int32)
            for i in range(n2):
                line = fh.readline()
                if not line:
                    raise FileFormatError(f"GRIDv1 truncated at point {i} of {n2}")
                toks = line.split()
                if len(toks) != 4:
                    raise FileFormatError(f"GRIDv1 line {i + 2}: expected 4 fields")
                try:
                    points[i] = [float(toks[0]), float(toks[1]), float(toks[2])]
                    antipode[i] = int(toks[3])
                except ValueError as exc:
                    raise FileFormatError(f"GRIDv1 line {i + 2}: {exc}") from exc
            if fh.readline().strip():
                raise FileFormatError("GRIDv1 has trailing content")
    except OSError as exc:
        raise FileFormatError(f"cannot read grid file {path}: {exc}") from exc
    if np.any(antipode < 0) or np.any(antipode >= n2):
        raise FileFormatError("GRIDv1 antipode index out of range")
    return grid_from_arrays(depth, points, antipode)


def write_colouring(c: Colouring, depth: int, theta: float, path: str) -> None:
    if not c.is_binary():
        raise FileFormatError("only binary colourings are persisted")
    bits = "".join("1" if v == 1.0 else "0" for v in c.values)

    def body(fh):
        fh.write(f"COLv1 depth={depth} n={c.n_pairs} theta={theta:{F17}}\n")
        fh.write(bits + "\n")

    _atomic_write(path, body)


def read_colouring(path: str) -> tuple[Colouring, int, float]:
    try:
        with open(path) as fh:
            header = _parse_header(
                fh.readline().rstrip("\n"), "COLv1", ["depth", "n", "theta"]
            )
            try:
                depth = int(header["depth"])
                n = int(header["n"])
                theta = float(header["theta"])
            except ValueError as exc:
                raise FileFormatError(f"bad COLv1 header numbers: {exc}") from exc
            line = fh.readline().rstrip("\n")
            if len(line) != n:
                raise FileFormatError(
                    f"COLv1 expected {n} colour characters, got {len(line)}"
                )
            if set(line) - {"0", "1"}:
                raise FileFormatError("COLv1 colours must be '0' or '1'")
            if fh.readline().strip():
                raise FileFormatError("COLv1 has trailing content")
    except OSError as exc:
        raise FileFormatError(f"cannot read colouring file {path}: {exc}") from exc
    if math.isnan(theta) or theta < 0.0 or theta > math.pi:
        raise FileFormatError(f"COLv1 theta {theta} outside [0, pi]")
    values = np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")
    return Colouring(values.astype(np.float64)), depth, theta


def result_row(theta: float, algorithm: str, seed, init: str, p: float,
               steps: int, accepted: int, wall_time: float) -> dict:
    """Derived-column bookkeeping for one results row."""
    p_hem = 1.0 - theta / math.pi
    return {
        "theta": format(theta, F17),
        "c": format(2.0 * math.pi / theta, F17) if theta > 0 else "inf",
        "algorithm": algorithm,
        "seed": "" if seed is None else str(seed),
        "init": init,
        "p": format(p, F17),
        "p_hem": format(p_hem, F17),
        "p_minus_hem": format(p - p_hem, F17),
        "p_over_hem": format(p / p_hem, F17) if p_hem != 0 else "inf",
        "bell_c": format(1.0 - 2.0 * p, F17),
        "steps": str(steps),
        "accepted": str(accepted),
        "wall_time": format(wall_time, ".3f"),
    }


def append_results(path: str, rows: Iterable[dict]) -> None:
    exists = os.path.exists(path)
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULT_COLUMNS)
        if not exists:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)


def read_results(path: str) -> list[dict]:
    if not os.path.exists(path):
        return []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != RESULT_COLUMNS:
            raise FileFormatError(f"unexpected results columns in {path}")
        return list(reader)


def completed_keys(path: str) -> set[tuple]:
    """(theta, algorithm, seed, init) of rows already present."""
    keys = set()
    for row in read_results(path):
        keys.add((float(row["theta"]), row["algorithm"], row["seed"], row["init"]))
    return keys


def write_point_report(path: str, grid: SphereGrid, s_tilde: np.ndarray,
                       p_i: np.ndarray) -> None:
    """Per-point map data: longitude/latitude, colour, success probability."""
    lon = np.degrees(np.arctan2(grid.points[:, 1], grid.points[:, 0]))
    lon = np.where(lon >= 180.0, lon - 360.0, lon)
    lat = np.degrees(np.arcsin(np.clip(grid.points[:, 2], -1.0, 1.0)))

    def body(fh):
        writer = csv.writer(fh)
        writer.writerow(POINT_COLUMNS)
        for k in range(grid.n_points):
            writer.writerow([
                format(lon[k], F17), format(lat[k], F17),
                int(s_tilde[k]), format(p_i[k], F17),
            ])

    _atomic_write(path, body)


def _cache_name(depth: int, theta: float) -> str:
    return f"index_k{depth}_t{theta.hex()}.npz"


def save_index_cache(directory: str, index: KernelIndex) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, _cache_name(index.depth, index.theta))
    tmp = path + ".tmp.npz"
    np.savez(
        tmp[:-4], theta=index.theta, h=index.h, depth=index.depth,
        n_points=index.n_points, indptr=index.indptr, indices=index.indices,
        weights=index.weights, denominator=index.denominator,
        w_self=index.w_self, w_anti=index.w_anti,
    )
    os.replace(tmp, path)
    return path


def load_index_cache(directory: str, depth: int, theta: float) -> Optional[KernelIndex]:
    path = os.path.join(directory, _cache_name(depth, theta))
    if not os.path.exists(path):
        return None
    with np.load(path) as data:
        index = KernelIndex(
            theta=float(data["theta"]), h=float(data["h"]), depth=int(data["depth"]),
            n_points=int(data["n_points"]), indptr=data["indptr"],
            indices=data["indices"], weights=data["weights"],
            denominator=data["denominator"], w_self=float(data["w_self"]),
            w_anti=float(data["w_anti"]),
        )
    if index.depth != depth or index.theta != theta:
        raise FileFormatError(f"index cache {path} does not match its key")
    return index
