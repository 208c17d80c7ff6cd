"""Antipodal icosahedral geodesic grid.

The sphere is discretised by subdividing each icosahedron face into 4
triangles per level, projecting the new vertices onto the unit sphere,
giving 2N = 2 + 10*4**depth points. The icosahedron is centrally
symmetric and subdivision respects that symmetry, so the point set is
closed under v -> -v and splits into N antipodal pairs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, GrasshopperError

MAX_DEPTH = 8  # memory guard: depth 8 is 655362 points already

_PAIR_TOL = 1e-9  # max |v + antipode(v)| accepted when matching pairs
_SPLIT_EPS = 1e-12  # |z| at or below this counts as "on the equator"


def num_points(depth: int) -> int:
    """Total point count 2N for a given triangularisation depth."""
    return 2 + 10 * 4**depth


def resolution_h(n_pairs: int) -> float:
    """Kernel width parameter h = sqrt(2*pi/N) for N antipodal pairs."""
    return math.sqrt(2.0 * math.pi / n_pairs)


@dataclass(frozen=True)
class Resolution:
    """Grid resolution measure, tied to the number of pairs."""

    h: float

    @classmethod
    def from_pairs(cls, n_pairs: int) -> "Resolution":
        return cls(h=resolution_h(n_pairs))


@dataclass
class SphereGrid:
    """Immutable antipodal point set with its pairing and hemisphere split.

    points[antipode[i]] == -points[i] (bitwise, by construction), and
    upper/lower partition the indices so that lower[p] = antipode[upper[p]].
    faces is the triangulation used to build the grid; it is None for
    grids loaded from a grid file, which only persists points and pairing.
    """

    depth: int
    points: np.ndarray  # (2N, 3) float64, unit vectors
    antipode: np.ndarray  # (2N,) int32
    upper: np.ndarray  # (N,) int32
    lower: np.ndarray  # (N,) int32
    faces: np.ndarray | None = None  # (F, 3) int32 or None
    point_pair: np.ndarray = field(init=False)  # (2N,) pair id of each point
    in_upper: np.ndarray = field(init=False)  # (2N,) bool

    def __post_init__(self):
        n2 = len(self.points)
        pair = np.empty(n2, dtype=np.int32)
        pair[self.upper] = np.arange(len(self.upper), dtype=np.int32)
        pair[self.lower] = np.arange(len(self.lower), dtype=np.int32)
        self.point_pair = pair
        mask = np.zeros(n2, dtype=bool)
        mask[self.upper] = True
        self.in_upper = mask

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_pairs(self) -> int:
        return len(self.upper)

    @property
    def h(self) -> float:
        return resolution_h(self.n_pairs)


def _icosahedron() -> tuple[np.ndarray, np.ndarray]:
    """Vertices (12, 3) and faces (20, 3) of the golden-ratio icosahedron."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int32,
    )
    return verts, faces


def _subdivide(verts: list, faces: np.ndarray) -> np.ndarray:
    """Split each triangle into 4, memoising edge midpoints by index pair.

    Midpoints are projected onto the sphere immediately; deferring the
    projection to the end bunches points around the original icosahedron
    vertices and visibly worsens the hemisphere-law deviation.
    """
    midpoint_of: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        idx = midpoint_of.get(key)
        if idx is None:
            idx = len(verts)
            m = (np.asarray(verts[i]) + np.asarray(verts[j])) / 2.0
            verts.append(m / np.linalg.norm(m))
            midpoint_of[key] = idx
        return idx

    out = np.empty((4 * len(faces), 3), dtype=np.int32)
    for f, (a, b, c) in enumerate(faces):
        ab = midpoint(a, b)
        bc = midpoint(b, c)
        ca = midpoint(c, a)
        out[4 * f : 4 * f + 4] = [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return out


def _match_antipodes(points: np.ndarray) -> np.ndarray:
    """Pair every point with its geometric antipode, or fail loudly."""
    tree = cKDTree(points)
    dist, idx = tree.query(-points, k=1)
    antipode = idx.astype(np.int32)
    if dist.max() > _PAIR_TOL:
        raise GrasshopperError(
            f"antipode matching failed: worst residual {dist.max():.3e}"
        )
    n = len(points)
    if np.any(antipode == np.arange(n)) or np.any(antipode[antipode] != np.arange(n)):
        raise GrasshopperError("antipode map is not a fixed-point-free involution")
    return antipode


def _split_hemispheres(points: np.ndarray, antipode: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    on_equator = np.abs(z) <= _SPLIT_EPS
    # equator ties: the member whose (x, y) is lexicographically greater wins
    lex_greater = (x > 0) | ((x == 0) & (y > 0))
    take = (z > _SPLIT_EPS) | (on_equator & lex_greater)
    upper = np.nonzero(take)[0].astype(np.int32)
    lower = antipode[upper]
    if len(upper) * 2 != len(points) or np.any(take[lower]):
        raise GrasshopperError("hemisphere split does not pick one point per pair")
    return upper, lower


def build_grid(depth: int) -> SphereGrid:
    """Build the antipodal geodesic grid at the given triangularisation depth.

    Deterministic: the same depth always yields bit-identical arrays.
    """
    if not isinstance(depth, (int, np.integer)) or isinstance(depth, bool):
        raise ConfigError(f"depth must be an integer, got {depth!r}")
    if depth < 0 or depth > MAX_DEPTH:
        raise ConfigError(f"depth must be in [0, {MAX_DEPTH}], got {depth}")
    base_verts, faces = _icosahedron()
    base_verts /= np.linalg.norm(base_verts, axis=1, keepdims=True)
    verts = list(base_verts)
    for _ in range(depth):
        faces = _subdivide(verts, faces)
    points = np.asarray(verts, dtype=np.float64)
    antipode = _match_antipodes(points)
    upper, lower = _split_hemispheres(points, antipode)
    return SphereGrid(depth=depth, points=points, antipode=antipode,
                      upper=upper, lower=lower, faces=faces)


def grid_from_arrays(depth: int, points: np.ndarray, antipode: np.ndarray) -> SphereGrid:
    """Rebuild a SphereGrid (without faces) from persisted arrays."""
    antipode = antipode.astype(np.int32)
    n = len(points)
    if np.any(antipode[antipode] != np.arange(n)) or np.any(antipode == np.arange(n)):
        raise GrasshopperError("antipode map is not a fixed-point-free involution")
    residual = np.abs(points[antipode] + points).max()
    if residual > _PAIR_TOL:
        raise GrasshopperError(f"antipode residual {residual:.3e} exceeds {_PAIR_TOL}")
    upper, lower = _split_hemispheres(points, antipode)
    return SphereGrid(depth=depth, points=points, antipode=antipode,
                      upper=upper, lower=lower, faces=None)


def hemisphere_split(grid: SphereGrid) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic one-per-pair split: z above/below 0, ties by (x, y)."""
    return _split_hemispheres(grid.points, grid.antipode)


def central_angles(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Central angle(s) between unit vectors, stable near 0 and pi.

    atan2 of the cross-product norm against the dot product avoids the
    arccos cancellation at both ends of [0, pi].
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    cx = p[..., 1] * q[..., 2] - p[..., 2] * q[..., 1]
    cy = p[..., 2] * q[..., 0] - p[..., 0] * q[..., 2]
    cz = p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
    cross = np.sqrt(cx * cx + cy * cy + cz * cz)
    dot = p[..., 0] * q[..., 0] + p[..., 1] * q[..., 1] + p[..., 2] * q[..., 2]
    return np.arctan2(cross, dot)


def central_angle(grid: SphereGrid, i: int, j: int) -> float:
    """Central angle between grid points i and j, in [0, pi]."""
    return float(central_angles(grid.points[i], grid.points[j]))


def triangulation_degrees(grid: SphereGrid) -> np.ndarray:
    """Vertex degrees of the triangulation (12 fives, the rest sixes)."""
    if grid.faces is None:
        raise GrasshopperError("grid has no stored triangulation (loaded from file?)")
    edges = np.vstack([grid.faces[:, [0, 1]], grid.faces[:, [1, 2]], grid.faces[:, [2, 0]]])
    edges.sort(axis=1)
    edges = np.unique(edges, axis=0)
    return np.bincount(edges.ravel(), minlength=grid.n_points)
