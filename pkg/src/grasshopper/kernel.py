"""Smoothed-delta correlation kernel and per-angle neighbor index.

For a fixed jumping angle theta, every point gets the list of points whose
central angle from it falls within 2h of theta, weighted by the 4-point
cosine kernel. The index is symmetric (w_ij == w_ji) and mirrors under the
antipodal map, which is what makes the theta <-> pi - theta antisymmetry
exact in this discretisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, GrasshopperError, ShapeError
from .grid import SphereGrid, central_angles

_BLOCK_ROWS = 512  # pairwise-scan block size; bounds the dot-product buffer
_PREFILTER_PAD = 1e-5  # widening of the dot-product window, in cos units;
# must dominate the float32 rounding of the prefilter dot products (~4e-7)


def kernel_phi(u):
    """4-point cosine kernel: 0.25*(1 + cos(pi*u/2)) on |u| <= 2, else 0."""
    arr = np.asarray(u, dtype=np.float64)
    if np.any(np.isnan(arr)):
        raise DomainError("kernel argument is NaN")
    inside = np.abs(arr) <= 2.0
    out = np.where(inside, 0.25 * (1.0 + np.cos(0.5 * np.pi * np.abs(arr))), 0.0)
    return float(out) if np.isscalar(u) or arr.ndim == 0 else out


@dataclass
class KernelIndex:
    """Banded neighbor lists for one theta, in CSR layout.

    indptr/indices/weights hold, per point i, the pairs (j, w_ij) with
    |central_angle(i, j) - theta| < 2h and w_ij > 0. denominator[i] is the
    row sum of weights. w_self / w_anti are the (constant) weights a point
    gives itself and its antipode; they are 0 unless theta < 2h resp.
    theta > pi - 2h.
    """

    theta: float
    h: float
    depth: int
    n_points: int
    indptr: np.ndarray  # (2N+1,) int64
    indices: np.ndarray  # (nnz,) int32
    weights: np.ndarray  # (nnz,) float64
    denominator: np.ndarray  # (2N,) float64
    w_self: float
    w_anti: float
    _matrix: sp.csr_matrix | None = field(default=None, repr=False)
    _quotients: np.ndarray | None = field(default=None, repr=False)
    _quotient_matrix: sp.csr_matrix | None = field(default=None, repr=False)

    @property
    def matrix(self) -> sp.csr_matrix:
        """The weights as a scipy CSR matrix (shared buffers, no copy)."""
        if self._matrix is None:
            self._matrix = sp.csr_matrix(
                (self.weights, self.indices, self.indptr),
                shape=(self.n_points, self.n_points),
            )
        return self._matrix

    @property
    def quotients(self) -> np.ndarray:
        """Per-entry w_ij / D_j, the weight as seen from the neighbor's row."""
        if self._quotients is None:
            self._quotients = self.weights / self.denominator[self.indices]
        return self._quotients

    @property
    def quotient_matrix(self) -> sp.csr_matrix:
        """CSR view of the quotients, for whole-grid sweeps."""
        if self._quotient_matrix is None:
            self._quotient_matrix = sp.csr_matrix(
                (self.quotients, self.indices, self.indptr),
                shape=(self.n_points, self.n_points),
            )
        return self._quotient_matrix

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices and weights of point i."""
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.weights[lo:hi]

    def row_quotients(self, i: int) -> np.ndarray:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.quotients[lo:hi]


def build_index(grid: SphereGrid, theta: float) -> KernelIndex:
    """Scan all point pairs and collect the correlated band at angle theta.

    The scan is a blocked O((2N)^2) pass: a cheap dot-product window first,
    then the exact atan2 central angle and the strict band predicate
    |angle - theta| < 2h (with w > 0) on the surviving candidates.
    """
    theta = float(theta)
    if math.isnan(theta) or theta < 0.0 or theta > math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    pts = grid.points
    n2 = grid.n_points
    h = grid.h

    # dot-product window containing the whole band, padded for float slop;
    # the scan prefilters in float32 and the exact float64 atan2 predicate
    # decides membership, so the window only has to be a superset
    lo_ang = max(theta - 2.0 * h, 0.0)
    hi_ang = min(theta + 2.0 * h, math.pi)
    # the window may stick out past [-1, 1]: rounded dots of a point with
    # itself/its antipode land slightly outside and must stay in the band
    dot_hi = np.float32(math.cos(lo_ang) + _PREFILTER_PAD)
    dot_lo = np.float32(math.cos(hi_ang) - _PREFILTER_PAD)
    pts32 = pts.astype(np.float32)

    counts = np.zeros(n2, dtype=np.int64)
    col_chunks: list[np.ndarray] = []
    w_chunks: list[np.ndarray] = []
    for start in range(0, n2, _BLOCK_ROWS):
        stop = min(start + _BLOCK_ROWS, n2)
        block = pts32[start:stop]
        dots = block @ pts32.T
        rows, cols = np.nonzero((dots >= dot_lo) & (dots <= dot_hi))
        if len(rows) == 0:
            continue
        ang = central_angles(pts[rows + start], pts[cols])
        u = np.abs(ang - theta) / h
        w = np.where(u < 2.0, 0.25 * (1.0 + np.cos(0.5 * np.pi * u)), 0.0)
        keep = w > 0.0
        rows, cols, w = rows[keep], cols[keep], w[keep]
        counts[start:stop] = np.bincount(rows, minlength=stop - start)
        col_chunks.append(cols.astype(np.int32))
        w_chunks.append(w)

    indptr = np.zeros(n2 + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    if indptr[-1] == 0 or counts.min() == 0:
        raise GrasshopperError(
            f"empty correlation band for theta={theta:.6g} at depth {grid.depth}"
        )
    indices = np.concatenate(col_chunks)
    weights = np.concatenate(w_chunks)

    matrix = sp.csr_matrix((weights, indices, indptr), shape=(n2, n2))
    denominator = matrix @ np.ones(n2)

    w_self = kernel_phi((0.0 - theta) / h)
    w_anti = kernel_phi((math.pi - theta) / h)
    return KernelIndex(
        theta=theta, h=h, depth=grid.depth, n_points=n2,
        indptr=indptr, indices=indices, weights=weights,
        denominator=denominator, w_self=w_self, w_anti=w_anti,
        _matrix=matrix,
    )


def check_compatible(grid: SphereGrid, index: KernelIndex) -> None:
    """Raise if the index was built for a different grid size/depth."""
    if index.n_points != grid.n_points or index.depth != grid.depth:
        raise ShapeError(
            f"index built for depth {index.depth} ({index.n_points} points), "
            f"grid has depth {grid.depth} ({grid.n_points} points)"
        )
