"""Antipodal colourings over point pairs.

A colouring assigns one value per antipodal pair, indexed by position in
the grid's upper half. Expanding to the full point set gives s_tilde with
s_tilde[upper[p]] = s_p and s_tilde[lower[p]] = 1 - s_p, so exactly one
point of every pair is coloured in binary mode. Fractional values in
[0, 1] are supported only as input to the binarisation pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, ShapeError
from .grid import SphereGrid
from .kernel import KernelIndex, check_compatible

# Seeded PCG64 is the package-wide generator: same seed, same colouring,
# on any platform.
def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass
class Colouring:
    """Per-pair colour values; {0,1} in binary mode, [0,1] in fractional."""

    values: np.ndarray  # (N,) float64

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ShapeError("colouring values must be a flat array")
        if np.any((self.values < 0.0) | (self.values > 1.0)):
            raise ShapeError("colouring values must lie in [0, 1]")

    @property
    def n_pairs(self) -> int:
        return len(self.values)

    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))

    def expand(self, grid: SphereGrid) -> np.ndarray:
        """Full-length s_tilde over all 2N points."""
        if grid.n_pairs != self.n_pairs:
            raise ShapeError(
                f"colouring has {self.n_pairs} pairs, grid has {grid.n_pairs}"
            )
        s = np.empty(grid.n_points, dtype=np.float64)
        s[grid.upper] = self.values
        s[grid.lower] = 1.0 - self.values
        return s

    def copy(self) -> "Colouring":
        return Colouring(self.values.copy())


def init_hemisphere(grid: SphereGrid) -> Colouring:
    """Colour the entire upper half: s = 1 for every pair."""
    return Colouring(np.ones(grid.n_pairs))


def init_random(grid: SphereGrid, seed: int) -> Colouring:
    """I.i.d. fair coin per pair, reproducible from the seed."""
    values = _rng(seed).integers(0, 2, size=grid.n_pairs).astype(np.float64)
    return Colouring(values)


def init_random_fractional(grid: SphereGrid, seed: int) -> Colouring:
    """Uniform [0, 1) value per pair; input material for binarize."""
    return Colouring(_rng(seed).random(grid.n_pairs))


def init_from_colouring(grid: SphereGrid, prior: Colouring) -> Colouring:
    """Start from an existing colouring (e.g. solved at a nearby angle)."""
    if prior.n_pairs != grid.n_pairs:
        raise ShapeError(
            f"prior colouring has {prior.n_pairs} pairs, grid has {grid.n_pairs}"
        )
    return prior.copy()


def binarize(grid: SphereGrid, index: KernelIndex, c: Colouring) -> Colouring:
    """Resolve every fractional pair to the better of its two completions.

    Requires theta <= pi - 2h so that a point and its antipode are
    uncorrelated; the objective is then convex along each pair's value, a
    full mass shift to the better endpoint never lowers it, and one
    ascending pass over the pairs suffices. Ties go to the upper member.
    """
    from . import objective

    check_compatible(grid, index)
    if index.theta > math.pi - 2.0 * index.h:
        raise PreconditionError(
            f"binarize needs theta <= pi - 2h "
            f"(theta={index.theta:.6g}, 2h={2 * index.h:.6g})"
        )
    if c.n_pairs != grid.n_pairs:
        raise ShapeError(
            f"colouring has {c.n_pairs} pairs, grid has {grid.n_pairs}"
        )
    out = c.copy()
    if out.is_binary():
        return out
    state = objective.make_state(grid, index, out)
    for p in np.nonzero((out.values > 0.0) & (out.values < 1.0))[0]:
        gain_up = objective.pair_shift_delta(state, index, grid, int(p), 1.0)
        gain_down = objective.pair_shift_delta(state, index, grid, int(p), 0.0)
        target = 1.0 if gain_up >= gain_down else 0.0
        objective.apply_pair_shift(state, index, grid, out, int(p), target)
    return out
