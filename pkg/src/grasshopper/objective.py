"""Success probability of a colouring and O(degree) flip updates.

Per point, P_i = A_i / D_i with A_i the kernel-weighted sum of coloured
neighbors and D_i the row sum over all neighbors. The colouring's total is
the mean of P_i over its coloured points. Flipping one antipodal pair only
touches the two band neighborhoods involved, so the change in the total is
computed exactly from the cached numerators without a full re-sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DomainError
from .grid import SphereGrid
from .kernel import KernelIndex, check_compatible

if TYPE_CHECKING:
    from .colouring import Colouring


@dataclass
class ObjectiveState:
    """Cached s_tilde and numerators, kept in sync with one colouring."""

    s_tilde: np.ndarray  # (2N,) float64
    numerator: np.ndarray  # (2N,) float64, A_i
    total: float  # current success probability of the colouring
    n_pairs: int


def make_state(grid: SphereGrid, index: KernelIndex, c: "Colouring") -> ObjectiveState:
    """Build the cache from scratch for the given colouring."""
    check_compatible(grid, index)
    s = c.expand(grid)
    numerator = index.matrix @ s
    total = float(np.dot(s, numerator / index.denominator)) / grid.n_pairs
    return ObjectiveState(s_tilde=s, numerator=numerator, total=total,
                          n_pairs=grid.n_pairs)


def point_probability(state: ObjectiveState, index: KernelIndex, i: int) -> float:
    """P_i for any point, coloured or not."""
    return float(state.numerator[i] / index.denominator[i])


def total_probability(grid: SphereGrid, index: KernelIndex, c: "Colouring") -> float:
    """Success probability of the colouring, recomputed from scratch."""
    return make_state(grid, index, c).total


def _shift_score_delta(state: ObjectiveState, index: KernelIndex,
                       grid: SphereGrid, p: int, new_val: float) -> float:
    """Change of N * total when pair p's value moves to new_val.

    Exact bookkeeping: the band rows of both pair members are rescanned,
    with the member-to-member and self weights handled separately so the
    formula stays valid for theta within 2h of 0 or pi.
    """
    u = grid.upper[p]
    l = grid.lower[p]
    s = state.s_tilde
    A = state.numerator
    D = index.denominator
    ws = index.w_self
    wa = index.w_anti
    su = s[u]
    sl = s[l]
    du = new_val - su

    indptr, indices, quot = index.indptr, index.indices, index.quotients
    lo, hi = indptr[u], indptr[u + 1]
    g_u = np.dot(quot[lo:hi], s[indices[lo:hi]])
    lo, hi = indptr[l], indptr[l + 1]
    g_l = np.dot(quot[lo:hi], s[indices[lo:hi]])

    # cross terms from every other point's numerator changing
    term_others = du * (
        (g_u - su * ws / D[u] - sl * wa / D[l])
        - (g_l - su * wa / D[u] - sl * ws / D[l])
    )
    # the pair's own contributions, with their updated numerators
    d_own = du * (ws - wa)
    new_sl = 1.0 - new_val
    term_pair = (new_val * (A[u] + d_own) - su * A[u]) / D[u] \
        + (new_sl * (A[l] - d_own) - sl * A[l]) / D[l]
    return term_others + term_pair


def pair_shift_delta(state: ObjectiveState, index: KernelIndex,
                     grid: SphereGrid, p: int, new_val: float) -> float:
    """Change in total if pair p's value were set to new_val. No mutation."""
    return _shift_score_delta(state, index, grid, p, new_val) / state.n_pairs


def apply_pair_shift(state: ObjectiveState, index: KernelIndex, grid: SphereGrid,
                     c: "Colouring", p: int, new_val: float) -> float:
    """Set pair p to new_val, updating the cache incrementally.

    Returns the applied change in total; state.total moves by exactly that
    amount (same code path as pair_shift_delta).
    """
    delta = pair_shift_delta(state, index, grid, p, new_val)
    _apply_shift_rows(state, index, grid, p, new_val)
    c.values[p] = new_val
    state.total += delta
    return delta


def _apply_shift_rows(state: ObjectiveState, index: KernelIndex,
                      grid: SphereGrid, p: int, new_val: float) -> None:
    """Update s_tilde and the numerators for a shift of pair p."""
    u = grid.upper[p]
    l = grid.lower[p]
    s = state.s_tilde
    A = state.numerator
    du = new_val - s[u]
    indptr, indices, weights = index.indptr, index.indices, index.weights
    lo, hi = indptr[u], indptr[u + 1]
    A[indices[lo:hi]] += du * weights[lo:hi]
    lo, hi = indptr[l], indptr[l + 1]
    A[indices[lo:hi]] -= du * weights[lo:hi]
    s[u] = new_val
    s[l] = 1.0 - new_val


def flip_delta(state: ObjectiveState, index: KernelIndex, grid: SphereGrid,
               c: "Colouring", p: int) -> float:
    """Exact change in total if binary pair p were flipped. No mutation."""
    new_val = 1.0 - state.s_tilde[grid.upper[p]]
    return pair_shift_delta(state, index, grid, p, new_val)


def apply_flip(state: ObjectiveState, index: KernelIndex, grid: SphereGrid,
               c: "Colouring", p: int) -> float:
    """Flip binary pair p in place; returns the applied change in total."""
    new_val = 1.0 - state.s_tilde[grid.upper[p]]
    return apply_pair_shift(state, index, grid, c, p, new_val)


def all_flip_deltas(state: ObjectiveState, index: KernelIndex,
                    grid: SphereGrid) -> np.ndarray:
    """flip_delta for every pair at once (one sparse pass over the band)."""
    s = state.s_tilde
    A = state.numerator
    D = index.denominator
    ws = index.w_self
    wa = index.w_anti
    g = index.quotient_matrix @ s
    up, lo_ = grid.upper, grid.lower
    su = s[up]
    sl = s[lo_]
    du = 1.0 - 2.0 * su
    Du = D[up]
    Dl = D[lo_]
    term_others = du * (
        (g[up] - su * ws / Du - sl * wa / Dl)
        - (g[lo_] - su * wa / Du - sl * ws / Dl)
    )
    d_own = du * (ws - wa)
    term_pair = (sl * (A[up] + d_own) - su * A[up]) / Du \
        + (su * (A[lo_] - d_own) - sl * A[lo_]) / Dl
    return (term_others + term_pair) / state.n_pairs


def hemisphere_reference(theta: float) -> float:
    """Success probability 1 - theta/pi of a hemisphere colouring."""
    if math.isnan(theta) or theta < 0.0 or theta > math.pi:
        raise DomainError(f"theta must lie in [0, pi], got {theta}")
    return 1.0 - theta / math.pi


def bell_correlation(p: float) -> float:
    """Correlation 1 - 2p associated with a success probability p."""
    if math.isnan(p) or p < 0.0 or p > 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return 1.0 - 2.0 * p
