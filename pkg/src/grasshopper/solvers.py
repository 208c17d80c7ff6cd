"""Colouring-space search: greedy best-flip and simulated annealing."""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .colouring import Colouring
from .errors import ConfigError, ShapeError
from .grid import SphereGrid
from .kernel import KernelIndex, check_compatible
from . import objective

log = logging.getLogger(__name__)

DELTA_STOP = 1e-12  # smallest improvement greedy still takes
GREEDY_ITER_CAP_FACTOR = 10  # hard stop at this many iterations per pair
SA_CHUNK = 8192  # random numbers are drawn in blocks of this size


@dataclass(frozen=True)
class AnnealSchedule:
    """Exponential cooling: temperature t0 * alpha**step over `steps` steps."""

    t0: float
    alpha: float
    steps: int
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.t0 <= 0.0:
            raise ConfigError(f"t0 must be positive, got {self.t0}")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")


@dataclass
class RunRecord:
    """Outcome of one solver run."""

    theta: float
    algorithm: str  # "greedy" or "sa"
    seed: Optional[int]
    schedule: Optional[AnnealSchedule]
    initial_p: float
    final_p: float
    flips_accepted: int
    wall_time: float
    steps: int
    colouring: Optional[Colouring] = None  # final colouring of this run
    colouring_path: Optional[str] = None
    trace: Optional[list[float]] = None  # totals after each accepted flip


def default_schedule(grid: SphereGrid, seed: int = 0) -> AnnealSchedule:
    """Stock cooling schedule: t0 = 0.4, alpha = 0.99999, 150 N steps."""
    return AnnealSchedule(t0=0.4, alpha=0.99999, steps=150 * grid.n_pairs, seed=seed)


def slow_schedule(grid: SphereGrid, seed: int = 0) -> AnnealSchedule:
    """Slower cooling for hard angles: t0 = 0.2, alpha = 0.999995, 150 N steps."""
    return AnnealSchedule(t0=0.2, alpha=0.999995, steps=150 * grid.n_pairs, seed=seed)


def _require_binary(c: Colouring) -> None:
    if not c.is_binary():
        raise ConfigError("solvers operate on binary colourings only")


def greedy(grid: SphereGrid, index: KernelIndex, c: Colouring,
           keep_trace: bool = False) -> tuple[Colouring, RunRecord]:
    """Repeatedly flip the best-improving pair until no flip gains > 1e-12.

    Every iteration re-evaluates the exact flip delta of all pairs, so the
    flipped pair is always a currently-maximal improvement; ties break to
    the lowest pair index. The total is non-decreasing throughout.
    """
    check_compatible(grid, index)
    _require_binary(c)
    start = time.perf_counter()
    out = c.copy()
    state = objective.make_state(grid, index, out)
    initial_p = state.total
    trace = [initial_p] if keep_trace else None
    flips = 0
    cap = GREEDY_ITER_CAP_FACTOR * grid.n_pairs
    for _ in range(cap):
        deltas = objective.all_flip_deltas(state, index, grid)
        p = int(np.argmax(deltas))
        if deltas[p] <= DELTA_STOP:
            break
        objective.apply_flip(state, index, grid, out, p)
        flips += 1
        if trace is not None:
            trace.append(state.total)
    else:
        log.warning(
            "greedy hit the %d-iteration cap at theta=%.6g; returning current state",
            cap, index.theta,
        )
    record = RunRecord(
        theta=index.theta, algorithm="greedy", seed=None, schedule=None,
        initial_p=initial_p, final_p=state.total, flips_accepted=flips,
        wall_time=time.perf_counter() - start, steps=flips, trace=trace,
    )
    return out, record


@numba.njit(cache=True)
def _sa_chunk(indptr, indices, quot, weights, denom, numer, s, upper, lower,
              w_self, w_anti, n_pairs, pair_block, p_block, t_start, alpha,
              deltas_out, accept_out):
    """One block of Metropolis steps over the shared CSR band.

    Mutates the numerator cache and s in place, returns the accepted count,
    the temperature after the block and the summed accepted delta. The
    per-step delta formula mirrors objective._shift_score_delta.
    """
    temperature = t_start
    accepted = 0
    total_delta = 0.0
    for k in range(len(pair_block)):
        pair = pair_block[k]
        u = upper[pair]
        l = lower[pair]
        su = s[u]
        sl = s[l]
        du = 1.0 - 2.0 * su
        g_u = 0.0
        for t in range(indptr[u], indptr[u + 1]):
            g_u += quot[t] * s[indices[t]]
        g_l = 0.0
        for t in range(indptr[l], indptr[l + 1]):
            g_l += quot[t] * s[indices[t]]
        term_others = du * (
            (g_u - su * w_self / denom[u] - sl * w_anti / denom[l])
            - (g_l - su * w_anti / denom[u] - sl * w_self / denom[l])
        )
        d_own = du * (w_self - w_anti)
        new_val = 1.0 - su
        term_pair = (new_val * (numer[u] + d_own) - su * numer[u]) / denom[u] \
            + (su * (numer[l] - d_own) - sl * numer[l]) / denom[l]
        delta = (term_others + term_pair) / n_pairs
        if delta >= 0.0:
            take = True
        elif temperature <= 0.0:
            take = False
        else:
            take = np.exp(delta / temperature) > p_block[k]
        if take:
            for t in range(indptr[u], indptr[u + 1]):
                numer[indices[t]] += du * weights[t]
            for t in range(indptr[l], indptr[l + 1]):
                numer[indices[t]] -= du * weights[t]
            s[u] = new_val
            s[l] = su
            accepted += 1
            total_delta += delta
        deltas_out[k] = delta
        accept_out[k] = take
        temperature *= alpha
    return accepted, temperature, total_delta


def simulated_annealing(
    grid: SphereGrid,
    index: KernelIndex,
    c: Colouring,
    sched: AnnealSchedule,
    log_path: Optional[str] = None,
) -> tuple[Colouring, RunRecord]:
    """Metropolis search with exponential cooling.

    Each step draws a uniform pair and a uniform p in [0, 1), flips iff
    min(1, exp(dP/T)) > p, then cools T by alpha (accepted or not). The
    run is deterministic given the schedule seed: draws come from PCG64 in
    blocks of SA_CHUNK pair indices followed by SA_CHUNK uniforms.
    """
    check_compatible(grid, index)
    _require_binary(c)
    start = time.perf_counter()
    out = c.copy()
    state = objective.make_state(grid, index, out)
    initial_p = state.total
    n_pairs = grid.n_pairs
    rng = np.random.Generator(np.random.PCG64(sched.seed))
    temperature = sched.t0
    accepted = 0

    writer = None
    log_file = None
    if log_path is not None:
        log_file = open(log_path, "w", newline="")
        writer = csv.writer(log_file)
        writer.writerow(["step", "temperature", "pair", "delta", "accepted"])

    deltas_buf = np.empty(SA_CHUNK)
    accept_buf = np.empty(SA_CHUNK, dtype=np.bool_)
    step = 0
    remaining = sched.steps
    while remaining > 0:
        block = min(SA_CHUNK, remaining)
        pair_block = rng.integers(0, n_pairs, size=block)
        p_block = rng.random(block)
        got, end_temp, total_delta = _sa_chunk(
            index.indptr, index.indices, index.quotients, index.weights,
            index.denominator, state.numerator, state.s_tilde,
            grid.upper, grid.lower, index.w_self, index.w_anti, n_pairs,
            pair_block, p_block, temperature, sched.alpha,
            deltas_buf[:block], accept_buf[:block],
        )
        accepted += got
        state.total += total_delta
        if writer is not None:
            t_trace = temperature
            for k in range(block):
                writer.writerow([
                    step + k, format(t_trace, ".17g"), int(pair_block[k]),
                    format(deltas_buf[k], ".17g"), int(accept_buf[k]),
                ])
                t_trace *= sched.alpha
        temperature = end_temp
        step += block
        remaining -= block
    if log_file is not None:
        log_file.close()

    out.values[:] = state.s_tilde[grid.upper]
    record = RunRecord(
        theta=index.theta, algorithm="sa", seed=sched.seed, schedule=sched,
        initial_p=initial_p, final_p=state.total, flips_accepted=accepted,
        wall_time=time.perf_counter() - start, steps=sched.steps,
    )
    return out, record


def multi_start(
    grid: SphereGrid,
    index: KernelIndex,
    inits: list[Colouring],
    algo: str,
    sched: Optional[AnnealSchedule] = None,
    seeds: Optional[list[int]] = None,
    log_paths: Optional[list[Optional[str]]] = None,
) -> tuple[Colouring, RunRecord, list[RunRecord]]:
    """Run the solver once per init and keep the best final total.

    For simulated annealing each run gets its own schedule seed (given
    explicitly via `seeds`, else sched.seed + run position), so replicas
    differ even from identical inits. Ties keep the earliest run.
    """
    if not inits:
        raise ConfigError("multi_start needs at least one initial colouring")
    for c in inits:
        if c.n_pairs != grid.n_pairs:
            raise ShapeError(
                f"init has {c.n_pairs} pairs, grid has {grid.n_pairs}"
            )
    if algo not in ("greedy", "sa"):
        raise ConfigError(f"unknown algorithm {algo!r}")
    if algo == "sa":
        if sched is None:
            sched = default_schedule(grid)
        if seeds is None:
            seeds = [sched.seed + k for k in range(len(inits))]
        elif len(seeds) != len(inits):
            raise ConfigError("seeds list must match inits list")
    records: list[RunRecord] = []
    results: list[Colouring] = []
    for k, init in enumerate(inits):
        log_path = log_paths[k] if log_paths else None
        if algo == "greedy":
            col, rec = greedy(grid, index, init)
        else:
            run_sched = AnnealSchedule(sched.t0, sched.alpha, sched.steps, seeds[k])
            col, rec = simulated_annealing(grid, index, init, run_sched, log_path)
        rec.colouring = col
        records.append(rec)
        results.append(col)
    best = max(range(len(records)), key=lambda k: (records[k].final_p, -k))
    return results[best], records[best], records
