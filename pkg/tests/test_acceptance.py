"""End-to-end acceptance checks, one per release criterion.

Each test prints a single [PASS]/[FAIL] line (visible with pytest -s).
The depth-6 checks are the expensive ones; the whole module is sized for
a desktop run.
"""
import csv
import math
import os
import time

import numpy as np
import pytest

from grasshopper.cli import main
from grasshopper.colouring import (
    init_hemisphere,
    init_random,
    init_random_fractional,
    binarize,
)
from grasshopper.grid import build_grid, num_points, triangulation_degrees
from grasshopper.kernel import build_index
from grasshopper import objective as obj
from grasshopper import storage
from grasshopper.solvers import AnnealSchedule, greedy, simulated_annealing


def report(name: str, ok: bool, detail: str):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def grid6():
    return build_grid(6)


@pytest.fixture(scope="module")
def grid4():
    return build_grid(4)


@pytest.mark.slow
def test_hemisphere_law_depth6(grid6):
    """|P(hemisphere) - (1 - theta/pi)| / (1 - theta/pi) <= 0.25% at k=6."""
    hemisphere = init_hemisphere(grid6)
    worst = 0.0
    worst_theta = None
    slowest = 0.0
    for theta in [round(0.1 * k, 1) for k in range(1, 16)]:
        t0 = time.perf_counter()
        index = build_index(grid6, theta)
        p = obj.total_probability(grid6, index, hemisphere)
        elapsed = time.perf_counter() - t0
        slowest = max(slowest, elapsed)
        ref = obj.hemisphere_reference(theta)
        rel = abs(p - ref) / ref
        if rel > worst:
            worst, worst_theta = rel, theta
    ok = worst <= 0.0025 and slowest <= 300.0
    report("hemisphere-law depth6", ok,
           f"worst rel dev {worst:.5%} at theta={worst_theta}, "
           f"slowest angle {slowest:.0f}s (limits 0.25%, 300s)")


def test_exact_antisymmetry_depth4(grid4):
    """P(theta) + P(pi - theta) = 1 within 1e-10 for random colourings."""
    worst = 0.0
    for frac in (0.2, 0.3, 0.4):
        theta = frac * math.pi
        ia = build_index(grid4, theta)
        ib = build_index(grid4, math.pi - theta)
        for seed in range(20):
            c = init_random(grid4, seed)
            s = obj.total_probability(grid4, ia, c) \
                + obj.total_probability(grid4, ib, c)
            worst = max(worst, abs(s - 1.0))
    report("exact antisymmetry depth4", worst <= 1e-10,
           f"max |P(theta)+P(pi-theta)-1| = {worst:.3e} (limit 1e-10)")


def test_half_pi_degeneracy_depth4(grid4):
    """At theta = pi/2 every colouring scores 1/2 and no flip changes it."""
    index = build_index(grid4, math.pi / 2)
    worst_p = 0.0
    worst_delta = 0.0
    for seed in range(20):
        c = init_random(grid4, seed)
        state = obj.make_state(grid4, index, c)
        worst_p = max(worst_p, abs(state.total - 0.5))
        deltas = obj.all_flip_deltas(state, index, grid4)
        worst_delta = max(worst_delta, float(np.abs(deltas).max()))
    ok = worst_p <= 1e-10 and worst_delta <= 1e-10
    report("theta=pi/2 degeneracy depth4", ok,
           f"max |P-0.5| = {worst_p:.3e}, max |delta| = {worst_delta:.3e} "
           f"(limits 1e-10)")


def test_incremental_update_oracle_depth2():
    """Exhaustive flip deltas equal full-recompute differences at depth 2."""
    grid = build_grid(2)
    worst = 0.0
    for theta in (2 * math.pi / 5, 2 * math.pi / 7, 0.9 * math.pi):
        index = build_index(grid, theta)
        for seed in range(10):
            c = init_random(grid, seed)
            state = obj.make_state(grid, index, c)
            for p in range(grid.n_pairs):
                flipped = c.copy()
                flipped.values[p] = 1.0 - flipped.values[p]
                oracle = obj.total_probability(grid, index, flipped) - state.total
                delta = obj.flip_delta(state, index, grid, c, p)
                worst = max(worst, abs(delta - oracle))
    report("incremental-update oracle depth2", worst <= 1e-10,
           f"max |flip_delta - recompute diff| = {worst:.3e} (limit 1e-10)")


def test_greedy_monotone_improvement_depth4(grid4):
    """Greedy from 5 random seeds: monotone traces, final P > 0.6."""
    theta = 2 * math.pi / 5
    index = build_index(grid4, theta)
    finals = []
    monotone = True
    for seed in range(5):
        _, rec = greedy(grid4, index, init_random(grid4, seed), keep_trace=True)
        finals.append(rec.final_p)
        if np.min(np.diff(rec.trace)) < -1e-10:
            monotone = False
    ok = monotone and min(finals) > 0.6
    report("greedy improvement depth4", ok,
           f"final P range [{min(finals):.4f}, {max(finals):.4f}] "
           f"(must exceed 0.6), monotone={monotone}")


@pytest.mark.slow
def test_sa_regression_depth6(grid6):
    """Best of 5 stock-schedule runs reaches P = 0.750 +- 0.01 at k=6."""
    t0 = time.perf_counter()
    theta = 2 * math.pi / 7.9
    index = build_index(grid6, theta)
    finals = []
    for seed in range(5):
        sched = AnnealSchedule(t0=0.4, alpha=0.99999,
                               steps=150 * grid6.n_pairs, seed=seed)
        _, rec = simulated_annealing(grid6, index, init_random(grid6, seed), sched)
        finals.append(rec.final_p)
    best = max(finals)
    elapsed = time.perf_counter() - t0
    ok = abs(best - 0.750) <= 0.01 and elapsed <= 7200.0
    report("sa regression depth6", ok,
           f"best of 5 = {best:.4f} (target 0.750 +- 0.01), {elapsed:.0f}s "
           f"(limit 7200s)")


def test_binarization_lemma_depth3():
    """50 random fractional colourings never lose more than 1e-10."""
    grid = build_grid(3)
    theta = 2 * math.pi / 5
    assert theta <= math.pi - 2 * grid.h
    index = build_index(grid, theta)
    worst_drop = 0.0
    for seed in range(50):
        frac = init_random_fractional(grid, seed)
        before = obj.total_probability(grid, index, frac)
        out = binarize(grid, index, frac)
        assert out.is_binary()
        after = obj.total_probability(grid, index, out)
        worst_drop = min(worst_drop, after - before)
    report("binarization lemma depth3", worst_drop >= -1e-10,
           f"worst P change = {worst_drop:.3e} (limit -1e-10)")


def test_grid_integrity_depths_0_to_5():
    """Counts, fixed-point-free involution and 12 degree-5 vertices."""
    problems = []
    for depth in range(6):
        grid = build_grid(depth)
        n = grid.n_points
        if n != num_points(depth):
            problems.append(f"depth {depth}: count {n}")
        idx = np.arange(n)
        if np.any(grid.antipode == idx) or np.any(grid.antipode[grid.antipode] != idx):
            problems.append(f"depth {depth}: pairing")
        if int(np.sum(triangulation_degrees(grid) == 5)) != 12:
            problems.append(f"depth {depth}: degree census")
    report("grid integrity depths 0-5", not problems,
           "counts, involution and degree census all hold" if not problems
           else "; ".join(problems))


def test_persistence_roundtrip_and_verify(tmp_path, capsys):
    """Files round-trip bit-identically; verify reproduces the logged P."""
    grid_path = tmp_path / "g3.grid"
    assert main(["build-grid", "--depth", "3", "--out", str(grid_path)]) == 0
    grid_a = storage.read_grid(str(grid_path))
    rewrite = tmp_path / "g3b.grid"
    storage.write_grid(grid_a, str(rewrite))
    bit_identical = grid_path.read_bytes() == rewrite.read_bytes()

    out = tmp_path / "run"
    assert main(["solve", "--grid", str(grid_path), "--theta-c", "5.0",
                 "--algo", "sa", "--steps", "30000", "--seed", "12",
                 "--init", "random", "--out", str(out)]) == 0
    logged = float(storage.read_results(str(out / "results.csv"))[0]["p"])
    col_path = next(str(out / f) for f in os.listdir(out) if f.endswith(".col"))
    col_a, depth, theta = storage.read_colouring(col_path)
    col_rewrite = tmp_path / "c2.col"
    storage.write_colouring(col_a, depth, theta, str(col_rewrite))
    col_identical = open(col_path, "rb").read() == open(col_rewrite, "rb").read()

    capsys.readouterr()
    assert main(["verify", "--grid", str(grid_path), "--col", col_path,
                 "--out", str(tmp_path / "verif")]) == 0
    printed = capsys.readouterr().out
    p_line = next(l for l in printed.splitlines() if l.startswith("P="))
    p_verified = float(p_line[2:])
    ok = bit_identical and col_identical and abs(p_verified - logged) <= 1e-8
    report("persistence round-trip & verify", ok,
           f"grid bytes identical={bit_identical}, colouring bytes "
           f"identical={col_identical}, |P_verify - P_logged| = "
           f"{abs(p_verified - logged):.3e} (limit 1e-8)")
