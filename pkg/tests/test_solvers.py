import csv
import math
from types import SimpleNamespace

import numpy as np
import pytest

from grasshopper.colouring import init_hemisphere, init_random
from grasshopper.errors import ConfigError, ShapeError
from grasshopper import objective as obj
from grasshopper.solvers import (
    SA_CHUNK,
    AnnealSchedule,
    default_schedule,
    greedy,
    multi_start,
    simulated_annealing,
    slow_schedule,
)


def test_schedule_validation():
    AnnealSchedule(0.4, 0.99999, 10, 0)
    with pytest.raises(ConfigError):
        AnnealSchedule(0.4, 1.0, 10, 0)
    with pytest.raises(ConfigError):
        AnnealSchedule(0.0, 0.5, 10, 0)
    with pytest.raises(ConfigError):
        AnnealSchedule(0.4, 0.5, 0, 0)


def test_default_schedule_counts(grid3):
    sched = default_schedule(grid3)
    assert (sched.t0, sched.alpha, sched.seed) == (0.4, 0.99999, 0)
    assert sched.steps == 150 * grid3.n_pairs == 48150
    # stock step counts at the depths used for production sweeps
    assert default_schedule(SimpleNamespace(n_pairs=81921)).steps == 12_288_150
    assert default_schedule(SimpleNamespace(n_pairs=5121)).steps == 768_150
    slow = slow_schedule(grid3)
    assert (slow.t0, slow.alpha) == (0.2, 0.999995)
    assert slow.steps == 150 * grid3.n_pairs


def test_greedy_improves_and_is_monotone(grid3, index_for):
    index = index_for(grid3, 2 * math.pi / 5)
    c = init_random(grid3, 0)
    col, rec = greedy(grid3, index, c, keep_trace=True)
    assert rec.final_p >= rec.initial_p - 1e-10
    assert np.all(np.diff(rec.trace) >= -1e-10)
    assert rec.flips_accepted == len(rec.trace) - 1
    assert rec.final_p == pytest.approx(
        obj.total_probability(grid3, index, col), abs=1e-10)


def test_greedy_fixed_point(grid3, index_for):
    index = index_for(grid3, 2 * math.pi / 5)
    col, rec = greedy(grid3, index, init_random(grid3, 1))
    again, rec2 = greedy(grid3, index, col)
    assert rec2.flips_accepted == 0
    assert np.array_equal(again.values, col.values)


def test_greedy_stops_immediately_at_half_pi(grid3, index_for):
    index = index_for(grid3, math.pi / 2)
    col, rec = greedy(grid3, index, init_random(grid3, 3))
    assert rec.flips_accepted == 0
    assert rec.final_p == pytest.approx(0.5, abs=1e-10)


def test_greedy_rejects_fractional(grid3, index_for):
    from grasshopper.colouring import init_random_fractional

    index = index_for(grid3, 2 * math.pi / 5)
    with pytest.raises(ConfigError):
        greedy(grid3, index, init_random_fractional(grid3, 0))


def test_sa_deterministic(grid3, index_for):
    index = index_for(grid3, 2 * math.pi / 7)
    sched = AnnealSchedule(0.05, 0.9995, 12000, seed=11)
    a, rec_a = simulated_annealing(grid3, index, init_random(grid3, 5), sched)
    b, rec_b = simulated_annealing(grid3, index, init_random(grid3, 5), sched)
    assert np.array_equal(a.values, b.values)
    assert rec_a.final_p == rec_b.final_p
    assert rec_a.flips_accepted == rec_b.flips_accepted


def test_sa_final_total_matches_recompute(grid3, index_for):
    index = index_for(grid3, 2 * math.pi / 7)
    sched = AnnealSchedule(0.05, 0.9995, 12000, seed=2)
    col, rec = simulated_annealing(grid3, index, init_random(grid3, 1), sched)
    assert rec.final_p == pytest.approx(
        obj.total_probability(grid3, index, col), abs=1e-8)
    assert col.is_binary()


def test_sa_positive_delta_always_accepted_negative_lawful(grid3, index_for, tmp_path):
    """Replay the event log against the documented PCG64 block-draw order."""
    index = index_for(grid3, 2 * math.pi / 5)
    sched = AnnealSchedule(t0=0.002, alpha=0.9996, steps=20000, seed=7)
    log_path = tmp_path / "events.csv"
    simulated_annealing(grid3, index, init_random(grid3, 4), sched, str(log_path))

    with open(log_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == sched.steps

    rng = np.random.Generator(np.random.PCG64(sched.seed))
    drawn_pairs = []
    drawn_ps = []
    remaining = sched.steps
    while remaining > 0:
        block = min(SA_CHUNK, remaining)
        drawn_pairs.extend(rng.integers(0, grid3.n_pairs, size=block).tolist())
        drawn_ps.extend(rng.random(block).tolist())
        remaining -= block

    temperature = sched.t0
    rejected = accepted_negative = 0
    for k, row in enumerate(rows):
        assert int(row["step"]) == k
        assert int(row["pair"]) == drawn_pairs[k]
        logged_t = float(row["temperature"])
        assert logged_t == temperature
        delta = float(row["delta"])
        accepted = bool(int(row["accepted"]))
        metropolis = 1.0 if delta >= 0.0 else math.exp(delta / temperature)
        should_accept = metropolis > drawn_ps[k]
        if abs(metropolis - drawn_ps[k]) > 1e-12:
            assert accepted == should_accept
        if delta >= 0.0:
            assert accepted
        if accepted and delta < 0.0:
            accepted_negative += 1
            assert math.exp(delta / temperature) > drawn_ps[k]
        if not accepted:
            rejected += 1
        temperature *= sched.alpha
    # the cold schedule must actually exercise both branches
    assert rejected > 100
    assert accepted_negative > 100


def test_multi_start_single_equals_direct(grid3, index_for):
    index = index_for(grid3, 2 * math.pi / 5)
    init = init_random(grid3, 6)
    direct, rec = greedy(grid3, index, init)
    best, best_rec, records = multi_start(grid3, index, [init], "greedy")
    assert np.array_equal(best.values, direct.values)
    assert best_rec.final_p == rec.final_p
    assert len(records) == 1


def test_multi_start_picks_best(grid3, index_for):
    index = index_for(grid3, 2 * math.pi / 5)
    inits = [init_random(grid3, seed) for seed in range(4)]
    best, best_rec, records = multi_start(grid3, index, inits, "greedy")
    assert len(records) == 4
    assert best_rec.final_p == max(r.final_p for r in records)
    first_best = next(r for r in records if r.final_p == best_rec.final_p)
    assert first_best is best_rec


def test_multi_start_sa_seeds_offset(grid3, index_for):
    index = index_for(grid3, 2 * math.pi / 7)
    sched = AnnealSchedule(0.05, 0.999, 5000, seed=20)
    inits = [init_hemisphere(grid3), init_hemisphere(grid3)]
    _, _, records = multi_start(grid3, index, inits, "sa", sched=sched)
    assert [r.seed for r in records] == [20, 21]
    # identical inits, different seeds: distinct outcomes
    assert records[0].final_p != records[1].final_p


def test_multi_start_errors(grid3, grid2, index_for):
    index = index_for(grid3, 2 * math.pi / 5)
    with pytest.raises(ConfigError):
        multi_start(grid3, index, [], "greedy")
    with pytest.raises(ShapeError):
        multi_start(grid3, index, [init_random(grid2, 0)], "greedy")
    with pytest.raises(ConfigError):
        multi_start(grid3, index, [init_random(grid3, 0)], "anneal-ish")
