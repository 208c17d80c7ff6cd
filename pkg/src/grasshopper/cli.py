"""Command-line front end: build-grid, solve, sweep, verify.

Exit codes: 0 success, 1 usage/configuration problem, 2 I/O or file-format
problem, 3 sweep finished with some failed angles.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import objective, solvers, storage
from .colouring import Colouring, init_from_colouring, init_hemisphere, init_random
from .errors import ConfigError, FileFormatError, GrasshopperError, ShapeError
from .grid import MAX_DEPTH, SphereGrid, build_grid
from .kernel import KernelIndex, build_index

F17 = storage.F17


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _thread_cap() -> int:
    raw = os.environ.get("GRASSHOPPER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"GRASSHOPPER_THREADS must be an integer, got {raw!r}")


def _resolve_thetas(args, many: bool) -> list[float]:
    given = [
        (name, getattr(args, attr))
        for name, attr in [("--theta-rad", "theta_rad"),
                           ("--theta-frac", "theta_frac"),
                           ("--theta-c", "theta_c")]
        if getattr(args, attr) is not None
    ]
    if len(given) != 1:
        raise ConfigError("give exactly one of --theta-rad, --theta-frac, --theta-c")
    name, raw = given[0]
    parts = [tok for tok in str(raw).split(",") if tok.strip()]
    if not parts:
        raise ConfigError(f"{name} got an empty angle list")
    if not many and len(parts) != 1:
        raise ConfigError(f"{name} takes a single value here")
    thetas = []
    for tok in parts:
        try:
            val = float(tok)
        except ValueError:
            raise ConfigError(f"{name}: cannot parse {tok!r}")
        if name == "--theta-rad":
            theta = val
        elif name == "--theta-frac":
            theta = val * math.pi
        else:
            if val <= 0:
                raise ConfigError(f"--theta-c needs a positive value, got {val}")
            theta = 2.0 * math.pi / val
        if math.isnan(theta) or theta < 0.0 or theta > math.pi:
            raise ConfigError(f"{name}: resolved angle {theta} outside [0, pi]")
        thetas.append(theta)
    return thetas


def _get_index(grid: SphereGrid, theta: float, cache_dir) -> KernelIndex:
    if cache_dir:
        cached = storage.load_index_cache(cache_dir, grid.depth, theta)
        if cached is not None:
            return cached
    index = build_index(grid, theta)
    if cache_dir:
        storage.save_index_cache(cache_dir, index)
    return index


def _load_grid(path: str) -> SphereGrid:
    if not os.path.exists(path):
        raise FileFormatError(f"grid file not found: {path}")
    return storage.read_grid(path)


def _make_inits(grid: SphereGrid, mode: str, seed: int, runs: int,
                chained: Colouring | None) -> tuple[list[Colouring], list]:
    """Initial colourings plus the per-run seed labels for the results rows."""
    if chained is not None:
        return [init_from_colouring(grid, chained) for _ in range(runs)], \
            [seed + k for k in range(runs)]
    if mode == "hemisphere":
        return [init_hemisphere(grid) for _ in range(runs)], \
            [seed + k for k in range(runs)]
    if mode == "random":
        return [init_random(grid, seed + k) for k in range(runs)], \
            [seed + k for k in range(runs)]
    if mode.startswith("file:"):
        path = mode[5:]
        prior, depth, _theta = storage.read_colouring(path)
        if depth != grid.depth or prior.n_pairs != grid.n_pairs:
            raise ShapeError(
                f"colouring {path} is for depth {depth}, grid is depth {grid.depth}"
            )
        return [init_from_colouring(grid, prior) for _ in range(runs)], \
            [seed + k for k in range(runs)]
    raise ConfigError(f"unknown init mode {mode!r}")


def _schedule(grid: SphereGrid, args) -> solvers.AnnealSchedule:
    base = solvers.slow_schedule(grid, args.seed) if args.schedule == "slow" \
        else solvers.default_schedule(grid, args.seed)
    return solvers.AnnealSchedule(
        t0=base.t0 if args.t0 is None else args.t0,
        alpha=base.alpha if args.alpha is None else args.alpha,
        steps=base.steps if args.steps is None else args.steps,
        seed=args.seed,
    )


def _col_name(depth: int, theta: float, algo: str, seed) -> str:
    tag = "" if seed is None else f"_s{seed}"
    return f"col_k{depth}_t{theta:.10g}_{algo}{tag}.col"


def cmd_build_grid(args) -> int:
    if args.depth < 0 or args.depth > MAX_DEPTH:
        raise ConfigError(f"depth must be in [0, {MAX_DEPTH}], got {args.depth}")
    grid = build_grid(args.depth)
    storage.write_grid(grid, args.out)
    print(f"2N={grid.n_points} h={grid.h:{F17}}")
    print(f"wrote {args.out}")
    return 0


def cmd_solve(args) -> int:
    grid = _load_grid(args.grid)
    theta = _resolve_thetas(args, many=False)[0]
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    index = _get_index(grid, theta, args.cache_index)
    inits, run_seeds = _make_inits(grid, args.init, args.seed, args.runs, None)
    label = args.init if not args.init.startswith("file:") \
        else f"file:{os.path.basename(args.init[5:])}"
    log_paths = None
    if args.log_events:
        log_paths = [
            os.path.join(out_dir, f"events_t{theta:.10g}_run{k}.csv")
            for k in range(args.runs)
        ]
    sched = _schedule(grid, args) if args.algo == "sa" else None
    best_col, best_rec, records = solvers.multi_start(
        grid, index, inits, args.algo, sched=sched,
        seeds=run_seeds if args.algo == "sa" else None, log_paths=log_paths,
    )
    rows = []
    for k, rec in enumerate(records):
        seed_label = run_seeds[k] if (args.init == "random" or args.algo == "sa") else None
        rows.append(storage.result_row(
            theta, args.algo, seed_label, label, rec.final_p,
            rec.steps, rec.flips_accepted, rec.wall_time,
        ))
        rec.colouring_path = os.path.join(
            out_dir, _col_name(grid.depth, theta, args.algo, seed_label))
        storage.write_colouring(rec.colouring, grid.depth, theta, rec.colouring_path)
    storage.append_results(os.path.join(out_dir, "results.csv"), rows)
    finals = [rec.final_p for rec in records]
    print(f"theta={theta:{F17}}")
    print(f"P={best_rec.final_p:{F17}}")
    if len(records) > 1:
        print(f"spread={max(finals) - min(finals):{F17}} over {len(records)} runs")
    print(f"wrote {best_rec.colouring_path}")
    return 0


def cmd_sweep(args) -> int:
    grid = _load_grid(args.grid)
    thetas = _resolve_thetas(args, many=True)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")
    done = storage.completed_keys(results_path)
    label = args.init if not args.init.startswith("file:") \
        else f"file:{os.path.basename(args.init[5:])}"
    failures: list[tuple[float, str]] = []

    def is_done(theta: float, init_label: str) -> bool:
        keys = set()
        for k in range(args.runs):
            seed_label = str(args.seed + k) \
                if (args.init == "random" or args.algo == "sa") else ""
            keys.add((theta, args.algo, seed_label, init_label))
        return keys <= done

    def solve_theta(theta: float, chained: Colouring | None, init_label: str):
        index = _get_index(grid, theta, args.cache_index)
        inits, run_seeds = _make_inits(grid, args.init, args.seed, args.runs, chained)
        sched = _schedule(grid, args) if args.algo == "sa" else None
        best_col, best_rec, records = solvers.multi_start(
            grid, index, inits, args.algo, sched=sched,
            seeds=run_seeds if args.algo == "sa" else None,
        )
        rows = []
        for k, rec in enumerate(records):
            seed_label = run_seeds[k] \
                if (args.init == "random" or args.algo == "sa") else None
            rows.append(storage.result_row(
                theta, args.algo, seed_label, init_label, rec.final_p,
                rec.steps, rec.flips_accepted, rec.wall_time,
            ))
            rec.colouring_path = os.path.join(
                out_dir, _col_name(grid.depth, theta, args.algo, seed_label))
            storage.write_colouring(rec.colouring, grid.depth, theta,
                                    rec.colouring_path)
        return best_col, rows, best_rec.colouring_path

    def reload_best(theta: float, init_label: str) -> Colouring | None:
        """Best persisted colouring of an already-completed angle."""
        rows = [r for r in storage.read_results(results_path)
                if float(r["theta"]) == theta and r["algorithm"] == args.algo
                and r["init"] == init_label]
        if not rows:
            return None
        best = max(rows, key=lambda r: float(r["p"]))
        path = os.path.join(out_dir, _col_name(
            grid.depth, theta, args.algo, best["seed"] or None))
        if not os.path.exists(path):
            return None
        col, _depth, _theta = storage.read_colouring(path)
        return col

    if args.chain:
        prior: Colouring | None = None
        for theta in thetas:
            init_label = label if prior is None else "chain"
            if is_done(theta, init_label):
                done_col = reload_best(theta, init_label)
                if done_col is not None:
                    print(f"theta={theta:.10g}: already done, skipping")
                    prior = done_col
                    continue
                # colouring file lost: fall through and solve again
            try:
                best_col, rows, col_path = solve_theta(theta, prior, init_label)
            except GrasshopperError as exc:
                failures.append((theta, str(exc)))
                print(f"theta={theta:.10g}: FAILED ({exc})", file=sys.stderr)
                continue
            storage.append_results(results_path, rows)
            print(f"theta={theta:.10g}: P={max(float(r['p']) for r in rows):.6f} -> {col_path}")
            prior = best_col
    else:
        todo = [t for t in thetas if not is_done(t, label)]
        for t in thetas:
            if t not in todo:
                print(f"theta={t:.10g}: already done, skipping")

        def record_outcome(t, result, err):
            # rows land in the results file as soon as an angle finishes,
            # so an interrupted sweep resumes where it stopped
            if err is not None:
                failures.append((t, err))
                print(f"theta={t:.10g}: FAILED ({err})", file=sys.stderr)
                return
            _best, rows, col_path = result
            storage.append_results(results_path, rows)
            print(f"theta={t:.10g}: P={max(float(r['p']) for r in rows):.6f} -> {col_path}")

        cap = _thread_cap()
        if cap > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=cap) as pool:
                futures = [(t, pool.submit(solve_theta, t, None, label)) for t in todo]
                for t, fut in futures:
                    try:
                        record_outcome(t, fut.result(), None)
                    except GrasshopperError as exc:
                        record_outcome(t, None, str(exc))
        else:
            for t in todo:
                try:
                    record_outcome(t, solve_theta(t, None, label), None)
                except GrasshopperError as exc:
                    record_outcome(t, None, str(exc))

    if failures:
        print(f"sweep finished with {len(failures)} failed angle(s)", file=sys.stderr)
        return 3
    return 0


def cmd_verify(args) -> int:
    grid = _load_grid(args.grid)
    if not os.path.exists(args.col):
        raise FileFormatError(f"colouring file not found: {args.col}")
    try:
        col, depth, theta_header = storage.read_colouring(args.col)
    except FileFormatError as exc:
        # a corrupt colouring is a failed verification, not an I/O fault
        raise ShapeError(f"colouring does not parse: {exc}") from exc
    if depth != grid.depth or col.n_pairs != grid.n_pairs:
        raise ShapeError(
            f"colouring is depth {depth} ({col.n_pairs} pairs), "
            f"grid is depth {grid.depth} ({grid.n_pairs} pairs)"
        )
    if any(getattr(args, a) is not None for a in ("theta_rad", "theta_frac", "theta_c")):
        theta = _resolve_thetas(args, many=False)[0]
    else:
        theta = theta_header

    s = col.expand(grid)
    pair_sums = s[grid.upper] + s[grid.lower]
    antipodal_ok = bool(np.all(pair_sums == 1.0))

    index = _get_index(grid, theta, args.cache_index)
    state = objective.make_state(grid, index, col)
    p = state.total
    index_rev = _get_index(grid, math.pi - theta, args.cache_index)
    p_rev = objective.total_probability(grid, index_rev, col)

    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.col))[0]
    points_path = os.path.join(out_dir, f"{stem}_points.csv")
    storage.write_point_report(points_path, grid, s, state.numerator / index.denominator)

    print(f"theta={theta:{F17}}")
    print(f"antipodal={'ok' if antipodal_ok else 'VIOLATED'}")
    print(f"P={p:{F17}}")
    print(f"P_reverse={p_rev:{F17}}")
    print(f"P_sum={p + p_rev:{F17}}")
    print(f"P_hem={objective.hemisphere_reference(theta):{F17}}")
    print(f"bell_c={objective.bell_correlation(p):{F17}}")
    print(f"wrote {points_path}")
    return 0 if antipodal_ok else 1


def _add_theta_flags(p: argparse.ArgumentParser, many: bool):
    hint = "comma-separated list" if many else "value"
    p.add_argument("--theta-rad", help=f"jumping angle {hint} in radians")
    p.add_argument("--theta-frac", help=f"jumping angle {hint} as a fraction of pi")
    p.add_argument("--theta-c", help=f"jumping angle {hint} as c with theta = 2*pi/c")


def _add_solver_flags(p: argparse.ArgumentParser):
    p.add_argument("--init", default="random",
                   help="hemisphere | random | file:<colouring path>")
    p.add_argument("--algo", default="sa", choices=["greedy", "sa"])
    p.add_argument("--schedule", default="default", choices=["default", "slow"],
                   help="cooling preset; t0/alpha/steps override its fields")
    p.add_argument("--t0", type=float, default=None, help="initial temperature")
    p.add_argument("--alpha", type=float, default=None, help="cooling factor per step")
    p.add_argument("--steps", type=int, default=None, help="annealing step count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=1, help="independent runs, best kept")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--log-events", action="store_true",
                   help="write per-step CSV logs (step,temperature,pair,delta,accepted)")
    p.add_argument("--cache-index", default=None, metavar="DIR",
                   help="memoise kernel indexes keyed by (depth, theta)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grasshopper",
                     description="Antipodal sphere-colouring search for a fixed-angle jump")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-grid", help="build a geodesic grid file")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("solve", help="search for a good colouring at one angle")
    p.add_argument("--grid", required=True)
    _add_theta_flags(p, many=False)
    _add_solver_flags(p)

    p = sub.add_parser("sweep", help="solve a list of angles, resumable")
    p.add_argument("--grid", required=True)
    _add_theta_flags(p, many=True)
    _add_solver_flags(p)
    p.add_argument("--chain", action="store_true",
                   help="use each angle's solution as the next angle's init")

    p = sub.add_parser("verify", help="recompute a colouring's probability from scratch")
    p.add_argument("--grid", required=True)
    p.add_argument("--col", required=True)
    _add_theta_flags(p, many=False)
    p.add_argument("--out", default=".", help="directory for the per-point CSV")
    p.add_argument("--cache-index", default=None, metavar="DIR")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "build-grid": cmd_build_grid,
            "solve": cmd_solve,
            "sweep": cmd_sweep,
            "verify": cmd_verify,
        }[args.command]
        return handler(args)
    except (FileFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GrasshopperError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
