"""
Command-line driver: solve, stability, sweep, interpolate, beurling-check

Exit codes: 0 success (including MaxIter, flagged in the outputs),
1 invalid input, 2 solver divergence or a module error.

Examples:
    python run_sinkhorn.py --config problems/two_atom_line.json --out reports/solve solve
    python run_sinkhorn.py --out reports/stability stability --delta 1e-2
    python run_sinkhorn.py --config problems/fig1_sweep.json --out reports/sweep sweep --h-list 0.5,1,1.5,1.75,2.1
"""
import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from beurling import beurling_report
from beurling_report_generator import BeurlingReportGenerator
from bridge_report_generator import BridgeReportGenerator
from config import Config, configure_logging
from interpolation import EvaluationGrid, bridge_density, default_grid
from problem import load_config, problem_from_dict
from sinkhorn_core import SolveConfig, SolveStatus, entropic_plan, solve
from solve_report_generator import SolveReportGenerator
from stability import scan_stability
from stability_report_generator import StabilityReportGenerator
from sweep_report_generator import SweepReportGenerator

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILED = 2


def _banner(title: str) -> None:
    print("=" * 80)
    print(title)
    print("=" * 80)


def _load(config_path: str, seed: int):
    """Problem and solver settings from a config file; raises on invalid input"""
    data = load_config(config_path)
    problem = problem_from_dict(data, seed=seed)
    solver = SolveConfig.from_dict(data.get('solver', {}))
    return problem, solver


def cmd_solve(config_path: str, out_dir: str, seed: int = 0) -> int:
    _banner("SINKHORN SOLVE")
    try:
        problem, solver = _load(config_path, seed)
    except Exception as e:
        print(f"[ERROR] Invalid config: {e}")
        return EXIT_INVALID

    solver.record_trace = True
    print(f"\n[INFO] N0={problem.mu0.size} N1={problem.mu1.size} eps={problem.epsilon} "
          f"h={solver.h} mode={solver.mode.value}")
    result = solve(problem, solver)
    plan = entropic_plan(result.scalings, problem.kernel)
    SolveReportGenerator(out_dir).generate_report(result, plan)

    print(f"[OK] Status: {result.status.value} after {result.iterations} iterations "
          f"(residual {result.residual:.3e})")
    if result.status is SolveStatus.DIVERGED:
        return EXIT_FAILED
    if result.status is SolveStatus.MAX_ITER:
        print("[WARNING] Maximum number of iterations reached before tolerance")
    return EXIT_OK


def cmd_stability(delta: float, h_min: float, h_max: float, steps: int, out_path: str) -> int:
    _banner("STABILITY SCAN - TROTTER-EULER SPLITTING")
    try:
        report = scan_stability(delta, h_min, h_max, steps)
    except ValueError as e:
        print(f"[ERROR] {e}")
        return EXIT_INVALID

    out_dir, filename = os.path.split(out_path)
    StabilityReportGenerator(out_dir or '.').generate_report(report, filename or 'stability.csv')
    print(f"[OK] h_optimal = {report.h_optimal:.4f} (radius {report.radius_optimal:.4f})")
    print(f"[OK] h_unstable_onset = {report.h_unstable_onset}")
    return EXIT_OK


def _sweep_run(problem, solver: SolveConfig, h: float) -> dict:
    config = SolveConfig(h=h, tol=solver.tol, max_iter=solver.max_iter,
                         mode=solver.mode, record_trace=True)
    result = solve(problem, config)
    return {'h': h, 'iters': result.iterations, 'residual': result.residual,
            'status': result.status.value, 'result': result}


def cmd_sweep(config_path: str, h_list: Sequence[float], out_dir: str, seed: int = 0) -> int:
    _banner("STEP-SIZE SWEEP")
    if not h_list:
        print("[ERROR] Empty step-size list")
        return EXIT_INVALID
    try:
        problem, solver = _load(config_path, seed)
        h_list = [float(h) for h in h_list]
        if any(h <= 0 for h in h_list):
            raise ValueError("step sizes must be positive")
    except Exception as e:
        print(f"[ERROR] Invalid config: {e}")
        return EXIT_INVALID

    with ThreadPoolExecutor(max_workers=max(Config.SWEEP_WORKERS, 1)) as pool:
        runs = list(pool.map(lambda h: _sweep_run(problem, solver, h), h_list))

    for run in runs:
        print(f"  h={run['h']:<6g} {run['status']:<10} iters={run['iters']:<6} residual={run['residual']:.3e}")

    info = {"N:": problem.mu0.size, "epsilon:": problem.epsilon, "tol:": solver.tol}
    SweepReportGenerator(out_dir).generate_report(runs, info)
    return EXIT_OK


def cmd_interpolate(config_path: str, times: Sequence[float], grid_spec: Optional[str],
                    out_path: str, seed: int = 0) -> int:
    _banner("ENTROPIC INTERPOLATION")
    try:
        problem, solver = _load(config_path, seed)
        grid = EvaluationGrid.parse(grid_spec) if grid_spec else default_grid(problem)
    except Exception as e:
        print(f"[ERROR] Invalid config: {e}")
        return EXIT_INVALID

    try:
        result = solve(problem, solver)
        if result.status is not SolveStatus.CONVERGED:
            print(f"[WARNING] Solver status {result.status.value}; bridge built from a non-converged state")
        bridge = bridge_density(result.scalings, problem, times, grid)
    except Exception as e:
        print(f"[ERROR] {e}")
        return EXIT_FAILED

    out_dir, filename = os.path.split(out_path)
    BridgeReportGenerator(out_dir or '.').generate_report(bridge, filename or 'bridge.csv')
    for t, mass in zip(bridge.times, bridge.masses()):
        print(f"  t={t:<6g} mass={mass:.10f}")
    return EXIT_OK


def cmd_beurling_check(config_path: str, out_path: str, seed: int = 0) -> int:
    _banner("PRODUCT-MEASURE CHECK")
    try:
        problem, _ = _load(config_path, seed)
    except Exception as e:
        print(f"[ERROR] Invalid config: {e}")
        return EXIT_INVALID

    try:
        results = beurling_report(problem.mass0, problem.mass1, problem.kernel, seed=seed)
    except Exception as e:
        print(f"[ERROR] {e}")
        return EXIT_FAILED

    out_dir, filename = os.path.split(out_path)
    BeurlingReportGenerator(out_dir or '.').generate_report(results, filename or 'beurling.json')
    print(json.dumps(results, indent=2))
    return EXIT_OK


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(',') if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Sinkhorn flow toolkit")
    parser.add_argument('--config', help="problem config JSON")
    parser.add_argument('--out', default=Config.OUTPUT_DIR, help="output directory")
    parser.add_argument('--seed', type=int, default=0, help="seed for random problems and starts")
    parser.add_argument('--log-level', default=None)
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('solve', help="solve one problem")

    p = sub.add_parser('stability', help="scan the splitting stability region")
    p.add_argument('--delta', type=float, default=1e-2)
    p.add_argument('--h-min', type=float, default=0.0)
    p.add_argument('--h-max', type=float, default=2.5)
    p.add_argument('--steps', type=int, default=501)

    p = sub.add_parser('sweep', help="solve for several step sizes")
    p.add_argument('--h-list', type=_float_list, default=[])

    p = sub.add_parser('interpolate', help="evaluate the entropic interpolation")
    p.add_argument('--times', type=_float_list, default=[0.25, 0.5, 0.75])
    p.add_argument('--grid', default=None, help="lo:hi:n per axis, comma separated")

    sub.add_parser('beurling-check', help="round-trip and uniqueness of the product-measure inverse")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    needs_config = args.command in ('solve', 'sweep', 'interpolate', 'beurling-check')
    if needs_config and not args.config:
        print("[ERROR] --config is required for this command")
        return EXIT_INVALID

    if args.command == 'solve':
        return cmd_solve(args.config, args.out, args.seed)
    if args.command == 'stability':
        return cmd_stability(args.delta, args.h_min, args.h_max, args.steps,
                             os.path.join(args.out, 'stability.csv'))
    if args.command == 'sweep':
        return cmd_sweep(args.config, args.h_list, args.out, args.seed)
    if args.command == 'interpolate':
        return cmd_interpolate(args.config, args.times, args.grid,
                               os.path.join(args.out, 'bridge.csv'), args.seed)
    return cmd_beurling_check(args.config, os.path.join(args.out, 'beurling.json'), args.seed)


if __name__ == "__main__":
    sys.exit(main())
