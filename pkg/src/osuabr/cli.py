"""Command line front end: ``run``, ``tub-check`` and ``oracle``.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 property
violation found by ``tub-check``.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import InvalidParameterError
from .report import RunError, run_scenario
from .scenario import ScenarioError, load_scenario, with_overrides
from . import tubmodel as tm

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_VIOLATION = 0, 1, 2, 3


@dataclass
class TubCheckReport:
    samples: int
    violations: dict[str, int] = field(default_factory=dict)
    worst_steps: int = 0
    worst_bound_slack: int = 0  # smallest (bound - steps) seen

    @property
    def total_violations(self) -> int:
        return sum(self.violations.values())


def tub_check(samples: int = 10_000, delta_min: float = 0.01, delta_max: float = 0.49,
              u_min: float = 0.05, u_max: float = 1.0, seed: int = 0,
              follow_steps: int = 10) -> TubCheckReport:
    """Sample random (point, U, delta) triples and count failures of the
    closure, progress, landing, asynchronous and partition properties."""
    if not 0 < delta_min <= delta_max < 0.5:
        raise InvalidParameterError(
            f"delta range ({delta_min}, {delta_max}) must lie inside (0, 0.5)")
    if not 0 < u_min <= u_max <= 1:
        raise InvalidParameterError(f"U range ({u_min}, {u_max}) must lie inside (0, 1]")
    rng = np.random.default_rng(seed)
    keys = ("c1_closure", "c2_ratio", "c2_no_overshoot", "fairness_closure", "convergence",
            "boundary_landing", "async_closure", "async_overshoot", "partition")
    bad = dict.fromkeys(keys, 0)
    rep = TubCheckReport(samples, bad, worst_bound_slack=10**9)
    for _ in range(samples):
        params = tm.TubParams(float(rng.uniform(u_min, u_max)), float(rng.uniform(delta_min, delta_max)))
        p = tm.random_tub_point(rng, params)
        d = params.delta
        q = tm.tub_step(p, params)
        if not tm.in_tub(q, params):
            bad["c1_closure"] += 1
        region = tm.classify_region(p, params)
        if sum(tm.region_conditions(p, params).values()) != 1:
            bad["partition"] += 1
        if region in (tm.Region.R1A, tm.Region.R3A):
            r, r2 = (p.y / p.x, q.y / q.x) if region is tm.Region.R1A else (p.x / p.y, q.x / q.y)
            if not math.isclose(r2, r * (1 - d) / (1 + d), rel_tol=1e-12):
                bad["c2_ratio"] += 1
            if not r2 > 1 - d:
                bad["c2_no_overshoot"] += 1
        if region is tm.Region.R2 and not math.isclose(q.x + q.y, params.lower, rel_tol=1e-12):
            bad["boundary_landing"] += 1
        if region in (tm.Region.R4A, tm.Region.R4B, tm.Region.R4C) and \
                not math.isclose(q.x + q.y, params.upper, rel_tol=1e-12):
            bad["boundary_landing"] += 1
        if region in (tm.Region.R1A, tm.Region.R1B, tm.Region.R3A, tm.Region.R3B):
            for update in tm.AsyncUpdate:
                a = tm.async_step(p, params, update)
                if not tm.in_tub(a, params):
                    bad["async_closure"] += 1
            big_is_y = region in (tm.Region.R1A, tm.Region.R1B)
            a = tm.async_step(p, params, tm.AsyncUpdate.Y_ONLY if big_is_y else tm.AsyncUpdate.X_ONLY)
            ratio = a.y / a.x if big_is_y else a.x / a.y
            if ratio < 1 - d - tm.TOL:
                bad["async_overshoot"] += 1
        run = tm.iterate_to_fairness(p, params, max_steps=10_000)
        bound = tm.convergence_step_bound(p, params)
        if not run.converged or run.steps > bound:
            bad["convergence"] += 1
        else:
            rep.worst_steps = max(rep.worst_steps, run.steps)
            rep.worst_bound_slack = min(rep.worst_bound_slack, bound - run.steps)
            f = run.trajectory[-1]
            for _ in range(follow_steps):
                f = tm.tub_step(f, params)
                if not tm.in_fairness_region(f, params):
                    bad["fairness_closure"] += 1
                    break
    return rep


def _report_json(report) -> str:
    return json.dumps(asdict(report), indent=2, sort_keys=True, default=str)


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    sc = with_overrides(sc, option=args.option, becn=True if args.becn else None,
                        duration_us=args.duration, seed=args.seed)
    report, result = run_scenario(sc, trace_path=args.trace)
    print(_report_json(report))
    logging.getLogger(__name__).info("%d events dispatched", result.events)
    return EXIT_OK


def cmd_tub_check(args) -> int:
    rep = tub_check(args.samples, args.delta_min, args.delta_max, seed=args.seed)
    for name, count in rep.violations.items():
        print(f"{name:18s} {'PASS' if count == 0 else 'FAIL'} ({count} violations)")
    print(f"worst steps to fairness: {rep.worst_steps}; tightest bound slack: {rep.worst_bound_slack}")
    return EXIT_OK if rep.total_violations == 0 else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    sc = load_scenario(args.scenario)
    alloc = sc.maxmin_optimum()
    print(json.dumps({f"vc{vc}": rate for vc, rate in sorted(alloc.items())}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="osuabr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and print its report")
    p.add_argument("--scenario", required=True, help="scenario file or bundled scenario name")
    p.add_argument("--option", choices=["basic", "aggressive", "precise"])
    p.add_argument("--becn", action="store_true")
    p.add_argument("--duration", type=float, help="simulated time in microseconds")
    p.add_argument("--trace", help="CSV trace output path")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("tub-check", help="sample the two-source TUB model properties")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--delta-min", type=float, default=0.01)
    p.add_argument("--delta-max", type=float, default=0.49)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_tub_check)

    p = sub.add_parser("oracle", help="print the max-min fair allocation of a scenario")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ScenarioError, InvalidParameterError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RunError, OSError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
