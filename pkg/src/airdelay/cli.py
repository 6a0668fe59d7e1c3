"""
Operator command line.

Subcommands wrap the library: ``sweep`` (uniform-blocklength tradeoff
curve), ``compare`` (adaptive vs fixed-TTI baselines under GB and GF),
``simulate`` (one scenario run), ``optimize`` (plan solvers), and
``serve-env`` (the agent bridge).  Every run writes a ``manifest.json``
echoing the scenario text, seed, and version so outputs are re-derivable.
Log verbosity comes from the AIRDELAY_LOG environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .delay import SWEEP_CSV_COLUMNS, sweep_argmin, tradeoff_sweep
from .optimize import (
    BASELINE_TTIS_S,
    BudgetExceededError,
    DEFAULT_TTI_LEVELS_S,
    InfeasiblePlanError,
    evaluate_static_plan,
    optimize_multi_user_exhaustive,
    optimize_multi_user_greedy,
    optimize_single_user,
    plan_from_json_dict,
)
from .protocols import Protocol
from .scenario import Regime, load_scenario
from .sim import (
    PACKET_CSV_COLUMNS,
    FixedTtiInfeasibleError,
    SchedulingConflictError,
    packet_csv_rows,
    plan_policy,
    run_fixed_baseline,
    simulate,
    static_split_assignment,
)

log = logging.getLogger("airdelay")

BASELINE_LABELS = ("lte_1ms", "nr_0.5ms", "nr_0.25ms", "nr_0.125ms", "nr_0.0625ms")

COMPARE_CSV_COLUMNS = ("scheme", "protocol", "avg_delay_s", "total_time_s", "feasible")


def _setup_logging():
    level = os.environ.get("AIRDELAY_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_tti_levels(text: str) -> tuple[float, ...]:
    levels = tuple(float(tok) for tok in text.split(",") if tok.strip())
    if not levels or any(t <= 0 for t in levels):
        raise argparse.ArgumentTypeError("tti levels must be positive numbers")
    return levels


def _parse_grid(text: str) -> list[int]:
    try:
        start, stop, step = (int(x) for x in text.split(":"))
    except ValueError as e:
        raise argparse.ArgumentTypeError("grid is start:stop:step") from e
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("grid needs stop >= start and step > 0")
    return list(range(start, stop + 1, step))


def _load_scenario(args):
    sc = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        sc = sc.with_overrides(seed=args.seed)
    if getattr(args, "regime", None):
        sc = sc.with_overrides(regime=Regime(args.regime.upper()))
    if getattr(args, "protocol", None):
        sc = sc.with_overrides(protocol=Protocol(args.protocol.upper()))
    return sc


def _write_manifest(args, out: Path, extra: dict | None = None):
    manifest = {
        "version": __version__,
        "subcommand": args.command,
        "scenario_path": str(args.scenario),
        "scenario_text": Path(args.scenario).read_text(),
        "seed": getattr(args, "seed", None),
        "args": {
            k: v for k, v in vars(args).items()
            if k not in ("command", "func") and v is not None
        },
    }
    if extra:
        manifest.update(extra)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n"
    )


def _write_csv(path: Path, columns, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    sc = _load_scenario(args)
    grid = args.grid
    if not grid:
        print("error: empty blocklength grid", file=sys.stderr)
        return 2
    points = tradeoff_sweep(sc, grid)
    out = Path(args.out)
    _write_manifest(args, out, {"grid": grid})
    _write_csv(
        out / "tradeoff.csv",
        SWEEP_CSV_COLUMNS,
        [
            (repr(p.n), repr(p.tti_s), repr(p.tx_s), repr(p.queue_s),
             repr(p.attempts), repr(p.eps), repr(p.total_s), int(p.feasible))
            for p in points
        ],
    )
    idx = sweep_argmin(points)
    summary = {
        "grid_points": len(points),
        "feasible_points": sum(1 for p in points if p.feasible),
        "argmin_index": idx,
        "argmin_n": points[idx].n if idx is not None else None,
        "argmin_total_s": points[idx].total_s if idx is not None else None,
        "argmin_interior": (
            idx is not None and 0 < idx < len(points) - 1
        ),
        "regime": sc.regime.value,
    }
    (out / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    if idx is None:
        print("error: every grid point is infeasible", file=sys.stderr)
        return 1
    print(f"sweep: argmin n={points[idx].n} total={points[idx].total_s:.6g}s "
          f"interior={summary['argmin_interior']}")
    return 0


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def _adaptive_plan(sc, solver: str, tti_levels):
    users = 1 if sc.noma else sc.users
    if solver == "single":
        return optimize_single_user(sc)
    if solver == "exhaustive":
        return optimize_multi_user_exhaustive(sc, tti_levels)
    return optimize_multi_user_greedy(sc, tti_levels)


def compare_table(sc, solver: str = "greedy", tti_levels=DEFAULT_TTI_LEVELS_S,
                  protocols=(Protocol.GB, Protocol.GF)) -> list[dict]:
    """Adaptive + five fixed baselines, per protocol, expectation mode."""
    rows: list[dict] = []
    users = 1 if sc.noma else sc.users
    for protocol in protocols:
        sc_p = sc.with_overrides(protocol=protocol)
        try:
            plan = _adaptive_plan(sc_p, solver, tti_levels)
            ev = evaluate_static_plan(sc_p, plan.assignment, plan.tti_s_per_user) \
                if plan.kind == "multi_user" else None
            rows.append({
                "scheme": "adaptive",
                "protocol": protocol.value,
                "avg_delay_s": plan.objective_s,
                "total_time_s": ev.max_departure_s if ev else math.nan,
                "feasible": True,
            })
        except (InfeasiblePlanError, BudgetExceededError) as e:
            log.warning("adaptive infeasible under %s: %s", protocol.value, e)
            rows.append({"scheme": "adaptive", "protocol": protocol.value,
                         "avg_delay_s": math.nan, "total_time_s": math.nan,
                         "feasible": False})
        for label, tti in zip(BASELINE_LABELS, BASELINE_TTIS_S):
            try:
                split = static_split_assignment(users, sc_p.subchannels)
                if users > sc_p.subchannels:
                    raise FixedTtiInfeasibleError("more users than subchannels")
                ev = evaluate_static_plan(sc_p, split, (tti,) * users)
                if not ev.feasible:
                    raise FixedTtiInfeasibleError(ev.reason)
                rows.append({
                    "scheme": label,
                    "protocol": protocol.value,
                    "avg_delay_s": ev.objective_s,
                    "total_time_s": ev.max_departure_s,
                    "feasible": True,
                })
            except FixedTtiInfeasibleError as e:
                log.warning("%s infeasible under %s: %s", label, protocol.value, e)
                rows.append({"scheme": label, "protocol": protocol.value,
                             "avg_delay_s": math.nan, "total_time_s": math.nan,
                             "feasible": False})
    return rows


def cmd_compare(args) -> int:
    sc = _load_scenario(args)
    protocols = (
        (Protocol(args.protocol.upper()),) if args.protocol
        else (Protocol.GB, Protocol.GF)
    )
    rows = compare_table(sc, args.solver, args.tti_levels, protocols)
    out = Path(args.out)
    _write_manifest(args, out)
    _write_csv(
        out / "compare.csv",
        COMPARE_CSV_COLUMNS,
        [
            (r["scheme"], r["protocol"], repr(r["avg_delay_s"]),
             repr(r["total_time_s"]), int(r["feasible"]))
            for r in rows
        ],
    )
    (out / "compare.json").write_text(
        json.dumps(rows, indent=2, sort_keys=True) + "\n"
    )
    for r in rows:
        print(f"{r['scheme']:>12s} {r['protocol']}: "
              f"avg={r['avg_delay_s']:.6g}s total={r['total_time_s']:.6g}s"
              + ("" if r["feasible"] else " [infeasible]"))
    return 0


# ---------------------------------------------------------------------------
# simulate / optimize / serve-env
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    sc = _load_scenario(args)
    out = Path(args.out)
    _write_manifest(args, out)
    try:
        if args.plan:
            plan = plan_from_json_dict(json.loads(Path(args.plan).read_text()))
            if plan.kind != "multi_user":
                print("error: only multi_user plans replay through simulate",
                      file=sys.stderr)
                return 2
            policy = plan_policy(sc, plan.assignment, plan.tti_s_per_user,
                                 plan.segments_per_user)
            stats = simulate(sc, policy, mode=args.mode)
        elif args.fixed_tti:
            stats = run_fixed_baseline(sc, args.fixed_tti, mode=args.mode)
        else:
            print("error: choose --plan or --fixed-tti", file=sys.stderr)
            return 2
    except (FixedTtiInfeasibleError, SchedulingConflictError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    (out / "results.json").write_text(stats.to_json() + "\n")
    _write_csv(out / "packets.csv", PACKET_CSV_COLUMNS, packet_csv_rows(stats))
    print(f"simulate: served={stats.served} dropped={stats.dropped} "
          f"avg={stats.avg_over_the_air_s:.6g}s total={stats.total_time_s:.6g}s")
    return 0


def cmd_optimize(args) -> int:
    sc = _load_scenario(args)
    out = Path(args.out)
    _write_manifest(args, out)
    try:
        plan = _adaptive_plan(sc, args.solver, args.tti_levels)
    except (InfeasiblePlanError, BudgetExceededError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    (out / "plan.json").write_text(plan.to_json() + "\n")
    print(f"optimize[{args.solver}]: objective={plan.objective_s:.6g}s")
    return 0


def cmd_serve_env(args) -> int:
    from .bridge import serve_stdio, serve_tcp

    sc = load_scenario(args.scenario) if args.scenario else None
    if args.listen:
        host, _, port = args.listen.rpartition(":")
        serve_tcp(host or "127.0.0.1", int(port), sc, args.tti_levels)
    else:
        serve_stdio(sc, args.tti_levels)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airdelay",
        description="URLLC over-the-air delay laboratory",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_out=True):
        p.add_argument("--scenario", required=True, help="scenario file path")
        if need_out:
            p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, help="override the scenario seed")

    p = sub.add_parser("sweep", help="uniform-blocklength tradeoff curve")
    common(p)
    p.add_argument("--grid", type=_parse_grid, required=True,
                   help="blocklength grid start:stop:step")
    p.add_argument("--regime", choices=("fbl", "ibl"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="adaptive vs fixed baselines, GB vs GF")
    common(p)
    p.add_argument("--protocol", choices=("gb", "gf"))
    p.add_argument("--solver", choices=("single", "exhaustive", "greedy"),
                   default="greedy")
    p.add_argument("--tti-levels", type=_parse_tti_levels,
                   default=DEFAULT_TTI_LEVELS_S, help="comma-separated seconds")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="run one scenario")
    common(p)
    p.add_argument("--regime", choices=("fbl", "ibl"))
    p.add_argument("--protocol", choices=("gb", "gf"))
    p.add_argument("--plan", help="replay a plan.json")
    p.add_argument("--fixed-tti", type=float, help="fixed baseline TTI seconds")
    p.add_argument("--mode", choices=("sampled", "expectation"), default="sampled")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="solve an allocation plan")
    common(p)
    p.add_argument("--solver", choices=("single", "exhaustive", "greedy"),
                   default="greedy")
    p.add_argument("--tti-levels", type=_parse_tti_levels,
                   default=DEFAULT_TTI_LEVELS_S)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("serve-env", help="serve the agent environment bridge")
    p.add_argument("--scenario", help="preload a scenario file")
    p.add_argument("--stdio", action="store_true", help="serve on stdin/stdout")
    p.add_argument("--listen", help="serve on host:port")
    p.add_argument("--tti-levels", type=_parse_tti_levels,
                   default=DEFAULT_TTI_LEVELS_S)
    p.set_defaults(func=cmd_serve_env)

    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
