"""Acceptance gate.

One test per criterion, each printing a PASS line with its runtime.
Ordering- and property-based at desk scale; run with ``pytest -s`` to see
the lines as they pass.
"""

import itertools
import math
import time

import numpy as np
import pytest

from airdelay import fbl
from airdelay.delay import (
    compose_over_the_air,
    expected_attempts,
    sweep_argmin,
    tradeoff_sweep,
)
from airdelay.cli import compare_table
from airdelay.optimize import (
    BASELINE_TTIS_S,
    evaluate_static_plan,
    optimize_multi_user_exhaustive,
    optimize_multi_user_greedy,
)
from airdelay.protocols import Protocol, profile_of
from airdelay.scenario import ArrivalProcess, Regime
from airdelay.sim import FrameAlloc, simulate, static_split_assignment

import oracles
from helpers import multi_user_scenario, reference_tradeoff_scenario

# fixed-TTI baselines plus finer halvings: the adaptive search space must
# strictly contain the baselines
ADAPTIVE_LEVELS_S = tuple(sorted(BASELINE_TTIS_S + (7.8125e-6, 1.5625e-5, 3.125e-5)))


def _report(name: str, started: float, limit_s: float):
    elapsed = time.perf_counter() - started
    assert elapsed < limit_s, f"{name} took {elapsed:.1f}s, limit {limit_s}s"
    print(f"[acceptance] {name}: PASS ({elapsed:.1f}s)")


def a2_instance(seed: int):
    rng = np.random.default_rng(1000 + seed)
    users = 2 + seed % 3
    gains = tuple(float(g) for g in rng.uniform(-20.0, 20.0, size=users))
    return multi_user_scenario(
        users, seed=seed, gains_db=gains, rate_per_user=2500.0, period_s=0.01
    )


def test_a1_tradeoff_shape():
    started = time.perf_counter()
    sc = reference_tradeoff_scenario()
    grid = list(range(94, 401, 2))

    fbl_points = tradeoff_sweep(sc, grid)
    idx = sweep_argmin(fbl_points)
    assert idx is not None
    assert 0 < idx < len(fbl_points) - 1, "FBL argmin must be strictly interior"

    ibl_points = tradeoff_sweep(sc.with_overrides(regime=Regime.IBL), grid)
    totals = [p.total_s for p in ibl_points]
    assert all(
        totals[i] <= totals[i + 1] + 1e-18 for i in range(len(totals) - 1)
    ), "IBL total must be non-increasing toward small blocklengths"

    _report("A1 tradeoff-shape", started, 10.0)


def test_a2_adaptive_beats_fixed():
    started = time.perf_counter()
    n_instances = 50
    wins = 0
    for seed in range(n_instances):
        sc = a2_instance(seed)
        plan = optimize_multi_user_greedy(sc, ADAPTIVE_LEVELS_S)
        split = static_split_assignment(sc.users, sc.subchannels)
        fixed = []
        for tti in BASELINE_TTIS_S:
            ev = evaluate_static_plan(sc, split, (tti,) * sc.users)
            if ev.feasible:
                fixed.append(ev.objective_s)
        assert fixed, f"instance {seed}: every fixed baseline infeasible"
        best_fixed = min(fixed)
        assert plan.objective_s <= best_fixed + 1e-15, (
            f"instance {seed}: adaptive {plan.objective_s} worse than fixed {best_fixed}"
        )
        if plan.objective_s < best_fixed:
            wins += 1
    assert wins >= 0.8 * n_instances, f"strictly better on only {wins}/{n_instances}"
    _report(f"A2 adaptive-beats-fixed (strict on {wins}/{n_instances})", started, 300.0)


def test_a3_gf_beats_gb():
    started = time.perf_counter()
    for users in range(2, 11):
        sc = multi_user_scenario(users, seed=100 + users, rate_per_user=1500.0)
        rows = compare_table(sc)
        table = {
            (r["scheme"], r["protocol"]): r["avg_delay_s"]
            for r in rows
            if r["feasible"]
        }
        schemes = {s for s, _ in table}
        for scheme in schemes:
            gf, gb = table.get((scheme, "GF")), table.get((scheme, "GB"))
            assert gf is not None and gb is not None
            assert gf < gb, f"users={users} scheme={scheme}: GF {gf} !< GB {gb}"
        gf_adaptive = table[("adaptive", "GF")]
        assert gf_adaptive == min(table.values()), (
            f"users={users}: adaptive-GF is not the minimal cell"
        )
    _report("A3 gf-beats-gb (users 2..10, cell-wise)", started, 120.0)


def test_a4_oracle_equivalence():
    started = time.perf_counter()

    # 2 users x 2 subchannels x 4 TTI levels: 64-plan brute force
    levels = (0.0625e-3, 0.125e-3, 0.25e-3, 0.5e-3)
    sc = multi_user_scenario(2, seed=3)
    plan = optimize_multi_user_exhaustive(sc, levels)
    best_key, oracle = None, None
    n_plans = 0
    for assignment in itertools.product(range(2), repeat=2):
        if set(range(2)) - set(assignment):
            continue
        for ttis in itertools.product(sorted(levels), repeat=2):
            n_plans += 1
            ev = evaluate_static_plan(sc, assignment, ttis)
            if not ev.feasible:
                continue
            key = (ev.objective_s, assignment, sum(ttis))
            if best_key is None or key < best_key:
                best_key = key
                oracle = (assignment, ev.tti_s_per_user, ev.objective_s)
    assert plan.assignment == oracle[0]
    assert plan.tti_s_per_user == oracle[1]
    assert plan.objective_s == oracle[2], "bit-exact equality required"

    # greedy never beats exhaustive on 100 random small instances
    rng = np.random.default_rng(4242)
    gaps = []
    for k in range(100):
        users = int(rng.integers(1, 3))
        subchannels = int(rng.integers(users, 4))
        n_levels = int(rng.integers(2, 4))
        inst_levels = tuple(sorted(levels)[:n_levels])
        gains = tuple(float(g) for g in rng.uniform(-20.0, 20.0, size=users))
        inst = multi_user_scenario(
            users, seed=int(rng.integers(0, 2**31)), gains_db=gains,
            rate_per_user=2000.0, period_s=0.008,
        ).with_overrides(subchannels=subchannels)
        ex = optimize_multi_user_exhaustive(inst, inst_levels)
        gr = optimize_multi_user_greedy(inst, inst_levels)
        assert gr.objective_s >= ex.objective_s - 1e-15, f"instance {k}"
        gaps.append(gr.objective_s / ex.objective_s - 1.0)
    print(f"[acceptance] A4 greedy gap over 100 instances: "
          f"mean {np.mean(gaps):.3%}, max {np.max(gaps):.3%}")
    _report("A4 oracle-equivalence", started, 60.0)


def test_a5_numeric_kernel():
    started = time.perf_counter()

    assert fbl.q_inverse(1e-7) == pytest.approx(5.19934, abs=1e-4)
    assert fbl.q_inverse(1e-7) == pytest.approx(
        oracles.q_inverse_bisect(1e-7), abs=1e-4
    )

    spec = fbl.ChannelSpec.from_snr_db(10.0, 1e6)
    assert fbl.min_blocklength(spec, 256, 1e-7) == 94
    assert oracles.min_blocklength_scan(10.0, 256, 1e-7) == 94
    assert fbl.min_blocklength_ibl(spec, 256) == 75
    assert oracles.min_blocklength_ibl_scan(10.0, 256) == 75

    rng = np.random.default_rng(7)
    checked = 0
    while checked < 1000:
        snr_db = float(rng.uniform(-20.0, 20.0))
        n = int(rng.integers(8, 10**5))
        b = int(rng.integers(8, 4096))
        s = fbl.ChannelSpec.from_snr_db(snr_db, 1e6)
        eps = fbl.error_prob(s, n, b)
        if not (1e-25 < eps < 1.0 - 1e-12):
            continue
        carried = n * fbl.fbl_rate(s, n, eps)
        assert carried == pytest.approx(b, rel=1e-6)
        checked += 1

    _report("A5 numeric-kernel", started, 5.0)


def test_a6_determinism_and_accounting():
    started = time.perf_counter()

    # byte-identical reruns
    sc = reference_tradeoff_scenario(seed=64)

    def policy(user, packet, now):
        return FrameAlloc(user=user, subchannel_ids=(0,), tti_s=94e-6)

    a = simulate(sc, policy)
    b = simulate(sc, policy)
    assert a.to_json() == b.to_json()

    # per-packet identity against the composition formula
    sc_retx = sc.with_overrides(
        max_attempts=30,
        arrivals=ArrivalProcess.trace([i * 0.0005 for i in range(40)]),
    )
    tti = 76e-6
    stats = simulate(sc_retx, lambda u, p, t: FrameAlloc(u, (0,), tti))
    profile = profile_of(Protocol.GF)
    assert any(r.attempts > 1 for r in stats.records)
    for rec in stats.records:
        if rec.dropped:
            continue
        oracle = compose_over_the_air(
            transmission_s=tti,
            queuing_s=rec.breakdown.queuing_s,
            processing_s=sc_retx.processing_s,
            propagation_s=sc_retx.propagation_s,
            profile=profile,
            attempts=rec.attempts,
            retx_gap_s=sc_retx.retx_gap_effective_s,
        )
        assert rec.breakdown.total_s == pytest.approx(oracle.total_s, rel=1e-12)

    # sampled attempts match the analytic expectation within 3 standard errors
    sc_att = sc.with_overrides(
        max_attempts=0, arrivals=ArrivalProcess.trace([0.0, 0.01, 0.02, 0.03])
    )
    spec = sc_att.channel_for(0)
    eps = fbl.error_prob(spec, 76, sc_att.packet_bits)
    analytic = expected_attempts(eps, None).expected
    total, count = 0.0, 0
    for seed in range(10_000):
        run = simulate(sc_att, lambda u, p, t: FrameAlloc(u, (0,), 76e-6), seed=seed)
        for rec in run.records:
            total += rec.attempts
            count += 1
    mean = total / count
    se = math.sqrt(eps / (1.0 - eps) ** 2 / count)
    assert abs(mean - analytic) < 3 * se, (
        f"sampled mean {mean} vs analytic {analytic} (3se={3 * se})"
    )

    _report("A6 determinism-and-accounting", started, 60.0)
