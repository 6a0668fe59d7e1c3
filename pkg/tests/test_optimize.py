"""Optimizer tests: scan oracles, the 64-plan enumeration, greedy dominance."""

import itertools
import json
import math

import pytest

from airdelay import fbl
from airdelay.delay import expected_attempts
from airdelay.optimize import (
    BudgetExceededError,
    DEFAULT_TTI_LEVELS_S,
    InfeasiblePlanError,
    evaluate_static_plan,
    optimize_multi_user_exhaustive,
    optimize_multi_user_greedy,
    optimize_single_user,
    plan_from_json_dict,
)
from airdelay.protocols import profile_of
from airdelay.scenario import ArrivalProcess, Regime

from helpers import multi_user_scenario, reference_tradeoff_scenario

LEVELS4 = (0.0625e-3, 0.125e-3, 0.25e-3, 0.5e-3)


def brute_force_static(scenario, levels):
    """Independent enumeration with its own tie-breaking; the plan oracle."""
    users = scenario.users
    best_key, best = None, None
    for assignment in itertools.product(range(users), repeat=scenario.subchannels):
        if set(range(users)) - set(assignment):
            continue
        for ttis in itertools.product(sorted(levels), repeat=users):
            ev = evaluate_static_plan(scenario, assignment, ttis)
            if not ev.feasible:
                continue
            key = (ev.objective_s, assignment, sum(ttis))
            if best_key is None or key < best_key:
                best_key, best = key, (assignment, ev.tti_s_per_user, ev.objective_s)
    return best


def single_user_delay_scan(scenario, n):
    """Hand-written single-packet delay at integer blocklength n."""
    spec = scenario.channel_for(0, scenario.subchannels)
    profile = profile_of(scenario.protocol)
    eps = fbl.error_prob(spec, n, scenario.packet_bits)
    a = expected_attempts(eps, scenario.max_attempts).expected
    feedback = (profile.proc_count * scenario.processing_s
                + profile.prop_count * scenario.propagation_s)
    tti = n / scenario.total_bandwidth_hz
    return a * (profile.tx_count * tti + feedback) + (a - 1) * scenario.retx_gap_effective_s


class TestSingleUser:
    def test_one_packet_slack_period_returns_min_blocklength(self):
        sc = reference_tradeoff_scenario().with_overrides(
            arrivals=ArrivalProcess.trace([0.0]), period_s=0.01
        )
        plan = optimize_single_user(sc)
        assert plan.blocklengths == (94,)
        # 1-D integer scan oracle over n in [94, 2000]
        scan_best = min(range(94, 2001), key=lambda n: single_user_delay_scan(sc, n))
        assert scan_best == 94
        assert plan.objective_s == pytest.approx(
            single_user_delay_scan(sc, 94), rel=1e-12
        )

    def test_ibl_returns_capacity_minimum_everywhere(self):
        sc = reference_tradeoff_scenario().with_overrides(
            regime=Regime.IBL,
            arrivals=ArrivalProcess.trace([0.0, 0.001, 0.002]),
            period_s=0.01,
        )
        plan = optimize_single_user(sc)
        assert plan.blocklengths == (75, 75, 75)

    def test_budget_forced_unique_point(self):
        n_pkts = 3
        period = n_pkts * 94 / 1e6
        sc = reference_tradeoff_scenario().with_overrides(
            period_s=period,
            arrivals=ArrivalProcess.trace([0.0, 1e-9, 2e-9]),
        )
        plan = optimize_single_user(sc)
        assert plan.blocklengths == (94, 94, 94)
        assert plan.slacks["period_budget_s"] == pytest.approx(0.0, abs=1e-15)

    def test_infeasible_budget(self):
        sc = reference_tradeoff_scenario().with_overrides(
            period_s=2 * 94 / 1e6,
            arrivals=ArrivalProcess.trace([0.0, 1e-9, 2e-9]),
        )
        with pytest.raises(InfeasiblePlanError) as err:
            optimize_single_user(sc)
        assert err.value.binding == "period_budget"

    def test_one_symbol_stationarity(self):
        sc = reference_tradeoff_scenario(seed=17).with_overrides(
            arrivals=ArrivalProcess.trace([0.0, 0.0001, 0.0002, 0.0004]),
            period_s=0.01,
        )
        plan = optimize_single_user(sc)
        from airdelay.optimize import _single_user_objective, _single_user_setup

        spec, bw, arrivals = _single_user_setup(sc)
        base = _single_user_objective(sc, spec, bw, arrivals, plan.blocklengths)
        budget = sc.period_s * bw
        for i in range(len(plan.blocklengths)):
            for delta in (-1, 1):
                trial = list(plan.blocklengths)
                trial[i] += delta
                if trial[i] < 94 or sum(trial) > budget:
                    continue
                assert _single_user_objective(sc, spec, bw, arrivals, trial) >= base - 1e-18

    def test_payload_constraint_holds(self):
        sc = reference_tradeoff_scenario(seed=2).with_overrides(period_s=0.01)
        plan = optimize_single_user(sc)
        spec = sc.channel_for(0, sc.subchannels)
        for n in plan.blocklengths:
            assert n * fbl.fbl_rate(spec, n, sc.error_target) >= sc.packet_bits
        assert plan.slacks["payload_margin_bits"] >= 0.0

    def test_noma_uses_full_bandwidth_single_queue(self):
        sc = multi_user_scenario(2, seed=3).with_overrides(
            noma=True, arrivals=ArrivalProcess.trace([0.0, 0.0001])
        )
        plan = optimize_single_user(sc)
        assert len(plan.blocklengths) == 2  # one merged queue, not per user


class TestExhaustive:
    def test_matches_independent_enumeration_bit_exact(self):
        sc = multi_user_scenario(2, seed=3)
        plan = optimize_multi_user_exhaustive(sc, LEVELS4)
        oracle = brute_force_static(sc, LEVELS4)
        assert plan.assignment == oracle[0]
        assert plan.tti_s_per_user == oracle[1]
        assert plan.objective_s == oracle[2]  # bit-exact

    def test_single_user_degenerate(self):
        sc = multi_user_scenario(1, seed=5, gains_db=(-95.0,)).with_overrides(
            subchannels=3
        )
        plan = optimize_multi_user_exhaustive(sc, LEVELS4)
        assert plan.assignment == (0, 0, 0)

    def test_symmetric_swap_invariance(self):
        sc = multi_user_scenario(2, seed=3, gains_db=(-96.0, -96.0))
        a = evaluate_static_plan(sc, (0, 1), (LEVELS4[0], LEVELS4[0]))
        b = evaluate_static_plan(sc, (1, 0), (LEVELS4[0], LEVELS4[0]))
        assert a.objective_s == pytest.approx(b.objective_s, rel=1e-12)
        plan = optimize_multi_user_exhaustive(sc, LEVELS4)
        assert sorted(plan.assignment) == [0, 1]  # one subchannel each

    def test_budget_refusal_names_requirement(self):
        sc = multi_user_scenario(3, seed=3)
        with pytest.raises(BudgetExceededError) as err:
            optimize_multi_user_exhaustive(sc, LEVELS4, budget=10)
        assert err.value.required == 3**3 * 4**3

    def test_scale_property_argmin_invariance(self):
        sc = multi_user_scenario(2, seed=6, gains_db=(-92.0, -101.0))
        plan = optimize_multi_user_exhaustive(sc, LEVELS4)
        doubled = sc.with_overrides(
            processing_s=2 * sc.processing_s, propagation_s=2 * sc.propagation_s
        )
        plan2 = optimize_multi_user_exhaustive(doubled, LEVELS4)
        assert plan2.assignment == plan.assignment


class TestGreedy:
    def test_matches_exhaustive_on_symmetric_2x2(self):
        sc = multi_user_scenario(2, seed=3, gains_db=(-96.0, -96.0))
        ex = optimize_multi_user_exhaustive(sc, LEVELS4)
        gr = optimize_multi_user_greedy(sc, LEVELS4)
        assert gr.objective_s == pytest.approx(ex.objective_s, rel=1e-12)

    def test_never_beats_exhaustive(self):
        for seed in range(20):
            users = 1 + seed % 3
            sc = multi_user_scenario(
                users,
                seed=seed,
                gains_db=tuple(-90.0 - 3.0 * ((seed + u) % 5) for u in range(users)),
                rate_per_user=2000.0 + 500.0 * (seed % 4),
            )
            ex = optimize_multi_user_exhaustive(sc, LEVELS4[:3])
            gr = optimize_multi_user_greedy(sc, LEVELS4[:3])
            assert gr.objective_s >= ex.objective_s - 1e-15

    def test_skewed_instance_within_measured_gap(self):
        sc = multi_user_scenario(
            3, seed=12, gains_db=(20.0, 0.0, -20.0)
        ).with_overrides(subchannels=4)
        ex = optimize_multi_user_exhaustive(sc, LEVELS4)
        gr = optimize_multi_user_greedy(sc, LEVELS4)
        assert gr.objective_s >= ex.objective_s - 1e-15
        # gap measured at build time; locked-in bound
        assert gr.objective_s <= ex.objective_s * 1.10

    def test_step_log_monotone(self):
        sc = multi_user_scenario(3, seed=4)
        plan = optimize_multi_user_greedy(sc, LEVELS4)
        objs = [obj for _, _, obj in plan.step_log if math.isfinite(obj)]
        assert all(a >= b - 1e-15 for a, b in zip(objs, objs[1:]))

    def test_dominates_fixed_baselines(self):
        from airdelay.sim import static_split_assignment

        for seed in (0, 1, 2):
            sc = multi_user_scenario(2, seed=seed)
            gr = optimize_multi_user_greedy(sc, DEFAULT_TTI_LEVELS_S)
            split = static_split_assignment(sc.users, sc.subchannels)
            for tti in DEFAULT_TTI_LEVELS_S:
                ev = evaluate_static_plan(sc, split, (tti,) * sc.users)
                if ev.feasible:
                    assert gr.objective_s <= ev.objective_s + 1e-15

    def test_infeasible_coverage(self):
        sc = multi_user_scenario(3, seed=1).with_overrides(subchannels=2)
        with pytest.raises(InfeasiblePlanError) as err:
            optimize_multi_user_greedy(sc, LEVELS4)
        assert err.value.binding == "coverage"


class TestPlanSerialization:
    def test_round_trip(self):
        sc = multi_user_scenario(2, seed=3)
        plan = optimize_multi_user_exhaustive(sc, LEVELS4)
        again = plan_from_json_dict(json.loads(plan.to_json()))
        assert again.assignment == plan.assignment
        assert again.tti_s_per_user == plan.tti_s_per_user
        assert again.objective_s == plan.objective_s

    def test_feasibility_certificate_fields(self):
        sc = multi_user_scenario(2, seed=3)
        plan = optimize_multi_user_exhaustive(sc, LEVELS4)
        assert plan.slacks["period_budget_s"] > 0
        assert plan.slacks["tti_min_s"] > 0
