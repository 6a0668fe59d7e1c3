"""
Adaptive-blocklength optimizers.

Single-user (or NOMA single-queue) scenarios get a continuous per-packet
blocklength vector tuned by cyclic coordinate descent with golden-section
line searches, multi-started and polished to one-symbol stationarity.

Multi-user OMA scenarios get a static subchannel->user assignment plus a
per-user TTI from a discrete level set, solved exactly by bounded
exhaustive enumeration or approximately by marginal-improvement greedy
assignment followed by coordinate descent over the levels.  Objectives
are evaluated in expectation mode so search comparisons are exact and
reproducible.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

from . import fbl
from .delay import expected_attempts
from .protocols import (
    ContentionConfig,
    Protocol,
    attempt_failure_prob,
    gf_collision_prob,
    profile_of,
)
from .scenario import Regime, Scenario
from .sim import (
    FixedTtiInfeasibleError,
    frame_error_prob,
    generate_arrivals,
    segments_needed,
    static_split_assignment,
)

#: Fixed-TTI baselines: the LTE duration and the four NR durations.
BASELINE_TTIS_S = (1e-3, 0.5e-3, 0.25e-3, 0.125e-3, 0.0625e-3)

#: Default level set for the discrete solvers (baselines are a subset).
DEFAULT_TTI_LEVELS_S = tuple(sorted(BASELINE_TTIS_S))

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class InfeasiblePlanError(Exception):
    """No feasible plan exists; names the binding constraint."""

    def __init__(self, binding: str, detail: str = ""):
        self.binding = binding
        self.detail = detail
        super().__init__(f"infeasible: {binding}" + (f" ({detail})" if detail else ""))


class BudgetExceededError(Exception):
    """Exhaustive enumeration would exceed the evaluation budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"exhaustive search needs {required} evaluations, budget is {budget}"
        )


@dataclass(frozen=True)
class AllocationPlan:
    """A solved plan plus its objective and feasibility certificate."""

    kind: str                                   # "single_user" | "multi_user"
    objective_s: float
    slacks: dict
    assignment: tuple[int, ...] | None = None   # subchannel -> user
    tti_s_per_user: tuple[float, ...] | None = None
    segments_per_user: tuple[int, ...] | None = None
    blocklengths: tuple[int, ...] | None = None  # single-user, per packet

    def to_json_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "objective_s": self.objective_s,
            "slacks": self.slacks,
        }
        if self.assignment is not None:
            d["assignment"] = list(self.assignment)
        if self.tti_s_per_user is not None:
            d["tti_s_per_user"] = list(self.tti_s_per_user)
        if self.segments_per_user is not None:
            d["segments_per_user"] = list(self.segments_per_user)
        if self.blocklengths is not None:
            d["blocklengths"] = list(self.blocklengths)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def plan_from_json_dict(d: dict) -> AllocationPlan:
    return AllocationPlan(
        kind=d["kind"],
        objective_s=d["objective_s"],
        slacks=d.get("slacks", {}),
        assignment=tuple(d["assignment"]) if "assignment" in d else None,
        tti_s_per_user=tuple(d["tti_s_per_user"]) if "tti_s_per_user" in d else None,
        segments_per_user=(
            tuple(d["segments_per_user"]) if "segments_per_user" in d else None
        ),
        blocklengths=tuple(d["blocklengths"]) if "blocklengths" in d else None,
    )


# ---------------------------------------------------------------------------
# static-plan evaluation (shared by exhaustive, greedy, and the baselines)
# ---------------------------------------------------------------------------

@dataclass
class PlanEval:
    feasible: bool
    objective_s: float
    tti_s_per_user: tuple[float, ...] = ()
    segments_per_user: tuple[int, ...] = ()
    covered: bool = True
    max_departure_s: float = 0.0
    nominal_busy_s: float = 0.0
    reason: str = ""


def _realize_tti(tti_s: float, bandwidth_hz: float) -> float:
    """Round the implied blocklength up to an integer symbol count."""
    n = math.ceil(tti_s * bandwidth_hz - 1e-9)
    return max(1, n) / bandwidth_hz


def evaluate_static_plan(
    scenario: Scenario,
    assignment: tuple[int, ...],
    tti_s_per_user,
    *,
    drop_penalty_s: float | None = None,
) -> PlanEval:
    """Expectation-mode objective of a static assignment + per-user TTIs.

    Users owning no subchannel contribute one drop penalty per packet
    (default penalty: the period).  Per-user segment counts are derived
    from the TTI so every frame meets the reliability target.
    """
    users = 1 if scenario.noma else scenario.users
    if len(assignment) != scenario.subchannels:
        raise ValueError("assignment must name one user per subchannel")
    # -1 marks an idle subchannel (used by greedy's partial states)
    penalty = scenario.period_s if drop_penalty_s is None else drop_penalty_s
    profile = profile_of(scenario.protocol)
    feedback = (
        profile.proc_count * scenario.processing_s
        + profile.prop_count * scenario.propagation_s
    )
    gap = scenario.retx_gap_effective_s
    coll = 0.0
    if scenario.protocol is Protocol.GF and users > 1:
        coll = gf_collision_prob(
            ContentionConfig(users, scenario.effective_contention_resources)
        )

    arrivals = generate_arrivals(scenario)
    owned = [sum(1 for u in assignment if u == user) for user in range(users)]

    ttis_eff: list[float] = []
    segments: list[int] = []
    total_delay = 0.0
    n_packets = sum(len(a) for a in arrivals)
    covered = True
    max_departure = 0.0
    busy = 0.0

    for user in range(users):
        k = owned[user]
        times = arrivals[user]
        if k == 0:
            ttis_eff.append(0.0)
            segments.append(0)
            if times:
                covered = False
                total_delay += penalty * len(times)
            continue
        bw = scenario.subchannel_bandwidth_hz * k
        tti_eff = _realize_tti(tti_s_per_user[user], bw)
        spec = scenario.channel_for(user, k)
        n_block = tti_eff * bw
        try:
            m = segments_needed(spec, n_block, scenario.packet_bits,
                                scenario.error_target, scenario.regime)
        except FixedTtiInfeasibleError as e:
            return PlanEval(False, math.inf, reason=str(e))
        ttis_eff.append(tti_eff)
        segments.append(m)

        eps_frame = frame_error_prob(spec, n_block, scenario.packet_bits, m,
                                     scenario.regime)
        eps_att = attempt_failure_prob(eps_frame, coll)
        a = expected_attempts(eps_att, scenario.max_attempts).expected
        span = profile.tx_count * m * tti_eff
        free = 0.0
        for t in times:
            start = max(t, free)
            free = start + a * span + (a - 1.0) * (feedback + gap)
            departure = start + a * (span + feedback) + (a - 1.0) * gap
            total_delay += departure - t
            max_departure = max(max_departure, departure)
        busy = max(busy, len(times) * m * tti_eff)

    objective = total_delay / n_packets if n_packets else 0.0
    return PlanEval(
        feasible=True,
        objective_s=objective,
        tti_s_per_user=tuple(ttis_eff),
        segments_per_user=tuple(segments),
        covered=covered,
        max_departure_s=max_departure,
        nominal_busy_s=busy,
    )


def _plan_slacks(scenario: Scenario, ev: PlanEval) -> dict:
    return {
        "period_budget_s": scenario.period_s - ev.nominal_busy_s,
        "max_departure_s": ev.max_departure_s,
        "tti_min_s": min((t for t in ev.tti_s_per_user if t > 0), default=0.0),
    }


def _finish_multi_user_plan(scenario, assignment, ttis, ev) -> AllocationPlan:
    return AllocationPlan(
        kind="multi_user",
        objective_s=ev.objective_s,
        slacks=_plan_slacks(scenario, ev),
        assignment=tuple(assignment),
        tti_s_per_user=ev.tti_s_per_user,
        segments_per_user=ev.segments_per_user,
    )


def _users_with_traffic(scenario: Scenario) -> tuple[int, ...]:
    arrivals = generate_arrivals(scenario)
    return tuple(u for u, a in enumerate(arrivals) if a)


# ---------------------------------------------------------------------------
# multi-user exhaustive
# ---------------------------------------------------------------------------

def optimize_multi_user_exhaustive(
    scenario: Scenario,
    tti_levels_s=DEFAULT_TTI_LEVELS_S,
    *,
    budget: int = 10**7,
) -> AllocationPlan:
    """Global optimum over static assignments x per-user TTI levels.

    Ties break on the lexicographically smallest assignment vector, then
    the smallest total TTI.  Refuses with the required budget when the
    enumeration is too large.
    """
    users = 1 if scenario.noma else scenario.users
    levels = tuple(sorted(set(tti_levels_s)))
    required = users**scenario.subchannels * len(levels) ** users
    if required > budget:
        raise BudgetExceededError(required, budget)

    traffic = set(_users_with_traffic(scenario))
    best: tuple[float, tuple[int, ...], float] | None = None
    best_plan: AllocationPlan | None = None
    for assignment in itertools.product(range(users), repeat=scenario.subchannels):
        if traffic - set(assignment):
            continue  # someone with packets is unserved
        for ttis in itertools.product(levels, repeat=users):
            ev = evaluate_static_plan(scenario, assignment, ttis)
            if not ev.feasible:
                continue
            key = (ev.objective_s, assignment, sum(ttis))
            if best is None or key < best:
                best = key
                best_plan = _finish_multi_user_plan(scenario, assignment, ttis, ev)
    if best_plan is None:
        raise InfeasiblePlanError(
            "coverage",
            f"no assignment of {scenario.subchannels} subchannels serves all "
            f"{len(traffic)} users with traffic at any TTI level",
        )
    return best_plan


# ---------------------------------------------------------------------------
# multi-user greedy
# ---------------------------------------------------------------------------

def _descend_ttis(scenario, assignment, ttis, levels, log):
    """Per-user coordinate descent over the level set; strict improvements only."""
    ttis = list(ttis)
    current = evaluate_static_plan(scenario, assignment, ttis)
    improved = True
    while improved:
        improved = False
        users = len(ttis)
        for user in range(users):
            best_level, best_ev = ttis[user], current
            for level in levels:
                if level == ttis[user]:
                    continue
                trial = list(ttis)
                trial[user] = level
                ev = evaluate_static_plan(scenario, assignment, trial)
                if ev.feasible and ev.objective_s < best_ev.objective_s:
                    best_level, best_ev = level, ev
            if best_level != ttis[user]:
                ttis[user] = best_level
                current = best_ev
                log.append(("tti", tuple(ttis), current.objective_s))
                improved = True
    return tuple(ttis), current


def optimize_multi_user_greedy(
    scenario: Scenario,
    tti_levels_s=DEFAULT_TTI_LEVELS_S,
) -> AllocationPlan:
    """Greedy assignment + TTI coordinate descent, seeded against baselines.

    Subchannels are handed out one at a time to the user whose gain of
    holding them improves the penalized objective most; the resulting plan
    then competes with every fixed-TTI static-split baseline before a
    final descent, so the returned objective never trails a baseline.
    The per-step objective log is non-increasing on sane instances.
    """
    users = 1 if scenario.noma else scenario.users
    levels = tuple(sorted(set(tti_levels_s)))
    log: list[tuple[str, tuple, float]] = []

    init_tti = levels[len(levels) // 2]
    ttis = tuple([init_tti] * users)
    assignment = [-1] * scenario.subchannels  # -1 = not handed out yet

    # greedy hand-out, one subchannel per step
    for s in range(scenario.subchannels):
        best_user, best_obj = None, math.inf
        for u in range(users):
            trial = list(assignment)
            trial[s] = u
            ev = evaluate_static_plan(scenario, tuple(trial), ttis)
            obj = ev.objective_s if ev.feasible else math.inf
            if obj < best_obj:
                best_user, best_obj = u, obj
        assignment[s] = best_user if best_user is not None else 0
        log.append(("assign", tuple(assignment), best_obj))

    assignment = tuple(assignment)
    traffic = set(_users_with_traffic(scenario))
    if traffic - set(assignment):
        raise InfeasiblePlanError(
            "coverage",
            f"greedy left users {sorted(traffic - set(assignment))} unserved",
        )

    ttis, current = _descend_ttis(scenario, assignment, ttis, levels, log)
    if not current.feasible:
        raise InfeasiblePlanError("reliability", current.reason)

    # baseline dominance guard: every fixed-TTI static-split plan competes
    split = static_split_assignment(users, scenario.subchannels)
    candidates = [(assignment, ttis, current)]
    if users <= scenario.subchannels:
        for tti in BASELINE_TTIS_S:
            ev = evaluate_static_plan(scenario, split, (tti,) * users)
            if ev.feasible:
                candidates.append((split, (tti,) * users, ev))
    for level in levels:
        ev = evaluate_static_plan(scenario, assignment, (level,) * users)
        if ev.feasible:
            candidates.append((assignment, (level,) * users, ev))
    best_asg, best_ttis, best_ev = min(
        candidates, key=lambda c: (c[2].objective_s, c[0], sum(c[1]))
    )
    if best_ev.objective_s < current.objective_s:
        log.append(("guard", best_asg, best_ev.objective_s))
        best_ttis, best_ev = _descend_ttis(scenario, best_asg, best_ttis, levels, log)
    else:
        best_asg, best_ttis, best_ev = assignment, ttis, current

    plan = _finish_multi_user_plan(scenario, best_asg, best_ttis, best_ev)
    object.__setattr__(plan, "step_log", log)  # diagnostic trail, not part of identity
    return plan


# ---------------------------------------------------------------------------
# single-user / NOMA continuous blocklength vector
# ---------------------------------------------------------------------------

def _single_user_setup(scenario: Scenario):
    if not scenario.noma and scenario.users != 1:
        raise ValueError("single-user solver requires users == 1 or the NOMA flag")
    spec = scenario.channel_for(0, scenario.subchannels)
    bw = scenario.total_bandwidth_hz
    arrivals = sorted(t for times in generate_arrivals(scenario) for t in times)
    return spec, bw, arrivals


def _single_user_objective(scenario, spec, bw, arrivals, ns) -> float:
    profile = profile_of(scenario.protocol)
    feedback = (
        profile.proc_count * scenario.processing_s
        + profile.prop_count * scenario.propagation_s
    )
    gap = scenario.retx_gap_effective_s
    b = scenario.packet_bits
    free = 0.0
    total = 0.0
    for t, n in zip(arrivals, ns):
        eps = frame_error_prob(spec, n, b, 1, scenario.regime)
        a = expected_attempts(eps, scenario.max_attempts).expected
        span = profile.tx_count * (n / bw)
        start = max(t, free)
        free = start + a * span + (a - 1.0) * (feedback + gap)
        total += (start - t) + a * (span + feedback) + (a - 1.0) * gap
    return total / len(ns)


def _golden_min(f, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimizer on [lo, hi] for a scalar unimodal-ish f."""
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return x1 if f1 <= f2 else x2


def optimize_single_user(scenario: Scenario, *, max_cycles: int = 6) -> AllocationPlan:
    """Minimize average over-the-air delay over per-packet blocklengths.

    Constraints: every frame carries the packet at the error target, the
    blocklength sum fits the period, blocklengths stay nonnegative.
    Multi-start (all-minimum and equal-split) cyclic coordinate descent
    with golden-section refinement, then integer realization and a
    one-symbol stationarity polish.
    """
    spec, bw, arrivals = _single_user_setup(scenario)
    n_packets = len(arrivals)
    b = scenario.packet_bits
    if n_packets == 0:
        return AllocationPlan(
            kind="single_user", objective_s=0.0,
            slacks={"period_budget_s": scenario.period_s}, blocklengths=(),
        )

    if scenario.regime is Regime.IBL:
        n_min_int = fbl.min_blocklength_ibl(spec, b)
        n_min = b / fbl.capacity(spec)
    else:
        n_min_int = fbl.min_blocklength(spec, b, scenario.error_target)
        n_min = fbl.min_blocklength_continuous(spec, b, scenario.error_target)

    budget_symbols = scenario.period_s * bw
    if n_packets * n_min_int > budget_symbols:
        raise InfeasiblePlanError(
            "period_budget",
            f"{n_packets} packets need at least {n_packets * n_min_int} symbols, "
            f"period holds {budget_symbols:.0f}",
        )

    def objective(ns):
        return _single_user_objective(scenario, spec, bw, arrivals, ns)

    def coordinate_descent(ns):
        ns = list(ns)
        best = objective(ns)
        for _ in range(max_cycles):
            changed = False
            for i in range(n_packets):
                slack = budget_symbols - sum(ns)
                lo, hi = n_min, ns[i] + max(0.0, slack)
                if hi <= lo:
                    continue

                def f(x, i=i):
                    trial = ns[i]
                    ns[i] = x
                    val = objective(ns)
                    ns[i] = trial
                    return val

                x = _golden_min(f, lo, hi, tol=0.25)
                val = f(x)
                if val < best - 1e-15:
                    ns[i] = x
                    best = val
                    changed = True
            if not changed:
                break
        return ns, best

    starts = [[n_min] * n_packets]
    equal = max(n_min, min(budget_symbols / n_packets, n_min * 8))
    starts.append([equal] * n_packets)
    best_ns, best_val = None, math.inf
    for start in starts:
        ns, val = coordinate_descent(start)
        if val < best_val:
            best_ns, best_val = ns, val

    # integer realization with budget repair
    ints = [max(n_min_int, math.ceil(n - 1e-9)) for n in best_ns]
    while sum(ints) > budget_symbols:
        idx = max(
            (i for i in range(n_packets) if ints[i] > n_min_int),
            key=lambda i: ints[i],
            default=None,
        )
        if idx is None:
            break
        ints[idx] -= 1

    # one-symbol stationarity polish
    best = objective(ints)
    for _ in range(10 * n_packets):
        improved = False
        for i in range(n_packets):
            for delta in (-1, 1):
                trial = ints[i] + delta
                if trial < n_min_int:
                    continue
                if delta > 0 and sum(ints) + 1 > budget_symbols:
                    continue
                ints[i] = trial
                val = objective(ints)
                if val < best - 1e-18:
                    best = val
                    improved = True
                else:
                    ints[i] -= delta
        if not improved:
            break

    rates = [
        fbl.capacity(spec) if scenario.regime is Regime.IBL
        else fbl.fbl_rate(spec, n, scenario.error_target)
        for n in ints
    ]
    slacks = {
        "period_budget_s": scenario.period_s - sum(ints) / bw,
        "payload_margin_bits": min(n * r - b for n, r in zip(ints, rates)),
        "blocklength_min": float(min(ints)),
    }
    return AllocationPlan(
        kind="single_user",
        objective_s=best,
        slacks=slacks,
        blocklengths=tuple(ints),
    )
