"""
Over-the-air delay composition and the blocklength tradeoff sweep.

A packet's over-the-air delay is one queue visit plus, per access attempt,
the protocol-weighted transmission / processing / propagation occurrences,
plus a configurable turnaround gap between attempts:

    total = queuing
          + attempts * (c_tx * T_tx + c_proc * T_proc + c_prop * T_prop)
          + (attempts - 1) * retx_gap

The sweep holds one blocklength for every frame and reports how the three
delay legs move against each other.  The queue is served at the rate the
reliability target admits, so shrinking the blocklength squeezes the
service rate (queue grows) while stretching it inflates every frame
(transmission grows); retransmissions enter through the free-running
per-frame error probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import fbl
from .protocols import (
    ContentionConfig,
    Protocol,
    ProtocolProfile,
    attempt_failure_prob,
    gf_collision_prob,
    profile_of,
)
from .scenario import ArrivalKind, Regime, Scenario


@dataclass(frozen=True)
class DelayBreakdown:
    """Per-packet ledger; component fields are attempt-accumulated totals."""

    transmission_s: float
    queuing_s: float
    processing_s: float
    propagation_s: float
    attempts: float
    total_s: float


@dataclass(frozen=True)
class AttemptStats:
    expected: float
    residual_loss: float


def transmission_delay(blocklength: float, bandwidth_hz: float) -> float:
    """Frame duration n / B, i.e. the TTI."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth_hz must be > 0")
    if blocklength < 0:
        raise ValueError("blocklength must be >= 0")
    return blocklength / bandwidth_hz


def expected_attempts(
    error_prob_per_attempt: float, max_attempts: int | None = None
) -> AttemptStats:
    """Truncated-geometric attempt count and the residual loss probability.

    (1 - eps^K) / (1 - eps) attempts for cap K; an unbounded cap
    (``max_attempts`` of None or 0) gives 1 / (1 - eps).
    """
    eps = error_prob_per_attempt
    if not (0.0 <= eps <= 1.0):
        raise ValueError("error probability must lie in [0, 1]")
    unbounded = not max_attempts
    if not unbounded and max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    if eps == 0.0:
        return AttemptStats(1.0, 0.0)
    if eps == 1.0:
        if unbounded:
            return AttemptStats(math.inf, 1.0)
        return AttemptStats(float(max_attempts), 1.0)
    if unbounded:
        return AttemptStats(1.0 / (1.0 - eps), 0.0)
    loss = eps**max_attempts
    return AttemptStats((1.0 - loss) / (1.0 - eps), loss)


def compose_over_the_air(
    *,
    transmission_s: float,
    queuing_s: float,
    processing_s: float,
    propagation_s: float,
    profile: ProtocolProfile,
    attempts: float,
    retx_gap_s: float,
) -> DelayBreakdown:
    """Compose per-occurrence component times into a full breakdown.

    Inputs are the single-occurrence times; queuing is paid once (the
    packet keeps its head-of-line position across retries).
    """
    for name, v in (
        ("transmission_s", transmission_s),
        ("queuing_s", queuing_s),
        ("processing_s", processing_s),
        ("propagation_s", propagation_s),
        ("retx_gap_s", retx_gap_s),
    ):
        if v < 0:
            raise ValueError(f"{name} must be >= 0")
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    tx = attempts * profile.tx_count * transmission_s
    proc = attempts * profile.proc_count * processing_s
    prop = attempts * profile.prop_count * propagation_s
    total = queuing_s + tx + proc + prop + (attempts - 1.0) * retx_gap_s
    return DelayBreakdown(
        transmission_s=tx,
        queuing_s=queuing_s,
        processing_s=proc,
        propagation_s=prop,
        attempts=attempts,
        total_s=total,
    )


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of the uniform-blocklength sweep (CSV row)."""

    n: float
    tti_s: float
    tx_s: float
    queue_s: float
    attempts: float
    eps: float
    total_s: float
    feasible: bool


SWEEP_CSV_COLUMNS = ("n", "tti_s", "tx_s", "queue_s", "attempts", "eps", "total_s", "feasible")


def _mean_queue_wait(
    scenario: Scenario, per_user_rate: float, service_s: float
) -> float:
    """Mean queue wait for one user's stream at the given service time.

    Poisson arrivals use the deterministic-service Pollaczek-Khinchine
    wait; deterministic arrivals wait only when unstable; traces run the
    exact FIFO recursion.
    """
    if service_s == 0.0:
        return 0.0
    kind = scenario.arrivals.kind
    if kind is ArrivalKind.POISSON:
        rho = per_user_rate * service_s
        if rho >= 1.0:
            return math.inf
        return rho * service_s / (2.0 * (1.0 - rho))
    if kind is ArrivalKind.DETERMINISTIC:
        return 0.0 if service_s <= scenario.arrivals.interval_s else math.inf
    # trace: Lindley recursion over the given times
    wait_sum = 0.0
    free = 0.0
    times = sorted(scenario.arrivals.times)
    for t in times:
        start = max(t, free)
        wait_sum += start - t
        free = start + service_s
    return wait_sum / len(times) if times else 0.0


def tradeoff_sweep(
    scenario: Scenario,
    blocklength_grid,
    *,
    rate_override=None,
    eps_override=None,
) -> list[SweepPoint]:
    """Uniform-blocklength delay curve over the grid.

    Every frame in the system uses the same blocklength n.  Per point:
    the queue drains at the rate the reliability target admits at n, the
    packet's own frame spans n/B, and the per-frame error probability runs
    free with n (IBL pins it to zero and the rate to capacity).  Grid
    points below the capacity minimum are marked infeasible rather than
    skipped.  ``rate_override`` / ``eps_override`` are sensitivity hooks
    (callables of the blocklength).
    """
    grid = list(blocklength_grid)
    if not grid:
        raise ValueError("blocklength grid is empty")
    profile = profile_of(scenario.protocol)
    bw = scenario.subchannel_bandwidth_hz
    b = scenario.packet_bits
    users = 1 if scenario.noma else scenario.users
    if scenario.noma:
        bw = scenario.total_bandwidth_hz
    if scenario.protocol is Protocol.GF and users > 1:
        coll = gf_collision_prob(
            ContentionConfig(users, scenario.effective_contention_resources)
        )
    else:
        coll = 0.0
    feedback_s = (
        profile.proc_count * scenario.processing_s
        + profile.prop_count * scenario.propagation_s
    )
    gap_s = scenario.retx_gap_effective_s

    if scenario.arrivals.kind is ArrivalKind.POISSON:
        per_user_rate = scenario.arrivals.rate_pkts_per_s
    else:
        per_user_rate = 0.0  # only used for the Poisson branch

    points: list[SweepPoint] = []
    for n in grid:
        user_specs = [scenario.channel_for(u) for u in range(users)]
        ibl_min = max(fbl.min_blocklength_ibl(s, b) for s in user_specs)
        if n < ibl_min:
            points.append(
                SweepPoint(n, transmission_delay(n, bw), math.nan, math.nan,
                           math.nan, math.nan, math.nan, False))
            continue

        totals, queues, txs, atts, epss = [], [], [], [], []
        for spec in user_specs:
            if scenario.regime is Regime.IBL:
                service_rate = fbl.capacity(spec)
                eps_att = 0.0
            else:
                service_rate = fbl.fbl_rate(spec, n, scenario.error_target)
                eps_att = fbl.error_prob(spec, n, b)
            if rate_override is not None:
                service_rate = rate_override(n)
            if eps_override is not None:
                eps_att = eps_override(n)

            fail = attempt_failure_prob(eps_att, coll)
            stats = expected_attempts(fail, scenario.max_attempts)
            a = stats.expected
            tti = transmission_delay(n, bw)
            if service_rate <= 0.0:
                queue_wait = math.inf
            else:
                service_s = a * (b / (service_rate * bw)) + (a - 1.0) * (feedback_s + gap_s)
                queue_wait = _mean_queue_wait(scenario, per_user_rate, service_s)
            bd = compose_over_the_air(
                transmission_s=tti,
                queuing_s=queue_wait,
                processing_s=scenario.processing_s,
                propagation_s=scenario.propagation_s,
                profile=profile,
                attempts=a,
                retx_gap_s=gap_s,
            )
            totals.append(bd.total_s)
            queues.append(queue_wait)
            txs.append(bd.transmission_s)
            atts.append(a)
            epss.append(fail)

        points.append(SweepPoint(
            n=n,
            tti_s=transmission_delay(n, bw),
            tx_s=sum(txs) / users,
            queue_s=sum(queues) / users,
            attempts=sum(atts) / users,
            eps=sum(epss) / users,
            total_s=sum(totals) / users,
            feasible=True,
        ))
    return points


def sweep_argmin(points: list[SweepPoint]) -> int | None:
    """Index of the feasible point with the smallest finite total, or None."""
    best = None
    for i, p in enumerate(points):
        if not p.feasible or not math.isfinite(p.total_s):
            continue
        if best is None or p.total_s < points[best].total_s:
            best = i
    return best
