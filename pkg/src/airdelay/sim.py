"""
Discrete-event simulation of the variable-TTI queuing process.

Per-user FIFO queues, per-packet frame decisions supplied by a policy,
sampled or analytic retransmissions, and grant-free contention between
time-overlapping attempts.

Timeline of one packet with frame TTI t on its user's subchannels:

    service_start                                       departure
        |--- tx (c_tx * t) ---|--- feedback ---|- gap -|--- ... ---|
        attempt 1 window       proc/prop legs   retry turnaround

The subchannels are held from service start until the final attempt's
transmission ends (the acknowledgement is pipelined), so the next packet
of the same user starts right after the last transmission.  The feedback
time is the attempt's own processing/propagation occurrence cost; the
extra retransmission gap is configurable per scenario.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import fbl
from .delay import DelayBreakdown, expected_attempts
from .protocols import (
    ContentionConfig,
    Protocol,
    attempt_failure_prob,
    gf_collision_prob,
    profile_of,
)
from .scenario import ArrivalKind, Regime, Scenario


class SchedulingConflictError(RuntimeError):
    """A policy granted a subchannel that another user currently holds."""


class FixedTtiInfeasibleError(ValueError):
    """A fixed block is too small to carry any payload at the error target."""


@dataclass(frozen=True)
class FrameAlloc:
    """One frame decision: subchannel set, per-block TTI, segment count."""

    user: int
    subchannel_ids: tuple[int, ...]
    tti_s: float
    segments: int = 1

    def __post_init__(self):
        if self.tti_s <= 0:
            raise ValueError("tti_s must be > 0")
        if self.segments < 1:
            raise ValueError("segments must be >= 1")
        if len(set(self.subchannel_ids)) != len(self.subchannel_ids):
            raise ValueError("duplicate subchannel ids in allocation")

    def blocklength_symbols(self, scenario: Scenario) -> float:
        bw = scenario.subchannel_bandwidth_hz * len(self.subchannel_ids)
        return self.tti_s * bw


@dataclass
class Packet:
    id: int
    user: int
    arrival_s: float


@dataclass(frozen=True)
class PacketRecord:
    id: int
    user: int
    arrival_s: float
    service_start_s: float
    attempts: float
    departure_s: float
    dropped: bool
    breakdown: DelayBreakdown


@dataclass
class SimStats:
    avg_over_the_air_s: float
    total_time_s: float
    served: int
    dropped: float
    records: list[PacketRecord] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "avg_over_the_air_s": self.avg_over_the_air_s,
            "total_time_s": self.total_time_s,
            "served": self.served,
            "dropped": self.dropped,
            "packets": [
                {
                    "id": r.id,
                    "user": r.user,
                    "arrival_s": r.arrival_s,
                    "start_s": r.service_start_s,
                    "attempts": r.attempts,
                    "departure_s": r.departure_s,
                    "dropped": r.dropped,
                    "queue_s": r.breakdown.queuing_s,
                    "tx_s": r.breakdown.transmission_s,
                    "total_s": r.breakdown.total_s,
                }
                for r in self.records
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


PACKET_CSV_COLUMNS = (
    "id", "user", "arrival_s", "start_s", "attempts",
    "departure_s", "dropped", "queue_s", "tx_s", "total_s",
)


def packet_csv_rows(stats: SimStats):
    """Rows matching :data:`PACKET_CSV_COLUMNS`."""
    for r in stats.records:
        yield (
            r.id, r.user, repr(r.arrival_s), repr(r.service_start_s),
            repr(r.attempts), repr(r.departure_s), int(r.dropped),
            repr(r.breakdown.queuing_s), repr(r.breakdown.transmission_s),
            repr(r.breakdown.total_s),
        )


def _arrival_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def _attempt_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))


def generate_arrivals(scenario: Scenario, seed: int | None = None) -> list[list[float]]:
    """Per-user sorted arrival times within [0, period).

    Deterministic given the seed.  Trace mode echoes the configured times
    for every user; deterministic mode starts at zero.
    """
    if seed is None:
        seed = scenario.seed
    proc = scenario.arrivals
    users = 1 if scenario.noma else scenario.users
    if proc.kind is ArrivalKind.TRACE:
        times = sorted(proc.times)
        return [list(times) for _ in range(users)]
    if proc.kind is ArrivalKind.DETERMINISTIC:
        times = []
        t = 0.0
        k = 0
        while t < scenario.period_s and not math.isclose(t, scenario.period_s):
            times.append(t)
            k += 1
            t = k * proc.interval_s
        return [list(times) for _ in range(users)]
    rng = _arrival_rng(seed)
    out = []
    for _ in range(users):
        times = []
        t = rng.exponential(1.0 / proc.rate_pkts_per_s)
        while t < scenario.period_s:
            times.append(t)
            t += rng.exponential(1.0 / proc.rate_pkts_per_s)
        out.append(times)
    return out


def _make_packets(arrivals: list[list[float]]) -> list[Packet]:
    """Flatten per-user arrivals into globally ordered, id-stamped packets."""
    flat = sorted(
        ((t, u) for u, times in enumerate(arrivals) for t in times),
        key=lambda x: (x[0], x[1]),
    )
    return [Packet(i, u, t) for i, (t, u) in enumerate(flat)]


def frame_error_prob(spec, n_block: float, bits: float, segments: int,
                     regime: Regime) -> float:
    """Per-attempt failure of one frame of ``segments`` blocks.

    Bits split evenly over the blocks; the attempt fails if any block
    fails.  IBL is a hard feasibility step.
    """
    if regime is Regime.IBL:
        carried = segments * n_block * fbl.capacity(spec)
        return 0.0 if carried >= bits else 1.0
    per_block = max(1.0, bits / segments)
    eps_block = fbl.error_prob(spec, n_block, per_block)
    if segments == 1:
        return eps_block
    return 1.0 - (1.0 - eps_block) ** segments


def segments_needed(spec, n_block: float, bits: int, error_target: float,
                    regime: Regime, *, max_segments: int = 256) -> int:
    """Smallest number of consecutive blocks carrying ``bits`` at the target.

    The per-block error budget shrinks as 1 - (1 - target)^(1/m) so the
    whole-packet failure stays within the target.  Raises
    :class:`FixedTtiInfeasibleError` when no segment count works.
    """
    if regime is Regime.IBL:
        cap = n_block * fbl.capacity(spec)
        if cap <= 0:
            raise FixedTtiInfeasibleError("zero capacity block")
        return max(1, math.ceil(bits / cap))
    for m in range(1, max_segments + 1):
        eps_seg = -math.expm1(math.log1p(-error_target) / m)
        if fbl.max_payload_bits(spec, n_block, eps_seg) * m >= bits:
            return m
    raise FixedTtiInfeasibleError(
        f"block of {n_block:g} symbols carries no {bits}-bit packet at "
        f"error target {error_target:g} within {max_segments} segments"
    )


# ---------------------------------------------------------------------------
# core engine
# ---------------------------------------------------------------------------

_ARRIVAL, _TX_START, _TX_END = 0, 1, 2


@dataclass
class _Service:
    packet: Packet
    alloc: FrameAlloc
    eps_att: float
    start_s: float
    attempt: int = 0
    tx_start_s: float = 0.0
    tx_accum_s: float = 0.0
    decode_fail: bool = False
    resource: int = -1


class _Engine:
    """Shared event machinery for sampled and expectation modes."""

    def __init__(self, scenario: Scenario, policy, mode: str, seed: int):
        if mode not in ("sampled", "expectation"):
            raise ValueError("mode must be 'sampled' or 'expectation'")
        self.sc = scenario
        self.policy = policy
        self.mode = mode
        self.profile = profile_of(scenario.protocol)
        self.rng = _attempt_rng(seed)
        self.users = 1 if scenario.noma else scenario.users
        self.feedback_s = (
            self.profile.proc_count * scenario.processing_s
            + self.profile.prop_count * scenario.propagation_s
        )
        self.gap_s = scenario.retx_gap_effective_s
        self.queues: list[list[Packet]] = [[] for _ in range(self.users)]
        self.active: list[_Service | None] = [None] * self.users
        self.sub_owner: dict[int, int] = {}
        self.attempt_log: list[tuple[float, float, int, int]] = []  # start, end, user, resource
        self.records: list[PacketRecord] = []
        self.static_collision = 0.0
        if scenario.protocol is Protocol.GF and self.users > 1:
            self.static_collision = gf_collision_prob(
                ContentionConfig(self.users, scenario.effective_contention_resources)
            )

    # -- helpers ---------------------------------------------------------

    def channel(self, user: int, k: int):
        return self.sc.channel_for(user, k)

    def tx_span(self, alloc: FrameAlloc) -> float:
        return self.profile.tx_count * alloc.segments * alloc.tti_s

    def attempt_eps(self, alloc: FrameAlloc) -> float:
        spec = self.channel(alloc.user, len(alloc.subchannel_ids))
        n_block = alloc.blocklength_symbols(self.sc)
        return frame_error_prob(
            spec, n_block, self.sc.packet_bits, alloc.segments, self.sc.regime
        )

    def finish_record(self, svc: _Service, attempts: float, departure: float,
                      dropped: bool):
        tx_occurrence = svc.alloc.segments * svc.alloc.tti_s
        queuing = svc.start_s - svc.packet.arrival_s
        bd = DelayBreakdown(
            transmission_s=attempts * self.profile.tx_count * tx_occurrence,
            queuing_s=queuing,
            processing_s=attempts * self.profile.proc_count * self.sc.processing_s,
            propagation_s=attempts * self.profile.prop_count * self.sc.propagation_s,
            attempts=attempts,
            total_s=departure - svc.packet.arrival_s,
        )
        self.records.append(PacketRecord(
            id=svc.packet.id,
            user=svc.packet.user,
            arrival_s=svc.packet.arrival_s,
            service_start_s=svc.start_s,
            attempts=attempts,
            departure_s=departure,
            dropped=dropped,
            breakdown=bd,
        ))

    def stats(self) -> SimStats:
        self.records.sort(key=lambda r: r.id)
        delivered = [r for r in self.records if not r.dropped]
        avg = (
            sum(r.breakdown.total_s for r in delivered) / len(delivered)
            if delivered else math.nan
        )
        total_time = max((r.departure_s for r in self.records), default=0.0)
        dropped = sum(1 for r in self.records if r.dropped)
        loss_mass = getattr(self, "_loss_mass", 0.0)  # expectation-mode mass
        if loss_mass:
            dropped += loss_mass
        return SimStats(
            avg_over_the_air_s=avg,
            total_time_s=total_time,
            served=len(delivered),
            dropped=dropped,
            records=self.records,
        )

    # -- sampled event loop ----------------------------------------------

    def run_sampled(self, packets: list[Packet]) -> SimStats:
        events: list[tuple[float, int, int, object]] = []
        seq = 0
        for p in packets:
            heapq.heappush(events, (p.arrival_s, seq, _ARRIVAL, p))
            seq += 1

        def try_start(user: int, now: float):
            nonlocal seq
            if self.active[user] is not None or not self.queues[user]:
                return
            packet = self.queues[user][0]
            alloc = self.policy(user, packet, now)
            self._validate_alloc(user, alloc)
            for s in alloc.subchannel_ids:
                owner = self.sub_owner.get(s)
                if owner is not None and owner != user:
                    raise SchedulingConflictError(
                        f"subchannel {s} requested for user {user} at t={now:g} "
                        f"is held by user {owner} (packet {packet.id})"
                    )
                self.sub_owner[s] = user
            svc = _Service(
                packet=packet,
                alloc=alloc,
                eps_att=self.attempt_eps(alloc),
                start_s=now,
            )
            self.active[user] = svc
            self._begin_attempt(svc, now, events)

        while events:
            now, _, kind, payload = heapq.heappop(events)
            if kind == _ARRIVAL:
                p: Packet = payload
                self.queues[p.user].append(p)
                try_start(p.user, now)
            elif kind == _TX_START:
                svc: _Service = payload
                self._begin_attempt(svc, now, events)
            else:  # _TX_END
                svc = payload
                user = svc.packet.user
                end = now
                failed = svc.decode_fail or self._collided(svc, end)
                capped = (
                    self.sc.max_attempts > 0
                    and svc.attempt >= self.sc.max_attempts
                )
                if not failed or capped:
                    departure = end + self.feedback_s
                    for s in svc.alloc.subchannel_ids:
                        if self.sub_owner.get(s) == user:
                            del self.sub_owner[s]
                    self.queues[user].pop(0)
                    self.active[user] = None
                    self.finish_record(svc, float(svc.attempt), departure,
                                       dropped=bool(failed))
                    try_start(user, end)
                else:
                    retry_at = end + self.feedback_s + self.gap_s
                    heapq.heappush(
                        events, (retry_at, self._next_seq(), _TX_START, svc)
                    )
        return self.stats()

    def _next_seq(self) -> int:
        # monotone tiebreaker for same-time events
        self._seq = getattr(self, "_seq", 10**9) + 1
        return self._seq

    def _begin_attempt(self, svc: _Service, now: float, events):
        svc.attempt += 1
        svc.tx_start_s = now
        svc.tx_accum_s += self.tx_span(svc.alloc)
        svc.decode_fail = bool(self.rng.random() < svc.eps_att)
        if self.profile.protocol is Protocol.GF:
            svc.resource = int(
                self.rng.integers(0, self.sc.effective_contention_resources)
            )
        else:
            svc.resource = -1
        end = now + self.tx_span(svc.alloc)
        if svc.resource >= 0:
            self.attempt_log.append((now, end, svc.packet.user, svc.resource))
        heapq.heappush(events, (end, self._next_seq(), _TX_END, svc))

    def _collided(self, svc: _Service, end: float) -> bool:
        if svc.resource < 0:
            return False
        start = svc.tx_start_s
        for o_start, o_end, o_user, o_res in self.attempt_log:
            if o_user == svc.packet.user:
                continue
            if o_res == svc.resource and o_start < end and start < o_end:
                return True
        return False

    def _validate_alloc(self, user: int, alloc: FrameAlloc):
        if alloc.user != user:
            raise SchedulingConflictError(
                f"policy returned a frame for user {alloc.user} while serving {user}"
            )
        if not alloc.subchannel_ids:
            raise ValueError("allocation must name at least one subchannel")
        for s in alloc.subchannel_ids:
            if not (0 <= s < self.sc.subchannels):
                raise ValueError(f"subchannel id {s} out of range")

    # -- expectation mode --------------------------------------------------

    def run_expectation(self, packets: list[Packet]) -> SimStats:
        per_user: list[list[Packet]] = [[] for _ in range(self.users)]
        for p in packets:
            per_user[p.user].append(p)
        claimed: dict[int, int] = {}
        self._loss_mass = 0.0
        for user, queue in enumerate(per_user):
            free = 0.0
            for packet in queue:
                alloc = self.policy(user, packet, max(packet.arrival_s, free))
                self._validate_alloc(user, alloc)
                for s in alloc.subchannel_ids:
                    holder = claimed.setdefault(s, user)
                    if holder != user:
                        raise SchedulingConflictError(
                            f"subchannel {s} used by users {holder} and {user}; "
                            "expectation mode requires time-invariant ownership"
                        )
                eps = attempt_failure_prob(
                    self.attempt_eps(alloc), self.static_collision
                )
                stats = expected_attempts(eps, self.sc.max_attempts)
                a = stats.expected
                self._loss_mass += stats.residual_loss
                span = self.tx_span(alloc)
                start = max(packet.arrival_s, free)
                free = start + a * span + (a - 1.0) * (self.feedback_s + self.gap_s)
                departure = (
                    start + a * (span + self.feedback_s) + (a - 1.0) * self.gap_s
                )
                svc = _Service(packet=packet, alloc=alloc, eps_att=eps, start_s=start)
                self.finish_record(svc, a, departure, dropped=False)
        return self.stats()


def simulate(scenario: Scenario, policy, *, mode: str = "sampled",
             seed: int | None = None) -> SimStats:
    """Run the queuing process under a per-packet frame policy.

    ``policy(user, packet, now) -> FrameAlloc`` is consulted once per
    packet when it reaches the head of its queue; retries reuse the same
    frame.  ``mode='expectation'`` replaces sampling by analytic attempt
    counts (deterministic, used inside search loops).
    """
    if seed is None:
        seed = scenario.seed
    engine = _Engine(scenario, policy, mode, seed)
    packets = _make_packets(generate_arrivals(scenario, seed))
    if mode == "sampled":
        return engine.run_sampled(packets)
    return engine.run_expectation(packets)


# ---------------------------------------------------------------------------
# canned policies
# ---------------------------------------------------------------------------

def static_split_assignment(users: int, subchannels: int) -> tuple[int, ...]:
    """Round-robin static subchannel ownership (subchannel i -> user i mod U)."""
    return tuple(i % users for i in range(subchannels))


def plan_policy(scenario: Scenario, assignment: tuple[int, ...],
                tti_per_user, segments_per_user=None):
    """Policy for a static plan: fixed assignment, one TTI per user."""
    owned: list[tuple[int, ...]] = [
        tuple(s for s, u in enumerate(assignment) if u == user)
        for user in range(scenario.users if not scenario.noma else 1)
    ]

    def policy(user: int, packet: Packet, now: float) -> FrameAlloc:
        subs = owned[user]
        if not subs:
            raise SchedulingConflictError(f"user {user} owns no subchannel")
        seg = 1 if segments_per_user is None else segments_per_user[user]
        return FrameAlloc(user=user, subchannel_ids=subs,
                          tti_s=tti_per_user[user], segments=seg)

    return policy


def fixed_tti_plan(scenario: Scenario, tti_s: float):
    """Static split + fixed TTI baseline plan (assignment, ttis, segments).

    The block length is realized as the next integer symbol count, so the
    effective TTI is the realized block duration.  Packets larger than one
    block's payload span consecutive blocks.
    """
    if tti_s <= 0:
        raise ValueError("tti_s must be > 0")
    users = 1 if scenario.noma else scenario.users
    if users > scenario.subchannels:
        raise FixedTtiInfeasibleError(
            f"static split cannot serve {users} users on {scenario.subchannels} subchannels"
        )
    assignment = static_split_assignment(users, scenario.subchannels)
    ttis, segments = [], []
    for user in range(users):
        k = sum(1 for u in assignment if u == user)
        bw = scenario.subchannel_bandwidth_hz * k
        n_block = math.ceil(tti_s * bw)
        spec = scenario.channel_for(user, k)
        m = segments_needed(spec, n_block, scenario.packet_bits,
                            scenario.error_target, scenario.regime)
        ttis.append(n_block / bw)
        segments.append(m)
    return assignment, tuple(ttis), tuple(segments)


def run_fixed_baseline(scenario: Scenario, tti_s: float, *,
                       mode: str = "sampled", seed: int | None = None) -> SimStats:
    """Simulate the fixed-TTI baseline (every frame uses the same block)."""
    assignment, ttis, segs = fixed_tti_plan(scenario, tti_s)
    policy = plan_policy(scenario, assignment, ttis, segs)
    return simulate(scenario, policy, mode=mode, seed=seed)


# ---------------------------------------------------------------------------
# synchronized step sessions (environment bridge)
# ---------------------------------------------------------------------------

@dataclass
class StepResult:
    observation: list[float]
    reward: float
    done: bool
    completed: list[PacketRecord]
    time_s: float


class StepSession:
    """Window-synchronized control of one episode (one period).

    Each step applies one subchannel->user assignment and one TTI: every
    assigned user with a queued packet transmits its head-of-line packet
    in the window.  Failed attempts retry in later windows; packets still
    unserved when the period elapses are dropped.  Fully deterministic
    given the reset seed.
    """

    def __init__(self, scenario: Scenario, tti_levels_s: tuple[float, ...],
                 drop_penalty_s: float | None = None):
        self.sc = scenario
        self.levels = tuple(tti_levels_s)
        if not self.levels or any(t <= 0 for t in self.levels):
            raise ValueError("tti levels must be positive")
        self.profile = profile_of(scenario.protocol)
        self.users = 1 if scenario.noma else scenario.users
        self.drop_penalty_s = (
            scenario.period_s if drop_penalty_s is None else drop_penalty_s
        )
        self.feedback_s = (
            self.profile.proc_count * scenario.processing_s
            + self.profile.prop_count * scenario.propagation_s
        )
        self._started = False

    # -- lifecycle ---------------------------------------------------------

    def reset(self, seed: int) -> list[float]:
        self.seed = seed
        self.rng = _attempt_rng(seed)
        arrivals = generate_arrivals(self.sc, seed)
        self.pending = _make_packets(arrivals)
        self.queues: list[list[Packet]] = [[] for _ in range(self.users)]
        self.in_service: list[_Service | None] = [None] * self.users
        self.time_s = 0.0
        self.step_index = 0
        self.records: list[PacketRecord] = []
        self.done = False
        self._started = True
        self._admit_arrivals()
        return self.observation()

    def _admit_arrivals(self):
        while self.pending and self.pending[0].arrival_s <= self.time_s:
            p = self.pending.pop(0)
            self.queues[p.user].append(p)

    def observation(self) -> list[float]:
        obs: list[float] = []
        for u in range(self.users):
            obs.append(float(len(self.queues[u]) * self.sc.packet_bits))
        for u in range(self.users):
            if self.queues[u]:
                obs.append(self.time_s - self.queues[u][0].arrival_s)
            else:
                obs.append(0.0)
        for u in range(self.users):
            if self.sc.snr_db is not None:
                gain = self.sc.snr_db
            else:
                gain = self.sc.channel_gains_db[u]
            obs.extend([float(gain)] * self.sc.subchannels)
        obs.append(self.sc.period_s - self.time_s)
        obs.append(float(self.step_index))
        return obs

    # -- stepping ------------------------------------------------------------

    def step(self, assignment: tuple[int, ...], tti_index: int) -> StepResult:
        if not self._started:
            raise RuntimeError("session not reset")
        if self.done:
            raise RuntimeError("episode already done")
        if len(assignment) != self.sc.subchannels:
            raise ValueError("assignment must name one user per subchannel")
        for u in assignment:
            if not (0 <= u < self.users):
                raise ValueError(f"user index {u} out of range")
        if not (0 <= tti_index < len(self.levels)):
            raise ValueError(f"tti_index {tti_index} out of range")

        tti = self.levels[tti_index]
        window = self.profile.tx_count * tti
        start = self.time_s
        end = start + window
        reward = 0.0
        completed: list[PacketRecord] = []

        owned: list[tuple[int, ...]] = [
            tuple(s for s, u in enumerate(assignment) if u == user)
            for user in range(self.users)
        ]

        # launch attempts for this window
        launched: list[tuple[_Service, int]] = []
        for user in range(self.users):
            subs = owned[user]
            if not subs or not self.queues[user]:
                continue
            svc = self.in_service[user]
            packet = self.queues[user][0]
            if svc is None or svc.packet.id != packet.id:
                svc = _Service(packet=packet, alloc=FrameAlloc(
                    user=user, subchannel_ids=subs, tti_s=tti), eps_att=0.0,
                    start_s=start)
                self.in_service[user] = svc
            # the frame geometry follows this window's action
            svc.alloc = FrameAlloc(user=user, subchannel_ids=subs, tti_s=tti)
            spec = self.sc.channel_for(user, len(subs))
            n = svc.alloc.blocklength_symbols(self.sc)
            eps = frame_error_prob(spec, n, self.sc.packet_bits, 1, self.sc.regime)
            svc.attempt += 1
            svc.tx_accum_s += window
            svc.decode_fail = bool(self.rng.random() < eps)
            if self.profile.protocol is Protocol.GF:
                resource = int(self.rng.integers(
                    0, self.sc.effective_contention_resources))
            else:
                resource = -1
            launched.append((svc, resource))

        # same-window, same-resource draws collide
        seen: dict[int, int] = {}
        collided: set[int] = set()
        for svc, res in launched:
            if res < 0:
                continue
            if res in seen:
                collided.add(seen[res])
                collided.add(svc.packet.user)
            else:
                seen[res] = svc.packet.user

        for svc, _ in launched:
            user = svc.packet.user
            failed = svc.decode_fail or (user in collided)
            capped = (
                self.sc.max_attempts > 0 and svc.attempt >= self.sc.max_attempts
            )
            if not failed or capped:
                departure = end + self.feedback_s
                self.queues[user].pop(0)
                self.in_service[user] = None
                rec = self._record(svc, departure, dropped=bool(failed))
                completed.append(rec)
                if failed:
                    reward -= self.drop_penalty_s
                else:
                    reward -= rec.breakdown.total_s

        self.time_s = end
        self.step_index += 1
        self._admit_arrivals()

        if self.time_s >= self.sc.period_s:
            self.done = True
            reward -= self.drop_penalty_s * self._flush_unserved()

        obs = self.observation()
        return StepResult(observation=obs, reward=reward, done=self.done,
                          completed=completed, time_s=self.time_s)

    def _record(self, svc: _Service, departure: float, dropped: bool) -> PacketRecord:
        # per-attempt TTIs may vary with the actions, so the transmission
        # total is the accumulated window time, not attempts * one span
        attempts = float(svc.attempt)
        queuing = svc.start_s - svc.packet.arrival_s
        bd = DelayBreakdown(
            transmission_s=svc.tx_accum_s,
            queuing_s=queuing,
            processing_s=attempts * self.profile.proc_count * self.sc.processing_s,
            propagation_s=attempts * self.profile.prop_count * self.sc.propagation_s,
            attempts=attempts,
            total_s=departure - svc.packet.arrival_s,
        )
        rec = PacketRecord(
            id=svc.packet.id, user=svc.packet.user,
            arrival_s=svc.packet.arrival_s, service_start_s=svc.start_s,
            attempts=attempts, departure_s=departure, dropped=dropped,
            breakdown=bd,
        )
        self.records.append(rec)
        return rec

    def _flush_unserved(self) -> int:
        flushed = 0
        for user in range(self.users):
            for packet in self.queues[user]:
                svc = self.in_service[user]
                in_flight = svc is not None and svc.packet.id == packet.id
                attempts = float(svc.attempt) if in_flight else 0.0
                start = svc.start_s if in_flight else math.nan
                tx = svc.tx_accum_s if in_flight else 0.0
                wait = self.time_s - packet.arrival_s
                bd = DelayBreakdown(tx, wait if not in_flight else start - packet.arrival_s,
                                    0.0, 0.0, max(attempts, 0.0), wait)
                self.records.append(PacketRecord(
                    id=packet.id, user=user, arrival_s=packet.arrival_s,
                    service_start_s=start, attempts=attempts,
                    departure_s=self.time_s, dropped=True, breakdown=bd))
                flushed += 1
            self.queues[user] = []
            self.in_service[user] = None
        for packet in self.pending:
            bd = DelayBreakdown(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
            self.records.append(PacketRecord(
                id=packet.id, user=packet.user, arrival_s=packet.arrival_s,
                service_start_s=math.nan, attempts=0.0,
                departure_s=self.time_s, dropped=True, breakdown=bd))
            flushed += 1
        self.pending = []
        return flushed

    def stats(self) -> SimStats:
        records = sorted(self.records, key=lambda r: r.id)
        delivered = [r for r in records if not r.dropped]
        avg = (
            sum(r.breakdown.total_s for r in delivered) / len(delivered)
            if delivered else math.nan
        )
        return SimStats(
            avg_over_the_air_s=avg,
            total_time_s=max((r.departure_s for r in records), default=0.0),
            served=len(delivered),
            dropped=sum(1 for r in records if r.dropped),
            records=records,
        )


def replay_actions(scenario: Scenario, tti_levels_s, actions, seed: int,
                   drop_penalty_s: float | None = None):
    """Drive a StepSession through an action list; the native equivalence
    path for the environment bridge.  Returns (stats, episode_return)."""
    session = StepSession(scenario, tuple(tti_levels_s), drop_penalty_s)
    session.reset(seed)
    total_reward = 0.0
    for assignment, tti_index in actions:
        if session.done:
            break
        res = session.step(tuple(assignment), tti_index)
        total_reward += res.reward
    return session.stats(), total_reward
