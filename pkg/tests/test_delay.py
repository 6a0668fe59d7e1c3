"""Delay composition and the uniform-blocklength tradeoff sweep."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from airdelay import fbl
from airdelay.delay import (
    compose_over_the_air,
    expected_attempts,
    sweep_argmin,
    tradeoff_sweep,
    transmission_delay,
)
from airdelay.protocols import Protocol, profile_of
from airdelay.scenario import ArrivalProcess, Regime

import oracles
from helpers import reference_tradeoff_scenario

GF = profile_of(Protocol.GF)
GB = profile_of(Protocol.GB)


class TestTransmissionDelay:
    def test_empty_frame(self):
        assert transmission_delay(0, 1e6) == 0.0

    def test_direct_ratio(self):
        assert transmission_delay(94, 1e6) == pytest.approx(94e-6)

    def test_nr_block_duration(self):
        # 500 symbols over 1 MHz is one 0.5 ms NR block
        assert transmission_delay(500, 1e6) == pytest.approx(0.5e-3)

    def test_zero_bandwidth_rejected(self):
        with pytest.raises(ValueError):
            transmission_delay(100, 0.0)


class TestExpectedAttempts:
    def test_error_free(self):
        for cap in (1, 5, None):
            stats = expected_attempts(0.0, cap)
            assert stats.expected == 1.0 and stats.residual_loss == 0.0

    def test_geometric_mean_unbounded(self):
        assert expected_attempts(0.5, None).expected == pytest.approx(2.0)

    def test_two_attempt_tree(self):
        mean, loss = oracles.expected_attempts_enumerate(0.1, 2)
        stats = expected_attempts(0.1, 2)
        assert stats.expected == pytest.approx(mean, rel=1e-12)
        assert stats.expected == pytest.approx(1.1)
        assert stats.residual_loss == pytest.approx(loss) == pytest.approx(0.01)

    def test_certain_failure_flagged(self):
        stats = expected_attempts(1.0, 7)
        assert stats.expected == 7.0 and stats.residual_loss == 1.0
        assert expected_attempts(1.0, None).expected == math.inf

    @given(
        eps=st.floats(min_value=0.0, max_value=0.999),
        cap=st.integers(min_value=1, max_value=50),
    )
    def test_bounds(self, eps, cap):
        stats = expected_attempts(eps, cap)
        assert 1.0 <= stats.expected <= cap + 1e-12
        assert 0.0 <= stats.residual_loss <= 1.0
        enum_mean, enum_loss = oracles.expected_attempts_enumerate(eps, cap)
        assert stats.expected == pytest.approx(enum_mean, rel=1e-9)
        assert stats.residual_loss == pytest.approx(enum_loss, rel=1e-9, abs=1e-300)


class TestCompose:
    def test_gf_counts_single_attempt(self):
        bd = compose_over_the_air(
            transmission_s=1e-3, queuing_s=2e-3, processing_s=1e-3,
            propagation_s=1e-3, profile=GF, attempts=1.0, retx_gap_s=0.0,
        )
        # GF pays (1 tx, 1 proc, 2 prop): queuing + 4 ms
        assert bd.total_s == pytest.approx(2e-3 + 4e-3)

    def test_additive_identity(self):
        bd = compose_over_the_air(
            transmission_s=0.0, queuing_s=0.0, processing_s=0.0,
            propagation_s=0.0, profile=GF, attempts=1.0, retx_gap_s=0.0,
        )
        assert bd.total_s == 0.0

    def test_two_attempts_hand_expansion(self):
        bd = compose_over_the_air(
            transmission_s=94e-6, queuing_s=0.0, processing_s=100e-6,
            propagation_s=3e-6, profile=GF, attempts=2.0, retx_gap_s=0.0,
        )
        assert bd.total_s == pytest.approx(400e-6, rel=1e-12)
        assert bd.transmission_s == pytest.approx(188e-6)
        assert bd.attempts == 2.0

    @given(
        tx=st.floats(min_value=0.0, max_value=1e-2),
        proc=st.floats(min_value=0.0, max_value=1e-2),
        prop=st.floats(min_value=0.0, max_value=1e-2),
        queue=st.floats(min_value=0.0, max_value=1e-2),
        attempts=st.floats(min_value=1.0, max_value=10.0),
    )
    def test_composition_linearity(self, tx, proc, prop, queue, attempts):
        kwargs = dict(queuing_s=queue, profile=GF, attempts=attempts, retx_gap_s=0.0)
        one = compose_over_the_air(
            transmission_s=tx, processing_s=proc, propagation_s=prop, **kwargs
        )
        two = compose_over_the_air(
            transmission_s=2 * tx, processing_s=2 * proc, propagation_s=2 * prop,
            **kwargs,
        )
        assert two.total_s - queue == pytest.approx(2 * (one.total_s - queue), rel=1e-9, abs=1e-18)

    def test_validation(self):
        with pytest.raises(ValueError):
            compose_over_the_air(
                transmission_s=-1.0, queuing_s=0.0, processing_s=0.0,
                propagation_s=0.0, profile=GF, attempts=1.0, retx_gap_s=0.0,
            )
        with pytest.raises(ValueError):
            compose_over_the_air(
                transmission_s=0.0, queuing_s=0.0, processing_s=0.0,
                propagation_s=0.0, profile=GF, attempts=0.5, retx_gap_s=0.0,
            )


class TestTradeoffSweep:
    def test_fbl_interior_argmin(self):
        sc = reference_tradeoff_scenario()
        grid = list(range(94, 401, 2))
        points = tradeoff_sweep(sc, grid)
        idx = sweep_argmin(points)
        assert idx is not None
        assert 0 < idx < len(points) - 1

    def test_ibl_monotone_toward_small_blocklength(self):
        sc = reference_tradeoff_scenario().with_overrides(regime=Regime.IBL)
        points = tradeoff_sweep(sc, list(range(94, 401, 2)))
        totals = [p.total_s for p in points]
        assert all(totals[i] <= totals[i + 1] + 1e-18 for i in range(len(totals) - 1))

    def test_infeasible_points_marked(self):
        sc = reference_tradeoff_scenario()
        points = tradeoff_sweep(sc, [50, 94, 200])
        assert points[0].feasible is False  # below the capacity minimum of 75
        assert points[1].feasible and points[2].feasible

    def test_single_packet_transmission_dominates(self):
        sc = reference_tradeoff_scenario().with_overrides(
            arrivals=ArrivalProcess.trace([0.0])
        )
        points = tradeoff_sweep(sc, [150, 400])
        assert all(p.eps < 1e-9 for p in points)
        assert points[0].total_s < points[1].total_s

    def test_ibl_fbl_consistency_with_pinned_rate(self):
        sc = reference_tradeoff_scenario()
        spec = sc.channel_for(0)
        cap = fbl.capacity(spec)
        grid = list(range(94, 301, 10))
        forced = tradeoff_sweep(
            sc, grid, rate_override=lambda n: cap, eps_override=lambda n: 0.0
        )
        ibl = tradeoff_sweep(sc.with_overrides(regime=Regime.IBL), grid)
        for a, b in zip(forced, ibl):
            assert a.total_s == pytest.approx(b.total_s, rel=1e-12)

    def test_attempt_bounds_on_sweep(self):
        sc = reference_tradeoff_scenario()
        for p in tradeoff_sweep(sc, list(range(80, 401, 7))):
            if p.feasible:
                assert 1.0 <= p.attempts <= sc.max_attempts

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            tradeoff_sweep(reference_tradeoff_scenario(), [])
