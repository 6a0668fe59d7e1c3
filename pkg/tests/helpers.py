"""Shared scenario builders for the test suite and the acceptance gate."""

from airdelay.fbl import ChannelSpec, capacity
from airdelay.protocols import Protocol
from airdelay.scenario import ArrivalProcess, Regime, Scenario

SNR_10DB_SPEC = ChannelSpec.from_snr_db(10.0, 1e6)


def reference_tradeoff_scenario(seed: int = 7) -> Scenario:
    """Single 1 MHz link at 10 dB SNR, 256-bit packets, grant-free,
    Poisson arrivals at 0.7 of the link's capacity in bits/s."""
    c = capacity(SNR_10DB_SPEC)
    rate = 0.7 * c * 1e6 / 256
    return Scenario(
        users=1,
        subchannels=1,
        total_bandwidth_hz=1e6,
        period_s=0.05,
        packet_bits=256,
        arrivals=ArrivalProcess.poisson(rate),
        error_target=1e-7,
        regime=Regime.FBL,
        protocol=Protocol.GF,
        snr_db=10.0,
        seed=seed,
    )


def multi_user_scenario(
    users: int = 2,
    seed: int = 3,
    gains_db=None,
    rate_per_user: float = 3000.0,
    period_s: float = 0.01,
    protocol: Protocol = Protocol.GF,
) -> Scenario:
    """Paper-style multi-user setup: 32-byte packets, 1 MHz, 100 mW,
    one subchannel per user, a 64-deep contention pool."""
    if gains_db is None:
        gains_db = tuple(-20.0 + 40.0 * u / max(1, users - 1) for u in range(users))
    return Scenario(
        users=users,
        subchannels=users,
        total_bandwidth_hz=1e6,
        period_s=period_s,
        packet_bits=256,
        arrivals=ArrivalProcess.poisson(rate_per_user),
        error_target=1e-7,
        regime=Regime.FBL,
        protocol=protocol,
        contention_resources=64,
        channel_gains_db=tuple(gains_db),
        seed=seed,
    )


def toy_bridge_scenario(seed: int = 11) -> Scenario:
    """Small instance for bridge and agent tests."""
    return Scenario(
        users=2,
        subchannels=2,
        total_bandwidth_hz=1e6,
        period_s=0.002,
        packet_bits=256,
        arrivals=ArrivalProcess.poisson(2500.0),
        error_target=1e-7,
        regime=Regime.FBL,
        protocol=Protocol.GF,
        contention_resources=64,
        channel_gains_db=(-95.0, -99.0),
        seed=seed,
    )
