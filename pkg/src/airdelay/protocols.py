"""
Random-access protocol profiles and the grant-free contention model.

The occurrence counts say how many times each delay component is paid per
access attempt: grant-based access spends two transmissions (scheduling
request + data), one grant-wait queue visit, three processing and four
propagation legs for its handshake; grant-free access sends data
immediately (one transmission, one processing leg at the base station,
two propagation legs), so its grant-queue count is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


class Protocol(str, Enum):
    GB = "GB"
    GF = "GF"


class Contention(str, Enum):
    CONTENTION_FREE = "contention_free"
    CONTENTION_BASED = "contention_based"


@dataclass(frozen=True)
class ProtocolProfile:
    """Occurrence counts of each delay component per access attempt."""

    protocol: Protocol
    tx_count: int
    queue_count: int
    proc_count: int
    prop_count: int
    contention: Contention


GB_PROFILE = ProtocolProfile(Protocol.GB, 2, 1, 3, 4, Contention.CONTENTION_FREE)
GF_PROFILE = ProtocolProfile(Protocol.GF, 1, 0, 1, 2, Contention.CONTENTION_BASED)

_PROFILES = {Protocol.GB: GB_PROFILE, Protocol.GF: GF_PROFILE}


def profile_of(protocol: Protocol | str) -> ProtocolProfile:
    """Constant profile for the given protocol name."""
    return _PROFILES[Protocol(protocol)]


@dataclass(frozen=True)
class ContentionConfig:
    """Slotted contention pool: M active users drawing from K resources."""

    active_users: int
    contention_resources: int

    def __post_init__(self):
        if self.active_users < 0:
            raise ValueError("active_users must be >= 0")
        if self.contention_resources < 1:
            raise ValueError("contention_resources must be >= 1")


def gf_collision_prob(cfg: ContentionConfig) -> float:
    """Probability a tagged user's resource draw collides with anyone else.

    Uniform independent selection: 1 - (1 - 1/K)^(M-1).  Retries redraw
    uniformly with no backoff window, so attempts stay geometric.
    """
    m, k = cfg.active_users, cfg.contention_resources
    if m <= 1:
        return 0.0
    if k == 1:
        return 1.0
    return -math.expm1((m - 1) * math.log1p(-1.0 / k))


def attempt_failure_prob(decode_eps: float, collision_p: float) -> float:
    """Combined per-attempt failure assuming independent decode and collision."""
    if not (0.0 <= decode_eps <= 1.0):
        raise ValueError("decode_eps must lie in [0, 1]")
    if not (0.0 <= collision_p <= 1.0):
        raise ValueError("collision_p must lie in [0, 1]")
    return 1.0 - (1.0 - decode_eps) * (1.0 - collision_p)
