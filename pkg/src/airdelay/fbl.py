"""
Finite-blocklength coding kernels.

Shannon capacity, channel dispersion, the second-order normal-approximation
achievable rate, its inversion to a per-frame decoding error probability,
and the minimum-blocklength solver used everywhere else in the package.

Conventions:
  - SNR is linear unless a name says _db.
  - Blocklength n counts channel symbols; rates are bits per symbol.
  - The dispersion uses the complex-AWGN form V = (1 - (1+SNR)^-2) * (log2 e)^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

from scipy.special import erfc, ndtri

LOG2_E = math.log2(math.e)

#: Supremum of the channel dispersion, reached as SNR -> infinity.
MAX_DISPERSION = LOG2_E**2

#: Decoding error probabilities are clamped into this range so that
#: expected-attempt arithmetic stays finite.  Values outside carry no
#: modeling content at double precision.
EPS_FLOOR = 1e-30
EPS_CEIL = 1.0 - 1e-15


class InfeasibleBlocklengthError(ValueError):
    """No blocklength within the search cap satisfies the error target."""

    def __init__(self, payload_bits, error_target, n_max):
        self.payload_bits = payload_bits
        self.error_target = error_target
        self.n_max = n_max
        super().__init__(
            f"no blocklength n <= {n_max} carries {payload_bits} bits "
            f"at error probability {error_target}"
        )


@dataclass(frozen=True)
class ChannelSpec:
    """Static link budget of one user over one bandwidth allocation.

    The linear SNR is derived as P * g / (N0 * B) with a thermal-noise
    default of -174 dBm/Hz.  Use :meth:`from_snr_db` to pin the SNR
    directly instead of deriving it.
    """

    transmit_power_w: float
    channel_gain_db: float
    bandwidth_hz: float
    noise_psd_dbm_per_hz: float = -174.0

    def __post_init__(self):
        if not (self.transmit_power_w > 0):
            raise ValueError("transmit_power_w must be > 0")
        if not (self.bandwidth_hz > 0):
            raise ValueError("bandwidth_hz must be > 0")
        snr = self.snr
        if not (snr > 0 and math.isfinite(snr)):
            raise ValueError(f"derived SNR must be positive and finite, got {snr}")

    @property
    def noise_power_w(self) -> float:
        return 10.0 ** ((self.noise_psd_dbm_per_hz - 30.0) / 10.0) * self.bandwidth_hz

    @property
    def snr(self) -> float:
        gain = 10.0 ** (self.channel_gain_db / 10.0)
        return self.transmit_power_w * gain / self.noise_power_w

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr)

    @classmethod
    def from_snr_db(
        cls,
        snr_db: float,
        bandwidth_hz: float,
        transmit_power_w: float = 0.1,
        noise_psd_dbm_per_hz: float = -174.0,
    ) -> "ChannelSpec":
        """Build a spec whose derived SNR equals ``snr_db`` at this bandwidth.

        Back-solves the channel gain; widening the bandwidth afterwards via
        :meth:`with_bandwidth` rescales the SNR the physical way.
        """
        noise_w = 10.0 ** ((noise_psd_dbm_per_hz - 30.0) / 10.0) * bandwidth_hz
        target = 10.0 ** (snr_db / 10.0)
        gain_db = 10.0 * math.log10(target * noise_w / transmit_power_w)
        return cls(
            transmit_power_w=transmit_power_w,
            channel_gain_db=gain_db,
            bandwidth_hz=bandwidth_hz,
            noise_psd_dbm_per_hz=noise_psd_dbm_per_hz,
        )

    def with_bandwidth(self, bandwidth_hz: float) -> "ChannelSpec":
        """Same radio, different bandwidth allocation (noise power rescales)."""
        return replace(self, bandwidth_hz=bandwidth_hz)


@dataclass(frozen=True)
class FblPoint:
    """One operating point: blocklength, payload, error probability, rate."""

    blocklength_symbols: float
    payload_bits: int
    error_prob: float
    rate_bits_per_symbol: float

    def __post_init__(self):
        if not (self.blocklength_symbols > 0):
            raise ValueError("blocklength must be positive")
        if self.payload_bits < 1:
            raise ValueError("payload_bits must be >= 1")
        if not (0.0 < self.error_prob < 1.0):
            raise ValueError("error_prob must lie in (0, 1)")
        if self.rate_bits_per_symbol < 0:
            raise ValueError("rate must be nonnegative")


def q_function(x: float) -> float:
    """Upper Gaussian tail Q(x) = P[N(0,1) > x]."""
    return float(0.5 * erfc(x / math.sqrt(2.0)))


def q_inverse(p: float) -> float:
    """Inverse of :func:`q_function` on (0, 1)."""
    if not (0.0 < p < 1.0):
        raise ValueError(f"q_inverse requires p in (0, 1), got {p}")
    return float(-ndtri(p))


def capacity(spec: ChannelSpec) -> float:
    """Shannon capacity log2(1 + SNR) in bits/symbol."""
    snr = spec.snr
    if not math.isfinite(snr):
        raise ValueError("SNR must be finite")
    if snr < 0:
        raise ValueError("SNR must be nonnegative")
    return math.log1p(snr) / math.log(2.0)


def dispersion(spec: ChannelSpec) -> float:
    """Channel dispersion V = (1 - (1+SNR)^-2) * (log2 e)^2."""
    snr = spec.snr
    if not math.isfinite(snr) or snr < 0:
        raise ValueError("SNR must be nonnegative and finite")
    # algebraically 1 - (1+s)^-2, stable against underflow at small s
    return (2.0 * snr + snr * snr) / (1.0 + snr) ** 2 * LOG2_E**2


def fbl_rate(
    spec: ChannelSpec,
    blocklength: float,
    error_prob: float,
    *,
    penalty_log_term: bool = True,
) -> float:
    """Normal-approximation achievable rate at the given error probability.

    rate = C - sqrt(V/n) * Qinv(eps) + log2(n) / (2n), floored at zero.
    ``penalty_log_term=False`` drops the log2(n)/(2n) correction for
    sensitivity studies.
    """
    if blocklength < 1:
        raise ValueError("blocklength must be >= 1")
    if not (0.0 < error_prob < 1.0):
        raise ValueError("error_prob must lie in (0, 1)")
    n = float(blocklength)
    c = capacity(spec)
    v = dispersion(spec)
    rate = c - math.sqrt(v / n) * q_inverse(error_prob)
    if penalty_log_term:
        rate += math.log2(n) / (2.0 * n)
    return max(0.0, rate)


def error_prob(
    spec: ChannelSpec,
    blocklength: float,
    payload_bits: float,
    *,
    clamp: bool = True,
    penalty_log_term: bool = True,
) -> float:
    """Per-frame decoding error of carrying ``payload_bits`` in ``blocklength``.

    Inverts the rate formula: eps = Q((n*C - b + log2(n)/2) / sqrt(n*V)).
    A zero-dispersion (zero-SNR) channel degenerates to a 0/1 step and is
    flagged with a warning.
    """
    if blocklength < 1:
        raise ValueError("blocklength must be >= 1")
    if payload_bits < 1:
        raise ValueError("payload_bits must be >= 1")
    n = float(blocklength)
    b = float(payload_bits)
    c = capacity(spec)
    v = dispersion(spec)
    margin = n * c - b
    if penalty_log_term:
        margin += math.log2(n) / 2.0
    if v == 0.0:
        warnings.warn("zero-dispersion channel: error probability is a 0/1 step")
        if margin == 0.0:
            return 0.5
        return 0.0 if margin > 0 else 1.0
    eps = q_function(margin / math.sqrt(n * v))
    if clamp:
        eps = min(max(eps, EPS_FLOOR), EPS_CEIL)
    return eps


def min_blocklength_ibl(spec: ChannelSpec, payload_bits: float) -> int:
    """Smallest integer n with n * capacity >= payload bits."""
    if payload_bits < 1:
        raise ValueError("payload_bits must be >= 1")
    c = capacity(spec)
    if c <= 0:
        raise ValueError("capacity is zero; no finite blocklength carries the payload")
    n = math.ceil(payload_bits / c)
    # guard against ceil landing one short under float roundoff
    while n * c < payload_bits:
        n += 1
    return max(1, n)


def min_blocklength(
    spec: ChannelSpec,
    payload_bits: float,
    error_target: float,
    *,
    n_max: int = 10**6,
) -> int:
    """Smallest integer n with error_prob(spec, n, b) <= error_target.

    Brackets by doubling from the IBL minimum, bisects, then walks down to
    guard the (rare) non-monotone corner of the normal approximation.
    Raises :class:`InfeasibleBlocklengthError` if nothing <= n_max works.
    """
    if not (0.0 < error_target < 1.0):
        raise ValueError("error_target must lie in (0, 1)")

    def ok(n: int) -> bool:
        return error_prob(spec, n, payload_bits, clamp=False) <= error_target

    lo = 1
    hi = max(1, min_blocklength_ibl(spec, payload_bits) // 2)
    while not ok(hi):
        lo = hi + 1
        hi *= 2
        if hi > n_max:
            if not ok(n_max):
                raise InfeasibleBlocklengthError(payload_bits, error_target, n_max)
            hi = n_max
            break
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    n = lo
    while n > 1 and ok(n - 1):
        n -= 1
    return n


def min_blocklength_continuous(
    spec: ChannelSpec,
    payload_bits: float,
    error_target: float,
    *,
    n_max: float = 1e6,
    tol: float = 1e-9,
) -> float:
    """Continuous-relaxation feasibility boundary: smallest real n with
    n * fbl_rate(n, error_target) >= payload_bits."""
    if not (0.0 < error_target < 1.0):
        raise ValueError("error_target must lie in (0, 1)")

    def carried(n: float) -> float:
        return n * fbl_rate(spec, n, error_target)

    lo, hi = 1.0, 2.0
    while carried(hi) < payload_bits:
        lo = hi
        hi *= 2.0
        if hi > n_max:
            raise InfeasibleBlocklengthError(payload_bits, error_target, n_max)
    if carried(lo) >= payload_bits:
        return lo
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if carried(mid) >= payload_bits:
            hi = mid
        else:
            lo = mid
    return hi


def max_payload_bits(
    spec: ChannelSpec, blocklength: float, error_target: float
) -> int:
    """Largest integer payload a frame of this blocklength carries at the target."""
    n = float(blocklength)
    cap_bits = n * fbl_rate(spec, n, error_target)
    return max(0, math.floor(cap_bits))
