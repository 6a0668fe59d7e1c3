"""
Scenario definition and the flat key = value file format.

A scenario pins everything a run needs: traffic, resources, reliability
target, regime, protocol, component times, and the seed.  Files are plain
text, one ``key = value`` per line, ``#`` comments allowed.  Lists use
``[a, b, c]``.  See docs/scenario-format.md for the full key table.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .fbl import ChannelSpec
from .protocols import Protocol


class Regime(str, Enum):
    IBL = "IBL"
    FBL = "FBL"


class ArrivalKind(str, Enum):
    POISSON = "poisson"
    DETERMINISTIC = "deterministic"
    TRACE = "trace"


@dataclass(frozen=True)
class ArrivalProcess:
    kind: ArrivalKind
    rate_pkts_per_s: float | None = None
    interval_s: float | None = None
    times: tuple[float, ...] | None = None

    @classmethod
    def poisson(cls, rate_pkts_per_s: float) -> "ArrivalProcess":
        if rate_pkts_per_s <= 0:
            raise ValueError("poisson rate must be > 0")
        return cls(ArrivalKind.POISSON, rate_pkts_per_s=rate_pkts_per_s)

    @classmethod
    def deterministic(cls, interval_s: float) -> "ArrivalProcess":
        if interval_s <= 0:
            raise ValueError("deterministic interval must be > 0")
        return cls(ArrivalKind.DETERMINISTIC, interval_s=interval_s)

    @classmethod
    def trace(cls, times) -> "ArrivalProcess":
        return cls(ArrivalKind.TRACE, times=tuple(float(t) for t in times))


@dataclass(frozen=True)
class Scenario:
    """Everything one run needs; immutable so runs cannot drift."""

    users: int
    subchannels: int
    total_bandwidth_hz: float
    period_s: float
    packet_bits: int
    arrivals: ArrivalProcess
    error_target: float
    regime: Regime = Regime.FBL
    protocol: Protocol = Protocol.GF
    contention_resources: int | None = None  # None -> number of subchannels
    max_attempts: int = 10                   # 0 -> unbounded
    processing_s: float = 100e-6
    propagation_s: float = 3e-6
    retx_gap_s: float | None = None          # None -> proc + 2 * prop
    channel_gains_db: tuple[float, ...] = ()
    transmit_power_w: float = 0.1
    noise_psd_dbm_per_hz: float = -174.0
    snr_db: float | None = None              # pins per-subchannel SNR directly
    noma: bool = False                       # single shared queue, full bandwidth
    seed: int = 0

    def __post_init__(self):
        if self.users < 1:
            raise ValueError("users must be >= 1")
        if self.subchannels < 1:
            raise ValueError("subchannels must be >= 1")
        if self.total_bandwidth_hz <= 0:
            raise ValueError("total_bandwidth_hz must be > 0")
        if self.period_s <= 0:
            raise ValueError("period_s must be > 0")
        if self.packet_bits < 1:
            raise ValueError("packet_bits must be >= 1")
        if not (0.0 < self.error_target < 1.0):
            raise ValueError("error_target must lie in (0, 1)")
        if self.max_attempts < 0:
            raise ValueError("max_attempts must be >= 0 (0 = unbounded)")
        if self.processing_s < 0 or self.propagation_s < 0:
            raise ValueError("component times must be >= 0")
        if self.snr_db is None and len(self.channel_gains_db) != self.users:
            raise ValueError(
                "channel_gains_db must list one gain per user unless snr_db pins the SNR"
            )
        if self.arrivals.kind is ArrivalKind.TRACE:
            for t in self.arrivals.times:
                if not (0.0 <= t <= self.period_s):
                    raise ValueError(f"trace arrival {t} outside [0, period]")

    @property
    def subchannel_bandwidth_hz(self) -> float:
        return self.total_bandwidth_hz / self.subchannels

    @property
    def effective_contention_resources(self) -> int:
        return self.contention_resources or self.subchannels

    @property
    def retx_gap_effective_s(self) -> float:
        if self.retx_gap_s is not None:
            return self.retx_gap_s
        return self.processing_s + 2.0 * self.propagation_s

    def channel_for(self, user: int, n_subchannels: int = 1) -> ChannelSpec:
        """Link budget of ``user`` over ``n_subchannels`` subchannels.

        A pinned snr_db applies at one subchannel's bandwidth; wider
        allocations rescale the SNR through the noise power.
        """
        bw = self.subchannel_bandwidth_hz
        if self.snr_db is not None:
            base = ChannelSpec.from_snr_db(
                self.snr_db,
                bw,
                transmit_power_w=self.transmit_power_w,
                noise_psd_dbm_per_hz=self.noise_psd_dbm_per_hz,
            )
        else:
            base = ChannelSpec(
                transmit_power_w=self.transmit_power_w,
                channel_gain_db=self.channel_gains_db[user],
                bandwidth_hz=bw,
                noise_psd_dbm_per_hz=self.noise_psd_dbm_per_hz,
            )
        if n_subchannels == 1:
            return base
        return base.with_bandwidth(bw * n_subchannels)

    def with_overrides(self, **kwargs) -> "Scenario":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# flat key = value file format
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = (
    "users",
    "subchannels",
    "total_bandwidth_hz",
    "period_s",
    "packet_bits",
    "arrival",
    "error_target",
)


def _parse_list(text: str) -> list[float]:
    inner = text.strip()
    if inner.startswith("[") and inner.endswith("]"):
        inner = inner[1:-1]
    if not inner.strip():
        return []
    return [float(tok) for tok in inner.split(",")]


def _parse_arrival(text: str) -> ArrivalProcess:
    parts = text.strip().split(None, 1)
    kind = parts[0].lower()
    arg = parts[1] if len(parts) > 1 else ""
    if kind == "poisson":
        return ArrivalProcess.poisson(float(arg))
    if kind == "deterministic":
        return ArrivalProcess.deterministic(float(arg))
    if kind == "trace":
        return ArrivalProcess.trace(_parse_list(arg))
    raise ValueError(f"unknown arrival process {kind!r}")


def parse_scenario(text: str) -> Scenario:
    """Parse the flat key = value scenario format."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = stripped.split("=", 1)
        raw[key.strip()] = value.strip()

    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise ValueError(f"scenario is missing required keys: {', '.join(missing)}")

    kwargs = dict(
        users=int(raw["users"]),
        subchannels=int(raw["subchannels"]),
        total_bandwidth_hz=float(raw["total_bandwidth_hz"]),
        period_s=float(raw["period_s"]),
        packet_bits=int(raw["packet_bits"]),
        arrivals=_parse_arrival(raw["arrival"]),
        error_target=float(raw["error_target"]),
    )
    if "regime" in raw:
        kwargs["regime"] = Regime(raw["regime"].upper())
    if "protocol" in raw:
        kwargs["protocol"] = Protocol(raw["protocol"].upper())
    if "contention_resources" in raw:
        kwargs["contention_resources"] = int(raw["contention_resources"])
    if "max_attempts" in raw:
        kwargs["max_attempts"] = int(raw["max_attempts"])
    if "processing_s" in raw:
        kwargs["processing_s"] = float(raw["processing_s"])
    if "propagation_s" in raw:
        kwargs["propagation_s"] = float(raw["propagation_s"])
    if "retx_gap_s" in raw:
        kwargs["retx_gap_s"] = float(raw["retx_gap_s"])
    if "channel_gains_db" in raw:
        kwargs["channel_gains_db"] = tuple(_parse_list(raw["channel_gains_db"]))
    if "transmit_power_w" in raw:
        kwargs["transmit_power_w"] = float(raw["transmit_power_w"])
    if "noise_psd_dbm_per_hz" in raw:
        kwargs["noise_psd_dbm_per_hz"] = float(raw["noise_psd_dbm_per_hz"])
    if "snr_db" in raw:
        kwargs["snr_db"] = float(raw["snr_db"])
    if "noma" in raw:
        kwargs["noma"] = raw["noma"].lower() in ("1", "true", "yes")
    if "seed" in raw:
        kwargs["seed"] = int(raw["seed"])

    known = set(_REQUIRED_KEYS) | {
        "regime", "protocol", "contention_resources", "max_attempts",
        "processing_s", "propagation_s", "retx_gap_s", "channel_gains_db",
        "transmit_power_w", "noise_psd_dbm_per_hz", "snr_db", "noma", "seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    return Scenario(**kwargs)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def format_scenario(sc: Scenario) -> str:
    """Render a scenario back into the flat file format."""
    if sc.arrivals.kind is ArrivalKind.POISSON:
        arrival = f"poisson {sc.arrivals.rate_pkts_per_s!r}"
    elif sc.arrivals.kind is ArrivalKind.DETERMINISTIC:
        arrival = f"deterministic {sc.arrivals.interval_s!r}"
    else:
        arrival = "trace [" + ", ".join(repr(t) for t in sc.arrivals.times) + "]"
    lines = [
        f"users = {sc.users}",
        f"subchannels = {sc.subchannels}",
        f"total_bandwidth_hz = {sc.total_bandwidth_hz!r}",
        f"period_s = {sc.period_s!r}",
        f"packet_bits = {sc.packet_bits}",
        f"arrival = {arrival}",
        f"error_target = {sc.error_target!r}",
        f"regime = {sc.regime.value.lower()}",
        f"protocol = {sc.protocol.value.lower()}",
        f"max_attempts = {sc.max_attempts}",
        f"processing_s = {sc.processing_s!r}",
        f"propagation_s = {sc.propagation_s!r}",
        f"transmit_power_w = {sc.transmit_power_w!r}",
        f"noise_psd_dbm_per_hz = {sc.noise_psd_dbm_per_hz!r}",
        f"seed = {sc.seed}",
    ]
    if sc.contention_resources is not None:
        lines.append(f"contention_resources = {sc.contention_resources}")
    if sc.retx_gap_s is not None:
        lines.append(f"retx_gap_s = {sc.retx_gap_s!r}")
    if sc.channel_gains_db:
        gains = ", ".join(repr(g) for g in sc.channel_gains_db)
        lines.append(f"channel_gains_db = [{gains}]")
    if sc.snr_db is not None:
        lines.append(f"snr_db = {sc.snr_db!r}")
    if sc.noma:
        lines.append("noma = true")
    return "\n".join(lines) + "\n"


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(format_scenario(sc))
