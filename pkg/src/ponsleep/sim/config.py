from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

from ..model import DEFAULT_POWER, MS, S, US, PowerProfile, SleepMode


class Scheduler(enum.Enum):
    OSMP = "osmp"  # ONU-driven sleep only
    FDOS = "fdos"  # plus OLT wake-up scheduling


class Predictor(enum.Enum):
    ORACLE = "oracle"
    EWMA = "ewma"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n_onus: int = 16
    t_cm: int = 2 * MS
    rtt: Union[int, Sequence[int]] = 200 * US
    link_rate_bps: int = 1_000_000_000
    guard_ns: int = 1 * US
    buffer_bits: int = 1_200_000
    b_th_bits: int = 1_000_000
    t_dr: int = 50 * MS
    t_m: int = 1 * MS
    profile: PowerProfile = field(default=DEFAULT_POWER)
    scheduler: Scheduler = Scheduler.FDOS
    predictor: Predictor = Predictor.ORACLE
    runtime_ns: int = 50 * S
    seed: int = 0
    load: float = 0.5
    num_sources: int = 16
    hurst: float = 0.8
    peak_rate_bps: Optional[float] = None
    packet_bytes: int = 1500
    report_bytes: int = 64
    t_lb_ds: Optional[int] = None
    t_lb_fs: Optional[int] = None
    ewma_half_life: int = 10 * MS
    horizon_cap: int = 1 * S
    jain_block: int = 10
    load_basis: str = "link"

    def __post_init__(self):
        if isinstance(self.scheduler, str):
            object.__setattr__(self, "scheduler", Scheduler(self.scheduler))
        if isinstance(self.predictor, str):
            object.__setattr__(self, "predictor", Predictor(self.predictor))
        if not isinstance(self.rtt, int):
            object.__setattr__(self, "rtt", tuple(int(r) for r in self.rtt))
        problems = []
        if self.n_onus < 1:
            problems.append("n_onus must be >= 1")
        if any(r <= 0 for r in self.rtts()) or len(self.rtts()) != self.n_onus:
            problems.append("need one positive rtt per ONU")
        if self.b_th_bits > self.buffer_bits:
            problems.append("b_th_bits must not exceed buffer_bits")
        if self.b_th_bits < self.packet_bits:
            problems.append("b_th_bits must hold at least one packet")
        if not self.guard_ns * self.n_onus < self.t_cm:
            problems.append("guard time must be below t_cm / n_onus")
        if self.load_basis not in ("link", "peak"):
            problems.append("load_basis must be 'link' or 'peak'")
        elif not 0 <= self.load <= 1:
            problems.append("load must lie in [0, 1]")
        elif self.source_load > 1:
            problems.append("mean per-ONU rate exceeds the peak rate")
        for name in ("t_cm", "t_dr", "t_m", "runtime_ns", "link_rate_bps", "ewma_half_life",
                     "horizon_cap", "jain_block"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} must be positive")
        if (self.t_cm * self.link_rate_bps) % 1_000_000_000 or (self.guard_ns * self.link_rate_bps) % 1_000_000_000:
            problems.append("t_cm and guard must be whole bit times")
        if problems:
            raise ConfigError("; ".join(problems))

    def rtts(self) -> tuple[int, ...]:
        return (self.rtt,) * self.n_onus if isinstance(self.rtt, int) else tuple(self.rtt)

    @property
    def packet_bits(self) -> int:
        return 8 * self.packet_bytes

    @property
    def peak(self) -> float:
        """Per-ONU peak arrival rate (default 100 Mb/s)."""
        return 100e6 if self.peak_rate_bps is None else self.peak_rate_bps

    @property
    def mean_rate_bps(self) -> float:
        """Per-ONU mean rate.

        With the default ``link`` basis, ``load`` is the share of the link the
        N ONUs offer together; with ``peak`` it is the share of each ONU's
        peak rate (which overloads the link once ``load * N * peak > link``).
        """
        if self.load_basis == "peak":
            return self.load * self.peak
        return self.load * self.link_rate_bps / self.n_onus

    @property
    def source_load(self) -> float:
        """ON fraction of each traffic source."""
        return self.mean_rate_bps / self.peak

    @property
    def buffer_packets(self) -> int:
        return self.buffer_bits // self.packet_bits

    @property
    def b_th_packets(self) -> int:
        return -(-self.b_th_bits // self.packet_bits)

    def tx_ns(self, bits: int) -> int:
        return -(-bits * 1_000_000_000 // self.link_rate_bps)

    def t_lb(self, mode: SleepMode) -> int:
        """Minimum worthwhile sleep for ``mode`` (break-even against the next mode up)."""
        if mode is SleepMode.DEEP_SLEEP:
            if self.t_lb_ds is not None:
                return self.t_lb_ds
            return self.profile.break_even(SleepMode.DEEP_SLEEP, SleepMode.FAST_SLEEP)
        if mode is SleepMode.FAST_SLEEP:
            if self.t_lb_fs is not None:
                return self.t_lb_fs
            return self.profile.break_even(SleepMode.FAST_SLEEP, SleepMode.ACTIVE)
        raise ValueError(f"no threshold for {mode}")

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)
