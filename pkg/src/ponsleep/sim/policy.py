"""Pure decision rules used by the simulator: sleep-mode choice, grant sizing,
wake-up message timing and buffer fill-time prediction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from ..model import SleepMode
from .config import SimConfig


class SchedulingError(RuntimeError):
    pass


def rule1_threshold(mode: SleepMode, cfg: SimConfig) -> int:
    return cfg.t_m + cfg.profile.t_sw(mode) + 2 * cfg.t_cm


def osmp_decide(mode: SleepMode, t_bu: int, cfg: SimConfig) -> SleepMode:
    """Next mode for an ONU in ``mode`` with predicted fill time ``t_bu``.

    Sleeping ONUs keep their mode while the buffer outlasts the worst-case
    wake-up path and otherwise return ACTIVE (start waking).  An active ONU
    that has just drained picks the deepest mode whose break-even it beats.
    """
    if mode in (SleepMode.DEEP_SLEEP, SleepMode.FAST_SLEEP):
        return mode if t_bu > rule1_threshold(mode, cfg) else SleepMode.ACTIVE
    if cfg.t_lb(SleepMode.DEEP_SLEEP) <= t_bu:
        return SleepMode.DEEP_SLEEP
    if cfg.t_lb(SleepMode.FAST_SLEEP) < t_bu:
        return SleepMode.FAST_SLEEP
    return SleepMode.ACTIVE


def max_cycle_bits(n_active: int, cfg: SimConfig) -> int:
    """B_m: bits that fit in one maximum cycle after the guard intervals."""
    return (cfg.t_cm - n_active * cfg.guard_ns) * cfg.link_rate_bps // 1_000_000_000


def grant_size(report_bytes: int, n_active: int, cfg: SimConfig, assigned: bool = True) -> int:
    """Limited-scheme grant in bytes: the report, capped at B_m / N_a."""
    if not assigned:
        return 0
    if n_active <= 0:
        if report_bytes:
            raise SchedulingError("grant requested with no active ONU")
        return 0
    return min(report_bytes, max_cycle_bits(n_active, cfg) // 8 // n_active)


@dataclass(frozen=True)
class WakeMessage:
    onu: int
    send_at: int
    late: bool


@dataclass(frozen=True)
class WakeTarget:
    slot: int
    mode: SleepMode
    rtt: int
    forced: bool = False


def wake_time(t: int, slot: int, mode: SleepMode, rtt: int, cfg: SimConfig) -> int:
    return t + (slot - 1) * cfg.t_cm - cfg.profile.t_sw(mode) - rtt


def schedule_wakeups(t: int, targets: Mapping[int, WakeTarget], cfg: SimConfig):
    """Messages to send during ``[t, t + T_cm)`` and the ONUs deferred to later epochs.

    ONUs already woken (forced) produce nothing.  A send time in the past
    is clamped to ``t`` and flagged late.
    """
    messages, deferred = [], []
    for onu in sorted(targets):
        tg = targets[onu]
        if tg.forced:
            continue
        t_wk = wake_time(t, tg.slot, tg.mode, tg.rtt, cfg)
        if t_wk < t + cfg.t_cm:
            messages.append(WakeMessage(onu, max(t_wk, t), t_wk < t))
        else:
            deferred.append(onu)
    return messages, deferred


def predict_fill_oracle(arrivals: np.ndarray, next_idx: int, queued: int, now: int,
                        cfg: SimConfig) -> int:
    """Exact time until the queue reaches the threshold, read off the future trace.

    ``next_idx`` indexes the first arrival not yet in the queue; no packet
    leaves while the ONU sleeps.
    """
    need = cfg.b_th_packets - queued
    if need <= 0:
        return 0
    k = next_idx + need - 1
    if k >= len(arrivals):
        return cfg.horizon_cap
    return int(min(max(int(arrivals[k]) - now, 0), cfg.horizon_cap))


def predict_fill_ewma(queued_bits: int, rate_bps: float, cfg: SimConfig) -> int:
    room = cfg.b_th_bits - queued_bits
    if room <= 0:
        return 0
    if rate_bps <= 0:
        return cfg.horizon_cap
    return int(min(math.ceil(room / rate_bps * 1e9), cfg.horizon_cap))


class EwmaRate:
    """Exponentially weighted arrival-rate estimate (bits/s), continuous decay."""

    def __init__(self, half_life_ns: int):
        self.lam = math.log(2) / half_life_ns  # per ns
        self.value = 0.0  # bits per ns
        self.t = 0

    def advance(self, now: int) -> None:
        if now > self.t:
            self.value *= math.exp(-self.lam * (now - self.t))
            self.t = now

    def add(self, times: np.ndarray, bits: int) -> None:
        if len(times) == 0:
            return
        end = int(times[-1])
        self.advance(end)
        self.value += self.lam * bits * float(np.exp(-self.lam * (end - times.astype(float))).sum())

    def rate_bps(self, now: int) -> float:
        self.advance(now)
        return self.value * 1e9
