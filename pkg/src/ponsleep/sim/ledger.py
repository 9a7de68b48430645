from __future__ import annotations

from dataclasses import dataclass, field

from ..model import PowerProfile, SleepMode

MODES = (SleepMode.DEEP_SLEEP, SleepMode.FAST_SLEEP, SleepMode.DOZE, SleepMode.ACTIVE)


class EnergyLedger:
    """Per-ONU time spent in each power mode, as a sequence of closed segments."""

    def __init__(self, n: int, start_mode: SleepMode = SleepMode.DOZE):
        self.time = [{m: 0 for m in MODES} for _ in range(n)]
        self.mode = [start_mode] * n
        self.since = [0] * n

    def switch(self, onu: int, t: int, mode: SleepMode) -> None:
        since = self.since[onu]
        if t < since:
            raise AssertionError(f"ONU {onu}: mode switch at {t} precedes segment start {since}")
        self.time[onu][self.mode[onu]] += t - since
        self.mode[onu] = mode
        self.since[onu] = t

    def close(self, t: int) -> None:
        for onu in range(len(self.mode)):
            self.switch(onu, t, self.mode[onu])

    def total_time(self, onu: int) -> int:
        return sum(self.time[onu].values())

    def joules(self, profile: PowerProfile, onu=None) -> float:
        onus = range(len(self.time)) if onu is None else (onu,)
        return sum(profile.power(m) * self.time[i][m] for i in onus for m in MODES) / 1e9

    def mode_totals(self) -> dict:
        return {m.value: sum(t[m] for t in self.time) for m in MODES}


@dataclass
class DelayLedger:
    delivered: int = 0
    delay_sum: int = 0
    min_delay: int = 0
    drops: int = 0
    dereg_events: int = 0
    max_report_gap: int = 0

    def record(self, delays) -> None:
        if len(delays) == 0:
            return
        lo = int(delays.min())
        if lo < 0:
            raise AssertionError(f"negative packet delay {lo}")
        self.min_delay = lo if self.delivered == 0 else min(self.min_delay, lo)
        self.delivered += len(delays)
        self.delay_sum += int(delays.sum())

    @property
    def average(self) -> float:
        return self.delay_sum / self.delivered if self.delivered else 0.0
