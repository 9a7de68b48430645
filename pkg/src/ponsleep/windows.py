"""Feasible wake-up slot windows for sleeping ONUs.

Everything is evaluated relative to the current decision epoch (t = 0):
stored timestamps are negative when they lie in the past.  Slot ``j >= 1``
starts at ``(j-1)*T_cm``, so slot 1 is the cycle that begins now.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

from .model import DEFAULT_POWER, AssignmentProblem, PowerProfile, SleepMode, MS

UNBOUNDED = sys.maxsize


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class InfeasibleWindow(Exception):
    """No slot satisfies an ONU's bounds; the ONU has to be woken now."""

    def __init__(self, onu_id, lb, ub):
        super().__init__(f"ONU {onu_id}: empty window [{lb}, {ub}]")
        self.onu_id = onu_id
        self.lb = lb
        self.ub = ub


@dataclass(frozen=True)
class OnuScheduleState:
    onu_id: int
    rtt: int
    sleep_mode: SleepMode
    last_report_time: int
    reported_fill_time: int
    min_sleep_threshold: int = 0
    ds_fill_time: Optional[int] = None
    wake_sent_at: Optional[int] = None
    last_gate_time: Optional[int] = None

    def __post_init__(self):
        if self.rtt <= 0:
            raise ValueError("round-trip time must be positive")
        if self.last_report_time > 0:
            raise ValueError("last report time must not lie in the future")


@dataclass(frozen=True)
class Forced:
    slot: int


@dataclass(frozen=True)
class Range:
    lb: int
    ub: int

    def __post_init__(self):
        if self.lb > self.ub:
            raise ValueError(f"empty range [{self.lb}, {self.ub}]")

    def slots(self) -> range:
        return range(self.lb, self.ub + 1)


FeasibleWindow = Union[Forced, Range]


@dataclass(frozen=True)
class WindowConfig:
    t_cm: int = 2 * MS
    t_dr: int = 50 * MS
    profile: PowerProfile = field(default=DEFAULT_POWER)


def forced_slot(s: OnuScheduleState, t_cm: int, profile: PowerProfile = DEFAULT_POWER) -> int:
    if s.wake_sent_at is None:
        raise ValueError(f"ONU {s.onu_id} has no outstanding wake-up message")
    t_sw = profile.t_sw(s.sleep_mode)
    if s.last_gate_time is not None and s.wake_sent_at + t_sw < s.last_gate_time:
        return 1
    return _ceil_div(s.wake_sent_at + s.rtt + t_sw, t_cm) + 1


def ub_us(s: OnuScheduleState, t_cm: int) -> int:
    ub = _floor_div(s.last_report_time + s.reported_fill_time - 2 * t_cm, t_cm) + 1
    if ub < 1:
        raise InfeasibleWindow(s.onu_id, None, ub)
    return ub


def ub_ds(s: OnuScheduleState, t_cm: int) -> int:
    if s.ds_fill_time is None:
        return UNBOUNDED
    return _floor_div(s.ds_fill_time, t_cm) + 1


def ub_dereg(s: OnuScheduleState, t_cm: int, t_dr: int) -> int:
    ub = _floor_div(s.last_report_time + t_dr, t_cm) + 1
    if ub < 1:
        raise InfeasibleWindow(s.onu_id, None, ub)
    return ub


def lb_present(s: OnuScheduleState, t_cm: int, profile: PowerProfile = DEFAULT_POWER) -> int:
    return _ceil_div(s.rtt + profile.t_sw(s.sleep_mode), t_cm) + 1


def lb_min_sleep(s: OnuScheduleState, t_cm: int) -> int:
    lb = _ceil_div(s.last_report_time + s.min_sleep_threshold - 2 * t_cm, t_cm) + 1
    return max(lb, 1)


def window(s: OnuScheduleState, cfg: WindowConfig) -> FeasibleWindow:
    if s.wake_sent_at is not None:
        return Forced(forced_slot(s, cfg.t_cm, cfg.profile))
    lb = max(lb_present(s, cfg.t_cm, cfg.profile), lb_min_sleep(s, cfg.t_cm))
    try:
        ub = min(ub_us(s, cfg.t_cm), ub_ds(s, cfg.t_cm), ub_dereg(s, cfg.t_cm, cfg.t_dr))
    except InfeasibleWindow as exc:
        raise InfeasibleWindow(s.onu_id, lb, exc.ub) from None
    if lb > ub:
        raise InfeasibleWindow(s.onu_id, lb, ub)
    return Range(lb, ub)


@dataclass
class ProblemBuild:
    """Result of :func:`build_problem`.

    ``problem`` is None when every ONU ended up in ``immediate``.
    """

    problem: Optional[AssignmentProblem]
    windows: dict
    immediate: list


ArcOverride = Callable[[OnuScheduleState, FeasibleWindow], Iterable[int]]


def build_problem(states: Sequence[OnuScheduleState], cfg: WindowConfig,
                  arc_override: Optional[ArcOverride] = None) -> ProblemBuild:
    """Assemble the arc set over slots ``1..M`` from per-ONU windows.

    ``arc_override`` may replace the slot list derived from a window (for
    additional SLA constraints that only prune the arc set).
    """
    if not states:
        raise ValueError("at least one ONU state is required")
    windows = {}
    immediate = []
    onus, arcs = [], []
    for s in states:
        try:
            w = window(s, cfg)
        except InfeasibleWindow as exc:
            immediate.append(exc)
            continue
        windows[s.onu_id] = w
        slots = (w.slot,) if isinstance(w, Forced) else tuple(w.slots())
        if arc_override is not None:
            slots = tuple(arc_override(s, w))
        if not slots:
            immediate.append(InfeasibleWindow(s.onu_id, None, None))
            del windows[s.onu_id]
            continue
        onus.append(s.onu_id)
        arcs.append(slots)
    if not onus:
        return ProblemBuild(None, windows, immediate)
    m = max(max(a) for a in arcs)
    problem = AssignmentProblem(arcs=tuple(arcs), slots=tuple(range(1, m + 1)), onus=tuple(onus))
    return ProblemBuild(problem, windows, immediate)
