"""Discrete-event EPON upstream simulator.

The OLT polls awake ONUs IPACT-style (one outstanding GATE per ONU, bursts
packed back to back on the shared upstream with a guard gap) and sizes
grants with the limited scheme.  ONUs follow the two OSMP-EO rules.  With
the FDOS scheduler the OLT additionally solves the fair slot assignment at
every ``T_cm`` boundary and sends wake-up messages.

Times are integer ns.  Events carry OLT-side or ONU-side timestamps; the
upstream and downstream propagation delays are ``rtt//2`` and
``rtt - rtt//2``.
"""

from __future__ import annotations

import heapq
import logging
import math
import time as _time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..fdos import fdos
from ..model import SleepMode, jain_index
from ..traffic import TrafficConfig, onu_arrivals
from ..windows import Forced, OnuScheduleState, WindowConfig, build_problem
from .config import Predictor, Scheduler, SimConfig
from .ledger import DelayLedger, EnergyLedger
from .policy import (EwmaRate, WakeTarget, grant_size, osmp_decide, predict_fill_ewma,
                     predict_fill_oracle, rule1_threshold, schedule_wakeups)

log = logging.getLogger(__name__)

# event classes, in tie-break order
RX, TIMER, TX = 0, 1, 2
BURST, WAKE_RX, WAKE_DONE, TICK, EPOCH, GATE, WAKE_TX = range(7)
_CLASS = {BURST: RX, WAKE_RX: RX, WAKE_DONE: TIMER, TICK: TIMER, EPOCH: TIMER, GATE: TX, WAKE_TX: TX}

AWAKE, SLEEPING, WAKING = "awake", "sleeping", "waking"
_NEVER = -(1 << 62)


class RuntimeCapExceeded(RuntimeError):
    pass


@dataclass
class MetricsReport:
    scheduler: str
    load: float
    N: int
    T_rtt_ns: int
    B_th_bits: int
    energy_J: float
    energy_efficiency: float
    avg_delay_ns: float
    drops: int
    dereg_events: int
    mean_jain: float
    mean_cycle_ns: float
    delivered: int = 0
    max_report_gap_ns: int = 0
    min_burst_gap_ns: int = 0
    late_wakeups: int = 0
    immediate_wakeups: int = 0
    fdos_runs: int = 0
    wake_messages: int = 0
    self_wakeups: int = 0
    mode_time_ns: dict = field(default_factory=dict)
    per_onu_time_ns: list = field(default_factory=list)
    per_onu_energy_J: list = field(default_factory=list)

    def row(self) -> dict:
        return asdict(self)


class Onu:
    def __init__(self, i: int, rtt: int, arrivals: np.ndarray, cfg: SimConfig):
        self.id = i
        self.rtt = rtt
        self.up = rtt // 2
        self.down = rtt - self.up
        self.arr = arrivals
        self.nxt = 0
        self.acc = np.empty(len(arrivals) + 1, dtype=np.int64)
        self.head = 0
        self.tail = 0
        self.state = AWAKE
        self.mode: Optional[SleepMode] = None
        self.awake_at = _NEVER
        self.token = 0
        self.polled = False
        self.outstanding = False
        self.req: Optional[int] = None
        self.last_report_rx = 0
        self.last_report_tx = 0
        self.prev_start: Optional[int] = None
        self.last_cycle = -1
        # OLT view of a sleeping ONU
        self.olt_sleeping = False
        self.episode = 0
        self.t_lr = 0
        self.t_bu = 0
        self.wake_sent_at: Optional[int] = None
        self.last_gate: Optional[int] = None
        self.ewma = EwmaRate(cfg.ewma_half_life) if cfg.predictor is Predictor.EWMA else None

    @property
    def queued(self) -> int:
        return self.tail - self.head


class Simulator:
    def __init__(self, cfg: SimConfig, wall_cap_s: Optional[float] = None, trace: bool = False):
        self.cfg = cfg
        self.wall_cap_s = wall_cap_s
        self.trace = trace
        self.bursts = [] if trace else None
        self.report_times = [[] for _ in range(cfg.n_onus)] if trace else None
        horizon = cfg.runtime_ns + cfg.horizon_cap + cfg.t_dr
        self.onus = []
        for i, rtt in enumerate(cfg.rtts()):
            if cfg.load > 0:
                tc = TrafficConfig(load=cfg.source_load, num_sources=cfg.num_sources, hurst=cfg.hurst,
                                   peak_rate_bps=cfg.peak, packet_bytes=cfg.packet_bytes, seed=cfg.seed)
                arr = onu_arrivals(tc, horizon, stream=i)
            else:
                arr = np.zeros(0, dtype=np.int64)
            self.onus.append(Onu(i, rtt, arr, cfg))
        self.energy = EnergyLedger(cfg.n_onus)
        self.delay = DelayLedger()
        self.heap: list = []
        self.seq = 0
        self.ch_free = _NEVER
        self.min_gap = None
        self.tx_pkt = cfg.tx_ns(cfg.packet_bits)
        self.tx_report = cfg.tx_ns(8 * cfg.report_bytes)
        self.cap = cfg.buffer_packets
        self.wcfg = WindowConfig(t_cm=cfg.t_cm, t_dr=cfg.t_dr, profile=cfg.profile)
        n_cycles = cfg.runtime_ns // cfg.t_cm + 2
        self.active_per_cycle = np.zeros(n_cycles, dtype=np.int64)
        self.cycle_sum = 0
        self.cycle_n = 0
        self.stats = dict(late=0, immediate=0, fdos_runs=0, messages=0, self_wakes=0)

    # -- plumbing ---------------------------------------------------------
    def push(self, t: int, kind: int, onu: int = -1, payload=None) -> None:
        self.seq += 1
        heapq.heappush(self.heap, (t, _CLASS[kind], onu, self.seq, kind, payload))

    def n_active(self) -> int:
        if self.cfg.scheduler is Scheduler.OSMP:
            return self.cfg.n_onus
        return max(1, sum(1 for o in self.onus if o.polled))

    # -- queue ------------------------------------------------------------
    def admit(self, o: Onu, t: int) -> None:
        """Move arrivals up to ``t`` into the queue; nothing departs meanwhile."""
        j = int(np.searchsorted(o.arr, t, side="right"))
        k = j - o.nxt
        if k <= 0:
            return
        take = min(k, self.cap - o.queued)
        o.acc[o.tail:o.tail + take] = o.arr[o.nxt:o.nxt + take]
        o.tail += take
        self.delay.drops += k - take
        if o.ewma is not None:
            o.ewma.add(o.arr[o.nxt:j], self.cfg.packet_bits)
        o.nxt = j

    def transmit(self, o: Onu, u: int, v: int, s: int, grant: int) -> None:
        """Burst on the ONU side over ``[u, v]``; the OLT sees it from ``s``."""
        self.admit(o, u)
        g = min(grant, o.queued)
        if g:
            done = s + self.tx_pkt * np.arange(1, g + 1, dtype=np.int64)
            self.delay.record(done - o.acc[o.head:o.head + g])
            o.head += g
        j = int(np.searchsorted(o.arr, v, side="right"))
        k = j - o.nxt
        if k <= 0:
            return
        if o.queued + g + k <= self.cap:
            self.admit(o, v)
            return
        # packets still in flight occupy buffer space until sent
        accepted = 0
        base = o.queued
        for idx in range(o.nxt, j):
            a = int(o.arr[idx])
            sent = min(g, (a - u) // self.tx_pkt)
            if base + (g - sent) + accepted < self.cap:
                o.acc[o.tail] = a
                o.tail += 1
                accepted += 1
            else:
                self.delay.drops += 1
        if o.ewma is not None:
            o.ewma.add(o.arr[o.nxt:j], self.cfg.packet_bits)
        o.nxt = j

    def predict(self, o: Onu, now: int) -> int:
        if o.ewma is None:
            return predict_fill_oracle(o.arr, o.nxt, o.queued, now, self.cfg)
        return predict_fill_ewma(o.queued * self.cfg.packet_bits, o.ewma.rate_bps(now), self.cfg)

    # -- OLT --------------------------------------------------------------
    def schedule_burst(self, o: Onu, g: int, grant: int) -> None:
        if o.outstanding:
            raise AssertionError(f"ONU {o.id} already has an outstanding GATE")
        s = max(self.ch_free + self.cfg.guard_ns, g + o.rtt)
        if self.ch_free != _NEVER:
            gap = s - self.ch_free
            self.min_gap = gap if self.min_gap is None else min(self.min_gap, gap)
        e = s + grant * self.tx_pkt + self.tx_report
        self.ch_free = e
        o.outstanding = True
        o.last_gate = s - o.rtt
        c = s // self.cfg.t_cm
        if c != o.last_cycle and c < len(self.active_per_cycle):
            self.active_per_cycle[c] += 1
            o.last_cycle = c
        if o.prev_start is not None:
            self.cycle_sum += s - o.prev_start
            self.cycle_n += 1
        o.prev_start = s
        if self.trace:
            self.bursts.append((s, e, o.id))
        self.push(e, BURST, o.id, (s, grant))

    def pickup(self, o: Onu, g: int) -> None:
        o.olt_sleeping = False
        o.wake_sent_at = None
        o.polled = True
        o.req = None
        self.schedule_burst(o, g, 0)

    def on_burst(self, o: Onu, e: int, s: int, grant: int) -> None:
        cfg = self.cfg
        u, v = s - o.up, e - o.up
        o.outstanding = False
        self.energy.switch(o.id, u - cfg.guard_ns, SleepMode.ACTIVE)
        self.transmit(o, u, v, s, grant)
        self.energy.switch(o.id, v + cfg.guard_ns, SleepMode.DOZE)
        gap = e - o.last_report_rx
        self.delay.max_report_gap = max(self.delay.max_report_gap, gap)
        if gap >= cfg.t_dr:
            self.delay.dereg_events += 1
        o.last_report_rx, o.last_report_tx = e, v
        if self.trace:
            self.report_times[o.id].append(e)
        drained = o.req is not None and grant >= o.req
        if drained:
            t_bu = self.predict(o, v)
            mode = osmp_decide(SleepMode.ACTIVE, min(t_bu, cfg.t_dr), cfg)
            if mode is not SleepMode.ACTIVE:
                self.fall_asleep(o, v, e, mode, t_bu)
                return
        report_bytes = o.queued * cfg.packet_bytes
        g = grant_size(report_bytes, self.n_active(), cfg) // cfg.packet_bytes
        o.req = o.queued
        self.schedule_burst(o, e, g)

    def fall_asleep(self, o: Onu, v: int, e: int, mode: SleepMode, t_bu: int) -> None:
        cfg = self.cfg
        ts = v + cfg.guard_ns
        self.energy.switch(o.id, ts, mode)
        o.state, o.mode = SLEEPING, mode
        o.polled = False
        o.prev_start = None
        o.token += 1
        o.olt_sleeping = True
        o.episode += 1
        # the reported fill time already folds in the deregistration deadline
        o.t_lr, o.t_bu = v, min(t_bu, cfg.t_dr)
        o.wake_sent_at = None
        if o.ewma is None:
            fill = v + o.t_bu
            k = max(1, -(-(fill - rule1_threshold(mode, cfg) - ts) // cfg.t_m))
            self.push(ts + k * cfg.t_m, TICK, o.id, (o.token, True))
        else:
            self.push(ts + cfg.t_m, TICK, o.id, (o.token, False))

    def on_epoch(self, t: int) -> None:
        cfg = self.cfg
        for o in self.onus:
            if o.state == AWAKE and not o.polled and o.wake_sent_at is None and o.awake_at + o.up <= t:
                self.pickup(o, t)
        if cfg.scheduler is Scheduler.FDOS:
            self.fdos_epoch(t)
        if t + cfg.t_cm <= cfg.runtime_ns:
            self.push(t + cfg.t_cm, EPOCH)

    def fdos_epoch(self, t: int) -> None:
        cfg = self.cfg
        sleepers = [o for o in self.onus if o.olt_sleeping]
        if not sleepers:
            return
        states = []
        for o in sleepers:
            states.append(OnuScheduleState(
                onu_id=o.id, rtt=o.rtt, sleep_mode=o.mode, last_report_time=o.t_lr - t,
                reported_fill_time=o.t_bu, min_sleep_threshold=cfg.t_lb(o.mode),
                wake_sent_at=None if o.wake_sent_at is None else o.wake_sent_at - t,
                last_gate_time=None if o.last_gate is None else o.last_gate - t))
        built = build_problem(states, self.wcfg)
        for exc in built.immediate:
            o = self.onus[exc.onu_id]
            if o.wake_sent_at is None:
                self.stats["immediate"] += 1
                self.push(t, WAKE_TX, o.id, o.episode)
        if built.problem is None:
            return
        # FDOS only matters if some ONU could get a message during this cycle
        soon = False
        for onu_id, w in built.windows.items():
            if isinstance(w, Forced):
                continue
            o = self.onus[onu_id]
            if (w.lb - 1) * cfg.t_cm - cfg.profile.t_sw(o.mode) - o.rtt < cfg.t_cm:
                soon = True
                break
        if not soon:
            return
        res = fdos(built.problem)
        self.stats["fdos_runs"] += 1
        targets = {}
        for onu_id, slot in res.assignment.slot_of.items():
            o = self.onus[onu_id]
            targets[onu_id] = WakeTarget(slot, o.mode, o.rtt, isinstance(built.windows[onu_id], Forced))
        messages, _ = schedule_wakeups(t, targets, cfg)
        for m in messages:
            self.stats["late"] += m.late
            self.push(m.send_at, WAKE_TX, m.onu, self.onus[m.onu].episode)

    def on_wake_tx(self, o: Onu, t: int, episode: int) -> None:
        if not o.olt_sleeping or o.wake_sent_at is not None or episode != o.episode:
            return
        o.wake_sent_at = t
        self.stats["messages"] += 1
        self.push(t + o.down, WAKE_RX, o.id, episode)
        self.push(t + self.cfg.profile.t_sw(o.mode) + self.cfg.guard_ns, GATE, o.id, episode)

    # -- ONU --------------------------------------------------------------
    def start_wake(self, o: Onu, x: int) -> None:
        o.token += 1
        self.energy.switch(o.id, x, SleepMode.ACTIVE)
        o.state = WAKING
        self.push(x + self.cfg.profile.t_sw(o.mode), WAKE_DONE, o.id, o.token)

    def on_tick(self, o: Onu, x: int, closed_form: bool) -> None:
        cfg = self.cfg
        if closed_form:
            self.stats["self_wakes"] += 1
            self.start_wake(o, x)
            return
        self.admit(o, x)
        t_bu = min(self.predict(o, x), o.last_report_tx + cfg.t_dr - x)
        if osmp_decide(o.mode, t_bu, cfg) is SleepMode.ACTIVE:
            self.stats["self_wakes"] += 1
            self.start_wake(o, x)
        else:
            self.push(x + cfg.t_m, TICK, o.id, (o.token, False))

    # -- main loop --------------------------------------------------------
    def run(self) -> MetricsReport:
        cfg = self.cfg
        self.push(0, EPOCH)
        started = _time.monotonic()
        steps = 0
        while self.heap:
            t, _, onu, _, kind, payload = heapq.heappop(self.heap)
            if t > cfg.runtime_ns:
                break
            steps += 1
            if self.wall_cap_s is not None and steps % 4096 == 0 \
                    and _time.monotonic() - started > self.wall_cap_s:
                raise RuntimeCapExceeded(f"wall-clock cap {self.wall_cap_s}s hit at t={t}")
            if kind == EPOCH:
                self.on_epoch(t)
                continue
            o = self.onus[onu]
            if kind == BURST:
                self.on_burst(o, t, *payload)
            elif kind == TICK:
                token, closed = payload
                if token == o.token and o.state == SLEEPING:
                    self.on_tick(o, t, closed)
            elif kind == WAKE_RX:
                if o.state == SLEEPING and payload == o.episode:
                    self.start_wake(o, t)
            elif kind == WAKE_DONE:
                if payload == o.token:
                    self.energy.switch(o.id, t, SleepMode.DOZE)
                    o.state, o.awake_at = AWAKE, t
            elif kind == GATE:
                if payload == o.episode and not o.polled and o.olt_sleeping:
                    self.pickup(o, t)
            elif kind == WAKE_TX:
                self.on_wake_tx(o, t, payload)
        return self.finish()

    def finish(self) -> MetricsReport:
        cfg = self.cfg
        end = cfg.runtime_ns
        for o in self.onus:
            if o.state == SLEEPING:
                self.admit(o, end)
            if end - o.last_report_rx >= cfg.t_dr:
                self.delay.dereg_events += 1
        self.energy.close(end)
        joules = self.energy.joules(cfg.profile)
        p_on = cfg.profile.power(SleepMode.ACTIVE)
        eff = 1 - joules / (cfg.n_onus * p_on * end / 1e9)
        return MetricsReport(
            scheduler=cfg.scheduler.value, load=cfg.load, N=cfg.n_onus,
            T_rtt_ns=cfg.rtts()[0], B_th_bits=cfg.b_th_bits, energy_J=joules,
            energy_efficiency=eff, avg_delay_ns=self.delay.average, drops=self.delay.drops,
            dereg_events=self.delay.dereg_events, mean_jain=self.mean_jain(),
            mean_cycle_ns=self.cycle_sum / self.cycle_n if self.cycle_n else 0.0,
            delivered=self.delay.delivered, max_report_gap_ns=self.delay.max_report_gap,
            min_burst_gap_ns=self.min_gap or 0, late_wakeups=self.stats["late"],
            immediate_wakeups=self.stats["immediate"], fdos_runs=self.stats["fdos_runs"],
            wake_messages=self.stats["messages"], self_wakeups=self.stats["self_wakes"],
            mode_time_ns=self.energy.mode_totals(),
            per_onu_time_ns=[self.energy.total_time(i) for i in range(cfg.n_onus)],
            per_onu_energy_J=[self.energy.joules(cfg.profile, i) for i in range(cfg.n_onus)])

    def mean_jain(self) -> float:
        """Jain index of active-ONU counts over blocks of consecutive cycles, averaged."""
        b = self.cfg.jain_block
        counts = self.active_per_cycle[: self.cfg.runtime_ns // self.cfg.t_cm]
        vals = []
        for k in range(0, len(counts) - b + 1, b):
            block = counts[k:k + b]
            if block.any():
                vals.append(float(jain_index(block.tolist())))
        return float(np.mean(vals)) if vals else 0.0


def run(cfg: SimConfig, wall_cap_s: Optional[float] = None, trace: bool = False) -> MetricsReport:
    return Simulator(cfg, wall_cap_s, trace).run()
