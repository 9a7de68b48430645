"""Self-similar upstream traffic from aggregated ON-OFF Pareto sources.

Every source emits back-to-back fixed-size packets at ``peak/num_sources``
while ON and nothing while OFF.  ON lengths are a whole number of packets
(``ceil`` of a unit-scale Pareto draw) and OFF lengths are Pareto with the
same shape; both are truncated at ``truncate_ns``.  The OFF scale is solved
so the long-run mean rate equals ``load * peak``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import brentq

from .model import S


@dataclass(frozen=True)
class TrafficConfig:
    load: float
    num_sources: int = 16
    hurst: float = 0.8
    peak_rate_bps: float = 100e6
    packet_bytes: int = 1500
    seed: int = 0
    alpha: Optional[float] = None
    truncate_ns: int = 10 * S

    def __post_init__(self):
        if not (0 < self.load <= 1):
            raise ValueError(f"load must lie in (0, 1], got {self.load}")
        if self.num_sources < 1 or self.packet_bytes < 1 or self.peak_rate_bps <= 0:
            raise ValueError("sources, packet size and peak rate must be positive")
        if not 1 < self.shape < 2:
            raise ValueError(f"Pareto shape must lie in (1, 2), got {self.shape}")

    @property
    def shape(self) -> float:
        return 3 - 2 * self.hurst if self.alpha is None else self.alpha

    @property
    def packet_bits(self) -> int:
        return 8 * self.packet_bytes

    @property
    def spacing_ns(self) -> int:
        """Packet spacing of one source while ON."""
        return round(self.packet_bits * 1e9 * self.num_sources / self.peak_rate_bps)

    @property
    def mean_rate_bps(self) -> float:
        return self.load * self.peak_rate_bps


def truncated_pareto_mean(xm: float, alpha: float, cap: float) -> float:
    """E[min(X, cap)] for X ~ Pareto(xm, alpha), xm <= cap."""
    return xm * alpha / (alpha - 1) - xm ** alpha * cap ** (1 - alpha) / (alpha - 1)


def mean_on_packets(alpha: float, cap_packets: float) -> float:
    """E[ceil(min(X, cap))] for unit-scale Pareto X."""
    m = np.arange(1, math.ceil(cap_packets), dtype=float)
    return 1.0 + float(np.sum(m ** -alpha))


@dataclass(frozen=True)
class SourceParams:
    alpha: float
    spacing_ns: int
    on_cap_packets: float
    off_xm_ns: float
    off_cap_ns: float


def source_params(cfg: TrafficConfig) -> SourceParams:
    a = cfg.shape
    spacing = cfg.spacing_ns
    on_cap = cfg.truncate_ns / spacing
    mean_on_ns = mean_on_packets(a, on_cap) * spacing
    if cfg.load >= 1:
        return SourceParams(a, spacing, on_cap, 0.0, float(cfg.truncate_ns))
    # the ON time is rounded to whole packets, so the rate is exact in expectation
    target_off = mean_on_ns * (1 - cfg.load) / cfg.load
    cap = float(cfg.truncate_ns)
    if target_off >= truncated_pareto_mean(cap, a, cap):
        raise ValueError(f"load {cfg.load} too small for the {cap:.0f} ns truncation")
    xm = brentq(lambda x: truncated_pareto_mean(x, a, cap) - target_off, 1e-9, cap, xtol=1e-6)
    return SourceParams(a, spacing, on_cap, xm, cap)


def _pareto(rng: np.random.Generator, xm: float, alpha: float, size: int) -> np.ndarray:
    u = 1.0 - rng.random(size)  # (0, 1]
    return xm * u ** (-1.0 / alpha)


def source_arrivals(sp: SourceParams, rng: np.random.Generator, horizon_ns: int) -> np.ndarray:
    """Packet emission times (ns) of one source over ``[0, horizon_ns)``."""
    chunks = []
    t = 0
    # random phase: start inside an OFF period
    if sp.off_xm_ns > 0:
        t = int(min(_pareto(rng, sp.off_xm_ns, sp.alpha, 1)[0], sp.off_cap_ns) * rng.random())
    mean_cycle = 4.0 * sp.spacing_ns + sp.off_xm_ns * 3.5
    while t < horizon_ns:
        batch = int(min(1 << 20, max(64, 1.5 * (horizon_ns - t) / mean_cycle)))
        on = np.ceil(np.minimum(_pareto(rng, 1.0, sp.alpha, batch), sp.on_cap_packets)).astype(np.int64)
        if sp.off_xm_ns > 0:
            off = np.minimum(_pareto(rng, sp.off_xm_ns, sp.alpha, batch), sp.off_cap_ns).astype(np.int64)
        else:
            off = np.zeros(batch, dtype=np.int64)
        span = on * sp.spacing_ns + off
        starts = t + np.concatenate(([0], np.cumsum(span[:-1])))
        keep = starts < horizon_ns
        on, starts = on[keep], starts[keep]
        first = np.cumsum(on) - on
        offs = np.arange(int(on.sum()), dtype=np.int64) - np.repeat(first, on)
        times = np.repeat(starts, on) + offs * sp.spacing_ns
        chunks.append(times[times < horizon_ns])
        t = int(starts[-1] + span[keep][-1]) if len(starts) else horizon_ns
        if not keep.all():
            break
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)


def onu_arrivals(cfg: TrafficConfig, horizon_ns: int, stream: int = 0) -> np.ndarray:
    """Sorted arrival times (ns) of the aggregate of ``num_sources`` sources."""
    sp = source_params(cfg)
    root = np.random.SeedSequence([cfg.seed, stream])
    parts = [source_arrivals(sp, np.random.Generator(np.random.Philox(child)), horizon_ns)
             for child in root.spawn(cfg.num_sources)]
    times = np.concatenate(parts)
    times.sort(kind="stable")
    return times


class TrafficGenerator:
    """Iterator-style access to one ONU's pre-generated arrival stream."""

    def __init__(self, cfg: TrafficConfig, horizon_ns: int, stream: int = 0):
        self.cfg = cfg
        self.times = onu_arrivals(cfg, horizon_ns, stream)
        self._pos = 0

    def next_arrival(self) -> Optional[tuple[int, int]]:
        if self._pos >= len(self.times):
            return None
        t = int(self.times[self._pos])
        self._pos += 1
        return t, self.cfg.packet_bytes

    def __iter__(self) -> Iterator[tuple[int, int]]:
        while (item := self.next_arrival()) is not None:
            yield item


def write_trace(path, streams: dict, packet_bytes: int = 1500) -> None:
    """CSV of (arrival_ns, bytes, onu_id), merged in time order."""
    rows = [(int(t), onu) for onu, times in streams.items() for t in times]
    rows.sort()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arrival_ns", "bytes", "onu_id"])
        for t, onu in rows:
            w.writerow([t, packet_bytes, onu])
