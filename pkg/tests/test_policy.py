import numpy as np
import pytest
from hypothesis import given, strategies as st

from ponsleep.model import MS, US, SleepMode
from ponsleep.sim import ConfigError, SimConfig
from ponsleep.sim.policy import (EwmaRate, SchedulingError, WakeTarget, grant_size, max_cycle_bits,
                                 osmp_decide, predict_fill_ewma, predict_fill_oracle, rule1_threshold,
                                 schedule_wakeups)

CFG = SimConfig()


def test_rule1_examples():
    assert rule1_threshold(SleepMode.DEEP_SLEEP, CFG) == 10_125 * US
    assert osmp_decide(SleepMode.DEEP_SLEEP, 20 * MS, CFG) is SleepMode.DEEP_SLEEP
    assert osmp_decide(SleepMode.DEEP_SLEEP, 9 * MS, CFG) is SleepMode.ACTIVE
    # fs threshold: 1 ms + 125 us + 2 * 2 ms, retained only strictly above it
    assert osmp_decide(SleepMode.FAST_SLEEP, 5_125 * US + 1, CFG) is SleepMode.FAST_SLEEP
    assert osmp_decide(SleepMode.FAST_SLEEP, 5_125 * US, CFG) is SleepMode.ACTIVE


def test_rule2_branches():
    ds, fs = CFG.t_lb(SleepMode.DEEP_SLEEP), CFG.t_lb(SleepMode.FAST_SLEEP)
    assert fs < ds
    assert osmp_decide(SleepMode.ACTIVE, ds, CFG) is SleepMode.DEEP_SLEEP
    assert osmp_decide(SleepMode.ACTIVE, (fs + ds) // 2, CFG) is SleepMode.FAST_SLEEP
    assert osmp_decide(SleepMode.ACTIVE, fs, CFG) is SleepMode.ACTIVE


def test_t_lb_override():
    cfg = CFG.with_(t_lb_ds=20 * MS, t_lb_fs=1 * MS)
    assert osmp_decide(SleepMode.ACTIVE, 20 * MS, cfg) is SleepMode.DEEP_SLEEP
    assert osmp_decide(SleepMode.ACTIVE, 2 * MS, cfg) is SleepMode.FAST_SLEEP
    with pytest.raises(ValueError):
        cfg.t_lb(SleepMode.DOZE)


def test_grant_examples():
    cfg = SimConfig(t_cm=123 * US)  # B_m = (123 - 3) us * 1 Gb/s = 15000 bytes at N_a = 3
    assert max_cycle_bits(3, cfg) // 8 == 15_000
    assert grant_size(8_000, 3, cfg) == 5_000
    assert grant_size(2_000, 3, cfg) == 2_000
    assert grant_size(8_000, 3, cfg, assigned=False) == 0
    with pytest.raises(SchedulingError):
        grant_size(100, 0, cfg)
    assert grant_size(0, 0, cfg) == 0


def test_wakeup_examples():
    fs = dict(mode=SleepMode.FAST_SLEEP, rtt=200 * US)
    msgs, deferred = schedule_wakeups(0, {0: WakeTarget(3, **fs), 1: WakeTarget(2, **fs)}, CFG)
    assert deferred == [0]
    assert [(m.onu, m.send_at, m.late) for m in msgs] == [(1, 1_675 * US, False)]
    msgs, deferred = schedule_wakeups(0, {0: WakeTarget(1, forced=True, **fs)}, CFG)
    assert msgs == [] and deferred == []


def test_wakeup_late_clamped():
    msgs, _ = schedule_wakeups(10 * MS, {0: WakeTarget(2, SleepMode.DEEP_SLEEP, 200 * US)}, CFG)
    assert msgs[0].send_at == 10 * MS and msgs[0].late


def test_fill_prediction_examples():
    assert predict_fill_ewma(CFG.b_th_bits, 1e6, CFG) == 0
    assert predict_fill_ewma(500_000, 50e6, CFG.with_(b_th_bits=1_000_000)) == 10 * MS
    assert predict_fill_ewma(0, 0.0, CFG) == CFG.horizon_cap
    arr = np.arange(1, 200, dtype=np.int64) * MS
    assert predict_fill_oracle(arr, 0, CFG.b_th_packets, 0, CFG) == 0


@given(st.lists(st.integers(0, 10**9), min_size=0, max_size=300), st.integers(0, 90), st.integers(0, 10**9))
def test_oracle_fill_matches_rescan(times, queued, now):
    arr = np.array(sorted(times), dtype=np.int64)
    nxt = int(np.searchsorted(arr, now, side="right"))
    got = predict_fill_oracle(arr, nxt, queued, now, CFG)
    # rescan: walk the trace until the queue reaches the threshold
    q, expect = queued, None
    if q >= CFG.b_th_packets:
        expect = 0
    else:
        for t in arr[nxt:]:
            q += 1
            if q >= CFG.b_th_packets:
                expect = min(max(int(t) - now, 0), CFG.horizon_cap)
                break
        if expect is None:
            expect = CFG.horizon_cap
    assert got == expect


def test_ewma_converges_to_constant_rate():
    est = EwmaRate(10 * MS)
    spacing = 240 * US  # 12000 bits every 240 us = 50 Mb/s
    times = np.arange(1, 2000, dtype=np.int64) * spacing
    for chunk in np.array_split(times, 40):
        est.add(chunk, 12_000)
    assert est.rate_bps(int(times[-1])) == pytest.approx(50e6, rel=0.01)
    half = est.rate_bps(int(times[-1]) + 10 * MS)
    assert half == pytest.approx(25e6, rel=0.01)


@pytest.mark.parametrize("kw", [dict(b_th_bits=2_000_000), dict(guard_ns=200 * US),
                                dict(load=1.5), dict(rtt=(1, 2)), dict(t_dr=0),
                                dict(load_basis="other"), dict(b_th_bits=100)])
def test_config_rejects(kw):
    with pytest.raises(ConfigError):
        SimConfig(**kw)


def test_config_load_bases():
    cfg = SimConfig(load=0.5)
    assert cfg.mean_rate_bps == pytest.approx(0.5e9 / 16) and cfg.source_load == pytest.approx(0.3125)
    peak = SimConfig(load=0.5, load_basis="peak")
    assert peak.mean_rate_bps == pytest.approx(50e6) and peak.source_load == pytest.approx(0.5)
    assert SimConfig(scheduler="osmp", predictor="ewma").scheduler.value == "osmp"
