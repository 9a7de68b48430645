import pytest
from hypothesis import given, strategies as st

from ponsleep.model import MS, US, SleepMode
from ponsleep.windows import (UNBOUNDED, Forced, InfeasibleWindow, OnuScheduleState, Range, WindowConfig,
                              build_problem, forced_slot, lb_min_sleep, lb_present, ub_dereg, ub_ds,
                              ub_us, window)

T_CM = 2 * MS


def state(**kw):
    base = dict(onu_id=0, rtt=200 * US, sleep_mode=SleepMode.FAST_SLEEP, last_report_time=0,
                reported_fill_time=100 * MS)
    base.update(kw)
    return OnuScheduleState(**base)


@pytest.mark.parametrize("t_w, mode, t_lg, expected", [
    (-500 * US, SleepMode.FAST_SLEEP, None, 1),
    (-500 * US, SleepMode.DEEP_SLEEP, None, 4),
    (-1 * MS, SleepMode.FAST_SLEEP, -500 * US, 1),
])
def test_forced_slot(t_w, mode, t_lg, expected):
    s = state(sleep_mode=mode, wake_sent_at=t_w, last_gate_time=t_lg)
    assert forced_slot(s, T_CM) == expected


def test_forced_slot_needs_message():
    with pytest.raises(ValueError):
        forced_slot(state(), T_CM)


@pytest.mark.parametrize("t_lr, t_bu, expected", [(0, 10 * MS, 4), (-2 * MS, 10 * MS, 3), (0, 4 * MS, 1)])
def test_ub_us(t_lr, t_bu, expected):
    assert ub_us(state(last_report_time=t_lr, reported_fill_time=t_bu), T_CM) == expected


def test_ub_us_below_one():
    with pytest.raises(InfeasibleWindow):
        ub_us(state(reported_fill_time=3 * MS), T_CM)


@pytest.mark.parametrize("t_bd, expected", [(5 * MS, 3), (1_900 * US, 1), (None, UNBOUNDED)])
def test_ub_ds(t_bd, expected):
    assert ub_ds(state(ds_fill_time=t_bd), T_CM) == expected


@pytest.mark.parametrize("t_lr, expected", [(-10 * MS, 21), (0, 26), (-49 * MS, 1)])
def test_ub_dereg(t_lr, expected):
    assert ub_dereg(state(last_report_time=t_lr), T_CM, 50 * MS) == expected


def test_ub_dereg_past_deadline():
    with pytest.raises(InfeasibleWindow):
        ub_dereg(state(last_report_time=-53 * MS), T_CM, 50 * MS)


@pytest.mark.parametrize("rtt, mode, expected", [(200 * US, SleepMode.DEEP_SLEEP, 4),
                                                 (200 * US, SleepMode.FAST_SLEEP, 2),
                                                 (1_875 * US, SleepMode.FAST_SLEEP, 2)])
def test_lb_present(rtt, mode, expected):
    assert lb_present(state(rtt=rtt, sleep_mode=mode), T_CM) == expected


@pytest.mark.parametrize("t_lr, t_lb, expected", [(-1 * MS, 8 * MS, 3), (0, 4 * MS, 1), (-6 * MS, 8 * MS, 1)])
def test_lb_min_sleep(t_lr, t_lb, expected):
    assert lb_min_sleep(state(last_report_time=t_lr, min_sleep_threshold=t_lb), T_CM) == expected


def test_window_composition():
    # LB_p = 2 (fs), LB_ms = 3, UB_US = 4, UB_d = 26, DS off
    s = state(min_sleep_threshold=8 * MS, reported_fill_time=10 * MS)
    assert (lb_present(s, T_CM), lb_min_sleep(s, T_CM), ub_us(s, T_CM)) == (2, 3, 4)
    assert window(s, WindowConfig()) == Range(3, 4)


def test_window_forced_and_empty():
    assert window(state(wake_sent_at=-500 * US), WindowConfig()) == Forced(1)
    s = state(sleep_mode=SleepMode.DEEP_SLEEP, reported_fill_time=8 * MS)  # LB_p 4, UB_US 3
    with pytest.raises(InfeasibleWindow) as err:
        window(s, WindowConfig())
    assert (err.value.lb, err.value.ub) == (4, 3)


def test_build_problem_examples():
    cfg = WindowConfig()
    a = state(onu_id=0, reported_fill_time=8 * MS)                          # Range(2, 3)
    b = state(onu_id=1, reported_fill_time=8 * MS, min_sleep_threshold=8 * MS)  # Range(3, 3)
    built = build_problem([a, b], cfg)
    assert built.windows == {0: Range(2, 3), 1: Range(3, 3)}
    assert built.problem.arc_set() == {(0, 2), (0, 3), (1, 3)} and built.problem.num_slots == 3

    forced = state(onu_id=0, sleep_mode=SleepMode.FAST_SLEEP, wake_sent_at=1 * MS)  # ceil(1.325/2)+1 = 2
    free = state(onu_id=1, rtt=100 * US, reported_fill_time=10 * MS)         # Range(2, 4)
    built = build_problem([forced, free], cfg, arc_override=lambda s, w: range(1, 5) if s.onu_id == 1
                          else (w.slot,))
    assert built.problem.arc_set() == {(0, 2), (1, 1), (1, 2), (1, 3), (1, 4)}

    bad = state(onu_id=2, sleep_mode=SleepMode.DEEP_SLEEP, reported_fill_time=8 * MS)
    built = build_problem([a, bad], cfg)
    assert [e.onu_id for e in built.immediate] == [2] and built.problem.onus == (0,)


def test_build_problem_all_immediate():
    bad = state(sleep_mode=SleepMode.DEEP_SLEEP, reported_fill_time=8 * MS)
    built = build_problem([bad], WindowConfig())
    assert built.problem is None and len(built.immediate) == 1


times = st.integers(0, 60 * MS)
modes = st.sampled_from([SleepMode.DEEP_SLEEP, SleepMode.FAST_SLEEP])


@given(st.integers(-60 * MS, 0), times, times)
def test_ub_us_monotone_in_fill_time(t_lr, a, b):
    lo, hi = sorted((a, b))
    try:
        low = ub_us(state(last_report_time=t_lr, reported_fill_time=lo), T_CM)
    except InfeasibleWindow:
        return
    assert ub_us(state(last_report_time=t_lr, reported_fill_time=hi), T_CM) >= low


@given(st.integers(-49 * MS, 0), st.integers(1, 10), st.integers(1, 10))
def test_ub_dereg_monotone_in_t_cm(t_lr, a, b):
    small, big = sorted((a * MS // 2, b * MS // 2))
    s = state(last_report_time=t_lr)
    assert ub_dereg(s, big, 50 * MS) <= ub_dereg(s, small, 50 * MS)


@given(st.integers(-60 * MS, 0), times, st.integers(0, 40 * MS), st.one_of(st.none(), times),
       modes, st.integers(1, 2000) .map(lambda x: x * US))
def test_window_inside_component_bounds(t_lr, t_bu, t_lb, t_bd, mode, rtt):
    s = state(last_report_time=t_lr, reported_fill_time=t_bu, min_sleep_threshold=t_lb,
              ds_fill_time=t_bd, sleep_mode=mode, rtt=rtt)
    try:
        w = window(s, WindowConfig())
    except InfeasibleWindow:
        return
    assert isinstance(w, Range)
    assert w.lb >= lb_present(s, T_CM) and w.lb >= lb_min_sleep(s, T_CM) and w.lb >= 1
    assert w.ub <= ub_us(s, T_CM) and w.ub <= ub_ds(s, T_CM) and w.ub <= ub_dereg(s, T_CM, 50 * MS)


@given(st.integers(-10 * MS, 0), modes, st.booleans())
def test_forced_and_range_never_mix(t_w, mode, sent):
    s = state(sleep_mode=mode, wake_sent_at=t_w if sent else None, reported_fill_time=30 * MS)
    try:
        w = window(s, WindowConfig())
    except InfeasibleWindow:
        assert not sent
        return
    assert isinstance(w, Forced) == sent
