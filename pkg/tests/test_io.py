import json

import pytest
from hypothesis import given, strategies as st

from ponsleep import io
from ponsleep.transport import TransportInstance, solve_strict

EXAMPLE = {"num_onus": 3, "num_slots": 3,
           "windows": [{"forced": 0}, {"lb": 0, "ub": 0}, {"lb": 0, "ub": 2}], "W": 100}


def test_example_to_problem():
    p = io.instance_from_dict(EXAMPLE).to_problem()
    assert p.arcs == ((0,), (0,), (0, 1, 2)) and p.big_weight == 100


@st.composite
def instances(draw):
    n = draw(st.integers(1, 6))
    m = draw(st.integers(1, 6))
    windows = []
    for _ in range(n):
        if draw(st.booleans()):
            windows.append(("forced", draw(st.integers(0, m - 1))))
        else:
            lb = draw(st.integers(0, m - 1))
            windows.append(("range", lb, draw(st.integers(lb, m - 1))))
    kind = draw(st.sampled_from(["none", "vector", "matrix"]))
    weights = None
    if kind == "vector":
        weights = tuple(draw(st.integers(0, 5)) for _ in range(n))
    elif kind == "matrix":
        weights = tuple(tuple(draw(st.integers(0, 5)) for _ in range(m)) for _ in range(n))
    big_w = draw(st.one_of(st.none(), st.integers(1000, 2000)))
    return io.Instance(n, m, tuple(windows), weights, big_w)


@given(instances())
def test_round_trip(inst):
    text = io.dumps(inst)
    assert io.loads(text) == inst
    assert io.dumps(io.loads(text)) == text


@pytest.mark.parametrize("doc, field", [
    ({**EXAMPLE, "windows": [{"forced": 0}, {"lb": "a", "ub": 0}, {"lb": 0, "ub": 2}]}, "windows[1].lb"),
    ({**EXAMPLE, "windows": [{"forced": 9}, {"lb": 0, "ub": 0}, {"lb": 0, "ub": 2}]}, "windows[0].forced"),
    ({**EXAMPLE, "extra": 1}, "extra"),
    ({k: v for k, v in EXAMPLE.items() if k != "num_slots"}, "num_slots"),
    ({**EXAMPLE, "num_onus": 0}, "num_onus"),
    ({**EXAMPLE, "weights": [1, 2]}, "weights"),
    ({**EXAMPLE, "weights": [[1, 2, 3], [1], [1, 2, 3]]}, "weights[1]"),
    ({**EXAMPLE, "W": True}, "W"),
])
def test_field_diagnostics(doc, field):
    with pytest.raises(io.InstanceError) as err:
        io.instance_from_dict(doc)
    assert err.value.field == field and field in str(err.value)


def test_json_syntax_error_has_position():
    with pytest.raises(io.InstanceError) as err:
        io.loads('{"num_onus": 1,\n  "num_slots": }')
    assert "line 2" in str(err.value)


def test_empty_window_lists_onus():
    doc = {**EXAMPLE, "windows": [{"lb": 2, "ub": 1}, {"lb": 0, "ub": 0}, {"lb": 1, "ub": 0}]}
    with pytest.raises(io.EmptyWindowError) as err:
        io.instance_from_dict(doc).to_problem()
    assert err.value.onus == (0, 2)


def test_too_small_W():
    with pytest.raises(io.InstanceError) as err:
        io.instance_from_dict({**EXAMPLE, "W": 1}).to_problem()
    assert err.value.field == "W"


def test_generate_deterministic():
    assert io.dumps(io.generate(8, 6, seed=11)) == io.dumps(io.generate(8, 6, seed=11))
    assert io.dumps(io.generate(8, 6, seed=11)) != io.dumps(io.generate(8, 6, seed=12))


@pytest.mark.parametrize("seed", range(20))
def test_generate_feasible_postcondition(seed):
    p = io.generate(8, 6, seed=seed, feasible=True).to_problem()
    assert solve_strict(TransportInstance.uniform(p, 2)).feasible


def test_generate_budget():
    with pytest.raises(io.RejectionBudgetExhausted):
        io.generate(6, 1, seed=0, feasible=True, forced_prob=0.0, max_tries=0)
    with pytest.raises(ValueError):
        io.generate(0, 3, seed=0)
