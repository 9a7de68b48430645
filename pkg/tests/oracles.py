"""Independent reference solvers and instance strategies shared by the tests.

Nothing here calls into the package's solvers: brute force is plain
itertools, and the capacitated assignment goes through scipy's Hungarian
solver on a column-expanded cost matrix.
"""

from __future__ import annotations

import itertools
from collections import Counter

import numpy as np
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from ponsleep.model import AssignmentProblem


def objective_parts(p: AssignmentProblem, slot_of: dict):
    counts = Counter(slot_of.values())
    g1 = sum(c * c for c in counts.values())
    g2 = sum(p.weight(i, j) for i, j in slot_of.items())
    return p.big_weight * g1 - g2, g1, g2


def brute_optimum(p: AssignmentProblem):
    """(f, f1, f2, slot_of) minimising f; ties by f1 then first in product order."""
    best = None
    for choice in itertools.product(*p.arcs):
        slot_of = dict(zip(p.onus, choice))
        val, g1, g2 = objective_parts(p, slot_of)
        if best is None or (val, g1) < best[:2]:
            best = (val, g1, g2, slot_of)
    return best


def brute_transport(p: AssignmentProblem, caps) -> "int | None":
    """Max total arc weight over cap-respecting arc assignments, None if none exists."""
    cap = dict(zip(p.slots, caps))
    best = None
    for choice in itertools.product(*p.arcs):
        used = Counter(choice)
        if any(used[j] > cap[j] for j in used):
            continue
        w = sum(p.weight(i, j) for i, j in zip(p.onus, choice))
        best = w if best is None else max(best, w)
    return best


def brute_min_penalties(p: AssignmentProblem, caps) -> int:
    """Smallest number of ONUs off their arcs in any cap-respecting total assignment."""
    cap = dict(zip(p.slots, caps))
    best = None
    for choice in itertools.product(p.slots, repeat=p.num_onus):
        used = Counter(choice)
        if any(used[j] > cap[j] for j in used):
            continue
        off = sum(not p.has_arc(i, j) for i, j in zip(p.onus, choice))
        best = off if best is None else min(best, off)
    return best


def hungarian_transport(p: AssignmentProblem, caps) -> "int | None":
    """Same quantity as :func:`brute_transport` via linear_sum_assignment."""
    cols = [j for j, c in zip(p.slots, caps) for _ in range(c)]
    if len(cols) < p.num_onus:
        return None
    big = 10 * (p.arc_weight_sum() + 1) * (p.num_onus + 1)
    cost = np.full((p.num_onus, len(cols)), big, dtype=np.int64)
    for r, i in enumerate(p.onus):
        for c, j in enumerate(cols):
            if p.has_arc(i, j):
                cost[r, c] = -p.weight(i, j)
    rows, chosen = linear_sum_assignment(cost)
    if any(cost[r, c] == big for r, c in zip(rows, chosen)):
        return None
    return int(-cost[rows, chosen].sum())


@st.composite
def problems(draw, max_onus=6, max_slots=5, weighted=True):
    n = draw(st.integers(1, max_onus))
    m = draw(st.integers(1, max_slots))
    arcs = [draw(st.sets(st.integers(0, m - 1), min_size=1, max_size=m)) for _ in range(n)]
    kw = {}
    if weighted and draw(st.booleans()):
        kw["onu_weights"] = tuple(draw(st.integers(1, 4)) for _ in range(n))
    return AssignmentProblem.from_arcs(arcs, m, **kw)


def random_problem(rng: np.random.Generator, n: int, m: int, forced_prob: float = 0.25) -> AssignmentProblem:
    arcs = []
    for _ in range(n):
        if rng.random() < forced_prob:
            arcs.append((int(rng.integers(m)),))
        else:
            lb = int(rng.integers(m))
            arcs.append(tuple(range(lb, int(rng.integers(lb, m)) + 1)))
    return AssignmentProblem.from_arcs(arcs, m)
