"""Recursive fair distribution of ONUs among slots (FDOS).

Each level solves the capacitated transport problem at the balanced cap
``b = ceil(|N|/|S|)``.  When that is infeasible, a penalized solve is split
into an "under-filled" slot set ``L`` and the rest ``O`` and both halves are
solved recursively.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .model import Assignment, AssignmentProblem
from .transport import Mode, TransportInstance, solve_penalized, solve_strict

log = logging.getLogger(__name__)
if os.environ.get("FDOS_LOG"):
    logging.basicConfig(level=os.environ["FDOS_LOG"].upper())


class PartitionError(RuntimeError):
    """The slot split came out with an empty half."""


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(frozen=True)
class Partition:
    L: frozenset
    O: frozenset
    N_L: frozenset
    N_O: frozenset
    M: dict
    U_s: frozenset
    cap: int


@dataclass
class FdosResult:
    assignment: Assignment
    recursion_depth: int
    partitions: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    first_level_feasible: bool = False


def partition(p: AssignmentProblem, slot_of: dict, unassigned, cap: int) -> Partition:
    """Split slots and ONUs from a penalized solution ``slot_of``.

    ``unassigned`` are the ONUs sitting on non-arcs; ``cap`` is the strict cap
    that failed.
    """
    unassigned = frozenset(unassigned)
    if not unassigned:
        raise PartitionError("partition called although every ONU is on an arc")
    members = {j: set() for j in p.slots}
    for i, j in slot_of.items():
        if i not in unassigned:
            members[j].add(i)
    L = {j for j in p.slots if len(members[j]) < cap}
    changed = True
    while changed:
        changed = False
        for i, j in slot_of.items():
            if i in unassigned or j in L:
                continue
            if any(k in L for k in p.arcs_of(i)):
                L.add(j)
                changed = True
    O = set(p.slots) - L
    if not L or not O:
        raise PartitionError(f"degenerate split L={sorted(L)} O={sorted(O)} U_s={sorted(unassigned)}")
    n_l = frozenset(i for j in L for i in members[j])
    n_o = frozenset(i for j in O for i in members[j]) | unassigned
    return Partition(frozenset(L), frozenset(O), n_l, n_o,
                     {j: frozenset(s) for j, s in members.items()}, unassigned, cap)


def fdos(p: AssignmentProblem, backend: Optional[str] = None) -> FdosResult:
    empty = [i for i, a in zip(p.onus, p.arcs) if not a]
    if empty:
        raise ValueError(f"ONUs without feasible slots: {empty}")
    slot_of: dict = {}
    partitions: list = []
    stats: dict = {}
    first = []

    def solve(sub: AssignmentProblem, level: int) -> int:
        cap = _ceil_div(sub.num_onus, sub.num_slots)
        row = stats.setdefault(level, {"strict": 0, "penalized": 0})
        row["strict"] += 1
        sol = solve_strict(TransportInstance.uniform(sub, cap), backend=backend)
        if level == 1:
            first.append(sol.feasible)
        if sol.feasible:
            slot_of.update(sol.assignment.slot_of)
            return level
        row["penalized"] += 1
        pen, u_s = solve_penalized(TransportInstance.uniform(sub, cap, Mode.PENALIZED), backend=backend)
        part = partition(sub, pen.assignment.slot_of, u_s, cap)
        partitions.append(part)
        log.debug("level %d cap %d: L=%s O=%s U_s=%s", level, cap, sorted(part.L), sorted(part.O),
                  sorted(part.U_s))
        depth = level
        for onus, slots in ((part.N_L, part.L), (part.N_O, part.O)):
            if onus:
                depth = max(depth, solve(sub.restrict(onus, slots), level + 1))
        return depth

    depth = solve(p, 1)
    return FdosResult(Assignment(slot_of), depth, partitions, stats, first[0])


def lemma2_lower_bound(n_s: int, m_s: int) -> int:
    if n_s < 1 or m_s < 1:
        raise ValueError("need at least one ONU and one slot")
    b = _ceil_div(n_s, m_s)
    k = m_s * b - n_s
    return k * (b - 1) ** 2 + (m_s - k) * b * b


def lemma3_upper_bound(n_s: int, b: int) -> int:
    if b < 1:
        raise ValueError("cap must be positive")
    full = n_s // b
    return full * b * b + (n_s - full * b) ** 2


def approximation_ratio(fdos_val: int, opt_val: int) -> Fraction:
    if opt_val == 0:
        raise ZeroDivisionError("approximation ratio undefined for a zero optimum")
    return Fraction(fdos_val - opt_val, opt_val)
