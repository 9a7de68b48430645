"""Capacitated max-weight assignment of ONUs to slots (the transport step of FDOS).

Both problem shapes reduce to a min-cost flow source -> ONU -> slot -> sink
solved by successive shortest paths (see :mod:`ponsleep.kernels`).  Slack
capacity needs no explicit dummy column: the flow value is fixed at N and
unused slot capacity simply stays idle.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from . import kernels
from .model import Assignment, AssignmentProblem

_LIMIT = 1 << 62


class Mode(enum.Enum):
    STRICT = "strict"
    PENALIZED = "penalized"


class Status(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


class TransportError(ValueError):
    pass


@dataclass(frozen=True)
class TransportInstance:
    problem: AssignmentProblem
    caps: tuple[int, ...]
    mode: Mode = Mode.STRICT

    def __post_init__(self):
        caps = self.caps
        if isinstance(caps, Mapping):
            caps = tuple(caps[j] for j in self.problem.slots)
        elif isinstance(caps, int):
            caps = (caps,) * self.problem.num_slots
        caps = tuple(int(c) for c in caps)
        if len(caps) != self.problem.num_slots:
            raise TransportError("one cap per slot is required")
        if any(c < 0 for c in caps):
            raise TransportError("caps must be non-negative")
        object.__setattr__(self, "caps", caps)

    @classmethod
    def uniform(cls, problem: AssignmentProblem, cap: int, mode: Mode = Mode.STRICT):
        return cls(problem, (cap,) * problem.num_slots, mode)


@dataclass(frozen=True)
class TransportSolution:
    status: Status
    assignment: Optional[Assignment] = None
    objective: Optional[int] = None
    usage: Optional[dict] = None

    @property
    def feasible(self) -> bool:
        return self.status is Status.FEASIBLE


def _matrices(inst: TransportInstance):
    p = inst.problem
    n, m = p.num_onus, p.num_slots
    col = {j: k for k, j in enumerate(p.slots)}
    weight = np.zeros((n, m), dtype=np.int64)
    arc = np.zeros((n, m), dtype=np.bool_)
    total = 0
    for r, (i, slots) in enumerate(zip(p.onus, p.arcs)):
        for j in slots:
            w = p.weight(i, j)
            total += w
            weight[r, col[j]] = w
            arc[r, col[j]] = True
    bound = total + p.penalty * n
    if bound * max(n, 1) >= _LIMIT:
        raise OverflowError("arc weights too large for 62-bit path costs")
    return weight, arc


def _finish(inst: TransportInstance, assign: np.ndarray, weight, arc, penalized: bool):
    p = inst.problem
    slot_of, usage = {}, {j: 0 for j in p.slots}
    objective = 0
    for r, i in enumerate(p.onus):
        k = int(assign[r])
        j = p.slots[k]
        slot_of[i] = j
        usage[j] += 1
        objective += int(weight[r, k]) if arc[r, k] else -p.penalty
    return TransportSolution(Status.FEASIBLE, Assignment(slot_of), objective, usage)


def solve_strict(inst: TransportInstance, backend: Optional[str] = None) -> TransportSolution:
    """Max total arc weight with every ONU on one of its arcs and usage <= caps."""
    if inst.mode is not Mode.STRICT:
        raise TransportError("solve_strict needs a strict-mode instance")
    weight, arc = _matrices(inst)
    if sum(inst.caps) < inst.problem.num_onus:
        return TransportSolution(Status.INFEASIBLE)
    assign, ok = kernels.ssp_assign(-weight, arc, np.asarray(inst.caps), backend=backend)
    if not ok:
        return TransportSolution(Status.INFEASIBLE)
    return _finish(inst, assign, weight, arc, False)


def solve_penalized(inst: TransportInstance, backend: Optional[str] = None):
    """Complete-bipartite variant where a non-arc placement costs ``H``.

    Returns ``(solution, U_s)`` with ``U_s`` the ONUs left on non-arcs.
    """
    if inst.mode is not Mode.PENALIZED:
        raise TransportError("solve_penalized needs a penalized-mode instance")
    p = inst.problem
    if sum(inst.caps) < p.num_onus:
        raise TransportError(f"caps sum {sum(inst.caps)} < {p.num_onus} ONUs")
    weight, arc = _matrices(inst)
    cost = np.where(arc, -weight, np.int64(p.penalty))
    allowed = np.ones_like(arc)
    assign, ok = kernels.ssp_assign(cost, allowed, np.asarray(inst.caps), backend=backend)
    if not ok:  # pragma: no cover - complete graph with enough capacity
        raise TransportError("penalized solve failed unexpectedly")
    sol = _finish(inst, assign, weight, arc, True)
    unassigned = frozenset(i for i, j in sol.assignment.slot_of.items() if not p.has_arc(i, j))
    return sol, unassigned
