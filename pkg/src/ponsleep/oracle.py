"""Exact minimiser of ``W*f1 - f2`` by enumeration, for small instances."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Optional

import numpy as np

from . import kernels
from .model import Assignment, AssignmentProblem, f, f1, f2

DEFAULT_BUDGET = 10_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, size: int, budget: int):
        super().__init__(f"search space {size} exceeds budget {budget}")
        self.size = size
        self.budget = budget


class InfeasibleError(ValueError):
    def __init__(self, onus):
        super().__init__(f"ONUs without any arc: {sorted(onus)}")
        self.onus = tuple(sorted(onus))


@dataclass(frozen=True)
class OracleResult:
    best_assignment: Assignment
    best_f: int
    best_f1: int
    best_f2: int
    explored: int


def search_size(p: AssignmentProblem) -> int:
    return prod(len(a) for a in p.arcs)


def exact_solve(p: AssignmentProblem, budget: int = DEFAULT_BUDGET, prune: bool = True,
                backend: Optional[str] = None) -> OracleResult:
    """Minimum of ``f`` over all arc choices.

    Ties go to the smaller ``f1``, then to the lexicographically first
    assignment (ONUs in label order, slots ascending).  With ``prune=False``
    ``explored`` equals the full product of arc-list lengths.
    """
    empty = [i for i, a in zip(p.onus, p.arcs) if not a]
    if empty:
        raise InfeasibleError(empty)
    size = search_size(p)
    if size > budget:
        raise BudgetExceeded(size, budget)
    n = p.num_onus
    k = max(len(a) for a in p.arcs)
    col = {j: c for c, j in enumerate(p.slots)}
    choice_slot = np.zeros((n, k), dtype=np.int64)
    choice_w = np.zeros((n, k), dtype=np.int64)
    n_choices = np.array([len(a) for a in p.arcs], dtype=np.int64)
    for r, (i, a) in enumerate(zip(p.onus, p.arcs)):
        for c, j in enumerate(a):
            choice_slot[r, c] = col[j]
            choice_w[r, c] = p.weight(i, j)
    choice, bf, bf1, bf2, explored = kernels.enumerate_best(
        choice_slot, choice_w, n_choices, p.num_slots, p.big_weight, prune=prune, backend=backend)
    a = Assignment({i: p.arcs[r][int(choice[r])] for r, i in enumerate(p.onus)})
    assert f(a, p) == bf and f1(a) == bf1 and f2(a, p) == bf2
    return OracleResult(a, bf, bf1, bf2, explored)


def check_lemma1(p: AssignmentProblem, b: int, **kw) -> bool:
    """True iff the optimum puts at most ``b`` ONUs in every slot.

    The caller is responsible for checking that cap ``b`` is transport-feasible.
    """
    res = exact_solve(p, **kw)
    return max(res.best_assignment.counts().values()) <= b
