"""Instance files (JSON) and random instance generation.

Instance layout::

    {"num_onus": 3, "num_slots": 3,
     "windows": [{"forced": 0}, {"lb": 0, "ub": 0}, {"lb": 0, "ub": 2}],
     "weights": [1, 1, 1],          # optional: w_i list or N x M matrix
     "W": 100}                      # optional

Slots in instance files are ``0..num_slots-1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .model import AssignmentProblem
from .transport import TransportInstance, solve_strict


class InstanceError(ValueError):
    """Malformed or inconsistent instance; ``field`` names the culprit."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class EmptyWindowError(InstanceError):
    def __init__(self, onus):
        super().__init__(f"ONUs with empty windows: {list(onus)}", "windows")
        self.onus = tuple(onus)


@dataclass(frozen=True)
class Instance:
    num_onus: int
    num_slots: int
    windows: tuple  # of ("range", lb, ub) or ("forced", slot)
    weights: Optional[Union[tuple, tuple[tuple[int, ...], ...]]] = None
    W: Optional[int] = None

    def arcs(self) -> list[tuple[int, ...]]:
        out = []
        for w in self.windows:
            if w[0] == "forced":
                out.append((w[1],))
            else:
                out.append(tuple(range(w[1], w[2] + 1)))
        return out

    def to_problem(self) -> AssignmentProblem:
        arcs = self.arcs()
        empty = [i for i, a in enumerate(arcs) if not a]
        if empty:
            raise EmptyWindowError(empty)
        kw = {}
        if self.weights is not None:
            if isinstance(self.weights[0], tuple):
                kw["weights"] = {(i, j): self.weights[i][j] for i, a in enumerate(arcs) for j in a}
            else:
                kw["onu_weights"] = self.weights
        if self.W is not None:
            kw["big_weight"] = self.W
        try:
            return AssignmentProblem.from_arcs(arcs, self.num_slots, **kw)
        except ValueError as exc:
            raise InstanceError(str(exc), "W" if "W=" in str(exc) else "weights") from None

    def to_dict(self) -> dict:
        d = {"num_onus": self.num_onus, "num_slots": self.num_slots,
             "windows": [{"forced": w[1]} if w[0] == "forced" else {"lb": w[1], "ub": w[2]}
                         for w in self.windows]}
        if self.weights is not None:
            d["weights"] = [list(r) for r in self.weights] if isinstance(self.weights[0], tuple) \
                else list(self.weights)
        if self.W is not None:
            d["W"] = self.W
        return d


def _int(v, field: str, minimum: int = 0) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise InstanceError(f"expected an integer, got {v!r}", field)
    if v < minimum:
        raise InstanceError(f"must be >= {minimum}, got {v}", field)
    return v


def instance_from_dict(d) -> Instance:
    if not isinstance(d, dict):
        raise InstanceError("top level must be an object")
    unknown = set(d) - {"num_onus", "num_slots", "windows", "weights", "W"}
    if unknown:
        raise InstanceError(f"unknown keys {sorted(unknown)}", sorted(unknown)[0])
    for key in ("num_onus", "num_slots", "windows"):
        if key not in d:
            raise InstanceError("missing", key)
    n = _int(d["num_onus"], "num_onus", 1)
    m = _int(d["num_slots"], "num_slots", 1)
    if not isinstance(d["windows"], list) or len(d["windows"]) != n:
        raise InstanceError(f"expected a list of {n} windows", "windows")
    windows = []
    for i, w in enumerate(d["windows"]):
        where = f"windows[{i}]"
        if not isinstance(w, dict):
            raise InstanceError("expected an object", where)
        if set(w) == {"forced"}:
            s = _int(w["forced"], where + ".forced")
            if s >= m:
                raise InstanceError(f"slot {s} outside 0..{m - 1}", where + ".forced")
            windows.append(("forced", s))
        elif set(w) == {"lb", "ub"}:
            lb = _int(w["lb"], where + ".lb")
            ub = _int(w["ub"], where + ".ub")
            if ub >= m:
                raise InstanceError(f"slot {ub} outside 0..{m - 1}", where + ".ub")
            windows.append(("range", lb, ub))
        else:
            raise InstanceError("expected {lb, ub} or {forced}", where)
    weights = d.get("weights")
    if weights is not None:
        if not isinstance(weights, list) or len(weights) != n:
            raise InstanceError(f"expected {n} entries", "weights")
        if all(isinstance(r, list) for r in weights):
            rows = []
            for i, r in enumerate(weights):
                if len(r) != m:
                    raise InstanceError(f"expected {m} entries", f"weights[{i}]")
                rows.append(tuple(_int(x, f"weights[{i}][{j}]") for j, x in enumerate(r)))
            weights = tuple(rows)
        else:
            weights = tuple(_int(x, f"weights[{i}]") for i, x in enumerate(weights))
    big_w = d.get("W")
    if big_w is not None:
        big_w = _int(big_w, "W", 1)
    return Instance(n, m, tuple(windows), weights, big_w)


def loads(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", "json") from None
    return instance_from_dict(d)


def dumps(inst: Instance) -> str:
    return json.dumps(inst.to_dict(), indent=1) + "\n"


def random_instance(n: int, m: int, rng: np.random.Generator, forced_prob: float = 0.25) -> Instance:
    windows = []
    for _ in range(n):
        if rng.random() < forced_prob:
            windows.append(("forced", int(rng.integers(m))))
        else:
            lb = int(rng.integers(m))
            windows.append(("range", lb, int(rng.integers(lb, m))))
    return Instance(n, m, tuple(windows))


class RejectionBudgetExhausted(RuntimeError):
    pass


def first_level_feasible(p: AssignmentProblem) -> bool:
    cap = -(-p.num_onus // p.num_slots)
    return solve_strict(TransportInstance.uniform(p, cap)).feasible


def generate(n: int, m: int, seed: int, feasible: bool = False, forced_prob: float = 0.25,
             max_tries: int = 10_000) -> Instance:
    """Random instance; with ``feasible`` rejection-sample until cap ceil(N/M) is transport-feasible."""
    if n < 1 or m < 1:
        raise ValueError("N and M must be at least 1")
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(max_tries):
        inst = random_instance(n, m, rng, forced_prob)
        if not feasible or first_level_feasible(inst.to_problem()):
            return inst
    raise RejectionBudgetExhausted(f"no feasible instance in {max_tries} draws")
