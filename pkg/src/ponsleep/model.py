"""Shared domain types, the assignment objectives and Jain's fairness index.

All times are integer nanoseconds.  Slot and ONU identifiers are plain
integers ("labels"); a problem carries its own slot set, so sub-problems
produced by FDOS keep the labels of the parent instance.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

NS = 1
US = 1_000
MS = 1_000_000
S = 1_000_000_000


class SleepMode(enum.Enum):
    DEEP_SLEEP = "ds"
    FAST_SLEEP = "fs"
    DOZE = "dz"
    ACTIVE = "on"


SLEEP_MODES = (SleepMode.DEEP_SLEEP, SleepMode.FAST_SLEEP)


@dataclass(frozen=True)
class PowerProfile:
    power_watts: Mapping[SleepMode, float]
    wake_time: Mapping[SleepMode, int]

    def __post_init__(self):
        order = (SleepMode.DEEP_SLEEP, SleepMode.FAST_SLEEP, SleepMode.DOZE, SleepMode.ACTIVE)
        for mode in order:
            if mode not in self.power_watts or mode not in self.wake_time:
                raise ValueError(f"power profile is missing an entry for {mode.name}")
        powers = [self.power_watts[m] for m in order]
        if powers[0] <= 0 or any(a >= b for a, b in zip(powers, powers[1:])):
            raise ValueError("power must increase strictly from deep sleep to active")
        wakes = [self.wake_time[m] for m in order]
        if wakes[-1] != 0:
            raise ValueError("active mode must have zero wake time")
        if any(a <= b for a, b in zip(wakes, wakes[1:])):
            raise ValueError("wake time must decrease strictly as power increases")

    def power(self, mode: SleepMode) -> float:
        return self.power_watts[mode]

    def t_sw(self, mode: SleepMode) -> int:
        return self.wake_time[mode]

    def break_even(self, mode: SleepMode, higher: SleepMode) -> int:
        """Shortest sleep (ns) for which ``mode`` beats the higher-power ``higher``.

        Solves P_m*T + P_on*Tsw_m = P_h*T + P_on*Tsw_h for T, rounded up.
        """
        p_on = self.power_watts[SleepMode.ACTIVE]
        num = p_on * (self.wake_time[mode] - self.wake_time[higher])
        den = self.power_watts[higher] - self.power_watts[mode]
        return int(-(-num // den))


DEFAULT_POWER = PowerProfile(
    power_watts={
        SleepMode.DEEP_SLEEP: 0.75,
        SleepMode.FAST_SLEEP: 1.28,
        SleepMode.DOZE: 2.39,
        SleepMode.ACTIVE: 3.984,
    },
    wake_time={
        SleepMode.DEEP_SLEEP: 5_125 * US,
        SleepMode.FAST_SLEEP: 125 * US,
        SleepMode.DOZE: 1 * US,
        SleepMode.ACTIVE: 0,
    },
)


def _arc_weight_sum(arcs, weight) -> int:
    return sum(weight(i, j) for i, slots in arcs for j in slots)


@dataclass(frozen=True)
class AssignmentProblem:
    """Instance of the fair slot-assignment ILP.

    ``arcs[k]`` lists the feasible slots of ONU ``onus[k]``.  The default
    weight of arc (i, j) is ``j * w_i``; ``weights`` overrides it per arc.
    ``big_weight`` (W) and ``penalty`` (H) default to one more than the total
    arc weight, which makes fairness lexicographically dominant.
    """

    arcs: tuple[tuple[int, ...], ...]
    slots: tuple[int, ...]
    onus: tuple[int, ...] = None
    onu_weights: tuple[int, ...] = None
    weights: Mapping[tuple[int, int], int] = None
    big_weight: int = None
    penalty: int = None
    _arc_index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        arcs = tuple(tuple(sorted(set(a))) for a in self.arcs)
        slots = tuple(sorted(set(self.slots)))
        onus = tuple(range(len(arcs))) if self.onus is None else tuple(self.onus)
        if len(onus) != len(arcs):
            raise ValueError("one arc list per ONU is required")
        if len(set(onus)) != len(onus):
            raise ValueError("duplicate ONU label")
        if not onus or not slots:
            raise ValueError("a problem needs at least one ONU and one slot")
        slot_set = set(slots)
        for i, a in zip(onus, arcs):
            bad = [j for j in a if j not in slot_set]
            if bad:
                raise ValueError(f"ONU {i} has arcs to unknown slots {bad}")
        w_i = (1,) * len(onus) if self.onu_weights is None else tuple(self.onu_weights)
        if len(w_i) != len(onus):
            raise ValueError("one weight per ONU is required")
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "onus", onus)
        object.__setattr__(self, "onu_weights", w_i)
        object.__setattr__(self, "_arc_index", {i: k for k, i in enumerate(onus)})
        if self.weights is not None:
            object.__setattr__(self, "weights", dict(self.weights))
        for i, a in zip(onus, arcs):
            for j in a:
                if self.weight(i, j) < 0:
                    raise ValueError(f"negative weight on arc ({i}, {j})")
        total = _arc_weight_sum(zip(onus, arcs), self.weight)
        if self.big_weight is None:
            object.__setattr__(self, "big_weight", total + 1)
        elif self.big_weight <= total:
            raise ValueError(f"W={self.big_weight} must exceed the arc weight sum {total}")
        if self.penalty is None:
            object.__setattr__(self, "penalty", total + 1)
        elif self.penalty <= total:
            raise ValueError(f"H={self.penalty} must exceed the arc weight sum {total}")

    @classmethod
    def from_arcs(cls, arcs: Mapping[int, Iterable[int]] | Sequence[Iterable[int]],
                  num_slots: int, **kwargs) -> "AssignmentProblem":
        """Problem over slots ``0..num_slots-1``."""
        if isinstance(arcs, Mapping):
            onus = tuple(sorted(arcs))
            lists = tuple(tuple(arcs[i]) for i in onus)
        else:
            lists = tuple(tuple(a) for a in arcs)
            onus = tuple(range(len(lists)))
        return cls(arcs=lists, slots=tuple(range(num_slots)), onus=onus, **kwargs)

    @property
    def num_onus(self) -> int:
        return len(self.onus)

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    def arcs_of(self, onu: int) -> tuple[int, ...]:
        return self.arcs[self._arc_index[onu]]

    def has_arc(self, onu: int, slot: int) -> bool:
        return slot in self.arcs_of(onu)

    def weight(self, onu: int, slot: int) -> int:
        if self.weights is not None and (onu, slot) in self.weights:
            return self.weights[(onu, slot)]
        return slot * self.onu_weights[self._arc_index[onu]]

    def arc_set(self) -> set[tuple[int, int]]:
        return {(i, j) for i, a in zip(self.onus, self.arcs) for j in a}

    def arc_weight_sum(self) -> int:
        return _arc_weight_sum(zip(self.onus, self.arcs), self.weight)

    def restrict(self, onus: Iterable[int], slots: Iterable[int]) -> "AssignmentProblem":
        """Sub-problem on a subset of ONUs and slots; W, H and weights are kept."""
        onus = tuple(sorted(onus))
        slots = tuple(sorted(slots))
        keep = set(slots)
        arcs = tuple(tuple(j for j in self.arcs_of(i) if j in keep) for i in onus)
        w_i = tuple(self.onu_weights[self._arc_index[i]] for i in onus)
        return AssignmentProblem(arcs=arcs, slots=slots, onus=onus, onu_weights=w_i,
                                 weights=self.weights, big_weight=self.big_weight,
                                 penalty=self.penalty)


@dataclass(frozen=True)
class Assignment:
    """Total map ONU -> slot."""

    slot_of: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "slot_of", dict(sorted(self.slot_of.items())))

    def counts(self) -> Counter:
        return Counter(self.slot_of.values())

    def is_feasible(self, p: AssignmentProblem) -> bool:
        if set(self.slot_of) != set(p.onus):
            return False
        return all(p.has_arc(i, j) for i, j in self.slot_of.items())


def f1(a: Assignment) -> int:
    """Sum of squared per-slot ONU counts."""
    return sum(n * n for n in a.counts().values())


def f2(a: Assignment, p: AssignmentProblem) -> int:
    """Total arc weight of the chosen slots."""
    return sum(p.weight(i, j) for i, j in a.slot_of.items())


def f(a: Assignment, p: AssignmentProblem) -> int:
    return p.big_weight * f1(a) - f2(a, p)


def jain_index(counts: Iterable[int]) -> Fraction:
    """(sum n)^2 / sum n^2, without the usual 1/n normalisation."""
    counts = list(counts)
    sq = sum(n * n for n in counts)
    if sq == 0:
        raise ValueError("Jain index is undefined for all-zero counts")
    return Fraction(sum(counts) ** 2, sq)
