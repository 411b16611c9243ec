"""Intervals, distributions, instances, realizations and the evolving query state."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

# Continuous draws are snapped to this grid so every value stays an exact rational.
SNAP = 2 ** 32

MINSET = "minset"
DETRHS = "minset_detrhs"
MINCOVER = "mincover"
KINDS = (MINSET, DETRHS, MINCOVER)

HALF = Fraction(1, 2)


class ContractViolation(Exception):
    """A caller broke an operation's precondition."""


class InvariantViolation(Exception):
    """Two computations that must agree did not."""


class DegenerateInstance(ValueError):
    """The instance has no unit with positive width or coefficient."""


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 12)
    return Fraction(x)


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class Uniform:
    def sample(self, rng: random.Random, lower: Fraction, upper: Fraction) -> Fraction:
        return lower + (upper - lower) * Fraction(rng.randrange(1, SNAP), SNAP)

    def tau(self, lower: Fraction, upper: Fraction) -> Fraction:
        return HALF

    def tau_bar(self, lower: Fraction, upper: Fraction) -> Fraction:
        return HALF

    def mirrored(self) -> "Uniform":
        return self

    def check(self, lower: Fraction, upper: Fraction) -> None:
        pass

    def to_json(self) -> dict:
        return {"type": "uniform"}


@dataclass(frozen=True)
class SymmetricTriangular:
    def sample(self, rng: random.Random, lower: Fraction, upper: Fraction) -> Fraction:
        u = rng.random()
        x = math.sqrt(u / 2) if u < 0.5 else 1 - math.sqrt((1 - u) / 2)
        k = min(max(round(x * SNAP), 1), SNAP - 1)
        return lower + (upper - lower) * Fraction(k, SNAP)

    def tau(self, lower: Fraction, upper: Fraction) -> Fraction:
        return HALF

    def tau_bar(self, lower: Fraction, upper: Fraction) -> Fraction:
        return HALF

    def mirrored(self) -> "SymmetricTriangular":
        return self

    def check(self, lower: Fraction, upper: Fraction) -> None:
        pass

    def to_json(self) -> dict:
        return {"type": "triangular"}


@dataclass(frozen=True)
class PointMass:
    value: Fraction

    def sample(self, rng: random.Random, lower: Fraction, upper: Fraction) -> Fraction:
        return self.value

    def tau(self, lower: Fraction, upper: Fraction) -> Fraction:
        return Fraction(1) if self.value >= (lower + upper) / 2 else Fraction(0)

    def tau_bar(self, lower: Fraction, upper: Fraction) -> Fraction:
        return Fraction(1) if self.value <= (lower + upper) / 2 else Fraction(0)

    def mirrored(self) -> "PointMass":
        return PointMass(-self.value)

    def check(self, lower: Fraction, upper: Fraction) -> None:
        if lower == upper:
            if self.value != lower:
                raise ValueError("trivial interval must carry the point mass at its bound")
        elif not lower < self.value < upper:
            raise ValueError(f"point mass {self.value} outside ({lower}, {upper})")

    def to_json(self) -> dict:
        return {"type": "point", "value": fmt(self.value)}


@dataclass(frozen=True)
class TwoPoint:
    low: Fraction
    p_low: Fraction
    high: Fraction
    p_high: Fraction

    def sample(self, rng: random.Random, lower: Fraction, upper: Fraction) -> Fraction:
        return self.low if Fraction(rng.randrange(SNAP), SNAP) < self.p_low else self.high

    def tau(self, lower: Fraction, upper: Fraction) -> Fraction:
        mid = (lower + upper) / 2
        return (self.p_low if self.low >= mid else 0) + (self.p_high if self.high >= mid else 0)

    def tau_bar(self, lower: Fraction, upper: Fraction) -> Fraction:
        mid = (lower + upper) / 2
        return (self.p_low if self.low <= mid else 0) + (self.p_high if self.high <= mid else 0)

    def mirrored(self) -> "TwoPoint":
        return TwoPoint(-self.high, self.p_high, -self.low, self.p_low)

    def check(self, lower: Fraction, upper: Fraction) -> None:
        if self.p_low < 0 or self.p_high < 0 or self.p_low + self.p_high != 1:
            raise ValueError("two-point probabilities must be non-negative and sum to 1")
        if not self.low < self.high:
            raise ValueError("two-point support must satisfy low < high")
        if not (lower < self.low and self.high < upper):
            raise ValueError(f"two-point support outside ({lower}, {upper})")

    def to_json(self) -> dict:
        return {"type": "two_point", "low": fmt(self.low), "p_low": fmt(self.p_low),
                "high": fmt(self.high), "p_high": fmt(self.p_high)}


Distribution = Union[Uniform, SymmetricTriangular, PointMass, TwoPoint]


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class UncertaintyInterval:
    id: int
    lower: Fraction
    upper: Fraction
    dist: Distribution

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"interval {self.id}: lower {self.lower} > upper {self.upper}")
        if self.lower == self.upper and not isinstance(self.dist, PointMass):
            raise ValueError(f"interval {self.id}: trivial interval needs a point mass")
        self.dist.check(self.lower, self.upper)

    @property
    def trivial(self) -> bool:
        return self.lower == self.upper

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def tau(self) -> Fraction:
        return Fraction(1) if self.trivial else self.dist.tau(self.lower, self.upper)

    def tau_bar(self) -> Fraction:
        return Fraction(1) if self.trivial else self.dist.tau_bar(self.lower, self.upper)

    def sample(self, rng: random.Random) -> Fraction:
        if self.trivial:
            return self.lower
        return self.dist.sample(rng, self.lower, self.upper)


def interval(i: int, lower, upper, dist: Optional[Distribution] = None) -> UncertaintyInterval:
    """Build an interval; trivial bounds default to the point mass and others to uniform."""
    lower, upper = as_fraction(lower), as_fraction(upper)
    if dist is None:
        dist = PointMass(lower) if lower == upper else Uniform()
    return UncertaintyInterval(i, lower, upper, dist)


@dataclass(frozen=True)
class Instance:
    """A MinSet instance, its fixed right-hand-side variant, or a MinCover instance.

    For MinCover the queryable units are multisets and the constraints are
    elements: ``coeffs[M][e]`` is the coefficient interval of multiset M at
    element e (None when M does not contain e), and ``sets[e]`` lists the
    multisets that can contribute to e.
    """

    kind: str
    intervals: tuple = ()
    sets: tuple = ()
    rhs: Optional[tuple] = None
    coeffs: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.kind == MINCOVER:
            if self.coeffs is None or self.rhs is None:
                raise ValueError("mincover needs coefficient intervals and rhs")
            n_el = len(self.rhs)
            for m, row in enumerate(self.coeffs):
                if len(row) != n_el:
                    raise ValueError(f"multiset {m}: expected {n_el} coefficient slots")
                for iv in row:
                    if iv is not None and iv.lower < 0:
                        raise ValueError(f"multiset {m}: negative coefficient bound")
            derived = tuple(tuple(m for m, row in enumerate(self.coeffs) if row[e] is not None)
                            for e in range(n_el))
            if self.sets and tuple(map(tuple, self.sets)) != derived:
                raise ValueError("sets disagree with the coefficient pattern")
            object.__setattr__(self, "sets", derived)
        else:
            n = len(self.intervals)
            for i, iv in enumerate(self.intervals):
                if iv.id != i:
                    raise ValueError(f"interval at position {i} has id {iv.id}")
            if not self.sets:
                raise ValueError("instance needs at least one set")
            for j, s in enumerate(self.sets):
                if not s:
                    raise ValueError(f"set {j} is empty")
                if len(set(s)) != len(s):
                    raise ValueError(f"set {j} repeats an index")
                for i in s:
                    if not 0 <= i < n:
                        raise ValueError(f"set {j} refers to missing interval {i}")
            if self.kind == DETRHS:
                if self.rhs is None or len(self.rhs) != len(self.sets):
                    raise ValueError("minset_detrhs needs one rhs per set")
            elif self.rhs is not None:
                raise ValueError("minset instances take no rhs")
        for e, b in enumerate(self.rhs or ()):
            if not isinstance(b, Fraction):
                raise ValueError(f"rhs {e} is not a rational")

    @property
    def n_units(self) -> int:
        return len(self.coeffs) if self.kind == MINCOVER else len(self.intervals)

    @property
    def m(self) -> int:
        return len(self.sets)

    def lower_sum(self, s: int) -> Fraction:
        return sum((self.intervals[i].lower for i in self.sets[s]), Fraction(0))

    def upper_sum(self, s: int) -> Fraction:
        return sum((self.intervals[i].upper for i in self.sets[s]), Fraction(0))

    def useful_units(self) -> list:
        """Units an algorithm may query: non-trivial intervals, or multisets with a positive cap."""
        if self.kind == MINCOVER:
            return [m for m, row in enumerate(self.coeffs)
                    if any(iv is not None and iv.upper > 0 for iv in row)]
        return [iv.id for iv in self.intervals if not iv.trivial]

    def is_disjoint(self) -> bool:
        seen = set()
        for s in self.sets:
            if seen.intersection(s):
                return False
            seen.update(s)
        return True

    def with_rhs(self, rhs: Sequence) -> "Instance":
        return Instance(DETRHS, self.intervals, self.sets, tuple(as_fraction(b) for b in rhs),
                        name=self.name)


def minset(intervals, sets, name: str = "") -> Instance:
    return Instance(MINSET, tuple(intervals), tuple(tuple(s) for s in sets), name=name)


def mincover(coeffs, rhs, name: str = "") -> Instance:
    return Instance(MINCOVER, coeffs=tuple(tuple(r) for r in coeffs),
                    rhs=tuple(as_fraction(b) for b in rhs), name=name)


# ---------------------------------------------------------------------------
# realizations


@dataclass(frozen=True)
class Realization:
    """Precise values: one per interval, or one row per multiset for MinCover."""

    values: tuple
    wstar: Optional[Fraction] = None

    def set_values(self, instance: Instance) -> list:
        return [sum((self.values[i] for i in s), Fraction(0)) for s in instance.sets]


def make_realization(instance: Instance, values: Sequence) -> Realization:
    if instance.kind == MINCOVER:
        rows = tuple(tuple(as_fraction(a) for a in row) for row in values)
        check_realization(instance, Realization(rows))
        return Realization(rows)
    vals = tuple(as_fraction(v) for v in values)
    r = Realization(vals)
    check_realization(instance, r)
    wstar = min(r.set_values(instance))
    return Realization(vals, wstar)


def check_realization(instance: Instance, r: Realization) -> None:
    if instance.kind == MINCOVER:
        if len(r.values) != instance.n_units:
            raise ValueError("wrong number of coefficient rows")
        for m, row in enumerate(instance.coeffs):
            for e, iv in enumerate(row):
                a = r.values[m][e]
                if iv is None:
                    if a != 0:
                        raise ValueError(f"coefficient ({m},{e}) must be 0")
                elif iv.trivial and a != iv.lower or not iv.trivial and not iv.lower < a < iv.upper:
                    raise ValueError(f"coefficient ({m},{e}) = {a} outside its interval")
        return
    if len(r.values) != instance.n_units:
        raise ValueError("wrong number of values")
    for iv, w in zip(instance.intervals, r.values):
        if iv.trivial and w != iv.lower or not iv.trivial and not iv.lower < w < iv.upper:
            raise ValueError(f"value {w} outside interval {iv.id}")


def sample_realization(instance: Instance, seed: int) -> Realization:
    rng = random.Random(seed)
    if instance.kind == MINCOVER:
        rows = tuple(tuple(Fraction(0) if iv is None else iv.sample(rng) for iv in row)
                     for row in instance.coeffs)
        return Realization(rows)
    vals = tuple(iv.sample(rng) for iv in instance.intervals)
    wstar = min(sum((vals[i] for i in s), Fraction(0)) for s in instance.sets)
    return Realization(vals, wstar)


# ---------------------------------------------------------------------------
# query state


class QueryState:
    """Queried units, their revealed values, and the current set limits."""

    def __init__(self, instance: Instance, realization: Realization, queried: Sequence = ()):
        self.instance = instance
        self.realization = realization
        self.queried: list = []
        self.revealed: dict = {}
        if instance.kind != MINCOVER:
            self._lo = [instance.lower_sum(s) for s in range(instance.m)]
            self._hi = [instance.upper_sum(s) for s in range(instance.m)]
            self._member_of = [[] for _ in range(instance.n_units)]
            for s, members in enumerate(instance.sets):
                for i in members:
                    self._member_of[i].append(s)
        for u in queried:
            self.query(u)

    def query(self, unit: int):
        if unit in self.revealed:
            raise ContractViolation(f"unit {unit} queried twice")
        if not 0 <= unit < self.instance.n_units:
            raise ContractViolation(f"no unit {unit}")
        value = self.realization.values[unit]
        self.queried.append(unit)
        self.revealed[unit] = value
        if self.instance.kind != MINCOVER:
            iv = self.instance.intervals[unit]
            for s in self._member_of[unit]:
                self._lo[s] += value - iv.lower
                self._hi[s] -= iv.upper - value
        return value

    def lower(self, s: int) -> Fraction:
        return self._lo[s]

    def upper(self, s: int) -> Fraction:
        return self._hi[s]

    def lowers(self) -> list:
        return list(self._lo)

    def uppers(self) -> list:
        return list(self._hi)

    def clears_half(self, unit: int) -> bool:
        """Whether the revealed value lies in the upper half of the unit's interval."""
        iv = self.instance.intervals[unit]
        return 2 * (self.revealed[unit] - iv.lower) >= iv.width


def _structurally_solved(instance: Instance, known, lowers) -> bool:
    # a set whose non-trivial members are all known has L_S(Q) = w(S)
    best = None
    for s, members in enumerate(instance.sets):
        if all(instance.intervals[i].trivial or i in known for i in members):
            if best is None or lowers[s] < best:
                best = lowers[s]
    return best is not None and all(lo >= best for lo in lowers)


def is_solved_minset(state: QueryState) -> bool:
    if state.instance.kind != MINSET:
        raise ContractViolation("is_solved_minset needs a minset instance")
    return _structurally_solved(state.instance, state.revealed, state._lo)


def is_solved_maxset(instance: Instance, realization: Realization, queried) -> bool:
    """MaxSet feasibility: some set of maximum value is fully known and every U_S(Q) is at most it."""
    state = QueryState(instance, realization, queried)
    best = None
    for s, members in enumerate(instance.sets):
        if all(instance.intervals[i].trivial or i in state.revealed for i in members):
            if best is None or state._hi[s] > best:
                best = state._hi[s]
    return best is not None and all(hi <= best for hi in state._hi)


def balancing_tau(instance: Instance) -> Fraction:
    if instance.kind == MINCOVER:
        ivs = [iv for row in instance.coeffs for iv in row if iv is not None]
    else:
        ivs = list(instance.intervals)
    if not any(not iv.trivial for iv in ivs):
        raise DegenerateInstance("no non-trivial interval")
    return min(iv.tau() for iv in ivs)


def inverse_tau(instance: Instance) -> Fraction:
    return min(iv.tau_bar() for iv in instance.intervals)


def reflect_maxset(instance: Instance, realization: Realization):
    """Negate every interval so that MaxSet questions become MinSet questions."""
    if instance.kind != MINSET:
        raise ContractViolation("reflection is defined for minset instances")
    ivs = tuple(UncertaintyInterval(iv.id, -iv.upper, -iv.lower, iv.dist.mirrored())
                for iv in instance.intervals)
    refl = Instance(MINSET, ivs, instance.sets, name=instance.name)
    return refl, make_realization(refl, [-w for w in realization.values])
