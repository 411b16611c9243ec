"""Covering-ILP view shared by every algorithm.

Each constraint c has a level: its current lower limit (MinSet) or the negated
remaining requirement (fixed right-hand sides).  With scaling factor gamma the
residual requirement is ``gamma * max(w - level, 0)`` in the parametric mode
and ``gamma * max(-level, 0)`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from .model import (MINCOVER, MINSET, ContractViolation, DegenerateInstance, Instance,
                    Realization)


class GreedyKind(Enum):
    GC = "gc"
    GS = "gs"


@dataclass(frozen=True, order=True)
class Level:
    """A hypothesized value of w*; ``above`` means infinitesimally larger than ``value``."""

    value: Fraction
    above: bool = False

    def __str__(self):
        return f"{self.value.numerator}/{self.value.denominator}" + ("+" if self.above else "")

    @classmethod
    def parse(cls, text: str) -> "Level":
        above = text.endswith("+")
        return cls(Fraction(text.rstrip("+")), above)


ZERO = Level(Fraction(0))


def as_level(w) -> Level:
    if w is None:
        return ZERO
    if isinstance(w, Level):
        return w
    return Level(Fraction(w))


class CoveringView:
    """Scaled covering constraints over a (possibly partial) table of revealed values.

    ``coef(c, u)`` reads the revealed coefficient of unit u in constraint c and
    raises ContractViolation when u has not been revealed.
    """

    def __init__(self, members, base, caps, coef: Callable, gamma: Fraction,
                 parametric: bool, units: Iterable[int]):
        self.members = [tuple(c) for c in members]
        self.base = list(base)
        self.caps = caps
        self.coef = coef
        self.gamma = Fraction(gamma)
        self.parametric = parametric
        self.units = sorted(units)
        self.unit_constraints: dict = {}
        for c, mem in enumerate(self.members):
            for u in mem:
                self.unit_constraints.setdefault(u, []).append(c)

    @property
    def m(self) -> int:
        return len(self.members)

    @classmethod
    def for_minset(cls, instance: Instance, values: Mapping, gamma, parametric: bool = True,
                   rhs=None) -> "CoveringView":
        ivs = instance.intervals
        if parametric:
            base = [instance.lower_sum(s) for s in range(instance.m)]
        else:
            rhs = instance.rhs if rhs is None else rhs
            base = [-b for b in rhs]

        def coef(c, u):
            try:
                return values[u] - ivs[u].lower
            except KeyError:
                raise ContractViolation(f"unit {u} has not been revealed") from None

        caps = {(c, u): ivs[u].width for c, mem in enumerate(instance.sets) for u in mem}
        return cls(instance.sets, base, caps, coef, gamma, parametric, instance.useful_units())

    @classmethod
    def for_mincover(cls, instance: Instance, rows: Mapping, gamma, rhs=None) -> "CoveringView":
        rhs = instance.rhs if rhs is None else rhs

        def coef(c, u):
            try:
                return rows[u][c]
            except KeyError:
                raise ContractViolation(f"multiset {u} has not been revealed") from None

        caps = {(e, m): instance.coeffs[m][e].upper
                for e, mem in enumerate(instance.sets) for m in mem}
        return cls(instance.sets, [-b for b in rhs], caps, coef, gamma, False,
                   instance.useful_units())

    @classmethod
    def for_instance(cls, instance: Instance, values: Mapping, gamma, rhs=None) -> "CoveringView":
        if instance.kind == MINCOVER:
            return cls.for_mincover(instance, values, gamma, rhs)
        return cls.for_minset(instance, values, gamma, instance.kind == MINSET, rhs)

    # -- per-constraint primitives

    def level(self, c: int, Q) -> Fraction:
        lv = self.base[c]
        for u in self.members[c]:
            if u in Q:
                lv += self.coef(c, u)
        return lv

    def _point(self, w) -> Level:
        return as_level(w) if self.parametric else ZERO

    def residual(self, c: int, Q, w=None) -> Fraction:
        gap = self._point(w).value - self.level(c, Q)
        return self.gamma * gap if gap > 0 else Fraction(0)

    def active(self, c: int, Q, w=None) -> bool:
        return self._point(w) > Level(self.level(c, Q))


def scale_factor(instance: Instance, offline: bool = False,
                 realization: Optional[Realization] = None) -> Fraction:
    """1/s_min over positive revealed coefficients (offline) or 2/s_min over widths (online)."""
    if offline:
        if realization is None:
            raise ContractViolation("offline scaling needs the realization")
        if instance.kind == MINCOVER:
            coefs = [a for row in realization.values for a in row if a > 0]
        else:
            coefs = [w - iv.lower for iv, w in zip(instance.intervals, realization.values)
                     if w > iv.lower]
        if not coefs:
            raise DegenerateInstance("no positive coefficient")
        return 1 / min(coefs)
    if instance.kind == MINCOVER:
        widths = [iv.upper for row in instance.coeffs for iv in row
                  if iv is not None and iv.upper > 0]
    else:
        widths = [iv.width for iv in instance.intervals if iv.width > 0]
    if not widths:
        raise DegenerateInstance("all widths are zero")
    return 2 / min(widths)


def online_gamma(instance: Instance) -> Fraction:
    """The online factor, or 1 when no unit can be queried and scaling is moot."""
    try:
        return scale_factor(instance)
    except DegenerateInstance:
        return Fraction(1)


def residual_rhs(view: CoveringView, Q, w=None):
    res = [view.residual(c, Q, w) for c in range(view.m)]
    return res, sum(res, Fraction(0))


def active_count(view: CoveringView, Q, w=None) -> int:
    return sum(1 for c in range(view.m) if view.active(c, Q, w))


def greedy_value(view: CoveringView, kind: GreedyKind, Q, G, w=None):
    """gc: drop in total residual from adding G; gs: drop in the number of active constraints."""
    G = set(G)
    if G & set(Q):
        raise ContractViolation("candidate group overlaps the query set")
    if not G:
        return Fraction(0) if kind is GreedyKind.GC else 0
    QG = set(Q) | G
    touched = sorted({c for u in G for c in view.unit_constraints.get(u, ())})
    if kind is GreedyKind.GC:
        return sum((view.residual(c, Q, w) - view.residual(c, QG, w) for c in touched),
                   Fraction(0))
    return sum(int(view.active(c, Q, w)) - int(view.active(c, QG, w)) for c in touched)


def _optimistic(view: CoveringView, kind: GreedyKind, levels, unit: int, w: Level):
    gamma = view.gamma
    if kind is GreedyKind.GC:
        total = Fraction(0)
        for c in view.unit_constraints.get(unit, ()):
            gap = w.value - levels[c]
            if gap > 0:
                total += gamma * min(gap, view.caps[c, unit])
        return total
    count = 0
    for c in view.unit_constraints.get(unit, ()):
        lv = levels[c]
        if w > Level(lv) and w <= Level(lv + view.caps[c, unit]):
            count += 1
    return count


def _levels(view: CoveringView, Q):
    return [view.level(c, Q) for c in range(view.m)]


def optimistic_greedy_value(view: CoveringView, kind: GreedyKind, Q, unit: int, w=None):
    """Greedy value of ``unit`` if its coefficient were as large as its width allows."""
    if unit in Q:
        raise ContractViolation(f"unit {unit} is already queried")
    return _optimistic(view, kind, _levels(view, Q), unit, view._point(w))


def cover_solved(view: CoveringView, Q) -> bool:
    """Every active constraint has no unqueried unit left that could still reduce it."""
    for c in range(view.m):
        if view.active(c, Q) and any(u not in Q and view.caps[c, u] > 0 for u in view.members[c]):
            return False
    return True


def _argmax(view: CoveringView, kind: GreedyKind, levels, cands, w: Level):
    best, best_val = None, None
    for u in cands:
        val = _optimistic(view, kind, levels, u, w)
        if best_val is None or val > best_val:
            best, best_val = u, val
    return best, best_val


def best_unit(view: CoveringView, kind: GreedyKind, Q, w=None):
    """Unqueried unit with the largest optimistic greedy value, lowest index on ties."""
    cands = [u for u in view.units if u not in Q]
    if not cands:
        return None, None
    return _argmax(view, kind, _levels(view, Q), cands, view._point(w))


def min_w_reaching(view: CoveringView, kind: GreedyKind, Q, d, w_lo, w_hi,
                   hi_open: bool = False):
    """Smallest w in [w_lo, w_hi] where some unit's optimistic greedy value reaches d.

    Returns (w, argmax unit at w) or None.  For gs the counts only rise just
    above a level, so the result may be a Level with ``above`` set.
    """
    if not view.parametric:
        raise ContractViolation("min_w_reaching needs the parametric view")
    lo = as_level(w_lo)
    hi = Level(Fraction(w_hi))
    cands = [u for u in view.units if u not in Q]
    if not cands or lo > hi:
        return None
    levels = _levels(view, Q)

    def inside(w: Level) -> bool:
        return w < hi if hi_open else w <= hi

    if kind is GreedyKind.GS:
        points = {lo} | {Level(lv, True) for lv in levels if Level(lv, True) > lo}
        for p in sorted(points):
            if not inside(p):
                break
            u, val = _argmax(view, kind, levels, cands, p)
            if val >= d:
                return p, u
        return None

    gamma = view.gamma
    best_w = None
    for u in cands:
        cs = view.unit_constraints.get(u, ())

        def f(x, u=u, cs=cs):
            total = Fraction(0)
            for c in cs:
                gap = x - levels[c]
                if gap > 0:
                    total += gamma * min(gap, view.caps[c, u])
            return total

        x0 = lo.value
        f0 = f(x0)
        if f0 >= d:
            best_w = lo.value if best_w is None else min(best_w, lo.value)
            continue
        bps = sorted({p for c in cs for p in (levels[c], levels[c] + view.caps[c, u]) if p > x0})
        for p in bps:
            fp = f(p)
            if fp >= d:
                x = x0 + (d - f0) * (p - x0) / (fp - f0)
                best_w = x if best_w is None else min(best_w, x)
                break
            x0, f0 = p, fp
    if best_w is None:
        return None
    w = lo if best_w == lo.value else Level(best_w)
    if not inside(w):
        return None
    u, _ = _argmax(view, kind, levels, cands, w)
    return w, u
