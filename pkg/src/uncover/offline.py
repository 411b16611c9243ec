"""Full-information tools: feasibility, offline greedy, exact optimum, bounds, trace checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .covering import (CoveringView, GreedyKind, Level, active_count, greedy_value, online_gamma,
                       residual_rhs, scale_factor)
from .model import (MINCOVER, MINSET, ContractViolation, Instance, InvariantViolation, QueryState,
                    Realization, _structurally_solved)


class BudgetExhausted(Exception):
    """Branch and bound ran out of nodes; carries the best known bounds."""

    def __init__(self, lower: int, upper: int, nodes: int):
        super().__init__(f"node budget exhausted after {nodes} nodes: optimum in [{lower}, {upper}]")
        self.lower, self.upper, self.nodes = lower, upper, nodes


@dataclass(frozen=True)
class OptResult:
    opt_size: int
    opt_set: tuple
    node_count: int = 0

    def to_json(self) -> dict:
        return {"opt_size": self.opt_size, "opt_set": list(self.opt_set),
                "node_count": self.node_count}


@dataclass(frozen=True)
class BoundReport:
    grset: Optional[int]
    grsetu: Optional[int]
    rho_prime: Optional[int]


# ---------------------------------------------------------------------------
# the covering program with known coefficients


@dataclass
class CoverProgram:
    """min |Q| subject to sum_{u in Q} a[c][u] >= r[c] for every constraint c."""

    rows: list            # per constraint: list of (unit, coefficient > 0)
    rhs: list             # per constraint: requirement, already clipped to what is attainable
    units: list = field(default_factory=list)


def cover_program(instance: Instance, realization: Realization) -> CoverProgram:
    """The requirement vector every solution has to meet.

    MinSet uses w* - L_S; fixed right-hand sides are capped at the total
    attainable coefficient, so an infeasible instance asks for the largest
    possible reduction.
    """
    rows = []
    if instance.kind == MINCOVER:
        for e, mem in enumerate(instance.sets):
            rows.append([(m, realization.values[m][e]) for m in mem
                         if realization.values[m][e] > 0])
    else:
        ivs = instance.intervals
        for s in instance.sets:
            rows.append([(i, realization.values[i] - ivs[i].lower) for i in s
                         if realization.values[i] > ivs[i].lower])
    if instance.kind == MINSET:
        req = [realization.wstar - instance.lower_sum(s) for s in range(instance.m)]
    else:
        req = list(instance.rhs)
    rhs = []
    for row, b in zip(rows, req):
        total = sum((a for _, a in row), Fraction(0))
        rhs.append(max(min(b, total), Fraction(0)))
    units = sorted({u for row in rows for u, _ in row})
    return CoverProgram(rows, rhs, units)


def program_feasible(prog: CoverProgram, Q) -> bool:
    return all(sum((a for u, a in row if u in Q), Fraction(0)) >= b
               for row, b in zip(prog.rows, prog.rhs))


def check_feasible(instance: Instance, realization: Realization, Q) -> bool:
    """Feasibility of Q, checked structurally and through the covering constraints."""
    Q = set(Q)
    ilp = program_feasible(cover_program(instance, realization), Q)
    if instance.kind != MINSET:
        return ilp
    state = QueryState(instance, realization, sorted(Q))
    structural = _structurally_solved(instance, state.revealed, state.lowers())
    if structural != ilp:
        raise InvariantViolation(f"structural={structural} but covering={ilp} for Q={sorted(Q)}")
    return structural


# ---------------------------------------------------------------------------
# offline greedy


def _full_view(instance: Instance, realization: Realization, gamma) -> CoveringView:
    """View over the full realization whose requirements match ``cover_program``."""
    values = dict(enumerate(realization.values))
    if instance.kind == MINSET:
        return CoveringView.for_minset(instance, values, gamma, parametric=True)
    prog = cover_program(instance, realization)
    return CoveringView.for_instance(instance, values, gamma, rhs=prog.rhs)


def _eval_point(instance: Instance, realization: Realization):
    return Level(realization.wstar) if instance.kind == MINSET else None


def offline_greedy(instance: Instance, realization: Realization) -> list:
    """Dobson's two-phase greedy on the scaled program; returns the chosen units in order."""
    prog = cover_program(instance, realization)
    if not any(prog.rhs):
        return []
    gamma = scale_factor(instance, offline=True, realization=realization)
    view = _full_view(instance, realization, gamma)
    w = _eval_point(instance, realization)
    cands = list(prog.units)
    Q: set = set()
    order = []
    phase = GreedyKind.GC
    while True:
        res, _ = residual_rhs(view, Q, w)
        if phase is GreedyKind.GC and not any(r >= 1 for r in res):
            phase = GreedyKind.GS
        if phase is GreedyKind.GS and active_count(view, Q, w) == 0:
            return order
        best, best_val = None, None
        for u in cands:
            if u in Q:
                continue
            val = greedy_value(view, phase, Q, [u], w)
            if best_val is None or val > best_val:
                best, best_val = u, val
        if best is None or best_val <= 0:
            raise InvariantViolation("greedy stalled on an unsolved instance")
        Q.add(best)
        order.append(best)


# ---------------------------------------------------------------------------
# exact optimum


def _greedy_upper(prog: CoverProgram) -> list:
    rem = list(prog.rhs)
    chosen: list = []
    by_unit: dict = {}
    for c, row in enumerate(prog.rows):
        for u, a in row:
            by_unit.setdefault(u, []).append((c, a))
    while any(r > 0 for r in rem):
        best, best_gain = None, Fraction(0)
        for u in prog.units:
            if u in chosen:
                continue
            gain = sum((min(rem[c], a) for c, a in by_unit[u] if rem[c] > 0), Fraction(0))
            if gain > best_gain:
                best, best_gain = u, gain
        chosen.append(best)
        for c, a in by_unit[best]:
            rem[c] -= a
    return chosen


def exact_opt(instance: Instance, realization: Realization, budget: int = 2_000_000) -> OptResult:
    """Minimum-cardinality feasible query set by branch and bound.

    A constraint whose available coefficients sum to exactly its requirement
    forces all of them; for MinSet this is precisely the rule that every
    non-trivial member of a cheapest set must be queried.  Branching picks the
    active constraint with the fewest available units and tries its units in
    order of decreasing coefficient.
    """
    prog = cover_program(instance, realization)
    rows = [sorted(row, key=lambda t: (-t[1], t[0])) for row in prog.rows]
    by_unit: dict = {}
    for c, row in enumerate(rows):
        for u, a in row:
            by_unit.setdefault(u, []).append((c, a))
    incumbent = sorted(_greedy_upper(prog))
    best = [len(incumbent), tuple(incumbent)]
    nodes = [0]

    def bound(rem, chosen, banned):
        # returns (lower bound, forced units) or None when infeasible
        lb = 0
        forced = set()
        for c, row in enumerate(rows):
            r = rem[c]
            if r <= 0:
                continue
            avail = [a for u, a in row if u not in chosen and u not in banned]
            total = sum(avail, Fraction(0))
            if total < r:
                return None
            if total == r:
                forced.update(u for u, _ in row if u not in chosen and u not in banned)
            acc, k = Fraction(0), 0
            for a in avail:
                acc += a
                k += 1
                if acc >= r:
                    break
            lb = max(lb, k)
        return lb, forced

    def take(rem, u):
        rem = list(rem)
        for c, a in by_unit[u]:
            rem[c] -= a
        return rem

    def search(rem, chosen, banned):
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExhausted(root_lb, best[0], nodes[0])
        while True:
            b = bound(rem, chosen, banned)
            if b is None:
                return
            lb, forced = b
            if not forced:
                break
            chosen = chosen | forced
            for u in forced:
                rem = take(rem, u)
        if len(chosen) + lb >= best[0]:
            if lb == 0 and len(chosen) < best[0]:
                best[0], best[1] = len(chosen), tuple(sorted(chosen))
            return
        if lb == 0:
            best[0], best[1] = len(chosen), tuple(sorted(chosen))
            return
        pick = None
        for c, row in enumerate(rows):
            if rem[c] > 0:
                k = sum(1 for u, _ in row if u not in chosen and u not in banned)
                if pick is None or k < pick[0]:
                    pick = (k, c)
        row = [u for u, _ in rows[pick[1]] if u not in chosen and u not in banned]
        excluded = set(banned)
        for u in row:
            search(take(rem, u), chosen | {u}, frozenset(excluded))
            excluded.add(u)

    rb = bound(prog.rhs, frozenset(), frozenset())
    root_lb = rb[0] if rb else 0
    search(list(prog.rhs), frozenset(), frozenset())
    return OptResult(best[0], best[1], nodes[0])


def disjoint_prefixes(instance: Instance, realization: Realization) -> list:
    """Per set, the shortest prefix by decreasing w_i - L_i that lifts L_S up to w*."""
    if instance.kind != MINSET:
        raise ContractViolation("disjoint optimum needs a minset instance")
    if not instance.is_disjoint():
        raise ContractViolation("sets are not pairwise disjoint")
    ivs = instance.intervals
    out = []
    for s, members in enumerate(instance.sets):
        need = realization.wstar - instance.lower_sum(s)
        order = sorted((i for i in members if not ivs[i].trivial),
                       key=lambda i: (-(realization.values[i] - ivs[i].lower), i))
        prefix, acc = [], Fraction(0)
        for i in order:
            if acc >= need:
                break
            prefix.append(i)
            acc += realization.values[i] - ivs[i].lower
        out.append(prefix)
    return out


def exact_opt_disjoint(instance: Instance, realization: Realization) -> OptResult:
    prefixes = disjoint_prefixes(instance, realization)
    chosen = sorted(i for p in prefixes for i in p)
    return OptResult(len(chosen), tuple(chosen), 0)


# ---------------------------------------------------------------------------
# bounds


def _ceil_ln(x) -> int:
    return max(math.ceil(math.log(x)), 0) if x > 0 else 0


def bounds(instance: Instance, realization: Optional[Realization] = None,
           gamma: Optional[Fraction] = None) -> BoundReport:
    """Greedy approximation factors.

    gamma defaults to the online factor 2/s_min so realization-independent
    bounds can be reported without a realization.
    """
    if gamma is None:
        gamma = scale_factor(instance)
    m = instance.m
    if instance.kind == MINCOVER:
        rho = _ceil_ln(gamma * m * max(instance.rhs)) + _ceil_ln(m)
        return BoundReport(None, None, rho)
    lows = [instance.lower_sum(s) for s in range(m)]
    highs = [instance.upper_sum(s) for s in range(m)]
    grsetu = _ceil_ln(gamma * m * (max(highs) - min(lows))) + _ceil_ln(m)
    grset = None
    if instance.kind == MINSET and realization is not None:
        grset = _ceil_ln(gamma * m * max(realization.wstar - lo for lo in lows)) + _ceil_ln(m)
    elif instance.kind != MINSET:
        grset = _ceil_ln(gamma * m * max(instance.rhs)) + _ceil_ln(m)
    return BoundReport(grset, grsetu, None)


def reported_bound(instance: Instance) -> int:
    """The realization-independent greedy factor for the instance kind."""
    b = bounds(instance)
    if instance.kind == MINCOVER:
        return b.rho_prime
    return b.grsetu if instance.kind == MINSET else b.grset


# ---------------------------------------------------------------------------
# trace verification


@dataclass(frozen=True)
class Verdict:
    iteration: int
    condition: Optional[str]   # "count", "residual" or None when neither holds

    @property
    def passed(self) -> bool:
        return self.condition is not None


def verify_alpha_approx(trace, instance: Instance, realization: Realization, alpha=2,
                        opt: Optional[int] = None) -> list:
    """Check that every outer iteration's query group alpha-approximates the greedy choice.

    Evaluated on the full realization at w = w* (or at the attainable fixed
    requirements) with the online scaling factor.
    """
    queries = list(trace.queries)
    if len(set(queries)) != len(queries) or any(not 0 <= u < instance.n_units for u in queries):
        raise ContractViolation("trace does not match the instance")
    covered = [u for it in trace.iterations for u in it.queries]
    if covered != queries:
        raise ContractViolation("iterations do not partition the trace")
    if opt is None:
        opt = exact_opt(instance, realization).opt_size
    view = _full_view(instance, realization, online_gamma(instance))
    w = _eval_point(instance, realization)
    verdicts = []
    Q: set = set()
    for it in trace.iterations:
        if len(Q) != it.prefix_size:
            raise ContractViolation("iteration prefix does not match the trace")
        G = set(it.queries)
        QG = Q | G
        cond = None
        if opt > 0:
            factor = 1 - Fraction(1, 1) / (Fraction(alpha) * opt)
            a_q, a_qg = active_count(view, Q, w), active_count(view, QG, w)
            b_q, b_qg = residual_rhs(view, Q, w)[1], residual_rhs(view, QG, w)[1]
            if a_qg <= factor * a_q:
                cond = "count"
            elif b_q >= 1 and b_qg <= factor * b_q:
                cond = "residual"
        verdicts.append(Verdict(it.index, cond))
        Q = QG
    return verdicts
