"""Online query strategies producing instrumented traces."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .covering import (CoveringView, GreedyKind, Level, best_unit, cover_solved, greedy_value,
                       min_w_reaching, online_gamma, optimistic_greedy_value, residual_rhs)
from .model import (DETRHS, MINCOVER, MINSET, ContractViolation, Instance, QueryState,
                    Realization, is_solved_minset)

GC, GS = GreedyKind.GC, GreedyKind.GS


@dataclass
class Step:
    unit: int
    w: Optional[Level] = None
    d: Optional[Fraction] = None
    q_half: tuple = ()

    def to_json(self) -> dict:
        out: dict = {"unit": self.unit}
        if self.w is not None:
            out["w"] = str(self.w)
        if self.d is not None:
            out["d"] = f"{Fraction(self.d).numerator}/{Fraction(self.d).denominator}"
        if self.q_half:
            out["q_half"] = list(self.q_half)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Step":
        return cls(obj["unit"], Level.parse(obj["w"]) if "w" in obj else None,
                   Fraction(obj["d"]) if "d" in obj else None, tuple(obj.get("q_half", ())))


@dataclass
class Round:
    """One pass of the inner while loop: queries until a unit clears half its width."""

    steps: list = field(default_factory=list)
    success: bool = False

    @property
    def d_final(self):
        return self.steps[-1].d if self.steps else None


@dataclass
class Phase:
    kind: str
    rounds: list = field(default_factory=list)


@dataclass
class Iteration:
    index: int
    prefix_size: int
    kind: Optional[str] = None
    queries: list = field(default_factory=list)
    set_index: Optional[int] = None
    phases: list = field(default_factory=list)

    @property
    def d_values(self) -> list:
        return [s.d for p in self.phases for r in p.rounds for s in r.steps]

    @property
    def w_values(self) -> list:
        return [s.w for p in self.phases for r in p.rounds for s in r.steps]

    def to_json(self) -> dict:
        out: dict = {"index": self.index, "prefix_size": self.prefix_size,
                     "queries": list(self.queries)}
        if self.kind is not None:
            out["kind"] = self.kind
        if self.set_index is not None:
            out["set_index"] = self.set_index
        if self.phases:
            out["phases"] = [{"kind": p.kind,
                              "rounds": [{"success": r.success,
                                          "steps": [s.to_json() for s in r.steps]}
                                         for r in p.rounds]}
                             for p in self.phases]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Iteration":
        phases = [Phase(p["kind"], [Round([Step.from_json(s) for s in r["steps"]], r["success"])
                                    for r in p["rounds"]])
                  for p in obj.get("phases", ())]
        return cls(obj["index"], obj["prefix_size"], obj.get("kind"), list(obj["queries"]),
                   obj.get("set_index"), phases)


@dataclass
class RunTrace:
    algorithm: str
    seed: Optional[int] = None
    queries: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    infeasible: bool = False

    @property
    def total(self) -> int:
        return len(self.queries)

    def to_json(self) -> dict:
        return {"algorithm": self.algorithm, "seed": self.seed, "queries": list(self.queries),
                "iterations": [it.to_json() for it in self.iterations],
                "infeasible": self.infeasible}

    @classmethod
    def from_json(cls, obj: dict) -> "RunTrace":
        return cls(obj["algorithm"], obj.get("seed"), list(obj["queries"]),
                   [Iteration.from_json(it) for it in obj["iterations"]],
                   obj.get("infeasible", False))


class _Runner:
    """Query state plus trace bookkeeping."""

    def __init__(self, name, instance, realization, seed):
        self.state = QueryState(instance, realization)
        self.trace = RunTrace(name, seed)
        self.it: Optional[Iteration] = None

    def begin(self, **kw) -> Iteration:
        self.it = Iteration(len(self.trace.iterations), len(self.state.queried), **kw)
        self.trace.iterations.append(self.it)
        return self.it

    def query(self, unit):
        value = self.state.query(unit)
        self.trace.queries.append(unit)
        self.it.queries.append(unit)
        return value

    @property
    def Q(self) -> frozenset:
        return frozenset(self.state.queried)


def _require(instance: Instance, kind: str):
    if instance.kind != kind:
        raise ContractViolation(f"expected a {kind} instance, got {instance.kind}")


# ---------------------------------------------------------------------------
# disjoint sets


def run_disjoint(instance: Instance, realization: Realization, seed=None) -> RunTrace:
    """Repeatedly work on the set with the smallest lower limit, widest interval first."""
    _require(instance, MINSET)
    if not instance.is_disjoint():
        raise ContractViolation("sets are not pairwise disjoint")
    run = _Runner("disjoint", instance, realization, seed)
    state, ivs = run.state, instance.intervals
    while not is_solved_minset(state):
        lows = state.lowers()
        s = min(range(instance.m), key=lambda j: (lows[j], j))
        run.begin(set_index=s)
        while True:
            left = [i for i in instance.sets[s] if not ivs[i].trivial and i not in state.revealed]
            if not left:
                break
            i = min(left, key=lambda k: (-ivs[k].width, k))
            run.query(i)
            if is_solved_minset(state) or state.clears_half(i):
                break
    return run.trace


# ---------------------------------------------------------------------------
# fixed right-hand sides and multicover


def _online_view(instance: Instance, state: QueryState) -> CoveringView:
    return CoveringView.for_instance(instance, state.revealed, online_gamma(instance))


def _run_known_rhs(name, instance, realization, seed, stop_rule) -> RunTrace:
    run = _Runner(name, instance, realization, seed)
    view = _online_view(instance, run.state)
    while not cover_solved(view, run.Q):
        kind = GC if residual_rhs(view, run.Q)[1] >= 1 else GS
        run.begin(kind=kind.value)
        while True:
            before = run.Q
            unit, _ = best_unit(view, kind, before)
            if unit is None:
                break
            run.query(unit)
            if cover_solved(view, run.Q) or stop_rule(view, kind, before, unit, run.state):
                break
    run.trace.infeasible = any(view.active(c, run.Q) for c in range(view.m))
    return run.trace


def run_detrhs(instance: Instance, realization: Realization, seed=None) -> RunTrace:
    _require(instance, DETRHS)
    return _run_known_rhs("detrhs", instance, realization, seed,
                          lambda view, kind, before, unit, state: state.clears_half(unit))


def _mincover_stop(view, kind, before, unit, state) -> bool:
    real = greedy_value(view, kind, before, [unit])
    return 2 * real >= optimistic_greedy_value(view, kind, before, unit)


def run_mincover(instance: Instance, realization: Realization, seed=None) -> RunTrace:
    _require(instance, MINCOVER)
    return _run_known_rhs("mincover", instance, realization, seed, _mincover_stop)


# ---------------------------------------------------------------------------
# general MinSet


def run_minset(instance: Instance, realization: Realization, seed=None) -> RunTrace:
    """Guess w* as the smallest value at which an optimistic greedy value reaches d.

    Each outer iteration runs a bulk-reduction phase (ogc) and a
    constraint-count phase (ogs).  Within a phase the threshold d is the real
    greedy value of the units found so far that cleared half their width;
    until such a unit exists d stays at 1.
    """
    _require(instance, MINSET)
    run = _Runner("minset", instance, realization, seed)
    state = run.state
    view = CoveringView.for_minset(instance, state.revealed, online_gamma(instance))
    inv_gamma = 1 / view.gamma

    while not is_solved_minset(state):
        it = run.begin()
        for kind in (GC, GS):
            if is_solved_minset(state):
                break
            q_prime = run.Q
            window = min(state.lowers()) + inv_gamma
            d = Fraction(1)
            phase = Phase(kind.value)
            it.phases.append(phase)

            def reach(d):
                w_lo = min(state.lowers())
                w_hi, hi_open = min(state.uppers()), False
                if kind is GS and window <= w_hi:
                    w_hi, hi_open = window, True
                return min_w_reaching(view, kind, run.Q, d, w_lo, w_hi, hi_open)

            hit = reach(d)
            solved = False
            while hit is not None:
                rnd = Round()
                phase.rounds.append(rnd)
                while True:
                    w, unit = hit
                    run.query(unit)
                    half = state.clears_half(unit)
                    q_half = tuple(u for u in state.queried
                                   if u not in q_prime and state.clears_half(u))
                    if q_half:
                        d = greedy_value(view, kind, q_prime, q_half, w)
                    rnd.steps.append(Step(unit, w, d, q_half))
                    if is_solved_minset(state):
                        solved = True
                        break
                    hit = reach(d)
                    if half or hit is None:
                        break
                rnd.success = half
                if solved:
                    break
            if solved:
                break
    return run.trace


# ---------------------------------------------------------------------------
# baselines


def run_baseline(instance: Instance, realization: Realization, policy: str = "all",
                 seed: Optional[int] = None) -> RunTrace:
    """Fixed-order policies: all units, a seeded random order, or widest first.

    ``all`` queries every useful unit unless the instance is solved up front;
    the other policies stop as soon as the instance is solved.
    """
    run = _Runner(f"baseline:{policy}", instance, realization, seed)
    units = instance.useful_units()
    if policy == "random":
        random.Random(seed).shuffle(units)
    elif policy == "width":
        if instance.kind == MINCOVER:
            key = lambda u: (-max(iv.upper for iv in instance.coeffs[u] if iv is not None), u)
        else:
            key = lambda u: (-instance.intervals[u].width, u)
        units.sort(key=key)
    elif policy != "all":
        raise ContractViolation(f"unknown baseline policy {policy!r}")

    if instance.kind == MINSET:
        solved = lambda: is_solved_minset(run.state)
    else:
        view = _online_view(instance, run.state)
        solved = lambda: cover_solved(view, run.Q)
    if solved():
        return run.trace
    run.begin(kind=policy)
    for u in units:
        run.query(u)
        if policy != "all" and solved():
            break
    return run.trace


ALGORITHMS = {
    "disjoint": run_disjoint,
    "detrhs": run_detrhs,
    "mincover": run_mincover,
    "minset": run_minset,
}


def run_algorithm(name: str, instance: Instance, realization: Realization, seed=None) -> RunTrace:
    if name.startswith("baseline:"):
        return run_baseline(instance, realization, name.split(":", 1)[1], seed)
    try:
        fn = ALGORITHMS[name]
    except KeyError:
        raise ContractViolation(f"unknown algorithm {name!r}") from None
    return fn(instance, realization, seed)
