"""Self-checking suites behind ``uncover verify`` and the acceptance tests."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .algorithms import run_detrhs, run_disjoint, run_mincover, run_minset
from .covering import scale_factor
from .harness import closed_form_expectations, run_trials
from .instances import (gen_example, gen_random_detrhs, gen_random_disjoint, gen_random_mincover,
                        gen_random_minset, gen_setcover_reduction, gen_lb_capped, gen_lb_doubled)
from .model import (MINSET, QueryState, _structurally_solved, is_solved_maxset, reflect_maxset,
                    sample_realization)
from .offline import (bounds, cover_program, disjoint_prefixes, exact_opt, exact_opt_disjoint,
                      offline_greedy, program_feasible, verify_alpha_approx)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _stderr(xs) -> float:
    n = len(xs)
    mean = sum(xs) / n
    return math.sqrt(sum((x - mean) ** 2 for x in xs) / (n - 1) / n)


def check_lb_doubled(trials: int = 10_000, n: int = 50, tau=Fraction(1, 2), eps=Fraction(1, 100),
               seed: int = 0, workers: int = 1) -> CheckResult:
    inst = gen_lb_doubled(n, tau, eps)
    rep = run_trials(inst, "disjoint", trials, seed, with_opt=True, workers=workers)
    opts = {r.opt_queries for r in rep.records}
    target = float(2 / Fraction(tau))
    ok = (opts == {1} and 3.6 <= rep.mean_alg <= 4.4
          and abs(rep.ratio - target) <= 0.1 * target)
    exact = float(closed_form_expectations("lb-doubled", n, tau, eps)["index_order"])
    return CheckResult("lb-doubled", ok,
                       f"OPT values {sorted(opts)}, mean ALG {rep.mean_alg:.4f} "
                       f"(exact {exact:.4f}), ratio {rep.ratio:.4f} vs {target}")


def check_lb_capped(trials: int = 10_000, n: int = 20, tau=Fraction(1, 2), eps=Fraction(1, 100),
               seed: int = 0, workers: int = 1) -> CheckResult:
    inst = gen_lb_capped(n, tau, eps)
    rep = run_trials(inst, "disjoint", trials, seed, with_opt=True, workers=workers)
    cf = closed_form_expectations("lb-capped", n, tau, eps)
    opts = [r.opt_queries for r in rep.records]
    algs = [r.alg_queries for r in rep.records]
    se_opt, se_alg = _stderr(opts), _stderr(algs)
    # an all-eps draw has probability (1-tau)^n, so the sample may have no spread at all
    se_opt = se_opt or float(math.sqrt((1 - tau) ** n) * n / math.sqrt(trials))
    d_opt = abs(rep.mean_opt - float(cf["opt_uncapped"]))
    d_alg = abs(rep.mean_alg - float(cf["index_order"]))
    ok = d_opt <= 3 * se_opt and d_alg <= 3 * se_alg
    return CheckResult("lb-capped", ok,
                       f"mean OPT {rep.mean_opt:.5f} vs {float(cf['opt_uncapped']):.5f} "
                       f"({d_opt / se_opt:.2f} SE); mean ALG {rep.mean_alg:.4f} vs "
                       f"{float(cf['index_order']):.4f} ({d_alg / se_alg:.2f} SE)")


def _random_minset(rng: random.Random, max_n: int, max_m: int, seed: int, mix=True):
    n = rng.randint(2, max_n)
    m = rng.randint(1, max_m)
    return gen_random_minset(n, m, min(4, n), seed=seed, mix=mix)


def check_equivalence(count: int = 1000, max_n: int = 10, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    bad = 0
    for k in range(count):
        inst = _random_minset(rng, max_n, 5, seed * 100_003 + k)
        r = sample_realization(inst, k)
        Q = {i for i in range(inst.n_units) if rng.random() < rng.random()}
        state = QueryState(inst, r, sorted(Q))
        structural = _structurally_solved(inst, state.revealed, state.lowers())
        if structural != program_feasible(cover_program(inst, r), Q):
            bad += 1
    return CheckResult("equivalence", bad == 0, f"{bad} disagreements in {count} triples")


def check_greedy_bound(count: int = 200, max_n: int = 12, max_m: int = 6,
                       seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    bad = []
    for k in range(count):
        inst = _random_minset(rng, max_n, max_m, seed * 100_003 + k)
        r = sample_realization(inst, k)
        opt = exact_opt(inst, r).opt_size
        greedy = offline_greedy(inst, r)
        if opt == 0:
            if greedy:
                bad.append(k)
            continue
        grset = bounds(inst, r, scale_factor(inst, True, r)).grset
        if len(greedy) > grset * opt:
            bad.append(k)
    fig, fr = gen_example()
    fig_grset = bounds(fig, fr, scale_factor(fig, True, fr)).grset
    ok = not bad and fig_grset == 6
    return CheckResult("greedy-bound", ok,
                       f"{len(bad)} violations in {count} instances; example grset(4) = {fig_grset}")


def _alpha_cases(algorithm: str, count: int, seed: int):
    rng = random.Random(seed)
    for k in range(count):
        s = seed * 100_003 + k
        n = rng.randint(2, 10)
        if algorithm == "detrhs":
            inst = gen_random_detrhs(n, rng.randint(1, 5), min(4, n), seed=s)
            run = run_detrhs
        elif algorithm == "mincover":
            inst = gen_random_mincover(n, rng.randint(1, 5), seed=s)
            run = run_mincover
        else:
            inst = gen_random_minset(n, rng.randint(1, 5), min(4, n), seed=s, mix=True)
            run = run_minset
        r = sample_realization(inst, s)
        yield inst, r, run(inst, r, s)


def check_alpha(count: int = 200, seed: int = 0, alpha=2) -> CheckResult:
    parts, ok = [], True
    for name in ("detrhs", "mincover", "minset"):
        runs = iters = fails = 0
        for inst, r, trace in _alpha_cases(name, count, seed):
            verdicts = verify_alpha_approx(trace, inst, r, alpha)
            runs += 1
            iters += len(verdicts)
            fails += sum(not v.passed for v in verdicts)
        ok = ok and fails == 0
        parts.append(f"{name}: {fails} failing of {iters} iterations in {runs} runs")
    return CheckResult("alpha", ok, "; ".join(parts))


def iteration_report(instance, trace) -> list:
    """Problems with a run_minset trace against the per-phase round bounds and d growth."""
    gamma = scale_factor(instance)
    m = instance.m
    max_width = max(iv.width for iv in instance.intervals)
    limits = {"gc": math.ceil(math.log(float(m * gamma * max_width), 1.5)) + 2,
              "gs": math.ceil(math.log2(m)) + 2}
    growth = {"gc": Fraction(3, 2), "gs": Fraction(2)}
    problems = []
    for it in trace.iterations:
        for phase in it.phases:
            if len(phase.rounds) > limits[phase.kind]:
                problems.append(f"iteration {it.index} {phase.kind}: {len(phase.rounds)} rounds "
                                f"> {limits[phase.kind]}")
            for k in range(1, len(phase.rounds)):
                cur, prev = phase.rounds[k], phase.rounds[k - 1]
                if cur.success and cur.d_final < growth[phase.kind] * prev.d_final:
                    problems.append(f"iteration {it.index} {phase.kind}: d {prev.d_final} -> "
                                    f"{cur.d_final}")
    return problems


def check_iterations(count: int = 200, seed: int = 0) -> CheckResult:
    bad, rounds = 0, 0
    first = ""
    for inst, r, trace in _alpha_cases("minset", count, seed):
        problems = iteration_report(inst, trace)
        rounds += sum(len(p.rounds) for it in trace.iterations for p in it.phases)
        if problems:
            bad += 1
            first = first or problems[0]
    detail = f"{bad} of {count} traces violate the bounds ({rounds} rounds inspected)"
    return CheckResult("iterations", bad == 0, detail + (f"; first: {first}" if first else ""))


def check_disjoint(count: int = 200, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    charge = mismatch = 0
    for k in range(count):
        s = seed * 100_003 + k
        inst = gen_random_disjoint(rng.randint(1, 4), 4, seed=s, mix=True)
        r = sample_realization(inst, s)
        trace = run_disjoint(inst, r)
        prefixes = disjoint_prefixes(inst, r)
        for j, p in enumerate(prefixes):
            h = sum(1 for it in trace.iterations if it.set_index == j)
            if h > 2 * len(p):
                charge += 1
        if exact_opt_disjoint(inst, r).opt_size != exact_opt(inst, r).opt_size:
            mismatch += 1
    ok = charge == 0 and mismatch == 0
    return CheckResult("disjoint", ok, f"{charge} charge violations, {mismatch} optimum "
                                       f"mismatches in {count} instances")


def setcover_optimum(universe, family) -> int:
    for k in range(len(family) + 1):
        for combo in itertools.combinations(family, k):
            if set(universe) <= set().union(*combo):
                return k
    raise ValueError("family does not cover the universe")


def random_setcover(rng: random.Random, max_u: int = 6, max_sets: int = 5):
    universe = list(range(1, rng.randint(1, max_u) + 1))
    family = [set(rng.sample(universe, rng.randint(1, len(universe))))
              for _ in range(rng.randint(1, max_sets))]
    missing = set(universe) - set().union(*family)
    for x in missing:
        family[rng.randrange(len(family))].add(x)
    return universe, family


def check_reduction(count: int = 100, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        universe, family = random_setcover(rng)
        inst, r = gen_setcover_reduction(universe, family)
        if exact_opt(inst, r).opt_size != setcover_optimum(universe, family):
            bad += 1
    return CheckResult("reduction", bad == 0, f"{bad} mismatches in {count} sources")


def check_maxset(count: int = 100, max_n: int = 8, seed: int = 0) -> CheckResult:
    rng = random.Random(seed)
    bad = subsets = 0
    for k in range(count):
        inst = _random_minset(rng, max_n, 4, seed * 100_003 + k)
        r = sample_realization(inst, k)
        refl, rr = reflect_maxset(inst, r)
        for mask in range(1 << inst.n_units):
            Q = [i for i in range(inst.n_units) if mask >> i & 1]
            state = QueryState(refl, rr, Q)
            subsets += 1
            if is_solved_maxset(inst, r, Q) != _structurally_solved(refl, state.revealed,
                                                                    state.lowers()):
                bad += 1
    return CheckResult("maxset", bad == 0, f"{bad} disagreements over {subsets} query sets")


SUITES = {
    "lb-capped": check_lb_capped,
    "lb-doubled": check_lb_doubled,
    "equivalence": check_equivalence,
    "greedy-bound": check_greedy_bound,
    "alpha": check_alpha,
    "iterations": check_iterations,
    "disjoint": check_disjoint,
    "reduction": check_reduction,
    "maxset": check_maxset,
}
