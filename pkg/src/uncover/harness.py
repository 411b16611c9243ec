"""Monte Carlo trials, aggregate statistics and report files."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .algorithms import run_algorithm
from .model import DegenerateInstance, Instance, as_fraction, sample_realization
from .offline import BudgetExhausted, exact_opt, exact_opt_disjoint, reported_bound, \
    verify_alpha_approx

CSV_COLUMNS = ("algorithm", "trials", "mean_alg", "ci_lo", "ci_hi", "mean_opt", "ratio",
               "grsetu", "verify_pass_rate")
Z95 = 1.959963984540054


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    alg_queries: int
    opt_queries: Optional[int] = None
    iterations: int = 0
    verify_passed: Optional[bool] = None
    flagged: Optional[str] = None


@dataclass
class Report:
    algorithm: str
    instance: str
    trials: int
    mean_alg: Optional[float]
    var_alg: Optional[float]
    ci_lo: Optional[float]
    ci_hi: Optional[float]
    mean_opt: Optional[float]
    ratio: Optional[float]
    grsetu: Optional[int]
    verify_pass_rate: Optional[float]
    records: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "Report":
        obj = dict(obj)
        obj["records"] = [TrialRecord(**r) for r in obj.get("records", ())]
        return cls(**obj)


def _opt_size(instance: Instance, realization, budget: int) -> int:
    if instance.kind == "minset" and instance.is_disjoint():
        return exact_opt_disjoint(instance, realization).opt_size
    return exact_opt(instance, realization, budget).opt_size


def run_trial(instance: Instance, algorithm: str, trial_index: int, seed: int,
              with_opt: bool = False, with_verify: bool = False, alpha=2,
              budget: int = 200_000) -> TrialRecord:
    realization = sample_realization(instance, seed)
    trace = run_algorithm(algorithm, instance, realization, seed)
    rec = TrialRecord(trial_index, seed, trace.total, iterations=len(trace.iterations))
    if with_opt or with_verify:
        try:
            rec.opt_queries = _opt_size(instance, realization, budget)
        except BudgetExhausted as exc:
            rec.flagged = str(exc)
            return rec
    if with_verify:
        verdicts = verify_alpha_approx(trace, instance, realization, alpha, rec.opt_queries)
        rec.verify_passed = all(v.passed for v in verdicts)
    return rec


def _run_chunk(args):
    instance, algorithm, jobs, with_opt, with_verify, alpha, budget = args
    return [run_trial(instance, algorithm, i, s, with_opt, with_verify, alpha, budget)
            for i, s in jobs]


def _mean(xs):
    return sum(xs) / len(xs) if xs else None


def summarize(instance: Instance, algorithm: str, records: list) -> Report:
    records = sorted(records, key=lambda r: r.trial_index)
    algs = [r.alg_queries for r in records]
    n = len(algs)
    mean = _mean(algs)
    var = ci_lo = ci_hi = None
    if n:
        var = sum((x - mean) ** 2 for x in algs) / (n - 1) if n > 1 else 0.0
        half = Z95 * math.sqrt(var / n)
        ci_lo, ci_hi = mean - half, mean + half
    opts = [r.opt_queries for r in records if r.opt_queries is not None]
    mean_opt = _mean(opts)
    ratio = None
    if mean_opt:
        paired = [r.alg_queries for r in records if r.opt_queries is not None]
        ratio = _mean(paired) / mean_opt
    checks = [r.verify_passed for r in records if r.verify_passed is not None]
    rate = sum(checks) / len(checks) if checks else None
    try:
        bound = reported_bound(instance)
    except DegenerateInstance:
        bound = None
    return Report(algorithm, instance.name, n, mean, var, ci_lo, ci_hi, mean_opt, ratio, bound,
                  rate, records)


def run_trials(instance: Instance, algorithm: str, trials: int, base_seed: int = 0,
               with_opt: bool = False, with_verify: bool = False, alpha=2, workers: int = 1,
               budget: int = 200_000) -> Report:
    """Run ``trials`` independent trials; trial i draws its realization with seed base_seed + i."""
    jobs = [(i, base_seed + i) for i in range(trials)]
    if workers > 1 and trials > 1:
        size = math.ceil(trials / workers)
        chunks = [(instance, algorithm, jobs[k:k + size], with_opt, with_verify, alpha, budget)
                  for k in range(0, trials, size)]
        with ProcessPoolExecutor(workers) as pool:
            records = [r for part in pool.map(_run_chunk, chunks) for r in part]
    else:
        records = _run_chunk((instance, algorithm, jobs, with_opt, with_verify, alpha, budget))
    return summarize(instance, algorithm, records)


# ---------------------------------------------------------------------------
# closed forms for the lower-bound constructions


def _index_order_cost(n: int, tau: Fraction, eps: Fraction, high: Fraction, last) -> Fraction:
    """Expected number of queries when S_2's intervals are queried in index order.

    Querying stops once S_2's lower limit reaches 0.65 or S_2 is exhausted;
    ``last`` is a fixed value for the final interval, or None when it follows
    the same two-point law as the others.
    """
    target = Fraction(13, 20)
    states = {Fraction(0): Fraction(1)}    # running lower limit -> probability, still querying
    expected = Fraction(0)
    for k in range(n):
        expected += sum(states.values(), Fraction(0))
        outcomes = [(last, Fraction(1))] if (k == n - 1 and last is not None) else \
            [(eps, 1 - tau), (high, tau)]
        nxt: dict = {}
        for lo, p in states.items():
            for v, q in outcomes:
                if q == 0:
                    continue
                s = lo + v
                if s < target:
                    nxt[s] = nxt.get(s, Fraction(0)) + p * q
        states = nxt
    return expected


def closed_form_expectations(family: str, n: int, tau=Fraction(1, 2),
                             eps=Fraction(1, 100)) -> dict:
    """Exact expectations for the two lower-bound families.

    ``opt`` is E[OPT], ``index_order`` the expected cost of querying S_2 in
    index order (what the disjoint algorithm does on these instances), and
    ``limit`` the large-n expression min(k/tau, n).
    """
    tau, eps = as_fraction(tau), as_fraction(eps)
    target = Fraction(13, 20)
    if family == "lb-capped":
        q = (1 - tau) ** n
        # all draws small: S_2 is cheapest unless n*eps already exceeds 0.65
        if n * eps <= target:
            all_small = Fraction(n)
        else:
            all_small = Fraction(math.ceil(target / eps))
        opt = (1 - q) + q * all_small
        cost = _index_order_cost(n, tau, eps, Fraction(7, 10), None)
        return {"opt": opt, "index_order": cost, "limit": min(1 / tau, Fraction(n)),
                "opt_uncapped": (1 - q) + q * n}
    if family == "lb-doubled":
        cost = _index_order_cost(n, tau, eps, Fraction(51, 100), Fraction(7, 10))
        return {"opt": Fraction(1), "index_order": cost, "limit": min(2 / tau, Fraction(n))}
    raise ValueError(f"no closed form for family {family!r}")


# ---------------------------------------------------------------------------
# report files


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def reports_to_csv(reports: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rep in reports:
        if not rep.trials:
            continue    # an empty report has nothing to plot
        writer.writerow([_cell(getattr(rep, col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def reports_to_json(reports: list) -> str:
    return json.dumps([r.to_json() for r in reports], indent=1, sort_keys=True) + "\n"


def reports_from_json(text: str) -> list:
    return [Report.from_json(obj) for obj in json.loads(text)]


def emit(reports, fmt: str, path) -> Path:
    """Write one or more reports as CSV or JSON."""
    if isinstance(reports, Report):
        reports = [reports]
    if fmt == "csv":
        text = reports_to_csv(reports)
    elif fmt == "json":
        text = reports_to_json(reports)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path
