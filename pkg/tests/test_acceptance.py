"""Acceptance criteria at full size; each test prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` to see the lines interleaved
with the test names.
"""

import pytest

from uncover import checks
from uncover.checks import CheckResult
from uncover.cli import main


def report(capsys, result: CheckResult, number: int):
    with capsys.disabled():
        print(f"\ncriterion {number:2d} {result.line()}", flush=True)
    assert result.passed, result.detail


def test_01_lb_doubled_lower_bound_family(capsys):
    report(capsys, checks.check_lb_doubled(trials=10_000), 1)


def test_02_lb_capped_lower_bound_family(capsys):
    report(capsys, checks.check_lb_capped(trials=10_000), 2)


def test_03_structural_and_covering_feasibility_agree(capsys):
    report(capsys, checks.check_equivalence(count=1000, max_n=10), 3)


# The bound evaluates to 0 when gamma * m * max requirement is 1 (a single set whose
# only useful member has the smallest coefficient), while greedy and OPT both need one
# query.  The criterion is kept as stated and expected to fail on those instances.
@pytest.mark.xfail(strict=True, reason="bound formula evaluates to 0 on single-unit instances")
def test_04_offline_greedy_bound(capsys):
    report(capsys, checks.check_greedy_bound(count=200, max_n=12, max_m=6), 4)


def test_05_alpha_approximate_iterations(capsys):
    report(capsys, checks.check_alpha(count=200, alpha=2), 5)


def test_06_inner_round_counts_and_d_growth(capsys):
    report(capsys, checks.check_iterations(count=200), 6)


def test_07_disjoint_charging_and_optimum(capsys):
    report(capsys, checks.check_disjoint(count=200), 7)


def test_08_setcover_reduction_fidelity(capsys):
    report(capsys, checks.check_reduction(count=100), 8)


def test_09_maxset_reflection(capsys):
    report(capsys, checks.check_maxset(count=100, max_n=8), 9)


def test_10_run_reports_are_byte_identical(tmp_path, capsys):
    insts = []
    for family, extra in [("example", []), ("lb-doubled", ["--n", "50"]),
                          ("random-detrhs", ["--seed", "7"]),
                          ("random-mincover", ["--seed", "7"])]:
        path = tmp_path / f"{family}.json"
        main(["generate", "--family", family, *extra, "--out", str(path)])
        insts.append(path)
    runs = [(["disjoint"], insts[1:2]), (["minset", "baseline:width"], insts[:1]),
            (["detrhs"], insts[2:3]), (["mincover"], insts[3:4])]
    identical = 0
    for algs, paths in runs:
        for ext in ("csv", "json"):
            outs = []
            for k in range(2):
                out = tmp_path / f"{algs[0]}-{k}.{ext}"
                argv = ["run", "--trials", "50", "--seed", "11", "--opt", "--verify-alpha", "2",
                        "--out", str(out)]
                argv += [x for a in algs for x in ("--alg", a)]
                argv += [x for p in paths for x in ("--instance", str(p))]
                assert main(argv) == 0
                outs.append(out.read_bytes())
            identical += outs[0] == outs[1]
    total = 2 * len(runs)
    report(capsys, CheckResult("determinism", identical == total,
                               f"{identical}/{total} report pairs byte-identical"), 10)
