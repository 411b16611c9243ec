import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from uncover.algorithms import (RunTrace, run_baseline, run_detrhs, run_disjoint, run_mincover,
                                run_minset)
from uncover.checks import iteration_report
from uncover.covering import Level
from uncover.harness import closed_form_expectations, run_trials
from uncover.instances import (gen_example, gen_random_detrhs, gen_random_disjoint,
                               gen_random_mincover, gen_random_minset, gen_lb_capped, gen_lb_doubled)
from uncover.model import (ContractViolation, Instance, PointMass, QueryState, interval,
                           is_solved_minset, make_realization, mincover, minset,
                           sample_realization)
from uncover.offline import check_feasible, verify_alpha_approx


def two_set_example():
    inst = minset([interval(0, 0, 4), interval(1, 0, 2), interval(2, 0, 10)], [(0, 1), (2,)])
    return inst, make_realization(inst, [3, F(1, 2), 1])


def test_disjoint_two_set_example():
    inst, r = two_set_example()
    trace = run_disjoint(inst, r)
    assert trace.queries == [0, 2]
    assert [it.set_index for it in trace.iterations] == [0, 1]
    assert is_solved_minset(QueryState(inst, r, trace.queries))


def test_disjoint_single_interval():
    inst = minset([interval(0, 0, 1), interval(1, 2, 2)], [(0,), (1,)])
    assert run_disjoint(inst, sample_realization(inst, 0)).total == 1


def test_disjoint_rejects_overlapping_sets():
    inst, r = gen_example()
    with pytest.raises(ContractViolation):
        run_disjoint(inst, r)


def test_disjoint_on_lb_doubled_matches_closed_form():
    rep = run_trials(gen_lb_doubled(50), "disjoint", 2000, 0)
    assert 3.6 <= rep.mean_alg <= 4.4
    exact = float(closed_form_expectations("lb-doubled", 50)["index_order"])
    assert abs(rep.mean_alg - exact) <= 3 * (rep.var_alg / 2000) ** 0.5


def test_detrhs_zero_rhs_gives_empty_trace():
    inst, r = gen_example()
    assert run_detrhs(inst.with_rhs([0, 0, 0, 0]), r).queries == []


def test_detrhs_example_requirements():
    inst, r = gen_example()
    det = inst.with_rhs([F(11, 4), F(11, 4), F(7, 4), F(5, 4)])
    for seed in range(20):
        rs = sample_realization(det, seed)
        trace = run_detrhs(det, rs)
        assert check_feasible(det, rs, trace.queries)
        assert all(v.passed for v in verify_alpha_approx(trace, det, rs))


def test_detrhs_infeasible_instance_queries_everything():
    inst = minset([interval(0, 0, 1), interval(1, 0, 2), interval(2, 3, 3)],
                  [(0, 1, 2)]).with_rhs([10])
    trace = run_detrhs(inst, sample_realization(inst, 1))
    assert sorted(trace.queries) == [0, 1]
    assert trace.infeasible


def test_mincover_single_multiset():
    full = interval(0, 0, 2)
    inst = mincover([[full, full], [None, interval(0, 0, 1)]], [F(1, 10), F(1, 10)])
    r = make_realization(inst, [[F(3, 2), F(3, 2)], [0, F(1, 2)]])
    assert run_mincover(inst, r).queries == [0]


def test_mincover_zero_rhs():
    inst = gen_random_mincover(4, 3, seed=1)
    inst = mincover(inst.coeffs, [0] * inst.m)
    assert run_mincover(inst, sample_realization(inst, 1)).queries == []


def encode_as_mincover(det: Instance, r):
    coeffs, rows = [], []
    for iv in det.intervals:
        coeffs.append([interval(0, 0, iv.width) if iv.id in s and not iv.trivial else None
                       for s in det.sets])
        rows.append([r.values[iv.id] - iv.lower if iv.id in s and not iv.trivial else 0
                     for s in det.sets])
    cov = mincover(coeffs, det.rhs)
    return cov, make_realization(cov, rows)


def upper_half_realization(det: Instance, seed: int):
    rng = random.Random(seed)
    return make_realization(det, [iv.lower if iv.trivial else
                                  iv.lower + iv.width * F(rng.randint(8, 15), 16)
                                  for iv in det.intervals])


def test_mincover_encoding_reproduces_detrhs():
    # when every coefficient clears half its width both stopping rules fire after each query
    for seed in range(40):
        det = gen_random_detrhs(8, 4, 4, seed=seed)
        r = upper_half_realization(det, seed)
        cov, rc = encode_as_mincover(det, r)
        a, b = run_detrhs(det, r), run_mincover(cov, rc)
        assert a.queries == b.queries
        assert [it.kind for it in a.iterations] == [it.kind for it in b.iterations]


def test_minset_single_set_queries_its_nontrivial_members():
    inst = minset([interval(0, 0, 1), interval(1, 2, 2), interval(2, 1, 4)], [(0, 1, 2)])
    for seed in range(5):
        assert sorted(run_minset(inst, sample_realization(inst, seed)).queries) == [0, 2]


def test_minset_example_golden_trace():
    # first steps checked by hand: with gamma = 1 every unit of S1, S2 and S3 reaches
    # optimistic value 1 at w = 5/2, so I1 (index 0) goes first, then I3 at the same w
    inst, r = gen_example()
    trace = run_minset(inst, r)
    assert trace.queries == [0, 2, 3, 4, 1, 6]
    gc_phase, gs_phase = trace.iterations[0].phases
    steps = [s for rnd in gc_phase.rounds for s in rnd.steps]
    assert [s.w for s in steps] == [Level(F(5, 2)), Level(F(5, 2)), Level(F(21, 8)),
                                    Level(F(47, 16))]
    assert [s.d for s in steps] == [1, 1, F(9, 8), F(53, 16)]
    assert [s.w for rnd in gs_phase.rounds for s in rnd.steps] == [Level(F(3), True)] * 2
    assert check_feasible(inst, r, trace.queries)


def test_minset_example_sampled_realizations():
    inst, _ = gen_example()
    for seed in range(25):
        r = sample_realization(inst, seed)
        trace = run_minset(inst, r)
        assert check_feasible(inst, r, trace.queries)
        assert all(v.passed for v in verify_alpha_approx(trace, inst, r))
        assert iteration_report(inst, trace) == []


def test_minset_lb_capped_tracks_capped_geometric():
    trials = 10_000
    rep = run_trials(gen_lb_capped(20), "minset", trials, 0, with_opt=True)
    expected = float(closed_form_expectations("lb-capped", 20)["index_order"])
    assert abs(rep.mean_alg - expected) <= 0.15 * expected
    assert rep.ratio < 2 + 0.25


def test_baselines():
    inst, r = gen_example()
    assert run_baseline(inst, r, "all").total == 8
    assert run_baseline(inst, r, "random", seed=3).queries == \
        run_baseline(inst, r, "random", seed=3).queries
    width = run_baseline(inst, r, "width")
    assert width.queries[:2] == [4, 7]
    assert check_feasible(inst, r, width.queries)
    solved = minset([interval(0, 1, 1), interval(1, 2, 3)], [(0,), (1,)])
    for policy in ("all", "random", "width"):
        assert run_baseline(solved, sample_realization(solved, 0), policy, 0).queries == []


def test_trace_json_round_trip():
    inst, r = gen_example()
    trace = run_minset(inst, r, seed=7)
    assert RunTrace.from_json(trace.to_json()) == trace


def _cases(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 10)
    m = rng.randint(1, 5)
    return [
        ("minset", gen_random_minset(n, m, 4, seed=seed, mix=True), run_minset),
        ("disjoint", gen_random_disjoint(m, 3, seed=seed, mix=True), run_disjoint),
        ("detrhs", gen_random_detrhs(n, m, 4, seed=seed), run_detrhs),
        ("mincover", gen_random_mincover(n, m, seed=seed), run_mincover),
        ("baseline", gen_random_minset(n, m, 4, seed=seed), lambda i, r: run_baseline(i, r, "random", seed)),
    ]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_algorithms_end_feasible_and_never_exceed_exhaustive(seed):
    for name, inst, run in _cases(seed):
        r = sample_realization(inst, seed)
        trace = run(inst, r)
        useful = set(inst.useful_units())
        assert len(set(trace.queries)) == len(trace.queries)
        assert set(trace.queries) <= useful
        assert [u for it in trace.iterations for u in it.queries] == trace.queries
        assert check_feasible(inst, r, trace.queries)
        if name in ("disjoint", "detrhs"):
            state = QueryState(inst, r, trace.queries)
            for it in trace.iterations:
                assert not any(state.clears_half(u) for u in it.queries[:-1])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_alpha_approximation_on_random_runs(seed):
    for name, inst, run in _cases(seed):
        if name in ("disjoint", "baseline"):
            continue
        r = sample_realization(inst, seed)
        trace = run(inst, r)
        assert all(v.passed for v in verify_alpha_approx(trace, inst, r))
