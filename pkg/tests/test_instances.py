import json
from fractions import Fraction as F

import pytest

from uncover.harness import closed_form_expectations
from uncover.instances import (SchemaError, gen_example, gen_random_detrhs, gen_random_disjoint,
                               gen_random_mincover, gen_random_minset, gen_setcover_reduction,
                               gen_lb_capped, gen_lb_doubled, generate, instance_from_json,
                               instance_to_json, load, realization_from_json,
                               realization_to_json, save)
from uncover.model import MINCOVER, QueryState, check_realization, sample_realization
from uncover.offline import exact_opt


def test_example_limits_and_realization():
    inst, r = gen_example()
    assert (inst.n_units, inst.m) == (8, 4)
    assert (inst.lower_sum(1), inst.upper_sum(1)) == (F(3, 2), 12)
    # S3 shares I4 and I5 with S2, its limits come from its own members
    assert (inst.lower_sum(2), inst.upper_sum(2)) == (F(5, 2), 12)
    assert r.wstar == F(17, 4)
    assert r.set_values(inst) == [F(17, 4), F(5, 1), F(25, 4), F(13, 2)]


def test_lb_capped_shape_and_tau():
    inst = gen_lb_capped(20)
    assert inst.m == 2 and inst.sets[0] == (0,)
    assert inst.intervals[0].trivial and inst.intervals[0].lower == F(13, 20)
    assert all(iv.tau() == F(1, 2) for iv in inst.intervals[1:])
    assert all(iv.tau() == F(1, 4) for iv in gen_lb_capped(5, tau=F(1, 4)).intervals[1:])


def test_lb_doubled_last_interval_is_fixed():
    inst = gen_lb_doubled(10)
    for seed in range(20):
        assert sample_realization(inst, seed).values[10] == F(7, 10)


def test_lb_doubled_tau_one_stops_after_two_queries():
    assert closed_form_expectations("lb-doubled", 30, tau=1)["index_order"] == 2
    inst = gen_lb_doubled(30, tau=1)
    assert set(sample_realization(inst, 3).values[1:30]) == {F(51, 100)}


@pytest.mark.parametrize("bad", [dict(n=0), dict(n=5, tau=0), dict(n=5, eps=F(1, 2))])
def test_lower_bound_parameters_are_checked(bad):
    with pytest.raises(ValueError):
        gen_lb_capped(**bad)


def test_setcover_reduction_structure():
    inst, r = gen_setcover_reduction([1, 2, 3], [{1, 2}, {2, 3}, {3}])
    assert inst.sets == ((0,), (1,), (1, 2), (2, 3))
    assert r.wstar == 1
    assert exact_opt(inst, r).opt_size == 2


def test_setcover_reduction_rejects_uncovered_elements():
    with pytest.raises(ValueError):
        gen_setcover_reduction([1, 2], [{1}])
    with pytest.raises(ValueError):
        gen_setcover_reduction([1], [{1, 7}])


@pytest.mark.parametrize("gen", [
    lambda s: gen_random_minset(9, 4, 4, seed=s, mix=True),
    lambda s: gen_random_detrhs(9, 4, 4, seed=s),
    lambda s: gen_random_disjoint(4, 3, seed=s, mix=True),
    lambda s: gen_random_mincover(6, 4, seed=s),
])
def test_random_generators_are_seed_deterministic(gen):
    assert save(gen(11)) == save(gen(11))
    assert save(gen(11)) != save(gen(12))


def test_random_disjoint_sets_are_disjoint():
    for seed in range(50):
        assert gen_random_disjoint(5, 4, seed=seed).is_disjoint()


def test_random_mincover_invariants():
    for seed in range(1000):
        inst = gen_random_mincover(5, 4, seed=seed)
        assert all(inst.sets[e] for e in range(inst.m))
        assert all(1 <= b <= 4 for b in inst.rhs)
        check_realization(inst, sample_realization(inst, seed))


@pytest.mark.parametrize("make", [
    lambda: gen_example()[0],
    lambda: gen_lb_doubled(7),
    lambda: gen_random_detrhs(8, 3, 4, seed=2),
    lambda: gen_random_minset(8, 3, 4, seed=5, mix=True),
    lambda: gen_random_mincover(5, 3, seed=4),
])
def test_instance_round_trip(make):
    inst = make()
    back = load(save(inst))
    assert back == inst
    assert save(back) == save(inst)
    r = sample_realization(inst, 9)
    assert realization_from_json(json.loads(json.dumps(realization_to_json(r))), back) == r


def test_mincover_document_extension():
    doc = instance_to_json(gen_random_mincover(3, 2, seed=1))
    assert doc["kind"] == MINCOVER and doc["n_multisets"] == 3
    assert all({"multiset", "element"} <= set(iv) for iv in doc["intervals"])


def test_schema_errors_name_the_field():
    doc = instance_to_json(gen_example()[0])
    broken = dict(doc, intervals=[dict(doc["intervals"][0], upper="1/0")] + doc["intervals"][1:])
    with pytest.raises(SchemaError, match=r"\$\.intervals\[0\]\.upper"):
        instance_from_json(broken)
    with pytest.raises(SchemaError, match="'sets'"):
        instance_from_json({k: v for k, v in doc.items() if k != "sets"})
    with pytest.raises(SchemaError, match=r"\$\.sets\[0\]\[1\]"):
        instance_from_json(dict(doc, sets=[[0, "x"]]))
    with pytest.raises(SchemaError, match="kind"):
        instance_from_json(dict(doc, kind="maxset"))
    with pytest.raises(SchemaError, match="invalid JSON"):
        load("{")


def test_realization_schema_checks_wstar():
    inst, r = gen_example()
    doc = realization_to_json(r)
    with pytest.raises(SchemaError, match="wstar"):
        realization_from_json(dict(doc, wstar="1/3"), inst)
    with pytest.raises(SchemaError):
        realization_from_json(dict(doc, values=doc["values"][:-1] + ["9"]), inst)


def test_lb_capped_expected_optimum_small_case():
    assert closed_form_expectations("lb-capped", 4)["opt"] == F(19, 16)


def test_generate_dispatch():
    inst, r = generate("example")
    assert r is not None and QueryState(inst, r).lowers()
    assert generate("random-disjoint", m=3, seed=4)[0].is_disjoint()
    with pytest.raises(ValueError):
        generate("setcover")
    with pytest.raises(ValueError):
        generate("nope")
