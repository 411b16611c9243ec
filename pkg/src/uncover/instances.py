"""Named constructions, random families, and JSON persistence."""

from __future__ import annotations

import json
import random
from fractions import Fraction
from typing import Optional, Sequence

from .model import (DETRHS, KINDS, MINCOVER, MINSET, Instance, PointMass, Realization,
                    SymmetricTriangular, TwoPoint, Uniform, UncertaintyInterval, as_fraction,
                    fmt, interval, make_realization, mincover, minset)

F = Fraction


class SchemaError(ValueError):
    """Malformed instance or realization document; the message names the offending path."""


# ---------------------------------------------------------------------------
# named constructions


def gen_example():
    """The eight-interval, four-set running example with its realization."""
    bounds = [(1, 3), (F(1, 2), F(5, 2)), (0, 3), (F(1, 2), 4), (1, 5), (1, 3), (2, 5), (1, 5)]
    values = [F(5, 2), F(7, 4), F(1, 4), F(3, 4), 4, F(3, 2), F(9, 2), 2]
    ivs = [interval(i, lo, hi) for i, (lo, hi) in enumerate(bounds)]
    inst = minset(ivs, [(0, 1), (2, 3, 4), (3, 4, 5), (6, 7)], name="example")
    return inst, make_realization(inst, values)


def _two_point(low, high, tau):
    tau = as_fraction(tau)
    if tau == 1:
        return PointMass(as_fraction(high))
    return TwoPoint(as_fraction(low), 1 - tau, as_fraction(high), tau)


def _check_lb_params(n, tau, eps):
    tau, eps = as_fraction(tau), as_fraction(eps)
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    if not 0 < eps < F(1, 2):
        raise ValueError("eps must lie in (0, 1/2)")
    return tau, eps


def gen_lb_capped(n: int, tau=F(1, 2), eps=F(1, 100)) -> Instance:
    """A trivial set worth 0.65 against n unit intervals that are either eps or 0.7."""
    tau, eps = _check_lb_params(n, tau, eps)
    ivs = [interval(0, F(13, 20), F(13, 20))]
    ivs += [interval(i, 0, 1, _two_point(eps, F(7, 10), tau)) for i in range(1, n + 1)]
    return minset(ivs, [(0,), tuple(range(1, n + 1))], name=f"lb-capped-n{n}")


def gen_lb_doubled(n: int, tau=F(1, 2), eps=F(1, 100)) -> Instance:
    """Like gen_lb_capped, but n-1 intervals are eps or 0.51 and the last one is surely 0.7."""
    tau, eps = _check_lb_params(n, tau, eps)
    ivs = [interval(0, F(13, 20), F(13, 20))]
    ivs += [interval(i, 0, 1, _two_point(eps, F(51, 100), tau)) for i in range(1, n)]
    ivs.append(interval(n, 0, 1, PointMass(F(7, 10))))
    return minset(ivs, [(0,), tuple(range(1, n + 1))], name=f"lb-doubled-n{n}")


def gen_setcover_reduction(universe: Sequence, family: Sequence, w_r=1, delta=F(1, 10),
                           eps=F(1, 100)):
    """MinSet instance whose feasible query sets of size k are the set covers of size k.

    Interval 0 is the trivial {w_r} forming the cheapest set; interval j+1
    stands for family[j]; one set per universe element collects the intervals
    of the family members containing it.
    """
    w_r, delta, eps = as_fraction(w_r), as_fraction(delta), as_fraction(eps)
    if not 0 < eps < delta:
        raise ValueError("need 0 < eps < delta")
    universe = list(universe)
    family = [set(s) for s in family]
    stray = set().union(*family) - set(universe) if family else set()
    if stray:
        raise ValueError(f"family uses elements outside the universe: {sorted(stray)}")
    ivs = [interval(0, w_r, w_r)]
    ivs += [interval(j + 1, 0, w_r + delta, PointMass(w_r + eps)) for j in range(len(family))]
    sets = [(0,)]
    for x in universe:
        members = tuple(j + 1 for j, s in enumerate(family) if x in s)
        if not members:
            raise ValueError(f"element {x!r} is not covered by the family")
        sets.append(members)
    inst = minset(ivs, sets, name="setcover")
    return inst, make_realization(inst, [w_r] + [w_r + eps] * len(family))


# ---------------------------------------------------------------------------
# random families


def _rand_width(rng: random.Random, width_range, grid: int) -> Fraction:
    lo, hi = (as_fraction(x) for x in width_range)
    if lo <= 0 or hi < lo:
        raise ValueError("width range must be positive and ordered")
    k = rng.randint(0, grid)
    return lo + (hi - lo) * F(k, grid)


def _rand_dist(rng: random.Random, lower: Fraction, upper: Fraction, mix: bool):
    if not mix:
        return Uniform()
    r = rng.random()
    if r < 0.5:
        return Uniform()
    if r < 0.7:
        return SymmetricTriangular()
    width = upper - lower
    a = lower + width * F(rng.randint(1, 7), 16)
    b = lower + width * F(rng.randint(9, 15), 16)
    p = F(rng.randint(1, 3), 4)
    return TwoPoint(a, p, b, 1 - p)


def _rand_intervals(rng, n, width_range, trivial_prob, mix, grid=8):
    ivs = []
    for i in range(n):
        lower = F(rng.randint(0, 4 * grid), grid)
        if rng.random() < trivial_prob:
            ivs.append(interval(i, lower, lower))
            continue
        upper = lower + _rand_width(rng, width_range, grid)
        ivs.append(UncertaintyInterval(i, lower, upper, _rand_dist(rng, lower, upper, mix)))
    return ivs


def gen_random_minset(n: int, m: int, max_set_size: int, width_range=(F(1, 2), 4),
                      seed: int = 0, trivial_prob: float = 0.1, mix: bool = False) -> Instance:
    if n < 1 or m < 1 or max_set_size < 1:
        raise ValueError("n, m and max_set_size must be positive")
    rng = random.Random(seed)
    ivs = _rand_intervals(rng, n, width_range, trivial_prob, mix)
    sets = []
    for _ in range(m):
        k = rng.randint(1, min(max_set_size, n))
        sets.append(tuple(sorted(rng.sample(range(n), k))))
    return minset(ivs, sets, name=f"random-minset-{seed}")


def gen_random_detrhs(n: int, m: int, max_set_size: int, width_range=(F(1, 2), 4),
                      seed: int = 0, rhs_fraction=(F(1, 4), F(3, 4)),
                      trivial_prob: float = 0.1) -> Instance:
    """Random sets with fixed requirements drawn as a fraction of each set's total width."""
    base = gen_random_minset(n, m, max_set_size, width_range, seed, trivial_prob)
    rng = random.Random(seed ^ 0x5EED)
    lo, hi = (as_fraction(x) for x in rhs_fraction)
    rhs = []
    for s in base.sets:
        total = sum((base.intervals[i].width for i in s), F(0))
        rhs.append(total * (lo + (hi - lo) * F(rng.randint(0, 8), 8)))
    return Instance(DETRHS, base.intervals, base.sets, tuple(rhs), name=f"random-detrhs-{seed}")


def gen_random_disjoint(n_sets: int, max_set_size: int, width_range=(F(1, 2), 4), seed: int = 0,
                        trivial_prob: float = 0.1, mix: bool = False) -> Instance:
    if n_sets < 1 or max_set_size < 1:
        raise ValueError("n_sets and max_set_size must be positive")
    rng = random.Random(seed)
    sizes = [rng.randint(1, max_set_size) for _ in range(n_sets)]
    ivs = _rand_intervals(rng, sum(sizes), width_range, trivial_prob, mix)
    sets, start = [], 0
    for k in sizes:
        sets.append(tuple(range(start, start + k)))
        start += k
    return minset(ivs, sets, name=f"random-disjoint-{seed}")


def gen_random_mincover(n: int, m: int, coeff_range=(F(1, 2), 3), rhs_range=(1, 4),
                        seed: int = 0, density: float = 0.5) -> Instance:
    """n multisets over m elements; present coefficients are intervals (0, U) with U in coeff_range."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = random.Random(seed)
    coeffs = [[None] * m for _ in range(n)]
    for mm in range(n):
        for e in range(m):
            if rng.random() < density:
                coeffs[mm][e] = interval(0, 0, _rand_width(rng, coeff_range, 8))
    for e in range(m):
        if all(coeffs[mm][e] is None for mm in range(n)):
            coeffs[rng.randrange(n)][e] = interval(0, 0, _rand_width(rng, coeff_range, 8))
    lo, hi = (as_fraction(x) for x in rhs_range)
    rhs = [lo + (hi - lo) * F(rng.randint(0, 8), 8) for _ in range(m)]
    return mincover(coeffs, rhs, name=f"random-mincover-{seed}")


# ---------------------------------------------------------------------------
# JSON


def _dist_json(d) -> dict:
    return d.to_json()


def _parse_rational(x, path: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise SchemaError(f"{path}: expected a rational string, got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"{path}: malformed rational {x!r} ({exc})") from None


def _field(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    if key not in obj:
        raise SchemaError(f"{path}: missing field {key!r}")
    return obj[key]


def _parse_dist(obj, path: str):
    t = _field(obj, "type", path)
    if t == "uniform":
        return Uniform()
    if t == "triangular":
        return SymmetricTriangular()
    if t == "point":
        return PointMass(_parse_rational(_field(obj, "value", path), f"{path}.value"))
    if t == "two_point":
        return TwoPoint(*(_parse_rational(_field(obj, k, path), f"{path}.{k}")
                          for k in ("low", "p_low", "high", "p_high")))
    raise SchemaError(f"{path}.type: unknown distribution {t!r}")


def _interval_json(iv: UncertaintyInterval) -> dict:
    return {"lower": fmt(iv.lower), "upper": fmt(iv.upper), "dist": _dist_json(iv.dist)}


def _parse_interval(obj, i: int, path: str) -> UncertaintyInterval:
    lower = _parse_rational(_field(obj, "lower", path), f"{path}.lower")
    upper = _parse_rational(_field(obj, "upper", path), f"{path}.upper")
    dist = _parse_dist(obj["dist"], f"{path}.dist") if "dist" in obj else None
    try:
        return interval(i, lower, upper, dist)
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def instance_to_json(inst: Instance) -> dict:
    doc: dict = {"kind": inst.kind}
    if inst.name:
        doc["name"] = inst.name
    if inst.kind == MINCOVER:
        doc["intervals"] = [dict(_interval_json(iv), multiset=m, element=e)
                            for m, row in enumerate(inst.coeffs)
                            for e, iv in enumerate(row) if iv is not None]
        doc["n_multisets"] = inst.n_units
    else:
        doc["intervals"] = [_interval_json(iv) for iv in inst.intervals]
    doc["sets"] = [list(s) for s in inst.sets]
    if inst.rhs is not None:
        doc["rhs"] = [fmt(b) for b in inst.rhs]
    return doc


def instance_from_json(doc) -> Instance:
    kind = _field(doc, "kind", "$")
    if kind not in KINDS:
        raise SchemaError(f"$.kind: unknown kind {kind!r}")
    raw_ivs = _field(doc, "intervals", "$")
    raw_sets = _field(doc, "sets", "$")
    if not isinstance(raw_ivs, list):
        raise SchemaError("$.intervals: expected a list")
    if not isinstance(raw_sets, list) or not all(isinstance(s, list) for s in raw_sets):
        raise SchemaError("$.sets: expected a list of index lists")
    for j, s in enumerate(raw_sets):
        for k, i in enumerate(s):
            if isinstance(i, bool) or not isinstance(i, int):
                raise SchemaError(f"$.sets[{j}][{k}]: expected an integer index")
    rhs = None
    if "rhs" in doc and doc["rhs"] is not None:
        rhs = tuple(_parse_rational(b, f"$.rhs[{e}]") for e, b in enumerate(doc["rhs"]))
    name = doc.get("name", "")
    try:
        if kind == MINCOVER:
            if rhs is None:
                raise SchemaError("$: missing field 'rhs'")
            n_multi = _field(doc, "n_multisets", "$")
            coeffs = [[None] * len(rhs) for _ in range(n_multi)]
            for k, obj in enumerate(raw_ivs):
                path = f"$.intervals[{k}]"
                m, e = _field(obj, "multiset", path), _field(obj, "element", path)
                if not (0 <= m < n_multi and 0 <= e < len(rhs)):
                    raise SchemaError(f"{path}: pair ({m}, {e}) out of range")
                if coeffs[m][e] is not None:
                    raise SchemaError(f"{path}: duplicate pair ({m}, {e})")
                coeffs[m][e] = _parse_interval(obj, 0, path)
            return Instance(MINCOVER, sets=tuple(tuple(s) for s in raw_sets), rhs=rhs,
                            coeffs=tuple(tuple(r) for r in coeffs), name=name)
        ivs = tuple(_parse_interval(obj, i, f"$.intervals[{i}]") for i, obj in enumerate(raw_ivs))
        return Instance(kind, ivs, tuple(tuple(s) for s in raw_sets), rhs, name=name)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(f"$: {exc}") from None


def realization_to_json(r: Realization) -> dict:
    if r.values and isinstance(r.values[0], tuple):
        doc = {"values": [[fmt(a) for a in row] for row in r.values]}
    else:
        doc = {"values": [fmt(v) for v in r.values]}
    if r.wstar is not None:
        doc["wstar"] = fmt(r.wstar)
    return doc


def realization_from_json(doc, instance: Instance) -> Realization:
    vals = _field(doc, "values", "$")
    if not isinstance(vals, list):
        raise SchemaError("$.values: expected a list")
    if instance.kind == MINCOVER:
        parsed = [[_parse_rational(a, f"$.values[{m}][{e}]") for e, a in enumerate(row)]
                  for m, row in enumerate(vals)]
    else:
        parsed = [_parse_rational(v, f"$.values[{i}]") for i, v in enumerate(vals)]
    try:
        r = make_realization(instance, parsed)
    except ValueError as exc:
        raise SchemaError(f"$.values: {exc}") from None
    if "wstar" in doc and r.wstar != _parse_rational(doc["wstar"], "$.wstar"):
        raise SchemaError("$.wstar: does not match the values")
    return r


def save(inst: Instance) -> str:
    return json.dumps(instance_to_json(inst), indent=1)


def load(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return instance_from_json(doc)


FAMILIES = ("example", "lb-capped", "lb-doubled", "setcover", "random-minset", "random-detrhs",
            "random-disjoint", "random-mincover")


def generate(family: str, n: int = 20, m: int = 4, tau=F(1, 2), eps=F(1, 100),
             max_set_size: int = 4, seed: int = 0, universe: Optional[Sequence] = None,
             source: Optional[Sequence] = None):
    """Dispatch by family name; returns (instance, realization or None)."""
    if family == "example":
        return gen_example()
    if family == "lb-capped":
        return gen_lb_capped(n, tau, eps), None
    if family == "lb-doubled":
        return gen_lb_doubled(n, tau, eps), None
    if family == "setcover":
        if universe is None or source is None:
            raise ValueError("setcover needs a universe and a source family")
        return gen_setcover_reduction(universe, source, eps=eps)
    if family == "random-minset":
        return gen_random_minset(n, m, max_set_size, seed=seed), None
    if family == "random-detrhs":
        return gen_random_detrhs(n, m, max_set_size, seed=seed), None
    if family == "random-disjoint":
        return gen_random_disjoint(m, max_set_size, seed=seed), None
    if family == "random-mincover":
        return gen_random_mincover(n, m, seed=seed), None
    raise ValueError(f"unknown family {family!r}")
