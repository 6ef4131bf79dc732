import random

import pytest

from nmorbits.flag import FinSupp, StructureSpec, layer, level, sample_at_level
from nmorbits.orbits import (
    ParamSet,
    SpanCapExceeded,
    lascar_report,
    list_orbits,
    n_index,
    nm_dep,
    nm_rank,
    realized_levels,
    same_orbit,
    sup_rank,
    validate_chain,
    witness_chain,
)
from nmorbits.ordinal import ONE, ZERO, add, nat_sum, parse


def brute_n(spec, eta, A):
    """min over the explicitly listed span, the definition verbatim."""
    return min(level(spec, eta + a) for a in A.span)


def random_element(spec, rng, coords=24, terms=3):
    return FinSupp(spec.p, {rng.randrange(coords): rng.randrange(1, spec.p) for _ in range(rng.randrange(terms + 1))})


def random_params(spec, rng, gens=2):
    return ParamSet(spec.p, [random_element(spec, rng) for _ in range(rng.randrange(gens + 1))])


SPECS = [StructureSpec.canonical(2, "2"), StructureSpec.canonical(3, "w"), StructureSpec.canonical(2, "w*2")]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"p{s.p}-{s.alpha}")
def test_n_index_matches_span_minimum(spec):
    rng = random.Random(7)
    for _ in range(300):
        A = random_params(spec, rng)
        eta = random_element(spec, rng)
        n = n_index(spec, eta, A)
        assert n == brute_n(spec, eta, A)
        assert not n or n.is_successor
        assert (n == 0) == (eta in A)


def test_n_index_examples():
    spec = StructureSpec.canonical(2, "2")
    a = FinSupp.unit(2, spec.fiber(1, 1)[0])
    e0 = FinSupp.unit(2, spec.fiber(0, 1)[0])
    A = ParamSet(2, [a])
    assert n_index(spec, a, A) == 0
    assert n_index(spec, a + e0, A) == 1
    assert n_index(spec, a + e0, None) == level(spec, a + e0) == 2


def test_param_set_span_and_extension():
    A = ParamSet(3, [FinSupp(3, {0: 1}), FinSupp(3, {1: 1})])
    assert len(A.span) == 9
    assert FinSupp(3, {0: 2, 1: 1}) in A
    B = A.extend(FinSupp(3, {5: 1}))
    assert B.extends(A) and not A.extends(B)
    with pytest.raises(SpanCapExceeded):
        ParamSet(3, [FinSupp(3, {k: 1}) for k in range(6)], cap=100).span
    assert ParamSet.from_json(A.to_json(), 3).generators == A.generators


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"p{s.p}-{s.alpha}")
def test_same_orbit_is_an_equivalence(spec):
    rng = random.Random(3)
    for _ in range(150):
        A = random_params(spec, rng, 1)
        base = random_element(spec, rng)
        # nearby elements so that the relation is often true
        x, y, z = (base + random_element(spec, rng, 6, 1) for _ in range(3))
        assert same_orbit(spec, x, x, A)
        assert same_orbit(spec, x, y, A) == same_orbit(spec, y, x, A)
        if same_orbit(spec, x, y, A) and same_orbit(spec, y, z, A):
            assert same_orbit(spec, x, z, A)
        if same_orbit(spec, x, y, A):
            assert nm_rank(spec, x, A) == nm_rank(spec, y, A)
        for a in A.span[:3]:
            assert same_orbit(spec, x + a, y + a, A) == same_orbit(spec, x, y, A)


def test_same_orbit_lower_layer_perturbation():
    spec = StructureSpec.canonical(2, "w")
    eta = FinSupp.unit(2, spec.fiber(3, 1)[0])
    delta = FinSupp(2, {spec.fiber(0, 1)[0]: 1, spec.fiber(2, 1)[0]: 1})
    assert same_orbit(spec, eta, eta + delta, None)
    assert same_orbit(spec, eta, eta + FinSupp.unit(2, spec.fiber(3, 2)[1]), None)
    assert not same_orbit(spec, eta, eta + FinSupp.unit(2, spec.fiber(4, 1)[0]), None)


def test_orbit_listing_small_example():
    spec = StructureSpec.canonical(2, "2")
    a = FinSupp.unit(2, spec.fiber(1, 1)[0])
    A = ParamSet(2, [a])
    orbits = list_orbits(spec, A, 2)
    by_level = {}
    for o in orbits:
        by_level.setdefault(int(o.level), []).append(o)
    # level 1 splits H_1 from a + H_1: a is not in H_1
    assert {k: len(v) for k, v in by_level.items()} == {0: 2, 1: 2, 2: 1}
    assert all(o.count_at_level == len(by_level[int(o.level)]) for o in orbits)


@pytest.mark.parametrize("seed", range(10))
def test_orbit_listing_partitions_samples(seed):
    spec = StructureSpec.canonical(2, "w*2")
    rng = random.Random(seed)
    A = random_params(spec, rng, 2)
    orbits = list_orbits(spec, A, spec.alpha)
    for o in orbits:
        assert n_index(spec, o.representative, A) == o.level
        assert o.contains(spec, o.representative, A)
    for lv in realized_levels(spec, A, spec.alpha):
        for k in range(10):
            x = sample_at_level(spec, lv, seed * 100 + k) + rng.choice(A.span)
            hits = [o for o in orbits if o.contains(spec, x, A)]
            if n_index(spec, x, A) in {o.level for o in orbits}:
                assert len(hits) == 1


def test_orbit_json_shape():
    spec = StructureSpec.canonical(2, "w+1")
    o = list_orbits(spec, None, "w+1")[-1]
    assert set(o.to_json()) == {"level", "witness", "representative", "rank", "count_at_level"}
    assert o.to_json()["level"] == "w+1"


def test_nm_dep_examples():
    spec = StructureSpec.canonical(3, "w")
    rng = random.Random(5)
    for _ in range(50):
        A = random_params(spec, rng, 1)
        eta = random_element(spec, rng)
        assert not nm_dep(spec, eta, A, A)
        assert nm_dep(spec, eta, A, A.extend(eta)) == bool(n_index(spec, eta, A))
        beta = parse(str(rng.randrange(4)))
        trunc = eta.restrict(lambda n: layer(spec, n) >= beta)
        assert n_index(spec, eta, A.extend(trunc)) <= beta
    with pytest.raises(ValueError):
        nm_dep(spec, FinSupp(3, {1: 1}), ParamSet(3, [FinSupp(3, {0: 1})]), None)


def test_nm_dep_is_monotone():
    spec = StructureSpec.canonical(2, "w")
    rng = random.Random(11)
    for _ in range(100):
        A = random_params(spec, rng, 1)
        B = A.extend(random_element(spec, rng))
        C = B.extend(random_element(spec, rng))
        eta = random_element(spec, rng)
        if nm_dep(spec, eta, A, B):
            assert nm_dep(spec, eta, A, C)


def test_rank_of_single_coordinate():
    spec = StructureSpec.canonical(2, "w*2")
    for g in map(parse, ["0", "3", "w", "w+4"]):
        eta = FinSupp.unit(2, spec.fiber(g, 1)[0])
        assert nm_rank(spec, eta) == add(g, ONE)


def test_chain_examples():
    spec = StructureSpec.canonical(2, "w+2")
    assert witness_chain(spec, FinSupp(2)).steps == []
    eta = FinSupp.unit(2, spec.fiber(1, 1)[0])
    chain = witness_chain(spec, eta)
    assert chain.levels == [2, 1, 0] and chain.exact
    assert validate_chain(spec, eta, None, chain) == []


def test_chain_with_requested_levels():
    spec = StructureSpec.canonical(2, "w+2")
    eta = FinSupp(2, {spec.fiber(parse("w"), 1)[0]: 1, spec.fiber(3, 1)[0]: 1})
    assert nm_rank(spec, eta) == parse("w+1")
    chain = witness_chain(spec, eta, None, ["w", "5", "2", "0"])
    assert validate_chain(spec, eta, None, chain) == []
    # w is not a possible value; it is replaced by the level reached through truncation
    assert chain.substitutions[0] == (parse("w"), parse("4"))
    assert chain.levels == [parse("w+1"), 4, 2, 0]
    assert (parse("5"), None) in chain.substitutions


def test_default_chain_through_limits():
    spec = StructureSpec.canonical(3, "w*2+3")
    eta = sample_at_level(spec, parse("w*2+3"), 5)
    chain = witness_chain(spec, eta)
    assert validate_chain(spec, eta, None, chain) == []
    assert chain.levels[-1] == 0
    assert all(x > y for x, y in zip(chain.levels, chain.levels[1:]))
    assert not chain.exact  # descent below a limit cannot be one step at a time


@pytest.mark.parametrize("alpha", ["3", "w", "w+2", "w*2", "w^2"])
def test_sup_rank(alpha):
    spec = StructureSpec.canonical(2, alpha)
    s = sup_rank(spec)
    assert s.value == spec.alpha
    assert s.attained == spec.alpha.is_successor
    assert all(r <= spec.alpha for _, r in s.samples)


@pytest.mark.parametrize("alpha", ["w+2", "w*2", "w^2"])
def test_lascar_reports(alpha):
    spec = StructureSpec.canonical(2, alpha)
    for i in ["0", "1", "2", "w", alpha]:
        r = lascar_report(spec, parse(i))
        assert r.nm_total == spec.alpha and r.nm_sub == parse(i)
        assert r.ok
        assert r.upper == nat_sum(r.nm_sub, r.nm_quotient)
    r = lascar_report(spec, ZERO)
    assert r.lower == r.upper == spec.alpha
