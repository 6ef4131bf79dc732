import itertools
import random

import numpy as np
import pytest

from nmorbits.abelian import CyclicProduct
from nmorbits.criterion import InverseSystemSpec
from nmorbits.flag import FinSupp, StructureSpec
from nmorbits.oracle import (
    CapExceeded,
    FiniteLevelAction,
    StageAction,
    brute_orbits,
    compare_with_orbit_test,
    compare_with_vanishing_criterion,
    compare_with_divisibility_criterion,
    enumerate_stabilizer,
    nullspace_mod_p,
    saturation,
)
from nmorbits.orbits import ParamSet


def naive_group(p, r, fixed=(), flags=()):
    """Every r x r matrix, kept if invertible and respecting the constraints."""
    vecs = list(itertools.product(range(p), repeat=r))
    out = []
    for entries in itertools.product(range(p), repeat=r * r):
        g = np.array(entries).reshape(r, r)
        imgs = [tuple(g @ np.array(v) % p) for v in vecs]
        if len(set(imgs)) < len(vecs):
            continue
        if any(tuple(g @ np.array(a) % p) != tuple(a) for a in fixed):
            continue
        if any(g[d, c] for S in flags for c in S for d in range(r) if d not in S):
            continue
        out.append(g)
    return out


def naive_orbits(p, r, group):
    vecs = list(itertools.product(range(p), repeat=r))
    return sorted({tuple(sorted({tuple(g @ np.array(v) % p) for g in group})) for v in vecs})


def test_nullspace():
    basis = nullspace_mod_p([[1, 1, 0], [0, 1, 1]], 3, 2)
    assert basis == [[1, 1, 1]]
    assert len(nullspace_mod_p([], 4, 3)) == 4


@pytest.mark.parametrize(
    "p, r, fixed, flags, order",
    [(2, 2, (), (), 6), (2, 2, ((1, 0),), (), 2), (2, 3, (), (), 168), (3, 2, (), (), 48), (2, 3, (), ({0}, {0, 1}), 8)],
)
def test_group_orders(p, r, fixed, flags, order):
    act = FiniteLevelAction(p, tuple(range(r)), fixed, tuple(frozenset(S) for S in flags))
    assert len(enumerate_stabilizer(act)) == order
    assert len(naive_group(p, r, fixed, flags)) == order


def test_orbit_examples():
    part = brute_orbits(FiniteLevelAction(2, (0, 1)))
    assert part.vector_blocks() == [[(0, 0)], [(1, 0), (0, 1), (1, 1)]]
    part = brute_orbits(FiniteLevelAction(2, (0, 1), ((1, 0),)))
    assert sorted(part.vector_blocks()) == [[(0, 0)], [(0, 1), (1, 1)], [(1, 0)]]


@pytest.mark.parametrize("seed", range(8))
def test_orbits_match_naive_enumeration(seed):
    rng = random.Random(seed)
    p, r = rng.choice([(2, 2), (2, 3), (3, 2)])
    fixed = tuple(tuple(rng.randrange(p) for _ in range(r)) for _ in range(rng.randrange(2)))
    flags = tuple(frozenset(rng.sample(range(r), k)) for k in range(1, r) if rng.random() < 0.5)
    part = brute_orbits(FiniteLevelAction(p, tuple(range(r)), fixed, flags))
    naive = naive_orbits(p, r, naive_group(p, r, fixed, flags))
    assert sorted(tuple(sorted(b)) for b in part.vector_blocks()) == naive


def test_constraints_refine_orbits():
    free = brute_orbits(FiniteLevelAction(3, (0, 1, 2)))
    flagged = brute_orbits(FiniteLevelAction(3, (0, 1, 2), flags=(frozenset({0}), frozenset({0, 1}))))
    fixed = brute_orbits(FiniteLevelAction(3, (0, 1, 2), ((1, 0, 0),), (frozenset({0}), frozenset({0, 1}))))
    for fine, coarse in [(flagged, free), (fixed, flagged)]:
        for b in fine.blocks:
            assert len({coarse.block_of[x] for x in b}) == 1
        assert len(fine.blocks) >= len(coarse.blocks)
    assert len(free.blocks) == 2 and len(flagged.blocks) == 4


def test_caps():
    act = FiniteLevelAction(3, (0, 1, 2, 3))
    with pytest.raises(CapExceeded):
        enumerate_stabilizer(act, candidate_cap=1000)
    with pytest.raises(ValueError):
        FiniteLevelAction(2, (0, 1), ((1, 0, 0),))


def naive_stage_automorphisms(X, kernels, A):
    """Permutations of the elements of X that are homomorphisms, fix A and
    map every kernel (given as zero positions) into itself."""
    elems = X.elements()
    index = {x: k for k, x in enumerate(elems)}
    out = []
    for perm in itertools.permutations(range(1, len(elems))):
        f = (0,) + perm
        img = {x: elems[f[k]] for k, x in enumerate(elems)}
        if any(img[a] != a for a in A):
            continue
        if any(img[X.add(x, y)] != X.add(img[x], img[y]) for x in elems for y in elems):
            continue
        if any(all(x[q] == 0 for q in zero) and not all(img[x][q] == 0 for q in zero)
               for zero in kernels for x in elems):
            continue
        out.append(img)
    assert len(out) == len({tuple(index[img[x]] for x in elems) for img in out})
    return out


def test_stage_action_on_z4_z2():
    system = InverseSystemSpec.from_json([4, 2], [[0], [0, 1]])
    X = CyclicProduct((4, 2))
    for A in ([(0, 0)], [(0, 0), (2, 0)], [(0, 0), (0, 1)]):
        act = StageAction(system, A)
        naive = naive_stage_automorphisms(X, [[0]], A)
        assert act.order == len(naive)
        for x in X.elements():
            assert {tuple(v) for v in act.apply(x)} == {img[x] for img in naive}
    assert StageAction(InverseSystemSpec.from_json([4, 2], [[0, 1]])).order == 8


def test_divisibility_full_table_on_z4_z2():
    system = InverseSystemSpec.from_json([4, 2], [[0], [0, 1]])
    X = system.universe
    instances = [([x], [y], [(0, 0)]) for x in X.elements() for y in X.elements()]
    report = compare_with_divisibility_criterion(system, instances)
    assert report.ok and report.agreements == 64 and report.group_order == 4


def test_divisibility_mixed_pairs():
    system = InverseSystemSpec.from_json([4, 2, 3], [[0], [0, 1], [0, 1, 2]])
    X = system.universe
    rng = random.Random(1)
    instances = []
    for _ in range(100):
        A = X.span([tuple(rng.randrange(d) for d in X.orders)] if rng.random() < 0.5 else [])
        instances.append(([tuple(rng.randrange(d) for d in X.orders) for _ in range(2)],
                          [tuple(rng.randrange(d) for d in X.orders) for _ in range(2)], A))
    report = compare_with_divisibility_criterion(system, instances)
    assert report.ok, report.disagreements[:2]


@pytest.mark.parametrize("p", [2, 3])
def test_vanishing_criterion_on_full_flag(p):
    report = compare_with_vanishing_criterion(p, [[0], [0, 1], [0, 1, 2]], [(1, 1, 0)])
    assert report.ok and report.agreements == (p ** 3) * (p ** 3 - 1) // 2


def test_orbit_test_agreement_saturated():
    spec = StructureSpec.canonical(2, "2")
    J = tuple(spec.fiber(0, 2) + spec.fiber(1, 2))
    report = compare_with_orbit_test(spec, ParamSet(2, []), J)
    assert report.saturated and report.ok and report.agreements == 16 * 15 // 2
    a = FinSupp(2, {J[0]: 1, J[2]: 1})
    J2 = tuple(spec.fiber(0, 3) + spec.fiber(1, 3))
    report = compare_with_orbit_test(spec, ParamSet(2, [a]), J2)
    assert report.saturated and report.ok


def test_orbit_test_on_one_coordinate_per_layer():
    # linear algebra on F_p^J already realizes every symbolic identification,
    # so even without spare coordinates brute force does not refine
    spec = StructureSpec.canonical(2, "4")
    J = tuple(spec.fiber(b, 1)[0] for b in range(4))
    for gens in ([], [FinSupp(2, {J[1]: 1})], [FinSupp(2, {J[0]: 1, J[3]: 1})]):
        A = ParamSet(2, gens)
        report = compare_with_orbit_test(spec, A, J)
        assert not report.saturated and report.notes
        assert report.ok


def test_orbit_test_fault_is_caught():
    spec = StructureSpec.canonical(2, "w")
    J = (0, 1, 2, 3)
    report = compare_with_orbit_test(spec, ParamSet(2, []), J, same=lambda *args: False)
    assert report.disagreements and all(d["brute_force_same"] for d in report.disagreements)
    assert set(report.to_json()) == {"agreements", "disagreements", "saturated", "group_order"}


def test_saturation_notes():
    spec = StructureSpec.canonical(2, "2")
    J = tuple(spec.fiber(0, 2) + spec.fiber(1, 1))
    ok, notes = saturation(spec, ParamSet(2, []), J)
    assert not ok and notes == ["layer 1: 1 spare coordinate(s), need 2"]
