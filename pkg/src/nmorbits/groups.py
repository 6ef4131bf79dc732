"""Finite groups given by Cayley tables, automorphism actions on them, and
the ascending series built from those actions (iterated centralizers,
upper central series, derived series).

Elements are integer ids ``0..n-1``.  Subgroups are frozensets of ids.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .abelian import CyclicProduct

__all__ = [
    "FiniteGroup",
    "AutSet",
    "GroupError",
    "CentralizerChain",
    "iterated_centralizers",
    "automorphism_group",
    "cyclic",
    "abelian",
    "direct_product",
    "metacyclic",
    "semidirect_abelian",
    "permutation_group",
    "dihedral",
    "small_groups",
]

Subgroup = frozenset


class GroupError(ValueError):
    pass


class FiniteGroup:
    """A group on ids ``0..n-1`` with multiplication ``table[a][b]``.

    The table is validated on construction (latin square, identity,
    associativity).
    """

    def __init__(self, table: Sequence[Sequence[int]], identity: int = 0, name: str = "", check: bool = True):
        self.table = tuple(tuple(int(x) for x in row) for row in table)
        self.identity = int(identity)
        self.name = name
        n = len(self.table)
        if check:
            self._validate()
        self._inv = tuple(row.index(self.identity) for row in self.table)
        self.elements = tuple(range(n))

    def _validate(self):
        n = len(self.table)
        if n == 0:
            raise GroupError("a group has at least one element")
        if not 0 <= self.identity < n:
            raise GroupError("identity out of range")
        t = np.array(self.table, dtype=np.int64)
        if t.shape != (n, n) or t.min() < 0 or t.max() >= n:
            raise GroupError("table must be an n x n array of ids in range")
        full = np.arange(n)
        if not (np.sort(t, axis=1) == full).all() or not (np.sort(t, axis=0) == full[:, None]).all():
            raise GroupError("table is not a latin square")
        if not (t[self.identity] == full).all() or not (t[:, self.identity] == full).all():
            raise GroupError(f"{self.identity} is not a two-sided identity")
        for a in range(n):
            # (a*b)*c == a*(b*c) for all b, c
            if not (t[t[a]] == t[a][t]).all():
                raise GroupError("table is not associative")

    @classmethod
    def from_json(cls, data) -> "FiniteGroup":
        try:
            n = int(data["elements"])
            table = data["table"]
            identity = int(data.get("identity", 0))
        except (KeyError, TypeError) as exc:
            raise GroupError(f"group JSON needs 'elements' and 'table': {exc}") from None
        if len(table) != n:
            raise GroupError(f"'table' has {len(table)} rows but 'elements' is {n}")
        return cls(table, identity)

    def to_json(self) -> dict:
        return {"elements": len(self), "table": [list(r) for r in self.table], "identity": self.identity}

    def __len__(self):
        return len(self.table)

    def __repr__(self):
        return f"FiniteGroup({self.name or len(self)})"

    # -- arithmetic ----------------------------------------------------
    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def commutator(self, x: int, y: int) -> int:
        """[x, y] = x^-1 y^-1 x y."""
        t, i = self.table, self._inv
        return t[t[t[i[x]][i[y]]][x]][y]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.table[x][a]
            k += 1
        return k

    @property
    def exponent(self) -> int:
        return math.lcm(*(self.element_order(a) for a in self.elements))

    @property
    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in self.elements for b in range(a))

    # -- subgroups -----------------------------------------------------
    def generated(self, gens: Iterable[int]) -> Subgroup:
        gens = list(gens)
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.table[x][g]
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(seen)

    def is_subgroup(self, s: Iterable[int]) -> bool:
        s = set(s)
        return self.identity in s and all(self.table[a][self._inv[b]] in s for a in s for b in s)

    def is_normal(self, s: Subgroup) -> bool:
        t, i = self.table, self._inv
        return all(t[t[i[g]][h]][g] in s for g in self.elements for h in s)

    def normalizer(self, s: Subgroup) -> Subgroup:
        t, i = self.table, self._inv
        return frozenset(g for g in self.elements if all(t[t[i[g]][h]][g] in s for h in s))

    def center(self) -> Subgroup:
        t = self.table
        return frozenset(h for h in self.elements if all(t[h][x] == t[x][h] for x in self.elements))

    def commutator_of(self, a: Iterable[int], b: Iterable[int]) -> Subgroup:
        """The subgroup [A, B] generated by all commutators."""
        b = list(b)
        return self.generated({self.commutator(x, y) for x in a for y in b})

    def commutator_subgroup(self) -> Subgroup:
        return self.commutator_of(self.elements, self.elements)

    def trivial(self) -> Subgroup:
        return frozenset({self.identity})

    def whole(self) -> Subgroup:
        return frozenset(self.elements)

    # -- quotients and series -----------------------------------------
    def quotient(self, n: Subgroup) -> tuple["FiniteGroup", list[int]]:
        """Coset table of G/N and the projection G -> G/N.

        Cosets are numbered by their minimal element id, which is also the
        chosen representative.
        """
        if not self.is_subgroup(n) or not self.is_normal(n):
            raise GroupError("can only quotient by a normal subgroup")
        coset_of = [-1] * len(self)
        reps = []
        for g in self.elements:
            if coset_of[g] < 0:
                for h in n:
                    coset_of[self.table[g][h]] = len(reps)
                reps.append(g)
        table = [[coset_of[self.table[a][b]] for b in reps] for a in reps]
        return FiniteGroup(table, coset_of[self.identity], check=False), coset_of

    def upper_central_series(self) -> list[Subgroup]:
        """Z_0 = {e} < Z_1 < ... up to the first repetition (which is dropped)."""
        series = [self.trivial()]
        while True:
            q, proj = self.quotient(series[-1])
            zq = q.center()
            nxt = frozenset(g for g in self.elements if proj[g] in zq)
            if nxt == series[-1]:
                return series
            series.append(nxt)

    def lower_central_series(self) -> list[Subgroup]:
        """gamma_1 = G > gamma_2 = [G, G] > ... up to stabilization."""
        series = [self.whole()]
        while True:
            nxt = self.commutator_of(series[-1], self.elements)
            if nxt == series[-1]:
                return series
            series.append(nxt)

    def derived_series(self) -> list[Subgroup]:
        series = [self.whole()]
        while True:
            nxt = self.commutator_of(series[-1], series[-1])
            if nxt == series[-1]:
                return series
            series.append(nxt)

    def nilpotency_class(self) -> int | None:
        ucs = self.upper_central_series()
        return len(ucs) - 1 if ucs[-1] == self.whole() else None

    def solvability_class(self) -> int | None:
        """Derived length, or None when the derived series stalls above {e}."""
        ds = self.derived_series()
        return len(ds) - 1 if ds[-1] == self.trivial() else None

    def signature(self) -> tuple:
        """Isomorphism invariant used to tell catalogue entries apart."""
        orders = sorted(self.element_order(a) for a in self.elements)
        squares = {self.table[a][a] for a in self.elements}
        return (
            len(self),
            tuple(orders),
            len(self.center()),
            len(self.commutator_subgroup()),
            len(squares),
            self.nilpotency_class(),
        )


# -- automorphisms --------------------------------------------------------

class AutSet:
    """A group of automorphisms of ``group``, each a tuple ``perm`` with
    ``perm[h]`` the image of ``h``.  Built as the closure of generators."""

    def __init__(self, group: FiniteGroup, generators: Iterable[Sequence[int]] = (), cap: int = 1 << 16):
        self.group = group
        gens = [tuple(int(x) for x in g) for g in generators]
        for g in gens:
            self._check(g)
        ident = tuple(group.elements)
        seen = {ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for f in frontier:
                for g in gens:
                    fg = tuple(g[f[h]] for h in group.elements)
                    if fg not in seen:
                        seen.add(fg)
                        nxt.append(fg)
            if len(seen) > cap:
                raise GroupError(f"automorphism closure exceeds cap of {cap}")
            frontier = nxt
        self.maps = tuple(sorted(seen))
        self.generators = tuple(gens)

    def _check(self, f):
        g = self.group
        if sorted(f) != list(g.elements):
            raise GroupError(f"{list(f)} is not a permutation of the group elements")
        if f[g.identity] != g.identity:
            raise GroupError("automorphisms fix the identity")
        t = g.table
        for a in g.elements:
            for b in g.elements:
                if f[t[a][b]] != t[f[a]][f[b]]:
                    raise GroupError(f"{list(f)} does not respect the table")

    def __iter__(self):
        return iter(self.maps)

    def __len__(self):
        return len(self.maps)

    @property
    def order(self) -> int:
        return len(self.maps)

    def fixed_points(self) -> Subgroup:
        return frozenset(h for h in self.group.elements if all(f[h] == h for f in self.maps))

    def is_invariant(self, s: Subgroup) -> bool:
        return all(f[h] in s for f in self.maps for h in s)


def _small_generating_set(group: FiniteGroup) -> list[int]:
    gens: list[int] = []
    span = group.trivial()
    # prefer high-order elements so fewer generators are needed
    for a in sorted(group.elements, key=lambda x: (-group.element_order(x), x)):
        if a not in span:
            gens.append(a)
            span = group.generated(gens)
        if len(span) == len(group):
            break
    return gens


def automorphism_group(group: FiniteGroup, cap: int = 1 << 16) -> AutSet:
    """All automorphisms, found by backtracking over images of a generating set."""
    gens = _small_generating_set(group)
    t = group.table
    order = [group.element_order(a) for a in group.elements]
    found = []

    def extend(images):
        k = len(images)
        # rebuild the partial homomorphism on <gens[:k]>
        f = {group.identity: group.identity}
        frontier = [group.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g, im in zip(gens[:k], images):
                    y, fy = t[x][g], t[f[x]][im]
                    if y in f:
                        if f[y] != fy:
                            return None
                    else:
                        f[y] = fy
                        nxt.append(y)
            frontier = nxt
        if len(set(f.values())) != len(f):
            return None
        return f

    def search(images):
        if len(images) == len(gens):
            f = extend(images)
            if f is not None and len(f) == len(group):
                found.append(tuple(f[h] for h in group.elements))
                if len(found) > cap:
                    raise GroupError(f"automorphism group exceeds cap of {cap}")
            return
        g = gens[len(images)]
        for im in group.elements:
            if order[im] == order[g] and extend(images + [im]) is not None:
                search(images + [im])

    search([])
    aut = AutSet(group, (), cap)
    aut.maps = tuple(sorted(found))
    aut.generators = aut.maps
    return aut


@dataclass(frozen=True)
class CentralizerChain:
    terms: tuple[Subgroup, ...]
    reaches_whole: bool

    @property
    def length(self) -> int:
        return len(self.terms) - 1


def iterated_centralizers(group: FiniteGroup, action: AutSet | Iterable[Sequence[int]]) -> CentralizerChain:
    """C_0 = {e}; C_{n+1} = {h in N(C_n) : f(h) in h C_n for every f}.

    Stops at the first repetition; ``reaches_whole`` tells whether the last
    term is the whole group.
    """
    maps = list(action.maps if isinstance(action, AutSet) else action)
    t, inv = group.table, group.inv
    chain = [group.trivial()]
    while True:
        c = chain[-1]
        norm = group.normalizer(c)
        nxt = frozenset(h for h in norm if all(t[inv(h)][f[h]] in c for f in maps))
        if nxt == c:
            break
        chain.append(nxt)
    return CentralizerChain(tuple(chain), chain[-1] == group.whole())


# -- constructions --------------------------------------------------------

def _from_elements(elems: list, mul: Callable, identity, name: str) -> FiniteGroup:
    index = {e: k for k, e in enumerate(elems)}
    table = [[index[mul(a, b)] for b in elems] for a in elems]
    return FiniteGroup(table, index[identity], name=name)


def abelian(orders: Sequence[int], name: str = "") -> FiniteGroup:
    cp = CyclicProduct(tuple(orders))
    name = name or "x".join(f"Z{d}" for d in orders)
    return _from_elements(cp.elements(), cp.add, cp.zero, name)


def cyclic(n: int) -> FiniteGroup:
    if n == 1:
        return FiniteGroup([[0]], 0, name="Z1")
    return abelian([n], f"Z{n}")


def direct_product(g: FiniteGroup, h: FiniteGroup, name: str = "") -> FiniteGroup:
    elems = list(itertools.product(g.elements, h.elements))
    mul = lambda a, b: (g.mul(a[0], b[0]), h.mul(a[1], b[1]))
    return _from_elements(elems, mul, (g.identity, h.identity), name or f"{g.name}x{h.name}")


def metacyclic(m: int, n: int, r: int, s: int, name: str = "") -> FiniteGroup:
    """<x, y | x^m, y^n = x^s, y x y^-1 = x^r>, elements x^i y^j."""
    r %= m
    if pow(r, n, m) != 1 % m or (r * s - s) % m:
        raise GroupError("inconsistent metacyclic parameters")

    def mul(a, b):
        (i, j), (k, l) = a, b
        e, jl = i + pow(r, j, m) * k, j + l
        if jl >= n:
            e, jl = e + s, jl - n
        return (e % m, jl)

    elems = [(i, j) for j in range(n) for i in range(m)]
    return _from_elements(elems, mul, (0, 0), name)


def semidirect_abelian(orders: Sequence[int], images: Sequence[Sequence[int]], n: int, name: str = "") -> FiniteGroup:
    """N x| Z_n with N = prod Z_{orders} and the generator of Z_n acting by the
    endomorphism sending basis vector k to ``images[k]``."""
    cp = CyclicProduct(tuple(orders))

    def phi(v):
        out = cp.zero
        for c, im in zip(v, images):
            out = cp.add(out, cp.scale(c, cp.element(im)))
        return out

    powers = [lambda v: v]
    for _ in range(1, n):
        prev = powers[-1]
        powers.append(lambda v, prev=prev: phi(prev(v)))
    if any(powers[-1](phi(b)) != b for b in cp.basis()):
        raise GroupError("action does not have order dividing n")

    def mul(a, b):
        (v, j), (w, l) = a, b
        return (cp.add(v, powers[j](w)), (j + l) % n)

    elems = [(v, j) for j in range(n) for v in cp.elements()]
    return _from_elements(elems, mul, (cp.zero, 0), name)


def permutation_group(gens: Sequence[Sequence[int]], name: str = "") -> FiniteGroup:
    gens = [tuple(g) for g in gens]
    ident = tuple(range(len(gens[0])))
    compose = lambda a, b: tuple(a[b[i]] for i in ident)
    seen, frontier = {ident}, [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return _from_elements(sorted(seen), compose, ident, name)


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n."""
    return metacyclic(n, 2, -1, 0, f"D{2 * n}")


def small_groups(max_order: int = 16) -> list[FiniteGroup]:
    """One representative of every isomorphism class of order <= 16."""
    if max_order > 16:
        raise ValueError("the catalogue stops at order 16")
    z2 = cyclic(2)
    d8 = dihedral(4)
    q8 = metacyclic(4, 2, -1, 2, "Q8")
    cat = {
        1: [cyclic(1)],
        2: [cyclic(2)],
        3: [cyclic(3)],
        4: [cyclic(4), abelian([2, 2])],
        5: [cyclic(5)],
        6: [cyclic(6), dihedral(3)],
        7: [cyclic(7)],
        8: [cyclic(8), abelian([4, 2]), abelian([2, 2, 2]), d8, q8],
        9: [cyclic(9), abelian([3, 3])],
        10: [cyclic(10), dihedral(5)],
        11: [cyclic(11)],
        12: [
            cyclic(12),
            abelian([2, 6]),
            permutation_group([(1, 2, 0, 3), (1, 0, 3, 2)], "A4"),
            dihedral(6),
            metacyclic(3, 4, -1, 0, "Dic12"),
        ],
        13: [cyclic(13)],
        14: [cyclic(14), dihedral(7)],
        15: [cyclic(15)],
        16: [
            cyclic(16),
            abelian([4, 4]),
            semidirect_abelian([4, 2], [(1, 1), (0, 1)], 2, "(Z4xZ2):Z2"),
            metacyclic(4, 4, -1, 0, "Z4:Z4"),
            abelian([8, 2]),
            metacyclic(8, 2, 5, 0, "M16"),
            metacyclic(8, 2, -1, 0, "D16"),
            metacyclic(8, 2, 3, 0, "SD16"),
            metacyclic(8, 2, -1, 4, "Q16"),
            abelian([4, 2, 2]),
            direct_product(d8, z2, "D8xZ2"),
            direct_product(q8, z2, "Q8xZ2"),
            semidirect_abelian([4, 2], [(1, 0), (2, 1)], 2, "Pauli"),
            abelian([2, 2, 2, 2]),
        ],
    }
    return [g for order in range(1, max_order + 1) for g in cat[order]]
