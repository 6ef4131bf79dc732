"""Orbits over finite parameter sets in the flag structure of :mod:`nmorbits.flag`.

For a finite subgroup A and an element eta put

    n(eta/A) = min { level(eta + a) : a in A }.

Two elements are in the same orbit over A iff they have the same ``n`` and
their difference lies in ``H_n``.  The NM-rank of eta over A is ``n(eta/A)``;
eta depends on an extension B of A exactly when ``n`` drops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .flag import FinSupp, StructureSpec, in_H, layer, level, sample_at_level
from .ordinal import ONE, ZERO, Ordinal, add, format_ordinal, nat_sum, ordinal

__all__ = [
    "ParamSet",
    "SpanCapExceeded",
    "n_index",
    "n_witness",
    "same_orbit",
    "OrbitDescriptor",
    "list_orbits",
    "nm_rank",
    "nm_dep",
    "ChainStep",
    "WitnessChain",
    "witness_chain",
    "validate_chain",
    "realized_levels",
    "sup_rank",
    "LascarReport",
    "lascar_report",
]


class SpanCapExceeded(RuntimeError):
    pass


def _solve(p: int, gens: Sequence[FinSupp], target: FinSupp, keep=None) -> list[int] | None:
    """Coefficients c with sum c_j g_j == target on the coordinates passing
    ``keep`` (all when None), or None.  Free variables are set to 0."""
    if keep is None:
        keep = lambda n: True
    cols = [g.restrict(keep).support for g in gens]
    rhs = target.restrict(keep).support
    coords = sorted(set(rhs).union(*cols)) if cols else sorted(rhs)
    rows = [[c.get(n, 0) for c in cols] + [rhs.get(n, 0)] for n in coords]
    width = len(cols)
    pivots = []
    r = 0
    for j in range(width):
        piv = next((k for k in range(r, len(rows)) if rows[k][j] % p), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][j], -1, p)
        rows[r] = [v * inv % p for v in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][j]:
                f = rows[k][j]
                rows[k] = [(a - f * b) % p for a, b in zip(rows[k], rows[r])]
        pivots.append(j)
        r += 1
    if any(row[-1] for row in rows[r:]):
        return None
    coef = [0] * width
    for k, j in enumerate(pivots):
        coef[j] = rows[k][-1]
    return coef


def _combo(p: int, gens: Sequence[FinSupp], coef: Sequence[int]) -> FinSupp:
    out = FinSupp(p)
    for g, c in zip(gens, coef):
        if c:
            out = out + g.scale(c)
    return out


class ParamSet:
    """Finite parameter set A; membership in the generated subgroup is decided
    by linear algebra mod p, and the subgroup itself is only listed on demand."""

    def __init__(self, p: int, generators: Iterable[FinSupp] = (), cap: int = 4096):
        gens = []
        for g in generators:
            if g.p != p:
                raise ValueError("generator over a different prime")
            if g and g not in gens:
                gens.append(g)
        self.p = p
        self.cap = cap
        self.generators = tuple(gens)
        self._span = None

    @classmethod
    def from_json(cls, data, p: int, cap: int = 4096) -> "ParamSet":
        if isinstance(data, dict):
            data = data.get("generators", [])
        if not isinstance(data, list):
            raise ValueError("parameter set JSON must be a list of elements")
        return cls(p, [FinSupp.from_json(g, p) for g in data], cap)

    def to_json(self) -> dict:
        return {"generators": [g.to_json() for g in self.generators]}

    def extend(self, *gens: FinSupp) -> "ParamSet":
        return ParamSet(self.p, self.generators + gens, self.cap)

    @property
    def span(self) -> tuple[FinSupp, ...]:
        """All elements of the generated subgroup, sorted by support."""
        if self._span is None:
            zero = FinSupp(self.p)
            seen, frontier = {zero}, [zero]
            while frontier:
                nxt = []
                for x in frontier:
                    for g in self.generators:
                        y = x + g
                        if y not in seen:
                            seen.add(y)
                            nxt.append(y)
                if len(seen) > self.cap:
                    raise SpanCapExceeded(f"parameter subgroup exceeds {self.cap} elements")
                frontier = nxt
            self._span = tuple(sorted(seen))
        return self._span

    def __contains__(self, x: FinSupp) -> bool:
        return _solve(self.p, self.generators, x) is not None

    def extends(self, other: "ParamSet") -> bool:
        return all(g in self for g in other.generators)

    @property
    def coords(self) -> set[int]:
        return {n for a in self.generators for n in a.coords}


def _params(p: int, A) -> ParamSet:
    if A is None:
        return ParamSet(p)
    if isinstance(A, ParamSet):
        return A
    return ParamSet(p, A)


def n_witness(spec: StructureSpec, eta: FinSupp, A) -> tuple[Ordinal, FinSupp]:
    """``n(eta/A)`` together with some ``a`` in the span with level(eta + a) = n.

    ``n <= i`` iff eta restricted to I_i lies in the span of A restricted to
    I_i, and only 0 and ``layer(m) + 1`` for ``m`` in the joint support can
    be the least such i.
    """
    A = _params(spec.p, A)
    layers = {m: layer(spec, m) for m in set(eta.coords) | A.coords}
    cands = {ZERO} | {add(b, ONE) for b in layers.values()}
    for i in sorted(cands):
        coef = _solve(spec.p, A.generators, eta.scale(-1), lambda m: layers[m] >= i)
        if coef is not None:
            a = _combo(spec.p, A.generators, coef)
            return level(spec, eta + a), a
    raise AssertionError("unreachable: the top candidate always succeeds")


def n_index(spec: StructureSpec, eta: FinSupp, A=None) -> Ordinal:
    return n_witness(spec, eta, A)[0]


def same_orbit(spec: StructureSpec, eta: FinSupp, tau: FinSupp, A=None) -> bool:
    A = _params(spec.p, A)
    n = n_index(spec, eta, A)
    return n == n_index(spec, tau, A) and in_H(spec, eta - tau, n)


def nm_rank(spec: StructureSpec, eta: FinSupp, A=None) -> Ordinal:
    return n_index(spec, eta, A)


def nm_dep(spec: StructureSpec, eta: FinSupp, A, B) -> bool:
    """Does eta fork with B over A, i.e. does ``n`` drop from A to B?"""
    A, B = _params(spec.p, A), _params(spec.p, B)
    if not B.extends(A):
        raise ValueError("B does not extend A")
    return n_index(spec, eta, B) < n_index(spec, eta, A)


def _fresh(spec: StructureSpec, beta: Ordinal, avoid: set[int]) -> int:
    for n in spec.layering.fiber(beta):
        if n not in avoid:
            return n
    raise AssertionError("unreachable: fibers are infinite")


# -- orbit listing -----------------------------------------------------------

@dataclass(frozen=True)
class OrbitDescriptor:
    """One orbit: elements ``x`` with ``n(x/A) == level`` and ``x + witness`` in
    ``H_level``."""

    level: Ordinal
    witness: FinSupp
    representative: FinSupp
    count_at_level: int

    @property
    def rank(self) -> Ordinal:
        return self.level

    def contains(self, spec: StructureSpec, x: FinSupp, A) -> bool:
        return n_index(spec, x, A) == self.level and in_H(spec, x + self.witness, self.level)

    def to_json(self) -> dict:
        return {
            "level": format_ordinal(self.level),
            "witness": self.witness.to_json(),
            "representative": self.representative.to_json(),
            "rank": format_ordinal(self.rank),
            "count_at_level": self.count_at_level,
        }


def realized_levels(spec: StructureSpec, A, up_to_level, coords: Iterable[int] = (), depth: int = 4) -> list[Ordinal]:
    """Levels at which :func:`list_orbits` reports orbits.

    Every successor level below alpha is realized by a finitely supported
    element, limit levels never are.  For a finite bound all levels are
    listed; past omega the list is 0, ``layer(n) + 1`` for ``n`` in the
    support of A or in ``coords``, the successors met on the way down from the
    bound, and ``l[k] + 1`` for k < depth below each limit ``l`` on that way.
    """
    A = _params(spec.p, A)
    top = ordinal(up_to_level)
    window = set(coords) | A.coords
    levels = {ZERO} | set(_coverage(top, depth)) | {add(layer(spec, n), ONE) for n in window}
    return sorted(lv for lv in levels if lv <= top)


def list_orbits(spec: StructureSpec, A, up_to_level, coords: Iterable[int] = (), depth: int = 4) -> list[OrbitDescriptor]:
    """Orbits over A at every realized level up to ``up_to_level``.

    At level 0 the orbits are the singletons of A.  At a successor level i
    there is one orbit per class of A modulo H_i; each class is realized by
    ``-w + e_m`` for the class minimum ``w`` and a coordinate ``m`` of layer
    ``i - 1`` outside the support of A.
    """
    A = _params(spec.p, A)
    top = ordinal(up_to_level)
    if top > spec.alpha:
        raise ValueError(f"up_to_level {top} exceeds alpha = {spec.alpha}")
    out = []
    avoid = A.coords
    for lv in realized_levels(spec, A, top, coords, depth):
        if not lv:
            at = [(-a, a) for a in A.span]
        else:
            gamma = lv.pred()
            classes = {}
            for a in A.span:  # span is sorted, so the first hit is the class minimum
                classes.setdefault(a.restrict(lambda n: layer(spec, n) >= lv).key, a)
            m = FinSupp.unit(spec.p, _fresh(spec, gamma, avoid))
            at = [(w, m - w) for w in classes.values()]
        out.extend(OrbitDescriptor(lv, w, rep, len(at)) for w, rep in at)
    return out


# -- witness chains ------------------------------------------------------------

@dataclass(frozen=True)
class ChainStep:
    params: ParamSet
    level: Ordinal
    added: FinSupp
    requested: Ordinal | None
    tight: bool


@dataclass
class WitnessChain:
    """Extensions A = B_0 < B_1 < ... with strictly decreasing ``n(eta/B_k)``.

    A step is *tight* when the level drops by exactly one, which is the
    successor clause of the rank definition.  Steps out of a level ``l + 1``
    with ``l`` a limit cannot be tight for finitely supported parameters.
    """

    start: Ordinal
    steps: list[ChainStep]
    substitutions: list[tuple[Ordinal, Ordinal | None]] = field(default_factory=list)

    @property
    def levels(self) -> list[Ordinal]:
        return [self.start] + [s.level for s in self.steps]

    @property
    def exact(self) -> bool:
        """Every step tight and the chain ends at 0: a full certificate."""
        return all(s.tight for s in self.steps) and self.levels[-1] == ZERO

    def to_json(self) -> dict:
        return {
            "start": format_ordinal(self.start),
            "steps": [
                {
                    "level": format_ordinal(s.level),
                    "added": s.added.to_json(),
                    "requested": None if s.requested is None else format_ordinal(s.requested),
                    "tight": s.tight,
                }
                for s in self.steps
            ],
            "substitutions": [
                {"requested": format_ordinal(r), "used": None if u is None else format_ordinal(u)}
                for r, u in self.substitutions
            ],
            "exact": self.exact,
        }


def _descend_to(spec, eta, B: ParamSet, target: Ordinal) -> FinSupp:
    """Generator g such that ``n(eta / B + g) == target`` (target 0 or successor).

    g is eta truncated to I_target, minus a fresh unit vector of layer
    target - 1, so eta - g keeps a coordinate of that layer that no
    parameter can cancel.
    """
    if not target:
        return eta
    avoid = B.coords | set(eta.coords)
    m = _fresh(spec, target.pred(), avoid)
    trunc = eta.restrict(lambda n: layer(spec, n) >= target)
    return trunc - FinSupp.unit(spec.p, m)


def _default_next(c: Ordinal) -> Ordinal:
    d = c.pred()
    if not d or d.is_successor:
        return d
    return add(d.fundamental(2), ONE)


def witness_chain(spec: StructureSpec, eta: FinSupp, A=None, levels: Sequence | None = None) -> WitnessChain:
    """Build a descending chain of parameter extensions for eta over A.

    Without ``levels`` the chain walks down one step at a time and, below a
    limit ``l``, jumps to ``l[2] + 1`` (fundamental sequence), ending at 0.
    With ``levels`` each requested value is used when it is 0 or a successor
    below the current level.  A limit request ``l`` is replaced by the level
    reached by adjoining eta truncated to I_l; requests at or above the
    current level are skipped.  Both kinds are listed in ``substitutions``.
    """
    B = _params(spec.p, A)
    cur = n_index(spec, eta, B)
    chain = WitnessChain(cur, [])

    def step(target, requested):
        nonlocal B, cur
        g = _descend_to(spec, eta, B, target)
        B2 = B.extend(g)
        got = n_index(spec, eta, B2)
        if got != target:
            raise AssertionError(f"descent to {target} reached {got}")
        chain.steps.append(ChainStep(B2, got, g, requested, add(got, ONE) == cur))
        B, cur = B2, got

    if levels is None:
        while cur:
            step(_default_next(cur), None)
        return chain

    for r in map(ordinal, levels):
        if r >= cur:
            chain.substitutions.append((r, None))
            continue
        if r and r.is_limit:
            trunc = eta.restrict(lambda n: layer(spec, n) >= r)
            t = n_index(spec, eta, B.extend(trunc))
            chain.substitutions.append((r, t))
            step(t, r)
        else:
            step(r, r)
    return chain


def validate_chain(spec: StructureSpec, eta: FinSupp, A, chain: WitnessChain) -> list[str]:
    """Problems found re-checking a chain from scratch; empty when valid."""
    problems = []
    prev = _params(spec.p, A)
    prev_n = n_index(spec, eta, prev)
    if prev_n != chain.start:
        problems.append(f"start level {chain.start} but n = {prev_n}")
    for k, s in enumerate(chain.steps):
        if not s.params.extends(prev):
            problems.append(f"step {k}: parameters do not extend the previous set")
            continue
        if not nm_dep(spec, eta, prev, s.params):
            problems.append(f"step {k}: no dependence (level did not drop)")
        n = n_index(spec, eta, s.params)
        if n != s.level:
            problems.append(f"step {k}: recorded level {s.level} but n = {n}")
        if n and not n.is_successor:
            problems.append(f"step {k}: level {n} is neither 0 nor a successor")
        if s.tight != (add(n, ONE) == prev_n):
            problems.append(f"step {k}: tightness flag is wrong")
        prev, prev_n = s.params, n
    return problems


# -- global ranks and the Lascar inequalities ------------------------------------

def _coverage(top: Ordinal, depth: int = 4) -> list[Ordinal]:
    """Sample levels for ranks below/at ``top``: the top itself when it is a
    successor, and ``l[k] + 1`` for k < depth below every limit ``l`` met on
    the way down."""
    out = []
    cur = top
    while cur:
        if cur.is_successor:
            out.append(cur)
            cur = cur.pred()
        else:
            out.extend(add(cur.fundamental(k), ONE) for k in range(depth))
            cur = cur.fundamental(0)
    return sorted(set(out))


@dataclass(frozen=True)
class SupRank:
    value: Ordinal
    samples: tuple[tuple[FinSupp, Ordinal], ...]
    attained: bool


def sup_rank(spec: StructureSpec, top=None, seed: int = 0, depth: int = 4) -> SupRank:
    """Supremum of ``nm_rank(x/0)`` over seeded samples of level <= top.

    When ``top`` is a successor it is attained by a sample.  When it is a
    limit, the samples sit at ``top[k] + 1`` and their ranks are checked to be
    strictly increasing along the fundamental sequence, which makes them
    cofinal; the supremum returned is then ``top``.
    """
    top = spec.alpha if top is None else ordinal(top)
    if top > spec.alpha:
        raise ValueError("top exceeds alpha")
    samples = []
    for k, lv in enumerate(_coverage(top, depth)):
        x = sample_at_level(spec, lv, seed * 1009 + k)
        samples.append((x, nm_rank(spec, x)))
    ranks = [r for _, r in samples]
    if not top:
        return SupRank(ZERO, (), True)
    if top.is_successor:
        if max(ranks) != top:
            raise AssertionError(f"top level {top} not attained")
        return SupRank(top, tuple(samples), True)
    tail = [add(top.fundamental(k), ONE) for k in range(depth)]
    if not all(t in ranks for t in tail) or max(ranks) >= top:
        raise AssertionError(f"samples are not cofinal in {top}")
    return SupRank(top, tuple(samples), False)


@dataclass(frozen=True)
class LascarReport:
    i: Ordinal
    nm_sub: Ordinal
    nm_quotient: Ordinal
    nm_total: Ordinal
    lower: Ordinal
    upper: Ordinal

    @property
    def lower_ok(self) -> bool:
        return self.lower <= self.nm_total

    @property
    def upper_ok(self) -> bool:
        return self.nm_total <= self.upper

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    def to_json(self) -> dict:
        f = format_ordinal
        return {
            "i": f(self.i),
            "nm_sub": f(self.nm_sub),
            "nm_quotient": f(self.nm_quotient),
            "nm_total": f(self.nm_total),
            "sum": f(self.lower),
            "natural_sum": f(self.upper),
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "ok": self.ok,
        }


def lascar_report(spec: StructureSpec, i, seed: int = 0) -> LascarReport:
    """Check NM(H_i) + NM(H/H_i) <= NM(H) <= NM(H_i) (+) NM(H/H_i).

    The quotient is modelled by :meth:`StructureSpec.quotient`: the
    coordinates of I_i with layers shifted down by i.
    """
    i = ordinal(i)
    if i > spec.alpha:
        raise ValueError(f"i = {i} exceeds alpha = {spec.alpha}")
    sub = sup_rank(spec, i, seed).value
    quot = sup_rank(spec.quotient(i), None, seed).value if i < spec.alpha else ZERO
    total = sup_rank(spec, spec.alpha, seed).value
    return LascarReport(i, sub, quot, total, add(sub, quot), nat_sum(sub, quot))
