"""Depth-limited orbit equality in products of finite abelian groups.

The universe is ``X = X_0 x X_1 x ...`` with each factor a product of cyclic
groups, together with nested stages ``J_0 <= J_1 <= ...`` of factor indices.
The acting group consists of the automorphisms of X that induce an
automorphism on every ``X_{J_m}``, fixing a subgroup A pointwise.  Tuples
eta and tau lie in one orbit iff for all a in A, all integers k and l_i, and
all m::

    k | (sum l_i eta_i + a) restricted to J_m   <=>   same for tau.

Only finitely many quantifier values matter: k may be taken among divisors of
the exponent ``e`` of ``X_{J_M}`` (``kX = gcd(k, e)X``, and ``k = 0`` acts as
``k = e``) and each ``l_i`` in ``[0, e)``.  Depth is explicit because no depth
bound is known for full equality, so an equal verdict is always qualified by
the depth it was checked to.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .abelian import CyclicProduct, divisors

__all__ = [
    "InverseSystemSpec",
    "TupleInstance",
    "Distinct",
    "EqualUpToDepth",
    "BudgetExceeded",
    "InstanceError",
    "orbit_eq_upto_depth",
    "orbit_eq_p_elementary",
    "signature_table",
    "elementary_signature",
    "load_instance",
]

Element = tuple[int, ...]

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    pass


class InstanceError(ValueError):
    pass


@dataclass(frozen=True)
class InverseSystemSpec:
    """Factors ``X_i`` (cyclic products) and nested stages of factor indices.

    Elements are flat residue tuples over all cyclic components of all
    factors, in factor order.
    """

    factors: tuple[CyclicProduct, ...]
    stages: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "stages", tuple(tuple(sorted(set(s))) for s in self.stages))
        if not self.stages:
            raise InstanceError("field 'stages': at least one stage is required")
        for k, s in enumerate(self.stages):
            for i in s:
                if not 0 <= i < len(self.factors):
                    raise InstanceError(f"field 'stages': factor {i} in stage {k} does not exist")
            if k and not set(self.stages[k - 1]) <= set(s):
                raise InstanceError(f"field 'stages': stage {k} does not contain stage {k - 1}")

    @classmethod
    def from_json(cls, factors, stages) -> "InverseSystemSpec":
        blocks = []
        for k, f in enumerate(factors):
            try:
                if isinstance(f, int):
                    blocks.append(CyclicProduct((f,)))
                elif isinstance(f, list):
                    blocks.append(CyclicProduct(tuple(f)))
                else:
                    blocks.append(CyclicProduct.from_json(f))
            except (ValueError, KeyError, TypeError) as exc:
                raise InstanceError(f"field 'factors[{k}]': {exc}") from None
        if not isinstance(stages, list) or not all(isinstance(s, list) for s in stages):
            raise InstanceError("field 'stages' must be a list of index lists")
        return cls(tuple(blocks), tuple(tuple(s) for s in stages))

    def factors_json(self) -> list:
        return [list(f.orders) if len(f) != 1 else f.orders[0] for f in self.factors]

    @property
    def depth(self) -> int:
        """Largest usable stage index M."""
        return len(self.stages) - 1

    @property
    def universe(self) -> CyclicProduct:
        return CyclicProduct(tuple(d for f in self.factors for d in f.orders))

    def positions(self, factor_indices) -> list[int]:
        """Flat positions of the cyclic components of the given factors."""
        offs = list(itertools.accumulate((len(f) for f in self.factors), initial=0))
        return [q for i in sorted(factor_indices) for q in range(offs[i], offs[i + 1])]

    def stage_positions(self, m: int) -> list[int]:
        return self.positions(self.stages[m])

    def level_group(self, M: int | None = None) -> CyclicProduct:
        """``X_{J_M}`` as a cyclic product over its flat positions."""
        M = self.depth if M is None else M
        u = self.universe
        return CyclicProduct(tuple(u.orders[q] for q in self.stage_positions(M)))

    @property
    def is_elementary(self) -> bool:
        orders = set(self.universe.orders)
        return len(orders) == 1 and _is_prime(orders.pop())


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % q for q in range(2, math.isqrt(n) + 1))


@dataclass(frozen=True)
class TupleInstance:
    eta: tuple[Element, ...]
    tau: tuple[Element, ...]
    A: tuple[Element, ...]
    depth: int

    @classmethod
    def from_json(cls, data, system: InverseSystemSpec) -> "TupleInstance":
        u = system.universe
        try:
            eta = tuple(_element(x, u, "eta") for x in data["eta"])
            tau = tuple(_element(x, u, "tau") for x in data["tau"])
            A = tuple(_element(x, u, "A") for x in data.get("A", []))
        except KeyError as exc:
            raise InstanceError(f"missing field {exc.args[0]!r}") from None
        depth = data.get("depth", system.depth)
        if not isinstance(depth, int) or not 0 <= depth <= system.depth:
            raise InstanceError(f"field 'depth' must be an integer in [0, {system.depth}]")
        return cls(eta, tau, A, depth)


def _element(x, u: CyclicProduct, field: str) -> Element:
    flat = []
    for part in x:
        flat.extend(part if isinstance(part, list) else [part])
    try:
        return u.check(tuple(int(v) for v in flat))
    except ValueError as exc:
        raise InstanceError(f"field {field!r}: {exc}") from None


def load_instance(data) -> tuple[InverseSystemSpec, TupleInstance]:
    """Parse ``{"factors", "stages", "eta", "tau", "A", "depth"}``."""
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    for key in ("factors", "stages", "eta", "tau"):
        if key not in data:
            raise InstanceError(f"missing field {key!r}")
    system = InverseSystemSpec.from_json(data["factors"], data["stages"])
    return system, TupleInstance.from_json(data, system)


@dataclass(frozen=True)
class Distinct:
    """A separating quantifier instance: exactly one side is divisible."""

    m: int
    k: int
    a: Element
    a_index: int
    l: tuple[int, ...]

    kind = "distinct"

    def to_json(self) -> dict:
        return {
            "verdict": self.kind,
            "witness": {"m": self.m, "k": self.k, "a": list(self.a), "a_index": self.a_index, "l": list(self.l)},
        }


@dataclass(frozen=True)
class EqualUpToDepth:
    """No separating instance with ``m <= depth``; says nothing deeper."""

    depth: int

    kind = "equal_up_to_depth"

    def to_json(self) -> dict:
        return {"verdict": self.kind, "depth": self.depth}


def _check_subgroup(u: CyclicProduct, A: Sequence[Element]) -> list[Element]:
    A = sorted({u.check(tuple(a)) for a in A} | {u.zero})
    members = set(A)
    for a, b in itertools.product(A, repeat=2):
        if u.add(a, b) not in members:
            raise InstanceError(f"field 'A': not closed under addition ({a} + {b})")
    return A


def _prepare(system, eta, tau, A, M):
    if len(eta) != len(tau):
        raise InstanceError("eta and tau have different lengths")
    if not 0 <= M <= system.depth:
        raise InstanceError(f"field 'depth': {M} is outside [0, {system.depth}]")
    u = system.universe
    eta = [u.check(tuple(x)) for x in eta]
    tau = [u.check(tuple(x)) for x in tau]
    A = _check_subgroup(u, A)
    return u, eta, tau, A


def signature_table(system: InverseSystemSpec, eta: Sequence[Element], A: Sequence[Element], M: int,
                    budget: int = DEFAULT_BUDGET):
    """Boolean array ``[m, k, a, l]``: is ``(sum l_i eta_i + a)|J_m`` divisible by k?

    Axes run over m <= M, the divisors of the exponent of X_{J_M}, A in
    sorted order, and l in lexicographic order over ``[0, e)^n``.  Two
    tuples are indistinguishable up to depth M iff their tables are equal.
    """
    u = system.universe
    A = np.array(sorted({tuple(a) for a in A} | {u.zero}), dtype=np.int64).reshape(-1, len(u))
    e = system.level_group(M).exponent
    ks = divisors(e)
    n = len(eta)
    size = len(A) * len(ks) * e ** n * (M + 1)
    if size > budget:
        raise BudgetExceeded(f"{size} quantifier instances exceed the budget of {budget}")
    orders = np.array(u.orders, dtype=np.int64)
    L = np.array(list(itertools.product(range(e), repeat=n)), dtype=np.int64).reshape(-1, n)
    E = np.array(eta, dtype=np.int64).reshape(n, len(u))
    comb = (L @ E)[None, :, :] + A[:, None, :]  # [a, l, pos]
    comb %= orders
    out = np.empty((M + 1, len(ks), len(A), len(L)), dtype=bool)
    for ki, k in enumerate(ks):
        ok = comb % np.gcd(k, orders) == 0
        for m in range(M + 1):
            pos = system.stage_positions(m)
            out[m, ki] = ok[:, :, pos].all(axis=2)
    return out, ks, [tuple(int(v) for v in a) for a in A], [tuple(int(v) for v in l) for l in L]


def orbit_eq_upto_depth(system: InverseSystemSpec, eta, tau, A=(), M: int | None = None,
                        budget: int = DEFAULT_BUDGET):
    """Decide the divisibility criterion for quantifier instances with m <= M.

    Returns the lexicographically least separating ``(m, k, a, l)`` as
    :class:`Distinct`, or :class:`EqualUpToDepth`.
    """
    M = system.depth if M is None else M
    u, eta, tau, A = _prepare(system, eta, tau, A, M)
    se, ks, As, Ls = signature_table(system, eta, A, M, budget)
    st, _, _, _ = signature_table(system, tau, A, M, budget)
    diff = se != st
    if not diff.any():
        return EqualUpToDepth(M)
    m, ki, ai, li = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return Distinct(int(m), ks[ki], As[ai], int(ai), Ls[li])


def elementary_signature(system: InverseSystemSpec, eta, A, M: int | None = None) -> tuple[bool, ...]:
    """Vanishing pattern of ``(sum l_i eta_i + a)|J_m`` over (m, a, l).

    A must be a subgroup; it is used in sorted order.  Equal signatures are
    exactly the elementary criterion's equal verdicts.
    """
    M = system.depth if M is None else M
    p = system.universe.orders[0]
    A = sorted(tuple(a) for a in A)
    out = []
    for m in range(M + 1):
        pos = system.stage_positions(m)
        for a in A:
            for l in itertools.product(range(p), repeat=len(eta)):
                out.append(all((sum(li * v[q] for li, v in zip(l, eta)) + a[q]) % p == 0 for q in pos))
    return tuple(out)


def orbit_eq_p_elementary(system: InverseSystemSpec, eta, tau, A=(), M: int | None = None,
                          budget: int = DEFAULT_BUDGET):
    """The criterion for all factors equal to Z_p: compare vanishing only.

    In Z_p divisibility by k is automatic unless p | k, where it means
    vanishing, so the separating witness always has ``k = p``.  Implemented
    with plain loops, independently of :func:`orbit_eq_upto_depth`.
    """
    if not system.is_elementary:
        raise InstanceError("field 'factors': system is not elementary (all factors must be Z_p)")
    M = system.depth if M is None else M
    u, eta, tau, A = _prepare(system, eta, tau, A, M)
    p = u.orders[0]
    n = len(eta)
    size = len(A) * p ** n * (M + 1)
    if size > budget:
        raise BudgetExceeded(f"{size} quantifier instances exceed the budget of {budget}")
    se = elementary_signature(system, eta, A, M)
    st = elementary_signature(system, tau, A, M)
    for k, (x, y) in enumerate(zip(se, st)):
        if x != y:
            m, rest = divmod(k, len(A) * p ** n)
            ai, li = divmod(rest, p ** n)
            l = next(itertools.islice(itertools.product(range(p), repeat=n), li, None))
            return Distinct(m, p, A[ai], ai, l)
    return EqualUpToDepth(M)
