"""The ordinal-indexed flag on H = Z_p^omega.

A *layering* assigns each coordinate ``n`` an ordinal ``L(n) < alpha``; the
index sets are ``I_i = {n : L(n) >= i}`` and the flag subgroups are
``H_i = {x : x vanishes on I_i}``.  So ``H_0 = 0``, ``H_alpha = H`` and a
finitely supported ``x`` lies in ``H_i`` iff every supported coordinate has
layer ``< i``.

The canonical layering writes ``n = pair(k, m)`` with the Cantor pairing and
gives ``n`` the ``k``-th ordinal of a fixed enumeration of ``[0, alpha)``, so
each layer value owns the infinite column ``{pair(k, m) : m}``.  The
enumeration is ``k mod alpha`` for ``alpha <= omega``; above omega it decodes
``k`` through the prime-exponent code of ordinals below epsilon_0 (see
:func:`decode_ordinal`) and falls back to the natural number ``k`` when the
decoded ordinal is not below ``alpha``.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Mapping

from sympy import factorint, isprime, prime, primepi

from .ordinal import OMEGA, ONE, ZERO, Ordinal, add, format_ordinal, left_sub, ordinal

__all__ = [
    "pair",
    "unpair",
    "encode_ordinal",
    "decode_ordinal",
    "CanonicalLayering",
    "TableLayering",
    "QuotientLayering",
    "StructureSpec",
    "SpecError",
    "FinSupp",
    "layer",
    "in_I",
    "in_H",
    "level",
    "sample_at_level",
    "gap_witnesses",
]


class SpecError(ValueError):
    pass


def pair(k: int, m: int) -> int:
    return (k + m) * (k + m + 1) // 2 + m


def unpair(n: int) -> tuple[int, int]:
    w = (math.isqrt(8 * n + 1) - 1) // 2
    m = n - w * (w + 1) // 2
    return w - m, m


@lru_cache(maxsize=None)
def decode_ordinal(k: int) -> Ordinal:
    """Bijection N -> ordinals below epsilon_0.

    ``k + 1`` factors as a product of primes; the j-th prime (from 0) with
    multiplicity c contributes the term ``w^decode(j) * c``.  So 0 -> 0,
    1 -> 1, 2 -> w, 3 -> 2, 4 -> w^w, ...
    """
    if k == 0:
        return ZERO
    terms = Counter()
    for q, c in factorint(k + 1).items():
        terms[decode_ordinal(int(primepi(q)) - 1)] += c
    return Ordinal(sorted(terms.items(), key=lambda t: t[0], reverse=True))


@lru_cache(maxsize=None)
def encode_ordinal(beta: Ordinal) -> int:
    code = 1
    for e, c in beta.terms:
        code *= int(prime(encode_ordinal(e) + 1)) ** c
    return code - 1


@lru_cache(maxsize=1 << 16)
def _canonical_layer(alpha: Ordinal, n: int) -> Ordinal:
    return CanonicalLayering(alpha).enum(unpair(n)[0])


class CanonicalLayering:
    kind = "canonical"

    def __init__(self, alpha: Ordinal):
        self.alpha = ordinal(alpha)
        if not self.alpha:
            raise SpecError("alpha must be at least 1")

    def enum(self, k: int) -> Ordinal:
        a = self.alpha
        if a.is_finite:
            return Ordinal.of(k % int(a))
        if a == OMEGA:
            return Ordinal.of(k)
        b = decode_ordinal(k)
        return b if b < a else Ordinal.of(k)

    def index(self, beta: Ordinal) -> int:
        """Some ``k`` with ``enum(k) == beta``."""
        if not beta < self.alpha:
            raise SpecError(f"layer {beta} is not below alpha = {self.alpha}")
        if self.alpha.is_finite or self.alpha == OMEGA:
            return int(beta)
        return encode_ordinal(beta)

    def layer(self, n: int) -> Ordinal:
        return _canonical_layer(self.alpha, n)

    def fiber(self, beta: Ordinal) -> Iterator[int]:
        """An infinite, strictly increasing family of coordinates of layer ``beta``."""
        k = self.index(ordinal(beta))
        return (pair(k, m) for m in itertools.count())

    def to_json(self) -> dict:
        return {"kind": "canonical"}


class TableLayering:
    """Finite override table on top of the canonical layering."""

    kind = "table"

    def __init__(self, alpha: Ordinal, entries: Mapping[int, Ordinal]):
        self.alpha = ordinal(alpha)
        self.default = CanonicalLayering(self.alpha)
        self.entries = {int(n): ordinal(b) for n, b in entries.items()}
        for n, b in self.entries.items():
            if n < 0:
                raise SpecError(f"coordinate {n} is negative")
            if not b < self.alpha:
                raise SpecError(f"layer {b} of coordinate {n} is not below alpha = {self.alpha}")

    def layer(self, n: int) -> Ordinal:
        b = self.entries.get(n)
        return b if b is not None else self.default.layer(n)

    def fiber(self, beta: Ordinal) -> Iterator[int]:
        beta = ordinal(beta)
        own = sorted(n for n, b in self.entries.items() if b == beta)
        rest = (n for n in self.default.fiber(beta) if n not in self.entries)
        return itertools.chain(own, rest)

    def to_json(self) -> dict:
        return {
            "kind": "table",
            "entries": {str(n): format_ordinal(b) for n, b in sorted(self.entries.items())},
            "default": "canonical",
        }


class QuotientLayering:
    """Layering of H/H_i: coordinates of I_i only, layers shifted down by ``i``.

    ``layer`` returns None for coordinates outside I_i.
    """

    kind = "quotient"

    def __init__(self, base, shift: Ordinal):
        self.base = base
        self.shift = ordinal(shift)
        self.alpha = left_sub(self.shift, base.alpha)
        if not self.alpha:
            raise SpecError("quotient by the whole group has no coordinates")

    def layer(self, n: int) -> Ordinal | None:
        b = self.base.layer(n)
        if b is None or b < self.shift:
            return None
        return left_sub(self.shift, b)

    def fiber(self, beta: Ordinal) -> Iterator[int]:
        return self.base.fiber(add(self.shift, ordinal(beta)))

    def to_json(self) -> dict:
        return {"kind": "quotient", "shift": format_ordinal(self.shift), "base": self.base.to_json()}


@dataclass(frozen=True)
class StructureSpec:
    p: int
    alpha: Ordinal
    layering: object

    def __post_init__(self):
        if not isinstance(self.p, int) or not isprime(self.p):
            raise SpecError(f"field 'p': {self.p!r} is not prime")
        if not self.alpha:
            raise SpecError("field 'alpha' must be at least 1")
        if self.layering.alpha != self.alpha:
            raise SpecError("layering was built for a different alpha")

    @classmethod
    def canonical(cls, p: int, alpha) -> "StructureSpec":
        alpha = ordinal(alpha)
        return cls(p, alpha, CanonicalLayering(alpha))

    @classmethod
    def from_json(cls, data) -> "StructureSpec":
        if not isinstance(data, dict):
            raise SpecError("structure spec must be a JSON object")
        for key in ("p", "alpha"):
            if key not in data:
                raise SpecError(f"missing field {key!r}")
        p = data["p"]
        if not isinstance(p, int) or isinstance(p, bool):
            raise SpecError("field 'p' must be an integer")
        try:
            alpha = ordinal(str(data["alpha"]))
        except ValueError as exc:
            raise SpecError(f"field 'alpha': {exc}") from None
        lay = data.get("layering", {"kind": "canonical"})
        kind = lay.get("kind") if isinstance(lay, dict) else None
        if kind == "canonical":
            layering = CanonicalLayering(alpha)
        elif kind == "table":
            if lay.get("default", "canonical") != "canonical":
                raise SpecError("field 'layering.default' must be 'canonical'")
            try:
                entries = {int(n): ordinal(str(b)) for n, b in lay.get("entries", {}).items()}
            except ValueError as exc:
                raise SpecError(f"field 'layering.entries': {exc}") from None
            try:
                layering = TableLayering(alpha, entries)
            except SpecError as exc:
                raise SpecError(f"field 'layering.entries': {exc}") from None
        else:
            raise SpecError(f"field 'layering.kind' must be 'canonical' or 'table', got {kind!r}")
        return cls(p, alpha, layering)

    def to_json(self) -> dict:
        return {"p": self.p, "alpha": format_ordinal(self.alpha), "layering": self.layering.to_json()}

    def quotient(self, i) -> "StructureSpec":
        """The same construction for H/H_i (see :class:`QuotientLayering`)."""
        lay = QuotientLayering(self.layering, i)
        return StructureSpec(self.p, lay.alpha, lay)

    def fiber(self, beta, count: int) -> list[int]:
        return list(itertools.islice(self.layering.fiber(ordinal(beta)), count))


class FinSupp:
    """Finitely supported element of Z_p^omega; ``support`` maps coordinates to
    nonzero residues."""

    __slots__ = ("p", "support", "_items")

    def __init__(self, p: int, support: Mapping[int, int] | None = None):
        self.p = p
        items = sorted((int(n), int(v) % p) for n, v in (support or {}).items())
        if any(n < 0 for n, _ in items):
            raise ValueError("coordinates are non-negative")
        self._items = tuple((n, v) for n, v in items if v)
        self.support = dict(self._items)

    @classmethod
    def unit(cls, p: int, n: int, value: int = 1) -> "FinSupp":
        return cls(p, {n: value})

    @classmethod
    def from_json(cls, data, p: int) -> "FinSupp":
        if not isinstance(data, dict) or "support" not in data:
            raise ValueError("element JSON must be an object with a 'support' field")
        sup = {}
        for n, v in data["support"].items():
            if not isinstance(v, int) or not 1 <= v < p:
                raise ValueError(f"support value at coordinate {n} must be in [1, {p})")
            sup[int(n)] = v
        return cls(p, sup)

    def to_json(self) -> dict:
        return {"support": {str(n): v for n, v in self._items}}

    @property
    def key(self) -> tuple:
        return self._items

    @property
    def coords(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self._items)

    def __bool__(self):
        return bool(self._items)

    def __eq__(self, other):
        return isinstance(other, FinSupp) and self.p == other.p and self._items == other._items

    def __hash__(self):
        return hash((self.p, self._items))

    def __lt__(self, other):
        return self._items < other._items

    def __repr__(self):
        return f"FinSupp({self.p}, {self.support})"

    def _combine(self, other: "FinSupp", k: int) -> "FinSupp":
        if self.p != other.p:
            raise ValueError("elements over different primes")
        out = dict(self._items)
        for n, v in other._items:
            out[n] = (out.get(n, 0) + k * v) % self.p
        return FinSupp(self.p, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, k: int) -> "FinSupp":
        return FinSupp(self.p, {n: k * v for n, v in self._items})

    def restrict(self, keep) -> "FinSupp":
        """Zero out coordinates where ``keep(n)`` is false."""
        return FinSupp(self.p, {n: v for n, v in self._items if keep(n)})


# -- the flag ---------------------------------------------------------------

def layer(spec: StructureSpec, n: int) -> Ordinal | None:
    return spec.layering.layer(n)


def in_I(spec: StructureSpec, n: int, i) -> bool:
    i = ordinal(i)
    if i > spec.alpha:
        raise ValueError(f"index {i} exceeds alpha = {spec.alpha}")
    return layer(spec, n) >= i


def in_H(spec: StructureSpec, b: FinSupp, i) -> bool:
    i = ordinal(i)
    if i > spec.alpha:
        raise ValueError(f"index {i} exceeds alpha = {spec.alpha}")
    return all(layer(spec, n) < i for n in b.coords)


def level(spec: StructureSpec, b: FinSupp) -> Ordinal:
    """Least i with b in H_i: 0 for b = 0, else max(layer) + 1 over the support."""
    if not b:
        return ZERO
    top = max(_checked_layer(spec, n) for n in b.coords)
    return add(top, ONE)


def _checked_layer(spec, n):
    b = layer(spec, n)
    if b is None:
        raise ValueError(f"coordinate {n} is not a coordinate of this structure")
    return b


def _lower_layers(gamma: Ordinal) -> list[Ordinal]:
    cands = [Ordinal.of(k) for k in range(4)] + [OMEGA, add(OMEGA, ONE)]
    return [b for b in cands if b < gamma]


def sample_at_level(spec: StructureSpec, i, seed: int, extras: bool = True) -> FinSupp:
    """A seeded element of level exactly ``i`` (``i`` must be 0 or a successor)."""
    i = ordinal(i)
    if not i:
        return FinSupp(spec.p)
    if not i.is_successor:
        raise ValueError(f"no finitely supported element has limit level {i}")
    if i > spec.alpha:
        raise ValueError(f"level {i} exceeds alpha = {spec.alpha}")
    rng = random.Random(seed)
    gamma = i.pred()
    sup = {_pick(spec, gamma, rng): rng.randrange(1, spec.p)}
    if extras:
        lower = _lower_layers(gamma)
        for _ in range(rng.randrange(3) if lower else 0):
            n = _pick(spec, rng.choice(lower), rng)
            sup.setdefault(n, rng.randrange(1, spec.p))
    return FinSupp(spec.p, sup)


def _pick(spec, beta, rng, spread: int = 32) -> int:
    return next(itertools.islice(spec.layering.fiber(beta), rng.randrange(spread), None))


def gap_witnesses(spec: StructureSpec, i, j, count: int = 8) -> list[int]:
    """Coordinates of I_i not in I_j, taken from the infinite fiber of layer ``i``.

    Requires ``i < j <= alpha``.  The fiber is an injective infinite family,
    so the listed coordinates are a finite window onto an infinite set.
    """
    i, j = ordinal(i), ordinal(j)
    if not (i < j <= spec.alpha):
        raise ValueError("need i < j <= alpha")
    out = spec.fiber(i, count)
    for n in out:
        if not (in_I(spec, n, i) and not in_I(spec, n, j)):
            raise AssertionError(f"fiber coordinate {n} has layer {layer(spec, n)}, outside [{i}, {j})")
    if len(set(out)) != len(out):
        raise AssertionError("fiber is not injective")
    return out
