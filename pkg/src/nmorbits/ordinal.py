"""Ordinals below epsilon_0 in Cantor normal form.

An :class:`Ordinal` is an immutable tuple of ``(exponent, coefficient)`` terms
with strictly decreasing exponents, each exponent itself an :class:`Ordinal`.
The empty tuple is 0.

Text form (``parse`` / ``format``)::

    ordinal := "0" | term ("+" term)*
    term    := "w^" atom ("*" nat)? | "w" ("*" nat)? | nat
    atom    := nat | "(" ordinal ")"
    nat     := [1-9][0-9]*
"""

from __future__ import annotations

from typing import Iterable, Union

__all__ = [
    "Ordinal",
    "OrdinalParseError",
    "ZERO",
    "ONE",
    "OMEGA",
    "ordinal",
    "compare",
    "add",
    "nat_sum",
    "succ",
    "omega_pow",
    "is_indecomposable",
    "left_sub",
    "parse",
    "format_ordinal",
]

OrdinalLike = Union["Ordinal", int, str]


class OrdinalParseError(ValueError):
    """Malformed ordinal text; ``position`` is the offending character index."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class Ordinal:
    __slots__ = ("terms", "_key", "_hash")

    def __init__(self, terms: Iterable[tuple["Ordinal", int]] = ()):
        terms = tuple((e, int(c)) for e, c in terms)
        for k, (e, c) in enumerate(terms):
            if not isinstance(e, Ordinal):
                raise TypeError("exponents must be Ordinal instances")
            if c < 1:
                raise ValueError("coefficients must be positive")
            if k and not e._key < terms[k - 1][0]._key:
                raise ValueError("exponents must be strictly decreasing")
        self.terms = terms
        # tuple comparison on this key is exactly the ordinal order
        self._key = tuple((e._key, c) for e, c in terms)
        self._hash = hash(self._key)

    @classmethod
    def _from_valid(cls, terms: list) -> "Ordinal":
        """Build from terms already known to be in normal form, skipping checks."""
        self = cls.__new__(cls)
        self.terms = tuple(terms)
        self._key = tuple((e._key, c) for e, c in self.terms)
        self._hash = hash(self._key)
        return self

    @classmethod
    def of(cls, n: int) -> "Ordinal":
        if n < 0:
            raise ValueError("ordinals are non-negative")
        return cls(((ZERO, n),)) if n else ZERO

    # -- structure ----------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_finite(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not self.terms[0][0])

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0]

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and bool(self.terms[-1][0])

    @property
    def leading_exponent(self) -> "Ordinal":
        return self.terms[0][0] if self.terms else ZERO

    def __int__(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    def pred(self) -> "Ordinal":
        """Immediate predecessor of a successor ordinal."""
        if not self.is_successor:
            raise ValueError(f"{self} is not a successor")
        *head, (e, c) = self.terms
        return Ordinal(head + [(e, c - 1)] if c > 1 else head)

    def fundamental(self, k: int) -> "Ordinal":
        """k-th element of the standard fundamental sequence of a limit ordinal."""
        if not self.is_limit:
            raise ValueError(f"{self} is not a limit")
        *head, (e, c) = self.terms
        base = Ordinal(head + [(e, c - 1)] if c > 1 else head)
        if e.is_successor:
            tail = Ordinal(((e.pred(), k),)) if k else ZERO
        else:
            tail = omega_pow(e.fundamental(k))
        return add(base, tail)

    # -- comparison ---------------------------------------------------
    def __eq__(self, other):
        other = _coerce_or_none(other)
        return other is not None and self._key == other._key

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self._key < _coerce(other)._key

    def __le__(self, other):
        return self._key <= _coerce(other)._key

    def __gt__(self, other):
        return self._key > _coerce(other)._key

    def __ge__(self, other):
        return self._key >= _coerce(other)._key

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __str__(self):
        return format_ordinal(self)

    def __repr__(self):
        return f"Ordinal({format_ordinal(self)!r})"


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def _coerce_or_none(x):
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, bool):
        return None
    if isinstance(x, int):
        return Ordinal.of(x)
    return None


def _coerce(x) -> Ordinal:
    y = _coerce_or_none(x)
    if y is None:
        raise TypeError(f"cannot compare Ordinal with {type(x).__name__}")
    return y


def ordinal(x: OrdinalLike) -> Ordinal:
    """Coerce an int, text or Ordinal to an Ordinal."""
    if type(x) is Ordinal:
        return x
    if isinstance(x, str):
        return parse(x)
    return _coerce(x)


def compare(a: OrdinalLike, b: OrdinalLike) -> int:
    """-1, 0 or 1 as ``a`` is less than, equal to or greater than ``b``."""
    ka, kb = ordinal(a)._key, ordinal(b)._key
    return (ka > kb) - (ka < kb)


def add(a: OrdinalLike, b: OrdinalLike) -> Ordinal:
    """Ordinary (left-absorbing) ordinal sum."""
    a, b = ordinal(a), ordinal(b)
    if not b.terms:
        return a
    lead, c0 = b.terms[0]
    lk = lead._key
    head = []
    for e, c in a.terms:
        if e._key > lk:
            head.append((e, c))
        else:
            if e._key == lk:
                c0 += c
            break
    return Ordinal._from_valid(head + [(lead, c0)] + list(b.terms[1:]))


def nat_sum(a: OrdinalLike, b: OrdinalLike) -> Ordinal:
    """Hessenberg natural sum: merge the terms and add equal-exponent coefficients."""
    a, b = ordinal(a), ordinal(b)
    x, y = a.terms, b.terms
    i = j = 0
    merged = []
    while i < len(x) and j < len(y):
        kx, ky = x[i][0]._key, y[j][0]._key
        if kx > ky:
            merged.append(x[i])
            i += 1
        elif ky > kx:
            merged.append(y[j])
            j += 1
        else:
            merged.append((x[i][0], x[i][1] + y[j][1]))
            i += 1
            j += 1
    return Ordinal._from_valid(merged + list(x[i:]) + list(y[j:]))


def succ(a: OrdinalLike) -> Ordinal:
    return add(a, ONE)


def omega_pow(a: OrdinalLike) -> Ordinal:
    return Ordinal(((ordinal(a), 1),))


def is_indecomposable(a: OrdinalLike) -> bool:
    """True iff ``a`` is a power of omega (so 0 is excluded)."""
    a = ordinal(a)
    return len(a.terms) == 1 and a.terms[0][1] == 1


def left_sub(a: OrdinalLike, b: OrdinalLike) -> Ordinal:
    """The unique ``d`` with ``a + d == b``; requires ``a <= b``."""
    a, b = ordinal(a), ordinal(b)
    if a > b:
        raise ValueError(f"{a} > {b}; no left difference")
    for k, (eb, cb) in enumerate(b.terms):
        if k >= len(a.terms):
            return Ordinal(b.terms[k:])
        ea, ca = a.terms[k]
        if ea == eb and ca == cb:
            continue
        if ea == eb:
            return Ordinal(((eb, cb - ca),) + b.terms[k + 1:])
        return Ordinal(b.terms[k:])
    return ZERO


# -- text form ----------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message):
        raise OrdinalParseError(message, self.pos)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def nat(self) -> int:
        start = self.pos
        if not ("1" <= self.peek() <= "9"):
            self.error("expected a positive integer")
        while self.peek().isdigit():
            self.pos += 1
        return int(self.text[start:self.pos])

    def ordinal(self) -> Ordinal:
        if self.peek() == "0":
            self.pos += 1
            return ZERO
        terms = [self.term()]
        while self.peek() == "+":
            self.pos += 1
            start = self.pos
            e, c = self.term()
            if not e < terms[-1][0]:
                self.pos = start
                self.error("exponents must be strictly decreasing")
            terms.append((e, c))
        return Ordinal(terms)

    def term(self) -> tuple[Ordinal, int]:
        if self.peek() != "w":
            return ZERO, self.nat()
        self.pos += 1
        exponent = ONE
        if self.peek() == "^":
            self.pos += 1
            if self.peek() == "(":
                self.pos += 1
                exponent = self.ordinal()
                self.expect(")")
            else:
                exponent = Ordinal.of(self.nat())
        coef = 1
        if self.peek() == "*":
            self.pos += 1
            coef = self.nat()
        return exponent, coef


def parse(text: str) -> Ordinal:
    p = _Parser(text.strip())
    result = p.ordinal()
    if p.pos != len(p.text):
        p.error("unexpected trailing input")
    return result


def format_ordinal(a: Ordinal) -> str:
    if not a.terms:
        return "0"
    parts = []
    for e, c in a.terms:
        if not e:
            parts.append(str(c))
            continue
        if e == ONE:
            head = "w"
        elif e.is_finite:
            head = f"w^{int(e)}"
        else:
            head = f"w^({format_ordinal(e)})"
        parts.append(head if c == 1 else f"{head}*{c}")
    return "+".join(parts)
