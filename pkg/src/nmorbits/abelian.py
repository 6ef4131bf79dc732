"""Finite abelian groups written as products of cyclic groups.

Elements are plain tuples of residues, one per cyclic factor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = ["CyclicProduct", "ShapeError", "SpanCapExceeded", "divisors"]

Element = tuple[int, ...]


class ShapeError(ValueError):
    pass


class SpanCapExceeded(RuntimeError):
    pass


def divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


@dataclass(frozen=True)
class CyclicProduct:
    """Z_{d_1} x ... x Z_{d_r}; every ``d_k >= 2``."""

    orders: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(d) for d in self.orders))
        if any(d < 2 for d in self.orders):
            raise ValueError(f"cyclic orders must be >= 2, got {self.orders}")

    @classmethod
    def from_json(cls, data) -> "CyclicProduct":
        return cls(tuple(data["orders"]))

    def to_json(self) -> dict:
        return {"orders": list(self.orders)}

    def __len__(self):
        return len(self.orders)

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    @property
    def exponent(self) -> int:
        return math.lcm(*self.orders) if self.orders else 1

    @property
    def zero(self) -> Element:
        return (0,) * len(self.orders)

    def elements(self) -> list[Element]:
        """All elements in lexicographic residue order."""
        return list(itertools.product(*(range(d) for d in self.orders)))

    def basis(self) -> list[Element]:
        r = len(self.orders)
        return [tuple(int(i == k) for i in range(r)) for k in range(r)]

    def element(self, residues: Sequence[int]) -> Element:
        if len(residues) != len(self.orders):
            raise ShapeError(f"expected {len(self.orders)} residues, got {len(residues)}")
        return tuple(int(x) % d for x, d in zip(residues, self.orders))

    def check(self, x: Element) -> Element:
        if len(x) != len(self.orders):
            raise ShapeError(f"expected {len(self.orders)} residues, got {len(x)}")
        if any(not 0 <= r < d for r, d in zip(x, self.orders)):
            raise ShapeError(f"{x} is not reduced modulo {self.orders}")
        return tuple(x)

    def add(self, x: Element, y: Element) -> Element:
        if len(x) != len(self.orders) or len(y) != len(self.orders):
            raise ShapeError("shape mismatch")
        return tuple((a + b) % d for a, b, d in zip(x, y, self.orders))

    def neg(self, x: Element) -> Element:
        if len(x) != len(self.orders):
            raise ShapeError("shape mismatch")
        return tuple(-a % d for a, d in zip(x, self.orders))

    def scale(self, k: int, x: Element) -> Element:
        if len(x) != len(self.orders):
            raise ShapeError("shape mismatch")
        return tuple(k * a % d for a, d in zip(x, self.orders))

    def element_order(self, x: Element) -> int:
        return math.lcm(*(d // math.gcd(a, d) for a, d in zip(x, self.orders))) if x else 1

    def divisible_by(self, x: Element, k: int) -> bool:
        """Is ``x = k*y`` for some ``y``?  In Z_d that holds iff gcd(k, d) | x."""
        if k < 1:
            raise ValueError("k must be >= 1")
        return all(a % math.gcd(k, d) == 0 for a, d in zip(x, self.orders))

    def span(self, generators: Iterable[Element], cap: int | None = 1 << 16) -> tuple[Element, ...]:
        """Subgroup generated by ``generators``, sorted lexicographically."""
        gens = [self.check(g) for g in generators]
        seen = {self.zero}
        frontier = [self.zero]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            if cap is not None and len(seen) > cap:
                raise SpanCapExceeded(f"span exceeds cap of {cap} elements")
            frontier = nxt
        return tuple(sorted(seen))

    def project(self, x: Element, coords: Iterable[int]) -> Element:
        coords = list(coords)
        for c in coords:
            if not 0 <= c < len(self.orders):
                raise IndexError(f"coordinate {c} out of range")
        return tuple(x[c] for c in coords)

    def sub_product(self, coords: Iterable[int]) -> "CyclicProduct":
        return CyclicProduct(self.project(self.orders, coords))
