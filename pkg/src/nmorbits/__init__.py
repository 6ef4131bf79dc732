"""Orbits, NM-ranks and divisibility criteria for profinite abelian groups."""

from .ordinal import OMEGA, ONE, ZERO, Ordinal, add, nat_sum, ordinal, parse

__version__ = "0.1.0"

__all__ = ["Ordinal", "ordinal", "parse", "add", "nat_sum", "ZERO", "ONE", "OMEGA"]
