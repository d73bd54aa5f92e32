"""Constructive three-term decomposition of residues over a prime's cover.

Every class n mod p is a sum r1 + r2 + r3 of raw cover elements.  The witness
comes from writing the representative n in [1, p] in base a (a^3 > p) and
splitting on how many of its three digits vanish.  Representatives 1 and 2
with no higher digits are first shifted to n + p.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .residue_system import ResidueCover


@dataclass(frozen=True)
class DigitTriple:
    w2: int
    w1: int
    w0: int

    @classmethod
    def of(cls, n: int, a: int) -> "DigitTriple":
        if not 0 <= n < a**3:
            raise ValueError(f"{n} has more than three base-{a} digits")
        w2, rest = divmod(n, a * a)
        w1, w0 = divmod(rest, a)
        return cls(w2, w1, w0)

    def value(self, a: int) -> int:
        return self.w2 * a * a + self.w1 * a + self.w0


def _split(n: int, p: int, a: int) -> tuple[int, int, int]:
    d = DigitTriple.of(n, a)
    w2, w1, w0 = d.w2, d.w1, d.w0
    zeros = (w0 == 0) + (w1 == 0) + (w2 == 0)

    if zeros == 0:
        return (w0, w1 * a, w2 * a * a)

    if zeros == 1:
        if w0 == 0:
            if w1 >= 2:
                return (a, (w1 - 1) * a, w2 * a * a)
            if w2 >= 2:
                return (w1 * a, a * a, (w2 - 1) * a * a)
            return (a, a, (a - 1) * a)  # a^2 + a
        if w1 == 0:
            if w0 >= 2:
                return (1, w0 - 1, w2 * a * a)
            if w2 >= 2:
                return (w0, a * a, (w2 - 1) * a * a)
            return (1, a, (a - 1) * a)  # a^2 + 1
        # w2 == 0
        if w0 >= 2:
            return (1, w0 - 1, w1 * a)
        if w1 >= 2:
            return (w0, a, (w1 - 1) * a)
        return (1, 1, a - 1)  # a + 1

    # exactly two zero digits
    if w2:
        if w2 >= 3:
            return (a * a, a * a, (w2 - 2) * a * a)
        if w2 == 2:
            return (a, (a - 1) * a, a * a)
        # n = a^2.  (a - 2) a is a block-2 element for every a >= 3, so this
        # split is used for all p; the alternative a + 1 + (a - 1) sums to 2a.
        return (a, a, (a - 2) * a)
    if w1:
        if w1 >= 3:
            return (a, a, (w1 - 2) * a)
        if w1 == 2:
            return (1, a - 1, a)
        return (1, 1, a - 2)
    if w0 >= 3:
        return (1, 1, w0 - 2)
    return _split(w0 + p, p, a)


def decompose(n: int, cover: ResidueCover) -> tuple[int, int, int]:
    """Raw cover elements (ascending) whose sum is congruent to n mod p."""
    p, a = cover.p, cover.a
    target = n % p or p
    triple = tuple(sorted(_split(target, p, a)))
    raw = set(cover.raw_elements)
    if (sum(triple) - n) % p or not all(r in raw for r in triple):
        raise AssertionError(f"invalid witness {triple} for n={n} mod {p}")
    return triple


def triple_sums(elements, p: int) -> set[int]:
    """Classes mod p reachable as a sum of three (not necessarily distinct) elements."""
    residues = sorted({x % p for x in elements})
    pair = {(x + y) % p for x, y in itertools.combinations_with_replacement(residues, 2)}
    return {(s + x) % p for s in pair for x in residues}


def cover_check(cover: ResidueCover, use_units: bool = False) -> bool:
    """True iff every class mod p is a sum of three cover elements.

    With ``use_units`` the summands are restricted to the nonzero residues.
    """
    elements = cover.unit_residues if use_units else cover.raw_elements
    return len(triple_sums(elements, cover.p)) == cover.p
