"""Admissible residue systems: prime basis, digit bases, triple covers and CRT lifting.

The construction: take the primes p_1 < ... < p_k <= z with z = 3A log log u,
set q0 = p_1 ... p_k, and for each p_j the base a_j = ceil(p_j^(1/3)) + 1.
The cover of p_j is the union of the three blocks

    {1, .., a},  {a, 2a, .., a^2},  {a^2, 2a^2, .., a^3}

and R0 collects the residues r in [1, q0] coprime to q0 whose reduction mod
every p_j lands in that prime's cover.  Primes in [u, 2u] that fall in R0 form
the sparse set used for ternary representations.

Also provides the dyadic gluing of four windows [c_i 2^l, 2 c_i 2^l] so that
every m in [2^(l+2), 2^(l+3)] lies in some [4 u_i, 5 u_i].
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from ._arith import ceil_cbrt, is_prime, primes_upto

MIN_U = 16
MAX_Q0 = 2**62


def default_arc_exponent(A: int) -> int:
    """Smallest integer B with B > max(13A, 10A + 10)."""
    return max(13 * A, 10 * A + 10) + 1


@dataclass(frozen=True)
class ConstructionParams:
    A: int = 1
    u: int = MIN_U
    z_override: float | None = None
    basis_override: tuple[int, ...] | None = None
    B: int | None = None

    def __post_init__(self):
        if self.A < 1:
            raise ValueError(f"A must be a positive integer, got {self.A}")
        if self.u < MIN_U:
            raise ValueError(f"u must be >= {MIN_U} so that log log u > 0, got {self.u}")
        if self.z_override is not None and self.z_override <= 0:
            raise ValueError("z_override must be positive")
        if self.basis_override is not None:
            basis = tuple(int(p) for p in self.basis_override)
            object.__setattr__(self, "basis_override", basis)
            if not basis:
                raise ValueError("basis_override must not be empty")
            if len(set(basis)) != len(basis):
                raise ValueError(f"basis_override has repeated primes: {basis}")
            if list(basis) != sorted(basis):
                raise ValueError(f"basis_override must be strictly increasing: {basis}")
            bad = [p for p in basis if not is_prime(p)]
            if bad:
                raise ValueError(f"basis_override contains non-primes: {bad}")
        if self.B is None:
            object.__setattr__(self, "B", default_arc_exponent(self.A))
        elif self.B < 1:
            raise ValueError("B must be a positive integer")


@dataclass(frozen=True)
class DigitBasis:
    p: int
    a: int


@dataclass(frozen=True)
class ResidueCover:
    """Triple cover for one prime.

    ``raw_elements`` is the literal integer union of the three blocks;
    ``unit_residues`` its nonzero reductions mod p.
    """

    p: int
    basis: DigitBasis
    raw_elements: tuple[int, ...]
    unit_residues: tuple[int, ...]

    @property
    def a(self) -> int:
        return self.basis.a

    @property
    def raw_residues(self) -> tuple[int, ...]:
        return tuple(sorted({r % self.p for r in self.raw_elements}))

    def blocks(self) -> tuple[range, range, range]:
        a = self.a
        return range(1, a + 1), range(a, a * a + 1, a), range(a * a, a**3 + 1, a * a)


@dataclass(frozen=True)
class AdmissibleSystem:
    params: ConstructionParams
    z: float
    primes: tuple[int, ...]
    q0: int
    covers: tuple[ResidueCover, ...]
    R0: tuple[int, ...]
    _R0_set: frozenset = field(default=frozenset(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_R0_set", frozenset(self.R0))

    def contains(self, k: int) -> bool:
        """True when k mod q0 lies in R0."""
        r = k % self.q0
        return (r if r else self.q0) in self._R0_set

    def residue_mask(self) -> list[bool]:
        """mask[r] for r in [0, q0): r (read as q0 when 0) belongs to R0."""
        mask = [False] * self.q0
        for r in self.R0:
            mask[r % self.q0] = True
        return mask

    def to_dict(self) -> dict:
        return {
            "primes": list(self.primes),
            "q0": self.q0,
            "covers": [
                {
                    "p": c.p,
                    "a": c.a,
                    "raw": list(c.raw_elements),
                    "units": list(c.unit_residues),
                }
                for c in self.covers
            ],
            "R0": list(self.R0),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def derive_z(params: ConstructionParams) -> float:
    if params.u < MIN_U:
        raise ValueError(f"u must be >= {MIN_U}, got {params.u}")
    if params.z_override is not None:
        return float(params.z_override)
    return 3 * params.A * math.log(math.log(params.u))


def prime_basis(z: float) -> list[int]:
    """Primes p <= z in ascending order."""
    if z < 2:
        raise ValueError(f"z = {z} < 2 gives an empty prime basis")
    return [int(p) for p in primes_upto(math.floor(z))]


def digit_base(p: int) -> DigitBasis:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return DigitBasis(p=p, a=ceil_cbrt(p) + 1)


def build_cover(p: int) -> ResidueCover:
    basis = digit_base(p)
    a = basis.a
    raw = set(range(1, a + 1))
    raw.update(a * i for i in range(1, a + 1))
    raw.update(a * a * i for i in range(1, a + 1))
    units = {r % p for r in raw} - {0}
    return ResidueCover(
        p=p,
        basis=basis,
        raw_elements=tuple(sorted(raw)),
        unit_residues=tuple(sorted(units)),
    )


def crt_lift(primes: Sequence[int], residue_sets: Sequence[Iterable[int]]) -> list[int]:
    """All r in [1, q] (q = prod primes) with r mod p_j in residue_sets[j]."""
    q = math.prod(primes)
    # idempotents: e_j = 1 mod p_j, 0 mod p_i (i != j)
    idem = []
    for p in primes:
        rest = q // p
        idem.append(rest * pow(rest, -1, p) % q)
    out = []
    for combo in itertools.product(*[sorted(set(s)) for s in residue_sets]):
        r = sum(c * e for c, e in zip(combo, idem)) % q
        out.append(r if r else q)
    return sorted(out)


def build_system(params: ConstructionParams) -> AdmissibleSystem:
    if params.basis_override is not None:
        primes = list(params.basis_override)
        z = float(params.z_override) if params.z_override is not None else float(primes[-1])
    else:
        z = derive_z(params)
        primes = prime_basis(z)
    if len(set(primes)) != len(primes):
        raise ValueError(f"basis has repeated primes: {primes}")
    q0 = math.prod(primes)
    if q0 >= MAX_Q0:
        raise ValueError(f"q0 = {q0} exceeds the 2^62 modulus guard")
    covers = [build_cover(p) for p in primes]
    R0 = crt_lift(primes, [c.unit_residues for c in covers])
    return AdmissibleSystem(
        params=params,
        z=z,
        primes=tuple(primes),
        q0=q0,
        covers=tuple(covers),
        R0=tuple(R0),
    )


def system_for_basis(basis: Sequence[int], u: int = MIN_U, A: int = 1) -> AdmissibleSystem:
    """Shorthand for a system with an explicit prime basis."""
    return build_system(ConstructionParams(A=A, u=max(u, MIN_U), basis_override=tuple(basis)))


def parse_params(text: str) -> ConstructionParams:
    """Read ``key=value`` lines (A, u, B, z_override, basis_override).

    Blank lines and ``#`` comments are ignored; unknown keys are rejected.
    """
    raw = parse_key_values(text)
    known = {"A", "u", "B", "z_override", "basis_override"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown construction keys: {sorted(unknown)}")
    kwargs: dict = {}
    if "A" in raw:
        kwargs["A"] = int(raw["A"])
    if "u" in raw:
        kwargs["u"] = int(raw["u"])
    if "B" in raw:
        kwargs["B"] = int(raw["B"])
    if "z_override" in raw:
        kwargs["z_override"] = float(raw["z_override"])
    if "basis_override" in raw:
        kwargs["basis_override"] = parse_prime_list(raw["basis_override"])
    return ConstructionParams(**kwargs)


def parse_key_values(text: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def parse_prime_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.replace(" ", "").split(",") if tok)


def load_params(path: str | Path) -> ConstructionParams:
    return parse_params(Path(path).read_text())


# dyadic gluing


@dataclass(frozen=True)
class DyadicSchedule:
    c1: Fraction
    c2: Fraction
    c3: Fraction
    c4: Fraction
    levels: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        cs = [Fraction(c) for c in (self.c1, self.c2, self.c3, self.c4)]
        for name, c in zip(("c1", "c2", "c3", "c4"), cs):
            object.__setattr__(self, name, c)
        c1, c2, c3, c4 = cs
        q = Fraction(5, 4)
        chain = [c1, 1, c2, q * c1, c3, q * c2, c4, q * c3, 2, q * c4]
        if not all(x < y for x, y in zip(chain, chain[1:])):
            raise ValueError(
                "constants violate c1<1<c2<5c1/4<c3<5c2/4<c4<5c3/4<2<5c4/4: "
                f"{tuple(float(c) for c in cs)}"
            )
        levels = tuple((int(A), int(ell)) for A, ell in self.levels)
        for (A0, l0), (A1, l1) in zip(levels, levels[1:]):
            if not (A1 > A0 and l1 > l0):
                raise ValueError(f"levels must increase in both coordinates: {levels}")
        object.__setattr__(self, "levels", levels)

    @property
    def constants(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.c1, self.c2, self.c3, self.c4)

    def level_for(self, ell: int) -> int:
        """The A with l_A <= ell < l_{A+1}."""
        chosen = None
        for A, start in self.levels:
            if start <= ell:
                chosen = A
        if chosen is None:
            raise ValueError(f"ell = {ell} lies below the first level")
        return chosen


def glue_schedule(schedule: DyadicSchedule, ell: int) -> list[int]:
    """Window starts round(c_i 2^ell) whose [4u_i, 5u_i] cover [2^(ell+2), 2^(ell+3)]."""
    if ell < 1:
        raise ValueError(f"ell must be positive, got {ell}")
    scale = 2**ell
    starts = [round(c * scale) for c in schedule.constants]
    if min(starts) < MIN_U:
        raise ValueError(f"degenerate window starts {starts} (need u >= {MIN_U})")
    lo, hi = 4 * scale, 8 * scale
    reach = lo - 1  # largest integer m covered so far
    for s in sorted(starts):
        if 4 * s > reach + 1:
            break
        reach = max(reach, 5 * s)
    if reach < hi:
        raise ValueError(f"windows {starts} leave [{reach + 1}, {hi}] uncovered after rounding")
    return starts
