"""Von Mangoldt weights on [u, 2u] and the congruence-restricted prime set.

The window is sieved segment-wise with the primes up to sqrt(2u), so memory
stays O(sqrt(u) + u) instead of O(2u) for a full sieve from 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._arith import primes_upto, totient
from .residue_system import AdmissibleSystem

DEFAULT_MAX_WINDOW = 50_000_000


@dataclass(frozen=True)
class Segment:
    """Sieved window [u, 2u]: Lambda values and the primality mask, index k - u."""

    u: int
    lam: np.ndarray
    is_prime: np.ndarray

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.u, 2 * self.u + 1, dtype=np.int64)


def sieve_segment(u: int, max_window: int = DEFAULT_MAX_WINDOW) -> Segment:
    if u < 2:
        raise ValueError(f"u must be >= 2, got {u}")
    n = u + 1
    if n > max_window:
        raise ValueError(f"window of {n} integers exceeds the cap of {max_window}")
    hi = 2 * u
    base = primes_upto(math.isqrt(hi))

    composite = np.zeros(n, dtype=bool)
    for p in base.tolist():
        start = max(p * p, -(-u // p) * p)
        composite[start - u :: p] = True
    is_prime = ~composite
    is_prime[np.arange(u, hi + 1) < 2] = False

    lam = np.zeros(n, dtype=np.float64)
    lam[is_prime] = np.log(np.arange(u, hi + 1, dtype=np.float64)[is_prime])
    # prime powers p^r (r >= 2) in the window all have p <= sqrt(2u)
    for p in base.tolist():
        pk = p * p
        logp = math.log(p)
        while pk <= hi:
            if pk >= u:
                lam[pk - u] = logp
            pk *= p
    return Segment(u=u, lam=lam, is_prime=is_prime)


def sieve_lambda(u: int, max_window: int = DEFAULT_MAX_WINDOW) -> np.ndarray:
    """Lambda(k) for k = u, .., 2u (index k - u)."""
    return sieve_segment(u, max_window).lam


@dataclass(frozen=True)
class WeightedWindow:
    """Lambda(k) * [k mod q0 in R0] over [u, 2u], plus the unrestricted Lambda."""

    u: int
    values: np.ndarray
    lam: np.ndarray
    system: AdmissibleSystem

    def __post_init__(self):
        self.values.setflags(write=False)
        self.lam.setflags(write=False)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.u, 2 * self.u + 1, dtype=np.int64)

    def at(self, k: int) -> float:
        if not self.u <= k <= 2 * self.u:
            return 0.0
        return float(self.values[k - self.u])

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """(k, weight) for the nonzero entries."""
        idx = np.flatnonzero(self.values)
        return idx.astype(np.int64) + self.u, self.values[idx]


def residue_filter(system: AdmissibleSystem, u: int) -> np.ndarray:
    """Boolean mask over [u, 2u]: k mod q0 in R0."""
    mask = np.array(system.residue_mask(), dtype=bool)
    ks = np.arange(u, 2 * u + 1, dtype=np.int64)
    return mask[ks % system.q0]


def weighted_window(
    system: AdmissibleSystem, u: int, max_window: int = DEFAULT_MAX_WINDOW
) -> WeightedWindow:
    seg = sieve_segment(u, max_window)
    values = np.where(residue_filter(system, u), seg.lam, 0.0)
    return WeightedWindow(u=u, values=values, lam=seg.lam, system=system)


def restricted_set(
    system: AdmissibleSystem, u: int, max_window: int = DEFAULT_MAX_WINDOW
) -> list[int]:
    """Primes p in [u, 2u] with p mod q0 in R0, ascending."""
    seg = sieve_segment(u, max_window)
    keep = seg.is_prime & residue_filter(system, u)
    return (np.flatnonzero(keep) + u).tolist()


@dataclass(frozen=True)
class SparsityReport:
    u: int
    count: int
    bound: float
    equidistribution: float

    def to_dict(self) -> dict:
        return {
            "u": self.u,
            "count": self.count,
            "bound": self.bound,
            "equidistribution": self.equidistribution,
        }


def sparsity_report(
    system: AdmissibleSystem, u: int, primes: list[int] | None = None
) -> SparsityReport:
    """|P_u| against the progression bound (u/q0 + 1) |R0|.

    ``equidistribution`` is |P_u| phi(q0) / ((u / log u) |R0|), close to 1 for
    large u by the prime number theorem in progressions.
    """
    if primes is None:
        primes = restricted_set(system, u)
    count = len(primes)
    nres = len(system.R0)
    bound = (u / system.q0 + 1) * nres
    if count > bound:
        raise AssertionError(f"|P_u| = {count} exceeds the progression bound {bound}")
    equi = count * totient(system.q0) / ((u / math.log(u)) * nres)
    return SparsityReport(u=u, count=count, bound=bound, equidistribution=equi)
