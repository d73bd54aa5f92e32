"""Small exact number-theory helpers shared by the other modules."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from sympy import factorint, integer_nthroot, isprime


def is_prime(n: int) -> bool:
    """Deterministic primality test (sympy's BPSW, exact below 2**64)."""
    return n >= 2 and bool(isprime(n))


def primes_upto(n: int) -> np.ndarray:
    """All primes <= n by a plain Eratosthenes sieve, as int64."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def ceil_cbrt(n: int) -> int:
    """Exact ceiling of n**(1/3) for n >= 0."""
    root, exact = integer_nthroot(n, 3)
    return int(root) if exact else int(root) + 1


@lru_cache(maxsize=65536)
def factor(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(sorted((int(p), int(e)) for p, e in factorint(n).items()))


def mobius(n: int) -> int:
    if n == 1:
        return 1
    fac = factor(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def totient(n: int) -> int:
    out = n
    for p, _ in factor(n):
        out -= out // p
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factor(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def ramanujan_sum(v: int, m: int) -> int:
    """c_v(m) = sum over d | gcd(v, m) of d * mu(v/d); integer valued."""
    g = math.gcd(v, m)
    return sum(d * mobius(v // d) for d in divisors(g))


def e(x: float | np.ndarray) -> complex | np.ndarray:
    """exp(2*pi*i*x)."""
    return np.exp(2j * np.pi * x)
