"""The arithmetic factor of the restricted ternary problem, by two routes.

Defining sums (complex, floating point):

    f(q) = q0^-3 sum_{(a,q)=1} e(-am/q) [ sum_l mu/phi(q_l) E(l) ]^3,
    E(l) = sum_{r in R0} e(-l r / q0),  q_l = q q0 / gcd(q q0, a q0 + l q),

and g(w) for w | q0, h(v) for (v, q0) = 1, with f = g * h (Dirichlet).

Closed forms (exact rationals):

    g(prod_{s in S} p_s) = phi(q0)^-3 prod_{s not in S} |R_s|^3
                                     prod_{s in S} (p_s N_s(m) - |R_s|^3),
    G(q0) = sum_{w | q0} g(w) = prod_p G(p),   G(p) = p N_p(m) / (p - 1)^3,
    h(v)  = mu(v) c_v(m) / phi(v)^3  (c_v the Ramanujan sum),

where N_p(m) counts triples of cover residues mod p summing to m.  The full
series is sigma(m) = G(q0) * sum_v h(v), the latter an Euler product.
"""

from __future__ import annotations

import cmath
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from ._arith import divisors, factor, mobius, primes_upto, ramanujan_sum, totient
from .representation_counts import profile_H
from .residue_system import AdmissibleSystem, ResidueCover

DEFAULT_CUTOFF = 100_000
DEFAULT_BUDGET = 5_000_000


class Bracketed(NamedTuple):
    value: float
    radius: float


@dataclass(frozen=True)
class FactorDecomposition:
    q: int
    qtilde: int
    qhat: int
    d: int


def factor_q(q: int, q0: int) -> FactorDecomposition:
    """Split q into its q0-part qtilde and the coprime rest qhat."""
    qtilde = 1
    for p, e in factor(q):
        if q0 % p == 0:
            qtilde *= p**e
    return FactorDecomposition(q=q, qtilde=qtilde, qhat=q // qtilde, d=math.gcd(qtilde, q0))


def q_ell(q: int, q0: int, a: int, ell: int) -> tuple[int, int]:
    """Reduced form a_l / q_l of a/q + l/q0."""
    if math.gcd(a, q) != 1:
        raise ValueError(f"gcd({a}, {q}) != 1")
    if not 0 <= ell < q0:
        raise ValueError(f"ell = {ell} outside [0, {q0})")
    num = a * q0 + ell * q
    den = q * q0
    g = math.gcd(den, num)
    return num // g, den // g


@lru_cache(maxsize=None)
def _mu_over_phi(n: int) -> float:
    mu = mobius(n)
    return mu / totient(n) if mu else 0.0


@lru_cache(maxsize=256)
def _E_table(q0: int, R0: tuple[int, ...]) -> tuple[complex, ...]:
    return tuple(sum(cmath.exp(-2j * math.pi * (ell * r % q0) / q0) for r in R0) for ell in range(q0))


def _e(num: int, den: int) -> complex:
    return cmath.exp(2j * math.pi * (num % den) / den)


def f_direct(q: int, m: int, system: AdmissibleSystem, budget: int = DEFAULT_BUDGET) -> float:
    """f(q) from its defining sum over a and l (the triple sum taken as a cube)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    q0 = system.q0
    if totient(q) * q0 > budget:
        raise ValueError(f"f({q}) needs {totient(q) * q0} terms, over the budget {budget}")
    E = _E_table(q0, system.R0)
    total = 0j
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        inner = 0j
        for ell in range(q0):
            ql = q * q0 // math.gcd(q * q0, a * q0 + ell * q)
            w = _mu_over_phi(ql)
            if w:
                inner += w * E[ell]
        total += _e(-a * m, q) * inner**3
    val = total / q0**3
    if abs(val.imag) > 1e-9 * (1 + abs(val)):
        raise ArithmeticError(f"f({q}) has imaginary part {val.imag:.3g}")
    return val.real


def f_partial_sum(m: int, system: AdmissibleSystem, qmax: int) -> float:
    return math.fsum(f_direct(q, m, system) for q in range(1, qmax + 1))


def g_direct(w: int, m: int, system: AdmissibleSystem) -> float:
    """g(w) from its defining sum; zero unless w | q0."""
    q0 = system.q0
    if q0 % w:
        return 0.0
    E = _E_table(q0, system.R0)
    total = 0j
    for a in range(1, w + 1):
        if math.gcd(a, w) != 1:
            continue
        shift = a * q0 // w
        inner = sum(_mu_over_phi(q0 // math.gcd(q0, shift + ell)) * E[ell] for ell in range(q0))
        total += _e(-a * m, w) * inner**3
    val = total / q0**3
    if abs(val.imag) > 1e-9 * (1 + abs(val)):
        raise ArithmeticError(f"g({w}) has imaginary part {val.imag:.3g}")
    return val.real


def cover_residues(cover: ResidueCover, raw: bool = False) -> tuple[int, ...]:
    return cover.raw_residues if raw else cover.unit_residues


@lru_cache(maxsize=4096)
def _triple_counts(p: int, residues: tuple[int, ...]) -> tuple[int, ...]:
    pair = Counter((x + y) % p for x in residues for y in residues)
    out = [0] * p
    for s, c in pair.items():
        for z in residues:
            out[(s + z) % p] += c
    return tuple(out)


def N_p(m: int, cover: ResidueCover, raw: bool = False) -> int:
    """Ordered triples of cover residues mod p with sum = m mod p."""
    return _triple_counts(cover.p, cover_residues(cover, raw))[m % cover.p]


def _cover_of(system: AdmissibleSystem, p: int) -> ResidueCover:
    for c in system.covers:
        if c.p == p:
            return c
    raise ValueError(f"{p} is not in the prime basis {system.primes}")


def g_closed(S: Iterable[int], m: int, system: AdmissibleSystem, raw: bool = False) -> Fraction:
    """g at w = prod of the basis primes in S, in closed form."""
    S = set(S)
    unknown = S - set(system.primes)
    if unknown:
        raise ValueError(f"{sorted(unknown)} not in the prime basis {system.primes}")
    phi = totient(system.q0)
    val = Fraction(1, phi**3)
    for c in system.covers:
        size = len(cover_residues(c, raw))
        if c.p in S:
            val *= c.p * N_p(m, c, raw) - size**3
        else:
            val *= size**3
    return val


def h_eval(v: int, m: int, q0: int = 1) -> Fraction:
    """mu(v) c_v(m) / phi(v)^3, or 0 when v shares a factor with q0."""
    if v < 1:
        raise ValueError("v must be >= 1")
    if math.gcd(v, q0) > 1:
        return Fraction(0)
    mu = mobius(v)
    if mu == 0:
        return Fraction(0)
    return Fraction(mu * ramanujan_sum(v, m), totient(v) ** 3)


def h_direct(v: int, m: int, q0: int = 1) -> float:
    """h(v) from the defining exponential sum."""
    if math.gcd(v, q0) > 1:
        return 0.0
    s = sum(_e(-a * m, v) for a in range(1, v + 1) if math.gcd(a, v) == 1)
    return (mobius(v) / totient(v) ** 3 * s).real


def h_partial_sum(m: int, q0: int, V: int) -> float:
    return math.fsum(float(h_eval(v, m, q0)) for v in range(1, V + 1))


@lru_cache(maxsize=64)
def _euler_base(q0: int, cutoff: int) -> tuple[float, tuple[int, ...]]:
    """prod over p <= cutoff, p not dividing q0, of 1 + 1/(p-1)^3."""
    primes = tuple(int(p) for p in primes_upto(cutoff) if q0 % int(p))
    val = 1.0
    for p in primes:
        val *= 1.0 + 1.0 / (p - 1) ** 3
    return val, primes


def hsum(m: int, q0: int, cutoff: int = DEFAULT_CUTOFF) -> Bracketed:
    """sum_v h(v) as an Euler product, with an enclosure of the omitted tail.

    Primes dividing m are known exactly, so only the factors
    1 + 1/(p-1)^3 with p > cutoff are estimated; their product lies in
    [1, exp(1 / (2 (cutoff - 1)^2))].
    """
    if cutoff < 100:
        raise ValueError("cutoff must be >= 100")
    if m == 0:
        raise ValueError("m must be nonzero")
    base, _ = _euler_base(q0, cutoff)
    val = base
    for p, _ in factor(abs(m)):
        if q0 % p == 0:
            continue
        drop = 1.0 - 1.0 / (p - 1) ** 2
        if p <= cutoff:
            val *= drop / (1.0 + 1.0 / (p - 1) ** 3)
        else:
            val *= drop
    tail_hi = math.exp(1.0 / (2.0 * (cutoff - 1) ** 2))
    lo, hi = val, val * tail_hi
    return Bracketed((lo + hi) / 2, (hi - lo) / 2)


def combinatorial_C(b: int, primes) -> Fraction:
    """sum over t in {0..3}^b of prod C(3, t_i) / (p_i - 1)^t_i; checked against prod p^3/(p-1)^3."""
    if not 0 <= b <= len(primes):
        raise ValueError(f"b = {b} outside [0, {len(primes)}]")
    ps = list(primes)[:b]
    nested = Fraction(0)
    for ts in itertools.product(range(4), repeat=b):
        term = Fraction(1)
        for p, t in zip(ps, ts):
            term *= Fraction(math.comb(3, t), (p - 1) ** t)
        nested += term
    q = math.prod(ps)
    closed = Fraction(q**3, totient(q) ** 3)
    if nested != closed:
        raise AssertionError(f"C({b}) nested sum {nested} != closed form {closed}")
    return nested


def G_prime(p: int, m: int, cover: ResidueCover, raw: bool = False) -> Fraction:
    """p N_p(m) / phi(p)^3."""
    if cover.p != p:
        raise ValueError(f"cover is for {cover.p}, not {p}")
    return Fraction(p * N_p(m, cover, raw), (p - 1) ** 3)


def G_product(m: int, system: AdmissibleSystem, raw: bool = False) -> Fraction:
    return math.prod((G_prime(c.p, m, c, raw) for c in system.covers), start=Fraction(1))


def G_direct(
    m: int, system: AdmissibleSystem, numeric: bool = False, max_primes: int = 4
) -> Fraction | float:
    """G(q0) = sum of g(w) over w | q0, without using multiplicativity.

    ``numeric`` sums the defining exponential sums instead of the closed forms.
    """
    k = len(system.primes)
    if k > max_primes:
        raise ValueError(f"basis of {k} primes is too large (max {max_primes})")
    if numeric:
        return math.fsum(g_direct(w, m, system) for w in divisors(system.q0))
    total = Fraction(0)
    for r in range(k + 1):
        for S in itertools.combinations(system.primes, r):
            total += g_closed(S, m, system)
    return total


def sigma(m: int, system: AdmissibleSystem, cutoff: int = DEFAULT_CUTOFF) -> Bracketed:
    """G(q0) * sum_v h(v), with the Euler-tail radius."""
    G = G_product(m, system)
    H = hsum(m, system.q0, cutoff)
    val = Bracketed(float(G) * H.value, float(G) * H.radius)
    if m % 2 and not val.value > 0:
        raise AssertionError(f"singular series vanishes at odd m={m}")
    if m % 2 == 0 and system.q0 % 2 == 0 and val.value != 0:
        raise AssertionError(f"singular series nonzero at even m={m} with 2 | q0")
    if m % 2:
        q0 = system.q0
        floor = Fraction(q0, totient(q0) ** 3)
        if G < floor:
            raise AssertionError(f"G(q0) = {G} below q0/phi(q0)^3 = {floor}")
    return val


def sigma_prime(m: int, u: int, system: AdmissibleSystem, cutoff: int = DEFAULT_CUTOFF) -> float:
    """sigma(m) H(m, u) / u^2; the predicted count is u^2 times this."""
    return sigma(m, system, cutoff).value * profile_H(m, u) / (u * u)


def convolution_check(m: int, system: AdmissibleSystem, qmax: int) -> float:
    """max over q <= qmax of |f(q) - sum_{c | q} g(c) h(q/c)|."""
    q0 = system.q0
    gcache: dict[int, float] = {}
    worst = 0.0
    for q in range(1, qmax + 1):
        conv = 0.0
        for c in divisors(q):
            if q0 % c:
                continue
            if c not in gcache:
                gcache[c] = g_direct(c, m, system)
            conv += gcache[c] * float(h_eval(q // c, m, q0))
        worst = max(worst, abs(f_direct(q, m, system) - conv))
    return worst


def sigma_table(ms, u: int, system: AdmissibleSystem, cutoff: int = DEFAULT_CUTOFF) -> np.ndarray:
    """sigma_prime for each m (vectorised over a cached Euler base)."""
    return np.array([sigma_prime(int(m), u, system, cutoff) for m in ms], dtype=np.float64)
