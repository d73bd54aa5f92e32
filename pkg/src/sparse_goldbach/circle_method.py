"""Exponential sums, major/minor arcs and exact discrete orthogonality.

S(alpha) = sum_k w_k e(k alpha) over the restricted window is a trigonometric
polynomial with frequencies in [u, 2u], so S^3 has frequencies in [3u, 6u].
Sampling on N >= 6u + 1 uniform nodes therefore recovers

    R(m) = int_0^1 S(alpha)^3 e(-m alpha) d alpha

exactly as a finite average, which is what ``integral_R`` computes.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

import numpy as np
import scipy.fft

from .restricted_primes import WeightedWindow


def _phases(ks: np.ndarray, alpha) -> np.ndarray:
    """k * alpha mod 1, exact when alpha is a Fraction."""
    if isinstance(alpha, Fraction):
        num, den = alpha.numerator, alpha.denominator
        return ((ks * num) % den) / den
    return np.mod(ks * float(alpha), 1.0)


def _exp_sum(ks: np.ndarray, ws: np.ndarray, alpha) -> complex:
    return complex(np.sum(ws * np.exp(2j * np.pi * _phases(ks, alpha))))


def S_eval(alpha, window: WeightedWindow) -> complex:
    """Restricted sum of Lambda(k) e(k alpha) over the window."""
    ks, ws = window.support()
    return _exp_sum(ks, ws, alpha)


def S_eval_many(alphas, window: WeightedWindow, chunk: int = 256) -> np.ndarray:
    ks, ws = window.support()
    alphas = np.asarray(alphas, dtype=np.float64)
    out = np.empty(alphas.size, dtype=np.complex128)
    for i in range(0, alphas.size, chunk):
        a = alphas[i : i + chunk]
        ph = np.mod(np.outer(a, ks), 1.0)
        out[i : i + chunk] = np.exp(2j * np.pi * ph) @ ws
    return out


def S_unrestricted(alpha, window: WeightedWindow) -> complex:
    """Lambda(k) e(k alpha) summed over all of [u, 2u]."""
    idx = np.flatnonzero(window.lam)
    return _exp_sum(idx.astype(np.int64) + window.u, window.lam[idx], alpha)


def S_ell_expansion(alpha, window: WeightedWindow) -> complex:
    """S(alpha) rebuilt from unrestricted sums at the shifts alpha + l/q0.

    Uses 1[k = r mod q0] = (1/q0) sum_l e(l (k - r) / q0).
    """
    system = window.system
    q0 = system.q0
    R0 = np.asarray(system.R0, dtype=np.int64)
    total = 0j
    for ell in range(q0):
        coeff = complex(np.sum(np.exp(-2j * np.pi * ((ell * R0) % q0) / q0)))
        if abs(coeff) < 1e-15 * len(R0):
            continue
        shifted = alpha + Fraction(ell, q0) if isinstance(alpha, Fraction) else alpha + ell / q0
        total += coeff * S_unrestricted(shifted, window)
    return total / q0


def T_eval(beta, u: int) -> complex:
    """sum_{u <= k <= 2u} e(k beta) in closed form."""
    b = float(beta) % 1.0
    if b == 0.0:
        return complex(u + 1)
    z = np.exp(2j * np.pi * b)
    return complex(np.exp(2j * np.pi * ((u * b) % 1.0)) * (z ** (u + 1) - 1) / (z - 1))


# arcs


@dataclass(frozen=True)
class Arc:
    q: int
    a: int

    @property
    def center(self) -> float:
        return self.a / self.q


@dataclass(frozen=True)
class ArcPartition:
    u: int
    B: float
    P: float
    Q: float
    arcs: tuple[Arc, ...]

    @property
    def radius(self) -> float:
        return 1.0 / self.Q

    def major_arc_of(self, alpha: float) -> Arc | None:
        """The arc containing alpha (read mod 1), or None on the minor arcs."""
        x = float(alpha) % 1.0
        for q in range(1, int(self.P) + 1):
            a = round(x * q)
            if abs(x - a / q) <= self.radius:
                a %= q
                a = a or q
                if math.gcd(a, q) == 1:
                    return Arc(q, a)
        return None

    def is_minor(self, alpha: float) -> bool:
        return self.major_arc_of(alpha) is None

    def measure(self) -> float:
        return len(self.arcs) * 2 * self.radius


def build_arcs(u: int, B: float) -> ArcPartition:
    """Major arcs |alpha - a/q| <= 1/Q for 1 <= a <= q <= P, gcd(a, q) = 1."""
    if u < 3:
        raise ValueError("u must be >= 3")
    L = math.log(u)
    P = L**B
    Q = u / L**B
    if not P * P < Q / 2:
        raise ValueError(
            f"major arcs overlap for u={u}, B={B}: need P^2 < Q/2, got P^2={P * P:.4g}, Q/2={Q / 2:.4g}"
        )
    arcs = tuple(
        Arc(q, a)
        for q in range(1, int(P) + 1)
        for a in range(1, q + 1)
        if math.gcd(a, q) == 1
    )
    centers = sorted(Fraction(arc.a, arc.q) for arc in arcs)
    # wraparound: 1/1 also sits at 0
    gaps = [float(y - x) for x, y in zip([Fraction(0)] + centers, centers)]
    if min(gaps) <= 2 / Q:
        raise AssertionError("major arcs are not pairwise disjoint")
    return ArcPartition(u=u, B=B, P=P, Q=Q, arcs=arcs)


# quadrature


def exactness_nodes(u: int) -> int:
    """Smallest 5-smooth node count >= 6u + 1."""
    return scipy.fft.next_fast_len(6 * u + 1)


def S_on_grid(window: WeightedWindow, N: int) -> np.ndarray:
    """S(j/N) for j = 0 .. N-1."""
    if N < 1:
        raise ValueError("need at least one node")
    coeffs = np.zeros(N, dtype=np.complex128)
    np.add.at(coeffs, window.ks % N, window.values)
    # sum_k c_k e(kj/N) is N times the inverse DFT
    return scipy.fft.ifft(coeffs) * N


def integral_R(m: int, window: WeightedWindow, nodes: int | None = None) -> float:
    """(1/N) sum_j S(j/N)^3 e(-mj/N), real part."""
    u = window.u
    N = exactness_nodes(u) if nodes is None else nodes
    if N < 6 * u + 1:
        raise ValueError(f"{N} nodes < 6u + 1 = {6 * u + 1}; quadrature would alias")
    if not 3 * u <= m <= 6 * u:
        # S^3 has no frequency m, while the node average would alias to m mod N
        return 0.0
    return float(_integral(m, window, N))


def integral_R_all(window: WeightedWindow, nodes: int | None = None) -> np.ndarray:
    """integral_R for every m in [3u, 6u] from one node grid."""
    u = window.u
    N = exactness_nodes(u) if nodes is None else nodes
    if N < 6 * u + 1:
        raise ValueError(f"{N} nodes < 6u + 1 = {6 * u + 1}; quadrature would alias")
    cube = S_on_grid(window, N) ** 3
    coeffs = scipy.fft.fft(cube) / N  # coefficient of e(m j / N) at index m mod N
    ms = np.arange(3 * u, 6 * u + 1)
    vals = coeffs[ms % N]
    bad = np.abs(vals.imag) > 1e-8 * np.abs(vals.real) + _noise_floor(window, N)
    if np.any(bad):
        raise ArithmeticError("quadrature left a non-negligible imaginary part")
    return vals.real


def _noise_floor(window: WeightedWindow, N: int) -> float:
    s0 = float(np.sum(np.abs(window.values)))
    return 16 * np.finfo(float).eps * math.log2(max(N, 2)) * s0**3


def _integral(m: int, window: WeightedWindow, N: int) -> float:
    grid = S_on_grid(window, N)
    j = np.arange(N)
    val = complex(np.sum(grid**3 * np.exp(-2j * np.pi * ((m * j) % N) / N)) / N)
    if abs(val.imag) > 1e-8 * abs(val.real) + _noise_floor(window, N):
        raise ArithmeticError(f"imaginary part {val.imag:.3g} at m={m} is not negligible")
    return val.real


def parseval(window: WeightedWindow, nodes: int | None = None) -> tuple[float, float]:
    """(mean of |S|^2 over the node grid, sum of squared weights)."""
    N = 4 * window.u + 1 if nodes is None else nodes
    if N < 2 * window.u + 1:
        raise ValueError("Parseval needs N >= 2u + 1 nodes")
    grid = S_on_grid(window, N)
    return float(np.mean(np.abs(grid) ** 2)), float(np.sum(window.values**2))


# minor-arc diagnostics


def convergents(x: Fraction) -> Iterator[Fraction]:
    """Continued-fraction convergents of a rational x."""
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, rem = divmod(num, den)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        num, den = den, rem


def dirichlet_denominator(alpha: float, Q: float) -> int:
    """Denominator of the last convergent of alpha with q <= Q."""
    best = 1
    for c in convergents(Fraction(alpha)):
        if c.denominator > Q:
            break
        best = c.denominator
    return best


def vinogradov_envelope(u: int, q: int) -> float:
    L = math.log(u)
    return (u / math.sqrt(q) + u**0.8 + math.sqrt(u * q)) * L**4


@dataclass(frozen=True)
class MinorArcSample:
    alpha: float
    q: int
    abs_S: float
    envelope: float

    @property
    def ratio(self) -> float:
        return self.abs_S / self.envelope


@dataclass(frozen=True)
class MinorArcReport:
    u: int
    B: float
    P: float
    Q: float
    n_arcs: int
    S0: float
    samples: tuple[MinorArcSample, ...]

    @property
    def max_abs_S(self) -> float:
        return max((s.abs_S for s in self.samples), default=0.0)

    @property
    def max_ratio(self) -> float:
        return max((s.ratio for s in self.samples), default=0.0)

    def to_dict(self) -> dict:
        return {
            "u": self.u,
            "B": self.B,
            "P": self.P,
            "Q": self.Q,
            "n_arcs": self.n_arcs,
            "major_measure": self.n_arcs * 2 / self.Q,
            "S0": self.S0,
            "samples": len(self.samples),
            "max_abs_S": self.max_abs_S,
            "max_abs_S_over_S0": self.max_abs_S / self.S0 if self.S0 else 0.0,
            "max_ratio": self.max_ratio,
            "worst": (
                {
                    "alpha": worst.alpha,
                    "q": worst.q,
                    "abs_S": worst.abs_S,
                    "envelope": worst.envelope,
                }
                if (worst := max(self.samples, key=lambda s: s.ratio, default=None))
                else None
            ),
        }


def minor_arc_diagnostic(
    u: int, B: float, window: WeightedWindow, samples: int = 64, seed: int = 0
) -> MinorArcReport:
    """Sample |S(alpha)| on the minor arcs against the Vinogradov-shaped envelope.

    Report-only: the envelope's absolute constant is unknown, so nothing here
    asserts a bound.
    """
    arcs = build_arcs(u, B)
    rng = random.Random(seed)
    alphas: list[float] = []
    while len(alphas) < samples:
        x = rng.random()
        if arcs.is_minor(x):
            alphas.append(x)
    values = np.abs(S_eval_many(alphas, window))
    out = []
    for x, s in zip(alphas, values.tolist()):
        q = dirichlet_denominator(x, arcs.Q)
        out.append(MinorArcSample(alpha=x, q=q, abs_S=s, envelope=vinogradov_envelope(u, q)))
    S0 = float(np.sum(window.values))
    return MinorArcReport(
        u=u, B=B, P=arcs.P, Q=arcs.Q, n_arcs=len(arcs.arcs), S0=S0, samples=tuple(out)
    )
