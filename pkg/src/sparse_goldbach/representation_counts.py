"""Ternary representation counts over one window [u, 2u].

``weighted(m)`` is the ordered sum of Lambda(k1) Lambda(k2) Lambda(k3) over
restricted k_i with k1 + k2 + k3 = m; ``unweighted(m)`` counts ordered triples
of restricted primes.  Both live on m in [3u, 6u].

Short windows convolve directly (exact summation order, no transform noise);
longer ones use a real FFT padded to a power of two.  Transform output below
the a-priori rounding bound is snapped to zero whenever that bound sits under
half the smallest possible nonzero value (min weight cubed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .restricted_primes import WeightedWindow, restricted_set

DIRECT_MAX_LEN = 4096


def profile_H(m: float, u: float) -> float:
    """u^2 - ((m - 4u)^2 + (5u - m)^2) / 2 for m in [4u, 5u]."""
    if not 4 * u <= m <= 5 * u:
        raise ValueError(f"m = {m} outside [4u, 5u] = [{4 * u}, {5 * u}]")
    return u * u - 0.5 * ((m - 4 * u) ** 2 + (5 * u - m) ** 2)


def _pow2_at_least(n: int) -> int:
    return 1 << (n - 1).bit_length()


def cube_convolve(x: np.ndarray, method: str = "auto", workers: int = 1) -> tuple[np.ndarray, float]:
    """Threefold self-convolution of x and an absolute error bound.

    Returns an array of length 3 len(x) - 2.
    """
    n = len(x)
    if n == 0:
        return np.zeros(0), 0.0
    if method == "auto":
        method = "direct" if n < DIRECT_MAX_LEN else "fft"
    if method == "direct":
        out = np.convolve(np.convolve(x, x), x)
        if np.issubdtype(x.dtype, np.integer):
            return out, 0.0
        l1 = float(np.sum(np.abs(x)))
        return out, (2 * n + 2) * np.finfo(float).eps * l1**3
    if method != "fft":
        raise ValueError(f"unknown convolution method {method!r}")
    size = _pow2_at_least(3 * n - 2)
    xf = np.asarray(x, dtype=np.float64)
    fhat = scipy.fft.rfft(xf, size, workers=workers)
    out = scipy.fft.irfft(fhat * fhat * fhat, size, workers=workers)[: 3 * n - 2]
    # ||x||_1^3 * eps * log2(size) scales the forward/inverse rounding
    l1 = float(np.sum(np.abs(xf)))
    err = 8 * np.finfo(float).eps * math.log2(size) * l1**3
    return out, err


@dataclass(frozen=True)
class CountProfile:
    """Counts on m = 3u .. 6u, index m - 3u."""

    u: int
    weighted: np.ndarray
    unweighted: np.ndarray
    weighted_error: float

    @property
    def m_lo(self) -> int:
        return 3 * self.u

    @property
    def m_hi(self) -> int:
        return 6 * self.u

    def weighted_at(self, m: int) -> float:
        if not self.m_lo <= m <= self.m_hi:
            return 0.0
        return float(self.weighted[m - self.m_lo])

    def unweighted_at(self, m: int) -> int:
        if not self.m_lo <= m <= self.m_hi:
            return 0
        return int(self.unweighted[m - self.m_lo])


def count_weighted(
    window: WeightedWindow, method: str = "auto", workers: int = 1
) -> tuple[np.ndarray, float]:
    """Weighted counts on [3u, 6u] and their absolute error bound."""
    out, err = cube_convolve(window.values, method, workers)
    used_fft = method == "fft" or (method == "auto" and len(window.values) >= DIRECT_MAX_LEN)
    positive = window.values[window.values > 0]
    if used_fft and positive.size:
        # snapping is only sound when no true nonzero value can be that small
        floor = float(positive.min()) ** 3
        if err < floor / 2:
            out = np.where(np.abs(out) <= err, 0.0, out)
    return out, err


def count_unweighted(
    primes: list[int], u: int, method: str = "auto", workers: int = 1
) -> np.ndarray:
    """Ordered prime-triple counts on [3u, 6u] as int64."""
    ind = np.zeros(u + 1, dtype=np.int64)
    idx = np.asarray(primes, dtype=np.int64) - u
    if idx.size and (idx.min() < 0 or idx.max() > u):
        raise ValueError("primes must lie in [u, 2u]")
    ind[idx] = 1
    if method == "auto":
        method = "direct" if u + 1 < DIRECT_MAX_LEN else "fft"
    if method == "direct":
        return np.convolve(np.convolve(ind, ind), ind)
    raw, _ = cube_convolve(ind.astype(np.float64), "fft", workers)
    out = np.rint(raw)
    if np.max(np.abs(raw - out), initial=0.0) > 0.25:
        raise ArithmeticError("transform rounding too large for exact integer counts")
    return out.astype(np.int64)


def build_profile(
    window: WeightedWindow, primes: list[int], method: str = "auto", workers: int = 1
) -> CountProfile:
    weighted, err = count_weighted(window, method, workers)
    unweighted = count_unweighted(primes, window.u, method, workers)
    return CountProfile(u=window.u, weighted=weighted, unweighted=unweighted, weighted_error=err)


def brute_force_weighted(window: WeightedWindow) -> dict[int, float]:
    """Exhaustive ordered-triple sum; reference for small windows only."""
    ks, ws = window.support()
    out: dict[int, float] = {}
    for k1, w1 in zip(ks.tolist(), ws.tolist()):
        for k2, w2 in zip(ks.tolist(), ws.tolist()):
            for k3, w3 in zip(ks.tolist(), ws.tolist()):
                m = k1 + k2 + k3
                out[m] = out.get(m, 0.0) + w1 * w2 * w3
    return out


def verify_window(system, u: int, profile: CountProfile | None = None) -> list[int]:
    """Odd m in [4u, 5u] with no representation as a sum of three restricted primes."""
    if profile is None:
        counts = count_unweighted(restricted_set(system, u), u)
    else:
        counts = profile.unweighted
    return [m for m in range(4 * u + 1, 5 * u + 1, 2) if counts[m - 3 * u] == 0]
