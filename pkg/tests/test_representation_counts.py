import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparse_goldbach.representation_counts import (
    CountProfile,
    brute_force_weighted,
    build_profile,
    count_unweighted,
    count_weighted,
    cube_convolve,
    profile_H,
    verify_window,
)
from sparse_goldbach.residue_system import system_for_basis
from sparse_goldbach.restricted_primes import restricted_set, weighted_window

L = math.log


def test_profile_H_examples():
    u = 1000
    assert profile_H(4 * u, u) == u * u / 2
    assert profile_H(4.5 * u, u) == 0.75 * u * u
    assert profile_H(5 * u, u) == u * u / 2
    with pytest.raises(ValueError):
        profile_H(4 * u - 1, u)


@given(st.integers(1, 10**6), st.floats(0, 1))
def test_profile_H_bounds(u, t):
    m = 4 * u + t * u
    h = profile_H(m, u)
    assert u * u / 2 - 1e-6 * u * u <= h <= 0.75 * u * u + 1e-6 * u * u


def test_weighted_examples(window10):
    w, err = count_weighted(window10)
    at = lambda m: w[m - 30]
    expected = 6 * L(11) * L(13) * L(19) + 3 * L(13) ** 2 * L(17)
    assert at(43) == pytest.approx(expected, rel=1e-12)
    assert at(43) == pytest.approx(164.58, abs=0.01)
    assert at(33) == pytest.approx(L(11) ** 3, rel=1e-12)
    assert at(32) == 0.0
    assert err >= 0


def test_unweighted_examples():
    n = count_unweighted([11, 13, 17, 19], 10)
    assert n[43 - 30] == 9 and n[33 - 30] == 1 and n[34 - 30] == 0
    with pytest.raises(ValueError):
        count_unweighted([23], 10)


def test_verify_window_examples(sys2):
    assert verify_window(sys2, 10) == []
    assert restricted_set(sys2, 2) == [3]
    assert verify_window(sys2, 2) == []
    empty = CountProfile(u=10, weighted=np.zeros(31), unweighted=np.zeros(31, dtype=np.int64), weighted_error=0.0)
    assert verify_window(sys2, 10, empty) == [41, 43, 45, 47, 49]


@pytest.mark.parametrize("basis", [[2], [2, 3], [2, 3, 5]])
@pytest.mark.parametrize("u", [10, 37, 100, 200])
def test_against_exhaustive_oracle(basis, u):
    system = system_for_basis(basis)
    window = weighted_window(system, u)
    oracle = brute_force_weighted(window)
    for method in ("direct", "fft"):
        out, _ = count_weighted(window, method)
        for i, val in enumerate(out):
            ref = oracle.get(3 * u + i, 0.0)
            assert abs(val - ref) <= 1e-9 * abs(ref) + 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=60))
def test_integer_convolution_paths_agree(xs):
    x = np.array(xs, dtype=np.int64)
    direct, err = cube_convolve(x, "direct")
    assert err == 0.0
    fft, ferr = cube_convolve(x.astype(float), "fft")
    assert np.all(np.abs(fft - direct) <= ferr)
    assert len(direct) == 3 * len(x) - 2


def test_unknown_method():
    with pytest.raises(ValueError):
        cube_convolve(np.ones(3), "wavelet")


def test_large_window_fft_matches_direct(sys6):
    u = 5000  # auto picks the transform path here
    window = weighted_window(sys6, u)
    primes = restricted_set(sys6, u)
    fast = build_profile(window, primes)
    slow_w, _ = count_weighted(window, "direct")
    slow_n = count_unweighted(primes, u, "direct")
    np.testing.assert_array_equal(fast.unweighted, slow_n)
    np.testing.assert_allclose(fast.weighted, slow_w, rtol=1e-9, atol=fast.weighted_error)


@pytest.mark.parametrize("basis", [[2], [2, 3, 5]])
def test_parity_and_log_floor(basis):
    system = system_for_basis(basis)
    u = 400
    prof = build_profile(weighted_window(system, u), restricted_set(system, u))
    ms = np.arange(3 * u, 6 * u + 1)
    assert np.all(prof.unweighted[ms % 2 == 0] == 0)
    assert np.all(prof.weighted >= prof.unweighted * math.log(u) ** 3 * (1 - 1e-12))
    assert prof.unweighted_at(3 * u - 1) == 0 and prof.weighted_at(6 * u + 1) == 0.0


def test_symmetry_of_ordered_counts(sys2):
    # ordered counts: every unordered triple {a,b,c} appears 6/3/1 times
    primes = restricted_set(sys2, 30)
    n = count_unweighted(primes, 30)
    brute = {}
    for a in primes:
        for b in primes:
            for c in primes:
                brute[a + b + c] = brute.get(a + b + c, 0) + 1
    for i, val in enumerate(n):
        assert val == brute.get(90 + i, 0)
