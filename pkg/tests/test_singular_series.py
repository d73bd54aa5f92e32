import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sparse_goldbach._arith import divisors, primes_upto, totient
from sparse_goldbach.residue_system import build_cover, system_for_basis
from sparse_goldbach.singular_series import (
    G_direct,
    G_prime,
    G_product,
    N_p,
    combinatorial_C,
    convolution_check,
    f_direct,
    f_partial_sum,
    factor_q,
    g_closed,
    g_direct,
    h_direct,
    h_eval,
    h_partial_sum,
    hsum,
    q_ell,
    sigma,
    sigma_prime,
)

F = Fraction


def brute_N(p, m, residues):
    return sum((a + b + c - m) % p == 0 for a in residues for b in residues for c in residues)


class TestReduction:
    def test_q_ell_examples(self):
        assert q_ell(3, 2, 1, 1)[1] == 6
        assert q_ell(2, 2, 1, 0)[1] == 2
        assert q_ell(1, 6, 1, 0)[1] == 1
        with pytest.raises(ValueError):
            q_ell(4, 2, 2, 0)

    @given(st.integers(1, 300), st.sampled_from([2, 6, 30, 210]), st.data())
    def test_q_ell_is_reduced_sum(self, q, q0, data):
        a = data.draw(st.integers(1, q).filter(lambda a: math.gcd(a, q) == 1))
        ell = data.draw(st.integers(0, q0 - 1))
        num, den = q_ell(q, q0, a, ell)
        assert F(num, den) == F(a, q) + F(ell, q0)
        assert math.gcd(num, den) == 1

    @given(st.integers(1, 10**6), st.sampled_from([2, 6, 30, 210, 15]))
    def test_factor_q(self, q, q0):
        d = factor_q(q, q0)
        assert d.qtilde * d.qhat == q
        assert math.gcd(d.qhat, q0) == 1
        assert all(q0 % p == 0 for p in range(2, d.qtilde + 1) if d.qtilde % p == 0 and all(p % r for r in range(2, p)))
        assert d.d == math.gcd(d.qtilde, q0)


class TestF:
    def test_f1_q0_2(self, sys2):
        # inner sum over l in {0, 1} is 1 + 1; cubed and divided by q0^3
        for m in (1, 7, 8):
            assert f_direct(1, m, sys2) == pytest.approx(1.0, abs=1e-12)

    def test_f2_equals_g2(self, sys2):
        for m in (7, 9, 11):
            assert f_direct(2, m, sys2) == pytest.approx(g_direct(2, m, sys2), abs=1e-12)
            assert f_direct(2, m, sys2) == pytest.approx(float(g_closed({2}, m, sys2)), abs=1e-12)

    def test_vanishes_when_qtilde_does_not_divide_q0(self, sys2, sys6):
        for m in (7, 8):
            assert abs(f_direct(4, m, sys2)) < 1e-12
            assert abs(f_direct(8, m, sys2)) < 1e-12
            assert abs(f_direct(12, m, sys6)) < 1e-12
            assert abs(f_direct(18, m, sys6)) < 1e-12

    def test_budget(self, sys30):
        with pytest.raises(ValueError):
            f_direct(10007, 7, sys30, budget=1000)


class TestG:
    def test_closed_examples(self, sys6):
        assert g_closed(set(), 7, sys6) == F(len(sys6.R0) ** 3, totient(6) ** 3)
        # S={2}, m odd: factor (-1 + 2*1) times |U_3|^3 = 8, over phi(6)^3 = 8
        assert g_closed({2}, 7, sys6) == F(1)
        # S={3}, m = 0 mod 3: factor (-8 + 3*2) = -2, times |U_2|^3 = 1, over 8
        assert g_closed({3}, 9, sys6) == F(-2, 8)
        with pytest.raises(ValueError):
            g_closed({5}, 7, sys6)

    @pytest.mark.parametrize("basis", [[2], [2, 3], [3, 5], [2, 3, 5]])
    @pytest.mark.parametrize("m", [7, 8, 9, 15, 30, 31, 101])
    def test_direct_matches_closed(self, basis, m):
        system = system_for_basis(basis)
        for r in range(len(basis) + 1):
            for S in itertools.combinations(basis, r):
                w = math.prod(S)
                assert g_direct(w, m, system) == pytest.approx(float(g_closed(S, m, system)), abs=1e-9)

    def test_direct_off_divisors(self, sys6):
        assert g_direct(4, 7, sys6) == 0.0
        assert g_direct(5, 7, sys6) == 0.0

    @pytest.mark.parametrize("p", [int(p) for p in primes_upto(60)])
    def test_N_p_brute_force(self, p):
        cover = build_cover(p)
        for m in range(p):
            assert N_p(m, cover) == brute_N(p, m, cover.unit_residues)
            assert N_p(m, cover, raw=True) == brute_N(p, m, cover.raw_residues)

    def test_G_prime_examples(self):
        c2, c3 = build_cover(2), build_cover(3)
        assert G_prime(2, 7, c2) == 2
        assert G_prime(3, 7, c3) == F(9, 8)
        assert G_prime(3, 9, c3) == F(3, 4)
        assert G_prime(2, 8, c2) == 0
        with pytest.raises(ValueError):
            G_prime(3, 7, c2)

    def test_G_direct_examples(self, sys2, sys6, sys30):
        assert G_direct(7, sys6) == F(9, 4)
        assert G_direct(8, sys2) == 0
        assert G_direct(7, sys30) == G_product(7, sys30)

    @pytest.mark.parametrize("basis", [[2, 3], [3, 5], [2, 3, 5], [2, 3, 5, 7]])
    def test_multiplicativity(self, basis):
        system = system_for_basis(basis)
        for m in range(1, 2 * system.q0 + 1):
            assert G_direct(m, system) == G_product(m, system)

    def test_multiplicativity_numeric(self, sys30):
        for m in (7, 8, 11, 25):
            assert G_direct(m, sys30, numeric=True) == pytest.approx(float(G_product(m, sys30)), abs=1e-9)

    def test_basis_too_large(self):
        with pytest.raises(ValueError):
            G_direct(7, system_for_basis([2, 3, 5, 7, 11]))


class TestH:
    def test_examples(self):
        assert h_eval(1, 7) == 1
        assert h_eval(5, 7) == F(1, 4**3)
        assert h_eval(7, 14) == F(-1, 36)
        assert h_eval(9, 7) == 0
        assert h_eval(3, 7, q0=6) == 0

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 100), st.integers(1, 100), st.integers(-10**6, 10**6))
    def test_multiplicative(self, v1, v2, m):
        if math.gcd(v1, v2) == 1:
            assert h_eval(v1 * v2, m) == h_eval(v1, m) * h_eval(v2, m)

    def test_ramanujan_path_matches_exponential_sum(self):
        for v in range(1, 201):
            for m in (1, 7, 12, 30, 105):
                assert abs(float(h_eval(v, m)) - h_direct(v, m)) < 1e-10

    def test_euler_product_matches_dirichlet_series(self):
        # m with many small factors against a neighbouring prime m
        for m in (15015, 15017):
            H = hsum(m, 2)
            errs = [abs(h_partial_sum(m, 2, V) - H.value) for V in (200, 2000, 20000)]
            assert errs[0] > errs[1] > errs[2]
            assert errs[2] < 1e-8
        ratio = hsum(15015, 2).value / hsum(15017, 2).value
        assert ratio == pytest.approx(h_partial_sum(15015, 2, 20000) / h_partial_sum(15017, 2, 20000), rel=1e-8)

    def test_hsum_tail_and_empty_product(self):
        H = hsum(7, 2)
        assert H.value > 0 and 0 < H.radius < 1e-9
        q0 = math.prod(int(p) for p in primes_upto(100))
        E = hsum(1, q0, cutoff=100)
        assert abs(E.value - 1) <= E.radius + 1e-15
        with pytest.raises(ValueError):
            hsum(7, 2, cutoff=50)


class TestC:
    def test_examples(self):
        assert combinatorial_C(1, [2]) == 8
        assert combinatorial_C(1, [3]) == F(27, 8)
        assert combinatorial_C(2, [2, 3]) == 27
        assert combinatorial_C(0, [2]) == 1

    def test_up_to_five(self):
        ps = [2, 3, 5, 7, 11]
        for b in range(6):
            q = math.prod(ps[:b])
            assert combinatorial_C(b, ps) == F(q**3, totient(q) ** 3)
        with pytest.raises(ValueError):
            combinatorial_C(6, ps)


class TestSigma:
    def test_even_vanishes(self, sys2, sys6):
        for m in (8, 100, 4002):
            assert sigma(m, sys2).value == 0.0
            assert sigma(m, sys6).value == 0.0

    def test_odd_positive(self, sys2, sys6, sys30):
        assert sigma(7, sys2).value > 0
        rng = random.Random(3)
        for system in (sys2, sys6, sys30):
            for _ in range(100):
                m = 2 * rng.randrange(1, 10**7) + 1
                assert sigma(m, system).value > 0
                assert G_product(m, system) >= F(system.q0, totient(system.q0) ** 3)

    def test_partial_sums_converge(self, sys6):
        # tail of sum f(q) for q > 200 is at most sum_w |g(w)| * sum_{v > 200/w} |h(v)|
        m = 7
        part = f_partial_sum(m, sys6, 200)
        S = sigma(m, sys6)
        radius = S.radius + 1e-8
        for w in divisors(6):
            gw = abs(g_direct(w, m, sys6))
            radius += gw * math.fsum(abs(float(h_eval(v, m, 6))) for v in range(200 // w + 1, 20001))
        assert abs(part - S.value) <= radius
        assert abs(part - S.value) < 1e-3

    def test_convolution_identity(self, sys2, sys6):
        for system in (sys2, sys6):
            for m in (7, 11, 15):
                assert convolution_check(m, system, 60) < 1e-9

    def test_sigma_prime(self, sys2):
        u = 1000
        s = sigma(4501, sys2).value
        # H(4501, 1000) = 10^6 - (501^2 + 499^2) / 2 = 749999
        assert sigma_prime(4501, u, sys2) == pytest.approx(s * 0.749999, rel=1e-12)
        # H(4001, 1000) = 10^6 - (1 + 999^2) / 2 = 500999
        assert sigma_prime(4001, u, sys2) == pytest.approx(sigma(4001, sys2).value * 0.500999, rel=1e-12)
        with pytest.raises(ValueError):
            sigma_prime(3999, u, sys2)

    def test_sigma_prime_at_landmarks(self, sys6):
        u = 10
        assert sigma_prime(45, u, sys6) == pytest.approx(0.75 * sigma(45, sys6).value)
        assert sigma_prime(41, u, sys6) == pytest.approx(sigma(41, sys6).value * (100 - 0.5 * (1 + 81)) / 100)
