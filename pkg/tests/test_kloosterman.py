import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from quadvar import kloosterman as kl
from quadvar.kloosterman import TwistedSumParams


def e(x):
    return cmath.exp(2j * math.pi * x)


def brute_kloosterman(m, n, c):
    return sum(e((m * x + n * pow(x, -1, c)) / c) for x in range(c) if math.gcd(x, c) == 1) if c > 1 else 1.0


def brute_twisted(gamma, B, C, u, v, c):
    """The double sum straight from its definition, integer parameters only."""
    q = lambda t: gamma * t * t + B * t + C  # noqa: E731
    total = 0j
    for a in range(c):
        for b in range(c):
            phase = (2 * gamma * a * b + a * (B + u) + b * (B + v)) / c
            total += brute_kloosterman(q(a), q(b), c) * e(phase)
    return total


def mobius(n):
    out = 1
    for p in range(2, n + 1):
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
    return out


def test_small_values():
    assert abs(kl.kloosterman_sum(1, 1, 3) + 1) < 1e-10
    assert abs(kl.kloosterman_sum(1, 1, 2) - 1) < 1e-10
    for m, n in [(0, 0), (5, 7), (-3, 11)]:
        assert abs(kl.kloosterman_sum(m, n, 1) - 1) < 1e-10


def test_bad_modulus():
    with pytest.raises(ValueError):
        kl.kloosterman_sum(1, 1, 0)


@given(st.integers(-200, 200), st.integers(-200, 200), st.integers(1, 150))
def test_matches_brute_force(m, n, c):
    assert abs(kl.kloosterman_sum(m, n, c) - brute_kloosterman(m, n, c).real) < 1e-9 * c
    assert abs(brute_kloosterman(m, n, c).imag) < 1e-9 * c


@given(st.integers(-100, 100), st.integers(-100, 100), st.integers(1, 120), st.integers(1, 120))
def test_symmetries(m, n, c, a):
    assume(math.gcd(a, c) == 1)
    s = kl.kloosterman_sum(m, n, c)
    assert abs(s - kl.kloosterman_sum(n, m, c)) < 1e-9 * c
    assert abs(s - kl.kloosterman_sum(a * m, pow(a, -1, c) * n, c)) < 1e-9 * c
    assert abs(s) <= kl.weil_envelope(m, n, c) * (1 + 1e-12) or m == 0 or n == 0


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 40), st.integers(1, 40))
def test_multiplicative_in_c(m, n, c1, c2):
    assume(math.gcd(c1, c2) == 1)
    i1 = pow(c1, -1, c2) if c2 > 1 else 0
    i2 = pow(c2, -1, c1) if c1 > 1 else 0
    lhs = kl.kloosterman_sum(m, n, c1 * c2)
    rhs = kl.kloosterman_sum(i2 * i2 * m, n, c1) * kl.kloosterman_sum(i1 * i1 * m, n, c2)
    assert abs(lhs - rhs) < 1e-8 * c1 * c2


@pytest.mark.parametrize("c", [1, 2, 6, 12, 30, 97])
def test_ramanujan_sum_and_totient(c):
    for m in range(0, 25):
        g = math.gcd(m, c)
        expected = sum(mobius(c // d) * d for d in range(1, g + 1) if g % d == 0) if m else sum(
            math.gcd(x, c) == 1 for x in range(c)
        ) if c > 1 else 1
        assert abs(kl.kloosterman_sum(m, 0, c) - expected) < 1e-9 * c


def test_grid_and_matrix_agree_with_single_sums():
    grid = kl.kloosterman_grid(7, 5, 40)
    assert grid.values.shape == (40, 7, 5) and grid.c_max == 40
    for c in (1, 2, 9, 17, 40):
        mat = kl.kloosterman_matrix(c)
        for m in range(1, 8):
            for n in range(1, 6):
                ref = brute_kloosterman(m, n, c).real
                assert abs(grid.values[c - 1, m - 1, n - 1] - ref) < 1e-9 * c
                assert abs(mat[m % c, n % c] - ref) < 1e-9 * c
    assert np.all(np.abs(grid.values) <= grid.weil() * (1 + 1e-12))


# --- twisted sums -------------------------------------------------------------

small = st.integers(1, 10)
coef = st.integers(-12, 12)


@given(coef, coef, coef, coef, coef, small)
def test_twisted_direct_matches_definition(gamma, B, C, u, v, c):
    got = kl.twisted_sum_direct(TwistedSumParams(gamma, B, C, u, v, c))
    assert abs(got - brute_twisted(gamma, B, C, u, v, c)) < 1e-8 * c * c


def test_worked_case_vanishes():
    assert abs(kl.twisted_sum_direct(TwistedSumParams(1, 0, 1, 0, 0, 2))) < 1e-12


@given(coef, coef, coef, st.integers(1, 25))
def test_all_uv_matches_direct(gamma, B, C, c):
    grid = kl.twisted_sum_all_uv(gamma, B, C, c)
    for u, v in [(0, 0), (1, c - 1), (c // 2, c // 3), (c - 1, 1)]:
        p = TwistedSumParams(gamma, B, C, u, v, c)
        assert abs(grid[u % c, v % c] - kl.twisted_sum_direct(p)) < 1e-8 * c * c


@given(coef, coef, coef, coef, coef, st.integers(0, 15).map(lambda k: 2 * k + 1))
def test_gauss_route_matches_direct(gamma, B, C, u, v, c):
    assume(math.gcd(4 * gamma, c) == 1)
    p = TwistedSumParams(gamma, B, C, u, v, c)
    assert abs(kl.twisted_sum_gauss(p) - kl.twisted_sum_direct(p)) < 1e-6 * c * c


def test_gauss_route_rejects_shared_factor():
    with pytest.raises(ValueError):
        kl.twisted_sum_gauss(TwistedSumParams(3, 1, 1, 0, 0, 9))


@given(coef, coef, coef, coef, coef, st.integers(1, 15), st.integers(1, 15))
def test_multiplicativity_with_u_v_unchanged(gamma, B, C, u, v, c1, c2):
    assume(math.gcd(c1, c2) == 1)
    p = TwistedSumParams(gamma, B, C, u, v, c1 * c2)
    assert kl.twisted_multiplicativity_residual(p, c1, c2) < 1e-6 * p.c**2


def test_multiplicativity_rejects_bad_split():
    p = TwistedSumParams(1, 1, 1, 0, 0, 12)
    with pytest.raises(ValueError):
        kl.twisted_multiplicativity_residual(p, 2, 6)
    with pytest.raises(ValueError):
        kl.twisted_multiplicativity_residual(p, 5, 2)


@given(coef, coef, coef, coef, st.integers(1, 30))
def test_symmetric_in_u_v(gamma, B, C, u, c):
    v = (3 * u + 1) % c
    a = kl.twisted_sum_direct(TwistedSumParams(gamma, B, C, u, v, c))
    b = kl.twisted_sum_direct(TwistedSumParams(gamma, B, C, v, u, c))
    assert abs(a - b) < 1e-8 * c * c


@given(coef, coef, coef, coef, st.integers(1, 20).map(lambda k: 2 * k + 1))
def test_vanishing_criterion_implies_zero(gamma, B, C, u, c):
    v = c // 3 * 3 if c % 3 == 0 else c  # gcd(v, c) = 3 or c
    p = TwistedSumParams(gamma, B, C, u, v, c)
    if kl.vanishing_criterion(p):
        assert kl.vanishing_witness(p) is kl.Vanishing.PROVEN


def test_vanishing_witness_classes():
    assert kl.vanishing_witness(TwistedSumParams(1, 0, 1, 1, 3, 9)) is kl.Vanishing.PROVEN
    assert kl.vanishing_witness(TwistedSumParams(1, 0, 1, 0, 0, 5)) in (kl.Vanishing.NONZERO, kl.Vanishing.NUMERIC)


def test_half_integers():
    # odd c: halves are the inverse of 2 mod c
    half = TwistedSumParams(Fraction(1, 2), Fraction(1, 2), 1, 2, 3, 7)
    whole = TwistedSumParams(4, 4, 1, 2, 3, 7)  # 2 * 4 = 1 mod 7
    assert abs(kl.twisted_sum_direct(half) - kl.twisted_sum_direct(whole)) < 1e-9
    even = TwistedSumParams(Fraction(1, 2), 0, 1, 0, 0, 8)
    with pytest.raises(ValueError):
        kl.twisted_sum_direct(even)
    assert kl.twisted_sum_direct(even, halve_even=True) == kl.twisted_sum_direct(TwistedSumParams(1, 0, 1, 0, 0, 4))
    with pytest.raises(ValueError):
        TwistedSumParams(Fraction(1, 3), 0, 1, 0, 0, 5)


def test_bound_report():
    r = kl.bound_report(TwistedSumParams(3, 1, 2, 1, 5, 36))
    assert (r.c1, r.c2) == (9, 4) or r.c1 * r.c2 == 36
    assert r.ratio == pytest.approx(r.observed / r.reference)
    assert kl.bound_split(TwistedSumParams(0, 1, 2, 1, 5, 36)) == (1, 36)
