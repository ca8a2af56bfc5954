import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadvar import eigenforms as ef
from quadvar import kloosterman as kl
from quadvar.oscillatory import bessel_j

N = 120

# Petersson norm of Delta (weight 12, level 1), a standard literature constant
DELTA_NORM_SQ = 1.035362056804320922e-6


def naive_mul(a, b, n):
    out = [0] * (n + 1)
    for i, x in enumerate(a[: n + 1]):
        if x:
            for j, y in enumerate(b[: n + 1 - i]):
                out[i + j] += x * y
    return out


def naive_delta(n):
    """q prod (1 - q^m)^24, one factor at a time."""
    series = [1] + [0] * n
    for m in range(1, n + 1):
        for _ in range(24):
            for i in range(n, m - 1, -1):
                series[i] -= series[i - m]
    return [0] + series[:n]


def naive_eisenstein(k, n):
    const = 240 if k == 4 else -504
    return [1] + [const * sum(d ** (k - 1) for d in range(1, m + 1) if m % d == 0) for m in range(1, n + 1)]


def test_tau_against_eta_product():
    assert list(ef.qexp_delta(N).coeffs) == naive_delta(N)


def test_tau_known_values():
    f = ef.eigenform(12, 10)
    assert [f.a(n) for n in (1, 2, 3, 5, 10)] == [1, -24, 252, 4830, -115920]


@pytest.mark.parametrize("k", [4, 6])
def test_eisenstein(k):
    assert list(ef.eisenstein(k, N).coeffs) == naive_eisenstein(k, N)


@pytest.mark.parametrize("k", sorted(ef.SUPPORTED_WEIGHTS))
def test_eigenform_product_structure(k):
    a, b = ef.SUPPORTED_WEIGHTS[k]
    series = naive_delta(N)
    for _ in range(a):
        series = naive_mul(series, naive_eisenstein(4, N), N)
    for _ in range(b):
        series = naive_mul(series, naive_eisenstein(6, N), N)
    assert list(ef.eigenform(k, N).coeffs) == series


def test_unsupported_weight():
    with pytest.raises(ValueError):
        ef.eigenform(24, 10)


@given(st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=40),
       st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=40))
def test_series_product_matches_convolution(a, b):
    n = max(len(a), len(b)) - 1
    pad = lambda s: s + [0] * (n + 1 - len(s))  # noqa: E731
    got = ef.QExpansion(tuple(pad(a))) * ef.QExpansion(tuple(pad(b)))
    assert list(got.coeffs) == naive_mul(pad(a), pad(b), n)


@pytest.mark.parametrize("k", sorted(ef.SUPPORTED_WEIGHTS))
def test_hecke_and_deligne(k):
    f = ef.eigenform(k, 2000)
    for m in range(1, 45):
        for n in range(1, 2000 // m + 1):
            assert ef.hecke_relation_residual(f, m, n) == 0
    f.validate()
    assert np.all(np.abs(f.eigenvalues[[2, 3, 5, 7, 1999]]) <= 2)


def test_hecke_residual_needs_coverage():
    with pytest.raises(ef.InsufficientTruncationError):
        ef.hecke_relation_residual(ef.eigenform(12, 50), 8, 9)


def test_eigenvalues_exact_normalisation():
    f = ef.eigenform(26, 500)
    for n in (2, 97, 500):
        assert f.lam(n) == pytest.approx(f.a(n) / n ** 12.5, rel=1e-14)


def corrupt(text, n, delta=1):
    lines = text.splitlines()
    key = f"{n},"
    idx = next(i for i, line in enumerate(lines) if line.startswith(key) and i > 2)
    m, a = lines[idx].split(",")
    lines[idx] = f"{m},{int(a) + delta}"
    return "\n".join(lines) + "\n"


def test_dump_load_roundtrip():
    f = ef.eigenform(16, 300)
    g = ef.load_eigenvalues(io.StringIO(ef.dump_eigenvalues(f)))
    assert g.coeffs == f.coeffs and (g.level, g.weight) == (1, 16)


@pytest.mark.parametrize("n", [1, 2, 6, 97, 300])
def test_load_rejects_single_corruption(n):
    text = ef.dump_eigenvalues(ef.eigenform(12, 300))
    with pytest.raises(ef.EigenDataError):
        ef.load_eigenvalues(corrupt(text, n))


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.replace("level,weight,n_max", "lvl,weight,n_max"),
        lambda t: t.replace("n,a_n", "n,an"),
        lambda t: t.replace("\n3,252\n", "\n"),
        lambda t: t.replace("1,12,50", "1,12,51"),
        lambda t: t.replace("\n4,-1472\n", "\n4,-1472,7\n"),
        lambda t: t.replace("\n4,-1472\n", "\n4,x\n"),
    ],
)
def test_load_rejects_malformed(mutate):
    text = ef.dump_eigenvalues(ef.eigenform(12, 50))
    with pytest.raises(ef.EigenDataError):
        ef.load_eigenvalues(mutate(text))


def test_calibration_matches_petersson_norm_of_delta():
    cal = ef.calibrate_harmonic_weight(ef.eigenform(12, 10))
    expected = math.gamma(11) / ((4 * math.pi) ** 11 * DELTA_NORM_SQ)
    assert cal.omega == pytest.approx(expected, rel=1e-12)
    assert cal.tail_bound < 1e-9
    assert cal.implied_l_value == pytest.approx(2 * math.pi**2 / (12 * cal.omega))


def test_kloosterman_bessel_sum_against_plain_loop():
    ms = np.array([1, 2, 3])
    got = ef.trace_sums(ms, np.array([11, 15]), np.arange(1, 301), chunk=64)
    for li, nu in enumerate((11, 15)):
        for i, m in enumerate(ms):
            for j, n in enumerate(ms):
                ref = math.fsum(
                    kl.kloosterman_sum(int(m), int(n), c) / c * bessel_j(nu, 4 * math.pi * math.sqrt(m * n) / c)
                    for c in range(1, 301)
                )
                assert got[li, i, j] == pytest.approx(ref, abs=1e-15)


def test_trace_sums_chunking_stable():
    ms, nus, cs = np.arange(1, 6), np.array([11]), np.arange(1, 2001)
    assert np.allclose(ef.trace_sums(ms, nus, cs, chunk=17), ef.trace_sums(ms, nus, cs), rtol=0, atol=1e-16)


def test_tail_bound_dominates_computed_tail():
    m, n, k, c0 = 3, 5, 12, ef.trace_cmax(3, 5, 12, tol=1e-6)
    tail = ef.trace_sums(np.array([m, n]), np.array([k - 1]), np.arange(c0 + 1, 4 * c0))[0, 0, 1]
    assert 2 * math.pi * abs(tail) <= ef.petersson_tail_bound(m, n, k, c0)
    assert ef.petersson_tail_bound(m, n, k, 2 * c0) < ef.petersson_tail_bound(m, n, k, c0)
    with pytest.raises(ValueError):
        ef.petersson_tail_bound(10, 10, 12, 5)


@pytest.mark.parametrize("k", [12, 18, 26])
def test_petersson_few_pairs(k):
    f = ef.eigenform(k, 20)
    for check in ef.petersson_check(f, [1, 2, 3, 7]):
        assert check.residual < 1e-9
    assert ef.petersson_residual(f, 2, 7) < 1e-9


@pytest.mark.parametrize("k", sorted(ef.SUPPORTED_WEIGHTS))
def test_lambda_multiplicative_on_coprime(k):
    f = ef.eigenform(k, 3000)
    for m in range(2, 40):
        for n in range(2, 3000 // m + 1, 7):
            if math.gcd(m, n) == 1:
                assert f.lam(m * n) == pytest.approx(f.lam(m) * f.lam(n), rel=1e-12, abs=1e-300)
