import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadvar import eigenforms as ef
from quadvar import variance as va
from quadvar.variance import ExperimentConfig, QuadraticPoly

SMALL = dict(K=14, theta=0.45, X=4)


def test_poly_basics():
    q = QuadraticPoly.parse("1, 1, 1")
    assert q.discriminant == -3 and q.irreducible and q.integer_valued
    assert [q.value(r) for r in range(4)] == [1, 3, 7, 13]
    half = QuadraticPoly.parse("1/2, 1/2, 1")
    assert half.integer_valued and half.value(3) == 7
    assert not QuadraticPoly.parse("1/2, 0, 0").integer_valued
    assert not QuadraticPoly(1, 0, -4).irreducible
    assert not QuadraticPoly(2, 3, 1).irreducible
    with pytest.raises(ValueError):
        QuadraticPoly(0, 1, 1)
    with pytest.raises(ValueError):
        QuadraticPoly.parse("1, 2")
    with pytest.raises(ValueError):
        QuadraticPoly(Fraction(1, 3), 0, 1)


@pytest.mark.parametrize(
    "changes, constraint",
    [
        (dict(theta=0.2), "1/3 < theta < 1"),
        (dict(theta=1.0), "1/3 < theta < 1"),
        (dict(X=20), "0 < X <= K"),
        (dict(psi_l=1.0), "psi support parameter l > 1"),
        (dict(eps0=0.5), "eps0 < min((3 theta - 1)/20, (1 - theta)/2, eps/10)"),
        (dict(eps1=1.0), "eps1 < (3 theta - 1)/12"),
    ],
)
def test_config_constraints_are_named(changes, constraint):
    with pytest.raises(va.ConfigError) as info:
        ExperimentConfig(**{**dict(K=16, theta=0.6, X=10), **changes})
    assert info.value.constraint == constraint


def test_default_epsilons_are_admissible():
    cfg = ExperimentConfig(K=16, theta=0.6, X=10)
    assert 0 < cfg.eps0 < cfg.eps2 < 2 * cfg.eps / 5
    assert set(cfg.split_thresholds()) == {"c_main", "c_tail"}


def test_cusp_dimension():
    dims = {k: va.cusp_dimension(k) for k in range(2, 40, 2)}
    assert [k for k, d in dims.items() if d == 1] == [12, 16, 18, 20, 22, 26]
    assert dims[14] == 0 and dims[24] == 2 and dims[36] == 3
    with pytest.raises(ValueError):
        va.cusp_dimension(13)


def test_family_weights():
    w = va.family_weights(ExperimentConfig(K=16, theta=0.6, X=10))
    assert w == {12: 1.0, 14: 1.0, 16: 1.0, 18: 1.0, 20: 1.0}


@given(st.integers(-3, 3).filter(bool), st.integers(-6, 6), st.integers(-9, 9), st.integers(-30, 30))
def test_diagonal_pairs_brute(a, b, c, r1):
    q = QuadraticPoly(a, b, c)
    target = abs(q.value(r1))
    brute = [r for r in range(-60, 61) if abs(q.value(r)) == target]
    got = va.diagonal_pairs(q, r1)
    assert len(got) <= 4
    assert [r for r in got if -60 <= r <= 60] == brute


def test_direct_route_brute_force():
    cfg = ExperimentConfig(**SMALL)
    n_max = va.required_n_max(cfg.poly, cfg.psi, cfg.X)
    family = va.level_one_family(cfg, n_max)
    result = va.variance_direct(family, cfg)
    for k, f in family.items():
        rs = [r for r in range(1, 50) if cfg.X / cfg.psi_l < r < cfg.X * cfg.psi_l]
        s = sum(f.lam(cfg.poly.value(r)) * float(cfg.psi(r / cfg.X)) for r in rs)
        assert result.per_weight[k] == pytest.approx(f.omega * s * s / cfg.X, rel=1e-12)
    assert result.per_weight[14] == 0.0
    assert result.normalised == pytest.approx(result.smoothed / (2 * math.pi**2))


def test_diagonal_is_nonnegative_and_counts_pairs():
    cfg = ExperimentConfig(**SMALL)
    value, per_weight, pairs = va.diagonal_term(cfg)
    # x^2 + x + 1 is increasing on r >= 1, so only r1 = r2 pairs survive
    rs, w = va._terms(cfg.poly, cfg.psi, cfg.X)
    assert pairs == len(rs)
    assert value == pytest.approx(sum(va.family_weights(cfg).values()) * float(np.sum(w * w)) / cfg.X)
    assert value >= 0 and all(v >= 0 for v in per_weight.values())


@pytest.mark.parametrize(
    "cfg",
    [
        ExperimentConfig(**SMALL),
        ExperimentConfig(K=14, theta=0.45, X=4, poly=QuadraticPoly.parse("1/2, 1/2, 1")),
        ExperimentConfig(K=16, theta=0.5, X=6, poly=QuadraticPoly(1, 0, 1)),
    ],
)
def test_two_routes_agree(cfg):
    report = va.run_experiment(cfg)
    assert report.passed
    assert report.residual < 1e-9 * max(1.0, abs(report.direct))
    assert report.direct_sharp <= report.direct + 1e-15
    assert report.tail_bound < cfg.tail_tol
    # a weight with no cusp forms has spectral side zero, so its two trace terms cancel
    w14 = report.per_weight[14]
    assert w14["diagonal"] + w14["off_diagonal"] == pytest.approx(0.0, abs=1e-10)


def test_missing_weights_are_reported():
    cfg = ExperimentConfig(K=26, theta=0.5, X=10)
    with pytest.raises(va.MissingWeightError) as info:
        va.run_experiment(cfg)
    assert 24 in info.value.weights


def test_reducible_poly_rejected():
    with pytest.raises(va.ConfigError):
        va.run_experiment(ExperimentConfig(K=16, theta=0.6, X=10, poly=QuadraticPoly(1, 0, -4)))


def test_cancellation_profile_within_trivial_bound():
    f = ef.eigenform(12, 30000)
    prof = va.cancellation_profile(f, QuadraticPoly(1, 1, 1), va.ExperimentConfig(K=16, theta=0.6, X=10).psi,
                                   [20, 40, 80])
    assert len(prof.sums) == 3 and math.isfinite(prof.slope)
    assert all(abs(s) <= b + 1e-12 for s, b in zip(prof.sums, prof.trivial_bounds))
