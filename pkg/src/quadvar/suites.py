"""Verifier suites shared by the command line and the acceptance tests.

Each suite returns a SuiteResult: one row per checked case, in a fixed order,
plus a summary and a pass flag. Random draws come from numpy's default_rng
seeded explicitly, so a (suite, seed) pair always produces the same rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import arithmetic, eigenforms, kloosterman, oscillatory
from .kloosterman import BOUND_EPS, TwistedSumParams
from .windows import PlateauWindow

__all__ = [
    "SuiteResult",
    "bessel_sum_suite",
    "bounds_suite",
    "crg_suite",
    "fresnel_suite",
    "gauss_route_suite",
    "gauss_sum_suite",
    "kloosterman_suite",
    "multiplicativity_suite",
    "petersson_suite",
    "stationary_suite",
    "symmetry_suite",
    "vanishing_suite",
]

IDENTITY_TOL = 1e-6


@dataclass
class SuiteResult:
    name: str
    rows: list[dict]
    passed: bool
    summary: dict = field(default_factory=dict)


def _coprime_splits(c: int) -> list[tuple[int, int]]:
    return [(d, c // d) for d in range(2, c) if c % d == 0 and math.gcd(d, c // d) == 1 and d < c // d]


# --- Kloosterman --------------------------------------------------------------


def kloosterman_suite(c_max: int = 1000, mn_max: int = 50) -> SuiteResult:
    """Reality and the Weil envelope on the full grid m, n <= mn_max, c <= c_max."""
    grid = kloosterman.kloosterman_grid(mn_max, mn_max, c_max)
    rows = []
    worst_ratio = 0.0
    worst_imag = 0.0
    ok = True
    weil = grid.weil()
    for idx in range(grid.c_max):
        c = idx + 1
        ratio = float(np.max(np.abs(grid.values[idx]) / weil[idx]))
        imag = float(grid.imag[idx] / c)
        good = imag < 1e-9 and ratio <= 1.0 + 1e-9
        ok &= good
        worst_ratio = max(worst_ratio, ratio)
        worst_imag = max(worst_imag, imag)
        rows.append({"c": c, "max_weil_ratio": ratio, "imag_over_c": imag, "ok": good})
    return SuiteResult("kloosterman", rows, ok, {"max_weil_ratio": worst_ratio, "max_imag_over_c": worst_imag})


def gauss_sum_suite(c_max: int = 499) -> SuiteResult:
    """Direct quadratic Gauss sums against (n/c) eps_c sqrt(c) for odd c <= c_max, every unit n."""
    rows = []
    ok = True
    worst = 0.0
    for c in range(1, c_max + 1, 2):
        units, _ = arithmetic.units(c)
        err = max(abs(arithmetic.gauss_sum(int(n), c) - arithmetic.gauss_sum(int(n), c, "closed_form")) for n in units)
        rel = err / math.sqrt(c)
        good = rel < 1e-9
        ok &= good
        worst = max(worst, rel)
        rows.append({"c": c, "units": len(units), "max_error_over_sqrt_c": rel, "ok": good})
    return SuiteResult("gauss_sum", rows, ok, {"max_error_over_sqrt_c": worst})


# --- twisted sums -------------------------------------------------------------


def multiplicativity_suite(cases: int = 1000, seed: int = 0, c_limit: int = 200, exhaustive: int = 60) -> SuiteResult:
    """Seeded random coprime splits with c <= c_limit, then every split of every c <= exhaustive."""
    rng = np.random.default_rng(seed)
    splittable = [c for c in range(6, c_limit + 1) if _coprime_splits(c)]
    rows = []
    ok = True
    worst = 0.0
    for case in range(cases):
        c = int(rng.choice(splittable))
        splits = _coprime_splits(c)
        c1, c2 = splits[int(rng.integers(len(splits)))]
        gamma, B, C, u, v = (int(t) for t in rng.integers(-c, c + 1, size=5))
        p = TwistedSumParams(gamma, B, C, u, v, c)
        res = kloosterman.twisted_multiplicativity_residual(p, c1, c2) / c**2
        good = res < IDENTITY_TOL
        ok &= good
        worst = max(worst, res)
        rows.append({"kind": "random", "case": case, "gamma": gamma, "B": B, "C": C, "u": u, "v": v,
                     "c1": c1, "c2": c2, "residual_over_c2": res, "ok": good})
    for c in range(6, exhaustive + 1):
        for c1, c2 in _coprime_splits(c):
            gamma, B, C = (int(t) for t in rng.integers(-c, c + 1, size=3))
            res = kloosterman.multiplicativity_residual_all_uv(gamma, B, C, c1, c2) / c**2
            good = res < IDENTITY_TOL
            ok &= good
            worst = max(worst, res)
            rows.append({"kind": "all_uv", "case": c, "gamma": gamma, "B": B, "C": C, "u": "*", "v": "*",
                         "c1": c1, "c2": c2, "residual_over_c2": res, "ok": good})
    return SuiteResult("multiplicativity", rows, ok, {"max_residual_over_c2": worst, "cases": len(rows)})


def _draw_unit_gamma(rng, c: int, need) -> int:
    while True:
        gamma = int(rng.integers(1, 4 * c + 1))
        if need(gamma):
            return gamma


def gauss_route_suite(c_max: int = 99, draws: int = 20, seed: int = 0) -> SuiteResult:
    """Closed form against the definition for every odd c <= c_max and all (u, v)."""
    rng = np.random.default_rng(seed)
    rows = []
    ok = True
    worst = 0.0
    for c in range(3, c_max + 1, 2):
        for _ in range(draws):
            gamma = _draw_unit_gamma(rng, c, lambda g: math.gcd(4 * g, c) == 1)
            B, C = (int(t) for t in rng.integers(-c, c + 1, size=2))
            direct = kloosterman.twisted_sum_all_uv(gamma, B, C, c)
            closed = kloosterman.twisted_sum_gauss_all_uv(gamma, B, C, c)
            res = float(np.max(np.abs(direct - closed))) / c**2
            good = res < IDENTITY_TOL
            ok &= good
            worst = max(worst, res)
            rows.append({"c": c, "gamma": gamma, "B": B, "C": C, "residual_over_c2": res, "ok": good})
    return SuiteResult("gauss_route", rows, ok, {"max_residual_over_c2": worst})


def _nondividing_mask(c: int) -> np.ndarray:
    u = np.arange(c)[:, None]
    v = np.arange(c)[None, :]
    g = np.gcd(v, c)
    return u % g != 0


def vanishing_suite(c_max: int = 60, draws: int = 20, seed: int = 0) -> SuiteResult:
    """|S| < 1e-6 c^2 whenever gcd(4c, gamma) = 1 and gcd(v, c) does not divide u."""
    rng = np.random.default_rng(seed)
    rows = []
    ok = True
    worst = 0.0
    for c in range(3, c_max + 1, 2):
        mask = _nondividing_mask(c)
        if not mask.any():
            continue
        for _ in range(draws):
            gamma = _draw_unit_gamma(rng, c, lambda g: math.gcd(4 * c, g) == 1)
            B, C = (int(t) for t in rng.integers(-c, c + 1, size=2))
            values = kloosterman.twisted_sum_all_uv(gamma, B, C, c)
            biggest = float(np.max(np.abs(values[mask]))) / c**2
            good = biggest < IDENTITY_TOL
            ok &= good
            worst = max(worst, biggest)
            rows.append({"c": c, "gamma": gamma, "B": B, "C": C, "pairs": int(mask.sum()),
                         "max_abs_over_c2": biggest, "ok": good})
    return SuiteResult("vanishing", rows, ok, {"max_abs_over_c2": worst})


def symmetry_suite(c_max: int = 30, seed: int = 0) -> SuiteResult:
    """S(u, v) = S(v, u) for every (u, v), from the a <-> b symmetry of the definition."""
    rng = np.random.default_rng(seed)
    rows = []
    ok = True
    for c in range(1, c_max + 1):
        gamma, B, C = (int(t) for t in rng.integers(-c, c + 1, size=3))
        values = kloosterman.twisted_sum_all_uv(gamma, B, C, c)
        res = float(np.max(np.abs(values - values.T))) / c**2
        good = res < IDENTITY_TOL
        ok &= good
        rows.append({"c": c, "gamma": gamma, "B": B, "C": C, "residual_over_c2": res, "ok": good})
    return SuiteResult("symmetry", rows, ok)


def bounds_suite(c_max: int = 60, gammas=(1, 2, 3, 4, 6), seed: int = 0, eps: float = BOUND_EPS) -> SuiteResult:
    """Empirical sup of |S| / ((v,c1) c1^(3/2) c2^(5/2+eps)) over c <= c_max, all (u, v).

    Cases in the vanishing branch, (v, c1) not dividing u, must be zero instead.
    """
    rng = np.random.default_rng(seed)
    rows = []
    ok = True
    sup = 0.0
    for c in range(1, c_max + 1):
        for gamma in gammas:
            B, C = (int(t) for t in rng.integers(-c, c + 1, size=2))
            values = np.abs(kloosterman.twisted_sum_all_uv(gamma, B, C, c))
            c1, c2 = kloosterman.bound_split(TwistedSumParams(gamma, B, C, 0, 0, c))
            u = np.arange(c)[:, None]
            g = np.gcd(np.arange(c)[None, :], c1)
            reference = g * c1**1.5 * c2 ** (2.5 + eps)
            zero_branch = np.broadcast_to(u % g != 0, values.shape)
            ratio = values / reference
            branch_max = float(np.max(values[zero_branch])) / c**2 if zero_branch.any() else 0.0
            ratio_max = float(np.max(ratio[~zero_branch])) if (~zero_branch).any() else 0.0
            good = branch_max < IDENTITY_TOL and math.isfinite(ratio_max)
            ok &= good
            sup = max(sup, ratio_max)
            rows.append({"c": c, "gamma": gamma, "B": B, "C": C, "c1": c1, "c2": c2,
                         "max_ratio": ratio_max, "zero_branch_max_over_c2": branch_max, "ok": good})
    return SuiteResult("bounds", rows, ok, {"sup_ratio": sup, "eps": eps})


# --- oscillatory --------------------------------------------------------------


def bessel_sum_suite(xs=(0.5, 5.0, 50.0), window: PlateauWindow | None = None) -> SuiteResult:
    g = window or PlateauWindow(30.0, 50.0)
    rows = []
    ok = True
    for x in xs:
        r = oscillatory.bessel_sum_identity(x, g)
        good = r.residual < IDENTITY_TOL
        ok &= good
        rows.append({"identity": r.name, "x": x, "lhs": r.lhs, "rhs": r.rhs, "residual": r.residual,
                     "refined_residual": r.refined_residual, "nodes": r.nodes, "ok": good})
    return SuiteResult("bessel_sum", rows, ok)


def fresnel_suite(xs=(1.0, 10.0, 100.0), window: PlateauWindow | None = None) -> SuiteResult:
    g = window or PlateauWindow(10.0, 30.0, flat=0.0, label="bump")
    rows = []
    ok = True
    for x in xs:
        for parity in ("sin", "cos"):
            r = oscillatory.fresnel_identity(x, g, parity)
            # the refined residual must not be worse by more than a factor 2
            good = r.residual < IDENTITY_TOL and r.refined_residual < max(2 * r.residual, 1e-12)
            ok &= good
            rows.append({"identity": r.name, "x": x, "lhs": r.lhs, "rhs": r.rhs, "residual": r.residual,
                         "refined_residual": r.refined_residual, "nodes": r.nodes, "ok": good})
    return SuiteResult("fresnel", rows, ok)


def stationary_suite(xs=(1e2, 1e3, 1e4), y: float = 1.0) -> SuiteResult:
    """Leading-order error at each x; passes iff it strictly decreases along xs."""
    rows = []
    errors = []
    for x in xs:
        r = oscillatory.stationary_phase_check(x, y)
        errors.append(r.rel_error)
        rows.append({"x": x, "y": y, "quadrature_re": r.quadrature.real, "quadrature_im": r.quadrature.imag,
                     "approx_re": r.approx.real, "approx_im": r.approx.imag, "rel_error": r.rel_error,
                     "corrected_rel_error": r.corrected_rel_error})
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    tail = oscillatory.monotone_tail_check(xs[-1], y)
    summary = {"strictly_decreasing": decreasing, "tail_integral": tail.integral, "tail_bound": tail.bound}
    return SuiteResult("stationary", rows, decreasing and tail.holds, summary)


def crg_suite(ks=(50, 100, 200, 400), theta: float = 0.5, rs=(0, 1, 2, 4), spread: float = 4.0) -> SuiteResult:
    """c_r(g_K) K^((r-1) theta) for g_K(xi) = u((xi + 1 - K)/K^theta); bounded within ``spread``."""
    rows = []
    ok = True
    for r in rs:
        scaled = []
        for K in ks:
            g = PlateauWindow.family(K - 1.0, K**theta)
            value = oscillatory.c_r_norm(g, r)
            scaled.append(value * K ** ((r - 1) * theta))
            rows.append({"r": r, "K": K, "c_r": value, "scaled": scaled[-1]})
        ratio = max(scaled) / min(scaled)
        ok &= ratio <= spread
        rows.append({"r": r, "K": "spread", "c_r": float("nan"), "scaled": ratio})
    return SuiteResult("crg", rows, ok)


# --- trace formula ------------------------------------------------------------


def petersson_suite(weight: int = 12, m_max: int = 10, data: eigenforms.EigenformData | None = None) -> SuiteResult:
    f = data if data is not None else eigenforms.eigenform(weight, max(2, m_max * m_max))
    cal = eigenforms.calibrate_harmonic_weight(f)
    f = f.with_omega(cal.omega)
    checks = eigenforms.petersson_check(f, range(1, m_max + 1))
    rows = []
    ok = True
    for ch in checks:
        good = ch.residual < IDENTITY_TOL and ch.tail_bound < 1e-9
        ok &= good
        rows.append({"weight": ch.weight, "m": ch.m, "n": ch.n, "c_max": ch.c_max, "spectral": ch.spectral,
                     "geometric": ch.geometric, "residual": ch.residual, "tail_bound": ch.tail_bound, "ok": good})
    summary = {"omega": cal.omega, "correction": cal.correction, "implied_l_value": cal.implied_l_value}
    return SuiteResult("petersson", rows, ok, summary)
