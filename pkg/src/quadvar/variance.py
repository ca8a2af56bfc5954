"""Smoothed variance of quadratic-polynomial eigenvalue sums, computed two ways.

For each even weight k in a window around K and each eigenform f of weight k,
A_f = sum_r lambda_f(|q(r)|) psi(r/X). The direct route sums
omega_f |A_f|^2 over forms with the family window u((k - K)/K^theta). The
trace formula rewrites the same quantity as a diagonal part, counting pairs
with |q(r1)| = |q(r2)|, plus an off-diagonal Kloosterman-Bessel part.
Agreement of the two is the check.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .eigenforms import (
    SUPPORTED_WEIGHTS,
    EigenformData,
    calibrate_harmonic_weight,
    eigenform,
    petersson_tail_bound,
    trace_sums,
)
from .windows import PlateauWindow, SmoothWindow

__all__ = [
    "CancellationProfile",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "MissingWeightError",
    "OffDiagonal",
    "PolyValidation",
    "QuadraticPoly",
    "cancellation_profile",
    "cusp_dimension",
    "diagonal_pairs",
    "diagonal_term",
    "family_weights",
    "level_one_family",
    "off_diagonal_term",
    "poly_eigen_sum",
    "run_experiment",
    "validate_poly",
    "variance_direct",
]

TWO_PI_SQ = 2.0 * math.pi**2


class ConfigError(ValueError):
    """An experiment parameter violates a stated constraint; ``constraint`` names it."""

    def __init__(self, constraint: str, detail: str = "") -> None:
        super().__init__(f"constraint violated: {constraint}" + (f" ({detail})" if detail else ""))
        self.constraint = constraint


class MissingWeightError(LookupError):
    """Some weight in the family window has forms but no supplied data."""

    def __init__(self, weights: list[int]) -> None:
        super().__init__(f"no eigenform data for weights {weights}")
        self.weights = weights


# --- polynomial ---------------------------------------------------------------


def _half(value, name: str) -> Fraction:
    f = Fraction(value)
    if f.denominator not in (1, 2):
        raise ValueError(f"{name} must have denominator 1 or 2, got {value}")
    return f


@dataclass(frozen=True)
class QuadraticPoly:
    """q(x) = A x^2 + B x + C with A, B, C in (1/2)Z, A != 0."""

    A: Fraction
    B: Fraction
    C: Fraction

    def __post_init__(self) -> None:
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, _half(getattr(self, name), name))
        if self.A == 0:
            raise ValueError("A must be nonzero")

    @classmethod
    def parse(cls, text: str) -> QuadraticPoly:
        """From 'A, B, C', e.g. '1, 1, 1' or '1/2, 1/2, 1'."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 'A, B, C', got {text!r}")
        return cls(*(Fraction(p) for p in parts))

    def __call__(self, r: int) -> Fraction:
        return self.A * r * r + self.B * r + self.C

    @property
    def discriminant(self) -> Fraction:
        return self.B * self.B - 4 * self.A * self.C

    @property
    def integer_valued(self) -> bool:
        return all(self(r).denominator == 1 for r in (0, 1, 2))

    @property
    def irreducible(self) -> bool:
        d = self.discriminant
        if d < 0:
            return True
        num, den = d.numerator, d.denominator
        return not (math.isqrt(num) ** 2 == num and math.isqrt(den) ** 2 == den)

    def value(self, r: int) -> int:
        v = self(r)
        if v.denominator != 1:
            raise ValueError(f"q({r}) = {v} is not an integer")
        return int(v)

    def r_value(self, r: int) -> Fraction:
        """R = 2 A r + B."""
        return 2 * self.A * r + self.B

    def __str__(self) -> str:
        return f"{self.A}*x^2 + {self.B}*x + {self.C}"


@dataclass(frozen=True)
class PolyValidation:
    integer_valued: bool
    irreducible: bool
    a_small: bool
    b_small: bool
    c_small: bool

    @property
    def identity_ok(self) -> bool:
        """The two-route identity only needs integer values and no zeros."""
        return self.integer_valued and self.irreducible

    @property
    def regime_ok(self) -> bool:
        return all(asdict(self).values())

    def failures(self) -> list[str]:
        return [k for k, v in asdict(self).items() if not v]


# --- configuration ------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one variance run.

    The epsilons default to half of their tightest admissible bound, so a
    config that only sets K, theta and X is always admissible.
    """

    K: float
    theta: float
    X: float
    poly: QuadraticPoly = field(default_factory=lambda: QuadraticPoly(1, 1, 1))
    psi_l: float = 2.0
    eps: float = 0.1
    eps0: float | None = None
    eps1: float | None = None
    eps2: float | None = None
    c_max: int | None = None
    tail_tol: float = 1e-9
    two_route_tol: float = 1e-4

    def __post_init__(self) -> None:
        third = (3 * self.theta - 1) if 1 / 3 < self.theta < 1 else None
        if self.eps0 is None and third is not None:
            object.__setattr__(self, "eps0", 0.5 * min(third / 20, (1 - self.theta) / 2, self.eps / 10))
        if self.eps1 is None and third is not None:
            object.__setattr__(self, "eps1", 0.5 * third / 12)
        if self.eps2 is None and self.eps0 is not None:
            object.__setattr__(self, "eps2", 0.5 * (self.eps0 + 2 * self.eps / 5))
        self.check()

    def check(self) -> None:
        def need(ok: bool, name: str, detail: str = "") -> None:
            if not ok:
                raise ConfigError(name, detail)

        need(self.K > 0, "K > 0", f"K = {self.K}")
        need(1 / 3 < self.theta < 1, "1/3 < theta < 1", f"theta = {self.theta}")
        need(0 < self.X <= self.K, "0 < X <= K", f"X = {self.X}, K = {self.K}")
        need(self.psi_l > 1, "psi support parameter l > 1", f"l = {self.psi_l}")
        need(self.eps > 0, "eps > 0")
        for name in ("eps0", "eps1", "eps2"):
            need(getattr(self, name) > 0, f"{name} > 0")
        third = 3 * self.theta - 1
        bound0 = min(third / 20, (1 - self.theta) / 2, self.eps / 10)
        need(self.eps0 < bound0, "eps0 < min((3 theta - 1)/20, (1 - theta)/2, eps/10)", f"eps0 = {self.eps0}")
        need(self.eps1 < third / 12, "eps1 < (3 theta - 1)/12", f"eps1 = {self.eps1}")
        need(self.eps0 < self.eps2 < 2 * self.eps / 5, "eps0 < eps2 < 2 eps/5", f"eps2 = {self.eps2}")
        need(self.c_max is None or self.c_max >= 1, "c_max >= 1")
        need(self.tail_tol > 0 and self.two_route_tol > 0, "tolerances > 0")

    @property
    def psi(self) -> PlateauWindow:
        return PlateauWindow(1.0 / self.psi_l, self.psi_l, label="psi")

    @property
    def family_scale(self) -> float:
        return self.K**self.theta

    def split_thresholds(self) -> dict[str, float]:
        """The c-splitting scales of the off-diagonal analysis, reported only."""
        return {
            "c_main": self.X ** (2 + self.eps0) * self.K ** (-1 - self.theta + self.eps1),
            "c_tail": self.K**10,
        }


def validate_poly(q: QuadraticPoly, X: float, cfg: ExperimentConfig) -> PolyValidation:
    """Structural checks plus the size regime A <= X^eps0, |B| <= X^(1/2), |C| <= X^(1-eps0)."""
    return PolyValidation(
        integer_valued=q.integer_valued,
        irreducible=q.irreducible,
        a_small=abs(q.A) <= X**cfg.eps0,
        b_small=abs(q.B) <= X**0.5,
        c_small=abs(q.C) <= X ** (1 - cfg.eps0),
    )


# --- weights ------------------------------------------------------------------


def cusp_dimension(k: int) -> int:
    """dim S_k(SL2(Z)) for even k >= 2."""
    if k < 2 or k % 2:
        raise ValueError("weight must be even and >= 2")
    if k < 12 or k == 14:
        return 0
    return k // 12 - (1 if k % 12 == 2 else 0)


def family_window(cfg: ExperimentConfig) -> PlateauWindow:
    """k -> u((k - K)/K^theta) with the standard plateau."""
    return PlateauWindow.family(cfg.K, cfg.family_scale, label="family")


def family_weights(cfg: ExperimentConfig) -> dict[int, float]:
    """Even k >= 4 with u((k - K)/K^theta) > 0, mapped to that value.

    k = 2 is left out of both routes: its space is empty and its
    Kloosterman sum converges only conditionally.
    """
    u = family_window(cfg)
    ks = [k for k in range(max(4, 2 * math.ceil(u.lo / 2)), int(math.floor(u.hi)) + 1, 2) if u.lo < k < u.hi]
    vals = u(np.array(ks, dtype=float)) if ks else np.array([])
    return {k: float(v) for k, v in zip(ks, vals) if v > 0}


@lru_cache(maxsize=32)
def _calibrated(weight: int, n_max: int) -> EigenformData:
    f = eigenform(weight, n_max)
    return f.with_omega(calibrate_harmonic_weight(f).omega)


def level_one_family(cfg: ExperimentConfig, n_max: int) -> dict[int, EigenformData]:
    """Internal calibrated eigenforms for every weight in the window that has one."""
    return {
        k: _calibrated(k, n_max) for k in family_weights(cfg) if cusp_dimension(k) == 1 and k in SUPPORTED_WEIGHTS
    }


def _support_rs(psi: SmoothWindow, X: float) -> list[int]:
    lo = max(1, math.floor(X * psi.lo) + 1)
    hi = math.ceil(X * psi.hi) - 1
    return [r for r in range(lo, hi + 1) if X * psi.lo < r < X * psi.hi]


def _terms(q: QuadraticPoly, psi: SmoothWindow, X: float) -> tuple[list[int], np.ndarray]:
    rs = _support_rs(psi, X)
    weights = psi(np.array(rs, dtype=float) / X) if rs else np.array([])
    keep = [i for i, w in enumerate(weights) if w != 0.0]
    return [rs[i] for i in keep], np.asarray(weights)[keep]


def required_n_max(q: QuadraticPoly, psi: SmoothWindow, X: float) -> int:
    rs, _ = _terms(q, psi, X)
    return max((abs(q.value(r)) for r in rs), default=1)


# --- direct route -------------------------------------------------------------


def poly_eigen_sum(f: EigenformData, q: QuadraticPoly, psi: SmoothWindow, X: float) -> float:
    """sum_{r >= 1} lambda_f(|q(r)|) psi(r/X)."""
    rs, weights = _terms(q, psi, X)
    if not rs:
        return 0.0
    need = max(abs(q.value(r)) for r in rs)
    if need > f.n_max:
        raise LookupError(f"need coefficients up to n = {need}, have n_max = {f.n_max}")
    lam = f.eigenvalues
    return math.fsum(float(lam[abs(q.value(r))]) * w for r, w in zip(rs, weights))


@dataclass(frozen=True)
class DirectResult:
    smoothed: float
    sharp: float
    per_weight: dict[int, float]
    normalised: float
    """The smoothed value with omega / (2 pi^2) in place of omega."""


def _check_coverage(cfg: ExperimentConfig, family: dict[int, EigenformData]) -> None:
    missing = [k for k in family_weights(cfg) if cusp_dimension(k) > 0 and k not in family]
    multi = [k for k in family_weights(cfg) if cusp_dimension(k) > 1]
    if missing or multi:
        raise MissingWeightError(sorted(set(missing) | set(multi)))


def variance_direct(family: dict[int, EigenformData], cfg: ExperimentConfig) -> DirectResult:
    """(1/X) sum_k u((k-K)/K^theta) sum_f omega_f |A_f|^2, plus the sharp-window version."""
    _check_coverage(cfg, family)
    weights = family_weights(cfg)
    psi, X = cfg.psi, cfg.X
    per_weight = {}
    for k, uk in weights.items():
        f = family.get(k)
        if f is None:
            per_weight[k] = 0.0
            continue
        if f.omega is None:
            raise ValueError(f"weight {k} data has no harmonic weight")
        per_weight[k] = f.omega * poly_eigen_sum(f, cfg.poly, psi, X) ** 2 / X
    smoothed = math.fsum(weights[k] * v for k, v in per_weight.items())
    sharp = math.fsum(v for k, v in per_weight.items() if abs(k - cfg.K) < cfg.family_scale)
    return DirectResult(smoothed, sharp, per_weight, smoothed / TWO_PI_SQ)


# --- trace-formula route ------------------------------------------------------


def diagonal_pairs(q: QuadraticPoly, r1: int, rs: set[int] | None = None) -> list[int]:
    """All integers r2 with |q(r2)| = |q(r1)|, optionally restricted to ``rs``.

    Solves A r^2 + B r + C = +-q(r1) exactly; at most four solutions.
    """
    target = q(r1)
    a, b = 2 * q.A, 2 * q.B
    out = set()
    for sign in (1, -1):
        cc = 2 * (q.C - sign * target)
        # all coefficients are integers after doubling
        a_i, b_i, c_i = int(a), int(b), int(cc)
        disc = b_i * b_i - 4 * a_i * c_i
        if disc < 0:
            continue
        s = math.isqrt(disc)
        if s * s != disc:
            continue
        for root in (-b_i + s, -b_i - s):
            if root % (2 * a_i) == 0:
                out.add(root // (2 * a_i))
    if rs is not None:
        out &= rs
    return sorted(out)


def diagonal_term(cfg: ExperimentConfig) -> tuple[float, dict[int, float], int]:
    """(1/X) sum_{|q(r1)| = |q(r2)|} psi psi * sum_k u_k; also per weight and pair count."""
    rs, weights = _terms(cfg.poly, cfg.psi, cfg.X)
    wmap = dict(zip(rs, weights))
    pairs = []
    for r1 in rs:
        for r2 in diagonal_pairs(cfg.poly, r1, set(rs)):
            pairs.append(wmap[r1] * wmap[r2])
    base = math.fsum(pairs) / cfg.X
    per_weight = {k: uk * base for k, uk in family_weights(cfg).items()}
    return math.fsum(per_weight.values()), per_weight, len(pairs)


@dataclass(frozen=True)
class OffDiagonal:
    value: float
    per_weight: dict[int, float]
    by_c_range: dict[str, float]
    c_max: int
    tail_bound: float


def _od_tail(vals, w, weights, c_max) -> float:
    total = 0.0
    for i, vi in enumerate(vals):
        for j, vj in enumerate(vals):
            for k, uk in weights.items():
                total += abs(w[i] * w[j]) * uk * petersson_tail_bound(int(vi), int(vj), k, c_max)
    return total


def off_diagonal_cmax(cfg: ExperimentConfig) -> int:
    rs, w = _terms(cfg.poly, cfg.psi, cfg.X)
    if not rs:
        return 1
    vals, wv = _grouped(cfg.poly, rs, w)
    weights = family_weights(cfg)
    top = max(vals)
    c = math.ceil(8 * math.pi * top)
    while _od_tail(vals, wv, weights, c) / cfg.X >= cfg.tail_tol:
        c = int(c * 1.05) + 1
    return c


def _grouped(q: QuadraticPoly, rs: list[int], w: np.ndarray) -> tuple[list[int], np.ndarray]:
    # psi weights summed over r sharing the same |q(r)|
    acc: dict[int, list[float]] = {}
    for r, wr in zip(rs, w):
        acc.setdefault(abs(q.value(r)), []).append(float(wr))
    vals = sorted(acc)
    return vals, np.array([math.fsum(acc[v]) for v in vals])


def off_diagonal_term(cfg: ExperimentConfig) -> OffDiagonal:
    """(1/X) sum_k u_k 2 pi i^{-k} sum_{r1,r2} psi psi sum_c S(|q1|,|q2|;c)/c J_{k-1}(4 pi sqrt(|q1 q2|)/c)."""
    weights = family_weights(cfg)
    rs, w = _terms(cfg.poly, cfg.psi, cfg.X)
    if not rs or not weights:
        return OffDiagonal(0.0, {k: 0.0 for k in weights}, {}, 0, 0.0)
    vals, wv = _grouped(cfg.poly, rs, w)
    c_max = cfg.c_max if cfg.c_max is not None else off_diagonal_cmax(cfg)
    if c_max < math.ceil(8 * math.pi * max(vals)):
        raise ValueError(f"c_max = {c_max} is below 8 pi max|q| = {8 * math.pi * max(vals):.1f}")
    tail = _od_tail(vals, wv, weights, c_max) / cfg.X
    if tail >= cfg.tail_tol:
        raise ArithmeticError(f"off-diagonal tail bound {tail:.2e} exceeds {cfg.tail_tol}")
    ks = sorted(weights)
    nus = np.array([k - 1 for k in ks], dtype=np.int64)
    edges = [0] + [10**e for e in range(1, 12) if 10**e < c_max] + [c_max]
    pair = np.outer(wv, wv)
    by_range: dict[str, float] = {}
    per_weight_parts: dict[int, list[float]] = {k: [] for k in ks}
    for lo, hi in zip(edges[:-1], edges[1:]):
        cs = np.arange(lo + 1, hi + 1, dtype=np.int64)
        sums = trace_sums(np.array(vals, dtype=np.int64), nus, cs)
        range_parts = []
        for l, k in enumerate(ks):
            sign = 1.0 if (k // 2) % 2 == 0 else -1.0
            part = weights[k] * 2 * math.pi * sign * math.fsum((pair * sums[l]).ravel().tolist()) / cfg.X
            per_weight_parts[k].append(part)
            range_parts.append(part)
        by_range[f"{lo + 1}-{hi}"] = math.fsum(range_parts)
    per_weight = {k: math.fsum(v) for k, v in per_weight_parts.items()}
    return OffDiagonal(math.fsum(per_weight.values()), per_weight, by_range, c_max, tail)


# --- reports ------------------------------------------------------------------


@dataclass
class ExperimentReport:
    config: dict
    poly_checks: dict
    weights: dict[int, float]
    direct: float
    direct_sharp: float
    direct_normalised: float
    diagonal: float
    diagonal_pairs: int
    off_diagonal: float
    off_diagonal_by_c: dict[str, float]
    c_max: int
    tail_bound: float
    per_weight: dict[int, dict[str, float]]
    residual: float
    passed: bool
    thresholds: dict[str, float]
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def run_experiment(cfg: ExperimentConfig, family: dict[int, EigenformData] | None = None) -> ExperimentReport:
    """Both routes for one configuration, with the residual gate applied."""
    start = time.perf_counter()
    checks = validate_poly(cfg.poly, cfg.X, cfg)
    if not checks.identity_ok:
        raise ConfigError("q integer valued and irreducible", ", ".join(checks.failures()))
    if family is None:
        family = level_one_family(cfg, max(2, required_n_max(cfg.poly, cfg.psi, cfg.X)))
    direct = variance_direct(family, cfg)
    diag, diag_k, npairs = diagonal_term(cfg)
    od = off_diagonal_term(cfg)
    residual = abs(direct.smoothed - diag - od.value)
    per_weight = {
        k: {"direct": direct.per_weight.get(k, 0.0), "diagonal": diag_k[k], "off_diagonal": od.per_weight.get(k, 0.0)}
        for k in family_weights(cfg)
    }
    cfg_echo = asdict(cfg)
    cfg_echo["poly"] = str(cfg.poly)
    return ExperimentReport(
        config=cfg_echo,
        poly_checks=asdict(checks),
        weights=family_weights(cfg),
        direct=direct.smoothed,
        direct_sharp=direct.sharp,
        direct_normalised=direct.normalised,
        diagonal=diag,
        diagonal_pairs=npairs,
        off_diagonal=od.value,
        off_diagonal_by_c=od.by_c_range,
        c_max=od.c_max,
        tail_bound=od.tail_bound,
        per_weight=per_weight,
        residual=residual,
        passed=residual < cfg.two_route_tol * max(1.0, abs(direct.smoothed)),
        thresholds=cfg.split_thresholds(),
        seconds=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class CancellationProfile:
    xs: tuple[float, ...]
    sums: tuple[float, ...]
    trivial_bounds: tuple[float, ...]
    slope: float
    intercept: float
    scatter: float


def cancellation_profile(
    f: EigenformData, q: QuadraticPoly, psi: SmoothWindow, xs
) -> CancellationProfile:
    """Least-squares slope of log|sum| against log X; reported, never gated."""
    xs = tuple(float(x) for x in xs)
    sums, bounds = [], []
    lam = f.eigenvalues
    for X in xs:
        sums.append(poly_eigen_sum(f, q, psi, X))
        rs, w = _terms(q, psi, X)
        bounds.append(math.fsum(abs(float(lam[abs(q.value(r))])) * wr for r, wr in zip(rs, w)))
    logx = np.log(xs)
    logs = np.log(np.maximum(np.abs(sums), 1e-300))
    slope, intercept = np.polyfit(logx, logs, 1)
    scatter = float(np.sqrt(np.mean((logs - (slope * logx + intercept)) ** 2)))
    return CancellationProfile(xs, tuple(sums), tuple(bounds), float(slope), float(intercept), scatter)
