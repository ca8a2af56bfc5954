"""Classical Kloosterman sums and the quadratic-twisted double sums.

The twisted sum attached to (gamma, B, C, u, v, c) is

    S = sum_{a, b mod c} S(q(a), q(b); c) e_c(2 gamma a b + a (B+u) + b (B+v)),
    q(t) = gamma t^2 + B t + C.

Only residues of q(a), q(b) mod c matter, so the inner arguments are taken
as signed residues; see ``TwistedSumParams`` for half-integral coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .arithmetic import (
    divisor_count,
    epsilon,
    jacobi_symbol,
    mod_inverse,
    root_table,
    split_by_radical,
    units,
)

__all__ = [
    "BOUND_EPS",
    "BoundReport",
    "ImaginaryResidualError",
    "KloostermanGrid",
    "ReducedParams",
    "TwistedSumParams",
    "Vanishing",
    "bound_report",
    "bound_split",
    "kloosterman_grid",
    "kloosterman_matrix",
    "kloosterman_sum",
    "multiplicativity_residual_all_uv",
    "twisted_multiplicativity_residual",
    "twisted_sum_all_uv",
    "twisted_sum_direct",
    "twisted_sum_gauss",
    "twisted_sum_gauss_all_uv",
    "vanishing_criterion",
    "vanishing_witness",
    "weil_envelope",
]

BOUND_EPS = 0.01


class ImaginaryResidualError(ArithmeticError):
    """A Kloosterman accumulator left an imaginary part above tolerance."""


def _check_imag(imag: float, c: int, tol: float = 1e-9) -> None:
    if imag >= tol * c:
        raise ImaginaryResidualError(f"imaginary residual {imag:.3e} exceeds {tol:g}*c at c={c}")


def kloosterman_sum(m: int, n: int, c: int) -> float:
    """S(m, n; c) over units x mod c; the value is real."""
    if c < 1:
        raise ValueError(f"modulus must be >= 1, got {c}")
    re, imag = kernels.kloosterman_block(
        np.array([m % c], dtype=np.int64), np.array([n % c], dtype=np.int64), c
    )
    _check_imag(imag, c)
    return float(re[0, 0])


def weil_envelope(m: int, n: int, c: int) -> float:
    g = math.gcd(math.gcd(m, n), c)
    return math.sqrt(g) * math.sqrt(c) * divisor_count(c)


@dataclass(frozen=True)
class KloostermanGrid:
    """S(m, n; c) for m, n in 1..m_max, 1..n_max and c in 1..c_max."""

    values: np.ndarray  # shape (c_max, m_max, n_max)
    imag: np.ndarray  # largest imaginary residual per c

    @property
    def c_max(self) -> int:
        return self.values.shape[0]

    def weil(self) -> np.ndarray:
        c_max, m_max, n_max = self.values.shape
        out = np.empty_like(self.values)
        m = np.arange(1, m_max + 1)[:, None]
        n = np.arange(1, n_max + 1)[None, :]
        for c in range(1, c_max + 1):
            g = np.gcd(np.gcd(m, n), c)
            out[c - 1] = np.sqrt(g * c) * divisor_count(c)
        return out


def kloosterman_grid(m_max: int, n_max: int, c_max: int) -> KloostermanGrid:
    ms = np.arange(1, m_max + 1, dtype=np.int64)
    ns = np.arange(1, n_max + 1, dtype=np.int64)
    cs = np.arange(1, c_max + 1, dtype=np.int64)
    values, imag = kernels.kloosterman_grid(ms, ns, cs)
    return KloostermanGrid(values, imag)


@lru_cache(maxsize=256)
def kloosterman_matrix(c: int) -> np.ndarray:
    """K[m, n] = S(m, n; c) for all residues, via a 2-D DFT of x -> x-bar."""
    xs, inv = units(c)
    ind = np.zeros((c, c))
    ind[xs, inv] = 1.0
    k = np.fft.ifft2(ind) * (c * c)
    _check_imag(float(np.max(np.abs(k.imag))), c)
    out = np.ascontiguousarray(k.real)
    out.flags.writeable = False
    return out


def _as_half_integer(value, name: str) -> Fraction:
    f = Fraction(value)
    if f.denominator not in (1, 2):
        raise ValueError(f"{name} must be an integer or half-integer, got {value}")
    return f


@dataclass(frozen=True)
class ReducedParams:
    """Integer residues of a twisted-sum parameter set on its working modulus."""

    gamma: int
    B: int
    C: int
    u: int
    v: int
    c: int


@dataclass(frozen=True)
class TwistedSumParams:
    """(gamma, B, C, u, v, c); gamma and B may be half-integers.

    Half-integral coefficients are handled in one of two ways. For odd c the
    halves become multiplication by the inverse of 2 mod c. For even c the
    modulus is halved against doubled coefficients (c = 2c', gamma' = 2 gamma,
    B' = 2 B), which must be requested explicitly with ``halve_even``.
    """

    gamma: Fraction | int
    B: Fraction | int
    C: int
    u: int
    v: int
    c: int

    def __post_init__(self) -> None:
        if self.c < 1:
            raise ValueError(f"modulus must be >= 1, got {self.c}")
        object.__setattr__(self, "gamma", _as_half_integer(self.gamma, "gamma"))
        object.__setattr__(self, "B", _as_half_integer(self.B, "B"))
        for name in ("C", "u", "v", "c"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def half_integral(self) -> bool:
        return self.gamma.denominator == 2 or self.B.denominator == 2

    def replace(self, **changes) -> TwistedSumParams:
        fields = dict(gamma=self.gamma, B=self.B, C=self.C, u=self.u, v=self.v, c=self.c)
        fields.update(changes)
        return TwistedSumParams(**fields)

    def reduced(self, halve_even: bool = False) -> ReducedParams:
        c = self.c
        if not self.half_integral:
            g, b = int(self.gamma), int(self.B)
        elif c % 2 == 1:
            inv2 = (c + 1) // 2
            g = int(2 * self.gamma) * inv2
            b = int(2 * self.B) * inv2
        elif halve_even:
            c //= 2
            g, b = int(2 * self.gamma), int(2 * self.B)
        else:
            raise ValueError(
                "half-integral coefficients with even c need halve_even=True"
            )
        return ReducedParams(g % c, b % c, self.C % c, self.u % c, self.v % c, c)


def _quadratic_residues(r: ReducedParams) -> np.ndarray:
    a = np.arange(r.c, dtype=np.int64)
    return (r.gamma * a % r.c * a + r.B * a + r.C) % r.c


def twisted_sum_direct(p: TwistedSumParams, halve_even: bool = False) -> complex:
    """Definitional double sum with Kloosterman values looked up by residue pair."""
    r = p.reduced(halve_even)
    return kernels.twisted_accumulate(
        kloosterman_matrix(r.c),
        _quadratic_residues(r),
        2 * r.gamma % r.c,
        (r.B + r.u) % r.c,
        (r.B + r.v) % r.c,
        r.c,
    )


def twisted_sum_all_uv(gamma, B, C: int, c: int, halve_even: bool = False) -> np.ndarray:
    """The definitional sum for every (u, v) mod c at once, as out[u, v].

    With W[a, b] = K[q(a), q(b)] e_c(2 gamma a b + B a + B b) the (u, v)
    dependence is a 2-D DFT of W. The returned grid lives on the working
    modulus, which is c/2 when an even modulus was halved.
    """
    r = TwistedSumParams(gamma, B, C, 0, 0, c).reduced(halve_even)
    c = r.c
    q = _quadratic_residues(r)
    a = np.arange(c, dtype=np.int64)
    phase = (2 * r.gamma * np.outer(a, a) + r.B * (a[:, None] + a[None, :])) % c
    w = kloosterman_matrix(c)[np.ix_(q, q)] * root_table(c)[phase]
    return np.fft.ifft2(w) * (c * c)


def _gauss_parts(r: ReducedParams) -> tuple[int, int, complex]:
    c = r.c
    if math.gcd(4 * r.gamma, c) != 1:
        raise ValueError(f"closed form needs gcd(4*gamma, c) = 1, got gamma={r.gamma}, c={c}")
    inv4g = mod_inverse(4 * r.gamma, c).value
    inv2g = mod_inverse(2 * r.gamma, c).value
    front = epsilon(c) * math.sqrt(c) * jacobi_symbol(r.gamma, c)
    return inv4g, inv2g, front


def twisted_sum_gauss(p: TwistedSumParams, halve_even: bool = False) -> complex:
    """Closed form after completing the square in a, valid when gcd(4 gamma, c) = 1.

    The b-sum is c when v = x-bar * u mod c and 0 otherwise, so only units
    x with that property contribute.
    """
    r = p.reduced(halve_even)
    c = r.c
    if c == 1:
        return 1.0 + 0j
    inv4g, inv2g, front = _gauss_parts(r)
    xs, inv = units(c)
    hit = (inv * r.u - r.v) % c == 0
    if not hit.any():
        return 0j
    x, xb = xs[hit], inv[hit]
    lin_x = (r.C - inv4g * r.B * r.B) % c
    lin_xb = (r.C - inv4g * (r.B + r.u) ** 2) % c
    const = (-inv2g * r.B * (r.B + r.u)) % c
    phase = (lin_x * x + lin_xb * xb + const) % c
    jac = np.array([jacobi_symbol(int(t), c) for t in x])
    return complex(front * c * np.sum(jac * root_table(c)[phase]))


def twisted_sum_gauss_all_uv(gamma, B, C: int, c: int, halve_even: bool = False) -> np.ndarray:
    """Closed form for every (u, v) mod the working modulus."""
    r = TwistedSumParams(gamma, B, C, 0, 0, c).reduced(halve_even)
    c = r.c
    if c == 1:
        return np.ones((1, 1), dtype=complex)
    inv4g, inv2g, front = _gauss_parts(r)
    u = np.arange(c, dtype=np.int64)
    lin_x = (r.C - inv4g * r.B * r.B) % c
    lin_xb = (r.C - inv4g * ((r.B + u) ** 2 % c)) % c
    const = (-inv2g * r.B % c * ((r.B + u) % c)) % c
    jac = np.array([jacobi_symbol(t, c) for t in range(c)], dtype=np.float64)
    re, im = kernels.gauss_all_uv(c, jac, lin_x, lin_xb, const)
    return front * (re + 1j * im)


def _factor_params(p: TwistedSumParams, c1: int, c2: int) -> tuple[TwistedSumParams, TwistedSumParams]:
    if c1 < 1 or c2 < 1 or c1 * c2 != p.c:
        raise ValueError(f"split {c1}*{c2} does not match c={p.c}")
    if math.gcd(c1, c2) != 1:
        raise ValueError(f"split {c1}*{c2} is not coprime")
    d1 = pow(c1, -1, c2) if c2 > 1 else 0
    d2 = pow(c2, -1, c1) if c1 > 1 else 0
    first = p.replace(gamma=p.gamma * c2, C=p.C * d2, c=c1)
    second = p.replace(gamma=p.gamma * c1, C=p.C * d1, c=c2)
    return first, second


def twisted_multiplicativity_residual(p: TwistedSumParams, c1: int, c2: int) -> float:
    """|S_{c1 c2}(gamma) - S_{c1}(gamma c2; C d2) S_{c2}(gamma c1; C d1)|, u and v unchanged."""
    first, second = _factor_params(p, c1, c2)
    lhs = twisted_sum_direct(p)
    rhs = twisted_sum_direct(first) * twisted_sum_direct(second)
    return abs(lhs - rhs)


def multiplicativity_residual_all_uv(gamma: int, B: int, C: int, c1: int, c2: int) -> float:
    """Largest multiplicativity residual over every (u, v) mod c1*c2."""
    p = TwistedSumParams(gamma, B, C, 0, 0, c1 * c2)
    first, second = _factor_params(p, c1, c2)
    whole = twisted_sum_all_uv(p.gamma, p.B, p.C, p.c)
    left = twisted_sum_all_uv(first.gamma, first.B, first.C, c1)
    right = twisted_sum_all_uv(second.gamma, second.B, second.C, c2)
    r = np.arange(p.c)
    product = left[np.ix_(r % c1, r % c1)] * right[np.ix_(r % c2, r % c2)]
    return float(np.max(np.abs(whole - product)))


class Vanishing(enum.Enum):
    PROVEN = "vanishes_proven"
    NUMERIC = "vanishes_numeric"
    NONZERO = "nonzero"


def vanishing_criterion(p: TwistedSumParams) -> bool:
    """gcd(4c, gamma) = 1 and gcd(v, c) does not divide u."""
    if p.gamma.denominator != 1:
        r = p.reduced()
        gamma, c, u, v = r.gamma, r.c, r.u, r.v
    else:
        gamma, c, u, v = int(p.gamma), p.c, p.u, p.v
    return math.gcd(4 * c, gamma) == 1 and u % math.gcd(v, c) != 0


def vanishing_witness(p: TwistedSumParams) -> Vanishing:
    value = abs(twisted_sum_direct(p))
    small = value < 1e-6 * p.c**2
    if vanishing_criterion(p):
        if not small:
            raise ArithmeticError(f"criterion says zero but |S| = {value:.6e} for {p}")
        return Vanishing.PROVEN
    return Vanishing.NUMERIC if small else Vanishing.NONZERO


@dataclass(frozen=True)
class BoundReport:
    observed: float
    reference: float
    ratio: float
    params: TwistedSumParams
    c1: int
    c2: int
    vanishing_branch: bool


def bound_split(p: TwistedSumParams) -> tuple[int, int]:
    """c = c1*c2 with gcd(4 gamma, c1) = 1 and c2 | (4 gamma)^infinity."""
    four_gamma = abs(int(4 * p.gamma))
    if four_gamma == 0:
        return 1, p.c
    return split_by_radical(p.c, four_gamma)


def bound_report(p: TwistedSumParams, eps: float = BOUND_EPS) -> BoundReport:
    c1, c2 = bound_split(p)
    g = math.gcd(p.v, c1)
    reference = g * c1**1.5 * c2 ** (2.5 + eps)
    observed = abs(twisted_sum_direct(p, halve_even=True))
    return BoundReport(observed, reference, observed / reference, p, c1, c2, p.u % g != 0)
