"""Level-one Hecke eigenforms as exact integer q-series, and trace-formula checks.

Coefficients stay Python integers; floats appear only in the normalised
eigenvalues lambda(n) = a(n) / n^((k-1)/2). Series products use Kronecker
substitution: both series are packed into one big integer with a fixed bit
width per coefficient, multiplied once and unpacked. gmpy2 does the big
multiplication when it is installed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, TextIO

import numpy as np

from . import kernels

try:  # pragma: no cover - depends on the environment
    import gmpy2

    _mpz = gmpy2.mpz
except ImportError:  # pragma: no cover
    _mpz = int

__all__ = [
    "SUPPORTED_WEIGHTS",
    "EigenDataError",
    "EigenformData",
    "HarmonicCalibration",
    "InsufficientTruncationError",
    "PeterssonCheck",
    "QExpansion",
    "TailBoundError",
    "calibrate_harmonic_weight",
    "dump_eigenvalues",
    "eigenform",
    "eisenstein",
    "hecke_relation_residual",
    "load_eigenvalues",
    "petersson_check",
    "petersson_residual",
    "petersson_tail_bound",
    "qexp_delta",
    "trace_cmax",
]

# weights k with dim S_k(SL2(Z)) = 1, and the Eisenstein product multiplying Delta
SUPPORTED_WEIGHTS = {12: (0, 0), 16: (1, 0), 18: (0, 1), 20: (2, 0), 22: (1, 1), 26: (2, 1)}
TAIL_TOL = 1e-10


class EigenDataError(ValueError):
    """Eigenvalue data failed a validation gate; ``n`` names the offending index."""

    def __init__(self, message: str, n: int | None = None) -> None:
        super().__init__(message)
        self.n = n


class InsufficientTruncationError(ValueError):
    """A requested coefficient lies beyond the stored range."""


class TailBoundError(ArithmeticError):
    """The certified truncation bound is above tolerance."""


# --- q-series -----------------------------------------------------------------


def _pack(coeffs: Iterable[int], width: int) -> int:
    # signed coefficients: pack c + 2^(8w-1) as unsigned bytes, then subtract the offset
    coeffs = list(coeffs)
    half = 1 << (8 * width - 1)
    raw = b"".join((c + half).to_bytes(width, "little") for c in coeffs)
    return int.from_bytes(raw, "little") - _offset(len(coeffs), width)


@lru_cache(maxsize=16)
def _offset(count: int, width: int) -> int:
    return int.from_bytes(((1 << (8 * width - 1)).to_bytes(width, "little")) * count, "little")


def _unpack(value: int, count: int, width: int) -> list[int]:
    half = 1 << (8 * width - 1)
    raw = (value + _offset(count, width)).to_bytes(count * width, "little")
    return [int.from_bytes(raw[i : i + width], "little") - half for i in range(0, count * width, width)]


def _multiply(a: list[int], b: list[int], length: int) -> list[int]:
    """First ``length`` coefficients of the product of two integer series."""
    a, b = a[:length], b[:length]
    if not a or not b:
        return [0] * length
    bound = max(abs(x) for x in a).bit_length() + max(abs(x) for x in b).bit_length()
    bits = bound + min(len(a), len(b)).bit_length() + 2
    width = (bits + 7) // 8
    full = len(a) + len(b) - 1
    product = int(_mpz(_pack(a, width)) * _mpz(_pack(b, width)))
    out = _unpack(product, full, width)[:length]
    return out + [0] * (length - len(out))


@dataclass(frozen=True)
class QExpansion:
    """sum_{n < length} coeffs[n] q^n with exact integer coefficients."""

    coeffs: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> int:
        if not 0 <= n < self.length:
            raise InsufficientTruncationError(f"coefficient {n} outside 0..{self.length - 1}")
        return self.coeffs[n]

    def _same_length(self, other: QExpansion) -> None:
        if other.length != self.length:
            raise ValueError(f"series lengths differ: {self.length} vs {other.length}")

    def __mul__(self, other: QExpansion) -> QExpansion:
        self._same_length(other)
        return QExpansion(tuple(_multiply(list(self.coeffs), list(other.coeffs), self.length)))

    def __add__(self, other: QExpansion) -> QExpansion:
        self._same_length(other)
        return QExpansion(tuple(x + y for x, y in zip(self.coeffs, other.coeffs)))

    def scale(self, k: int) -> QExpansion:
        return QExpansion(tuple(k * x for x in self.coeffs))

    def shift(self, k: int) -> QExpansion:
        """Multiply by q^k, keeping the length."""
        return QExpansion(((0,) * k + self.coeffs)[: self.length])

    def power(self, e: int) -> QExpansion:
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = base * base
        if result is None:
            return QExpansion((1,) + (0,) * (self.length - 1))
        return result


def euler_product(length: int) -> QExpansion:
    """prod_{n >= 1} (1 - q^n) from the pentagonal number theorem."""
    coeffs = [0] * length
    k = 0
    while True:
        hit = False
        for j in ((k, -k) if k else (0,)):
            p = j * (3 * j - 1) // 2
            if p < length:
                coeffs[p] += -1 if j % 2 else 1
                hit = True
        if not hit:
            break
        k += 1
    return QExpansion(tuple(coeffs))


@lru_cache(maxsize=8)
def qexp_delta(n_max: int) -> QExpansion:
    """Delta = q prod (1 - q^n)^24, coefficients tau(0..n_max)."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    return euler_product(n_max + 1).power(24).shift(1)


def _divisor_power_sums(n_max: int, e: int) -> list[int]:
    sig = [0] * (n_max + 1)
    for d in range(1, n_max + 1):
        de = d**e
        for m in range(d, n_max + 1, d):
            sig[m] += de
    return sig


@lru_cache(maxsize=8)
def eisenstein(weight: int, n_max: int) -> QExpansion:
    """E_4 or E_6 normalised with constant term 1."""
    factor = {4: 240, 6: -504}.get(weight)
    if factor is None:
        raise ValueError("only E_4 and E_6 are provided")
    sig = _divisor_power_sums(n_max, weight - 1)
    return QExpansion((1,) + tuple(factor * s for s in sig[1:]))


# --- eigenform data -----------------------------------------------------------


@dataclass(frozen=True)
class EigenformData:
    """Normalised eigenform coefficients a(0..n_max) at a given level and weight."""

    level: int
    weight: int
    coeffs: tuple[int, ...]
    omega: float | None = None
    _lam: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def n_max(self) -> int:
        return len(self.coeffs) - 1

    def a(self, n: int) -> int:
        if not 1 <= n <= self.n_max:
            raise InsufficientTruncationError(f"a({n}) needs n_max >= {n}, have {self.n_max}")
        return self.coeffs[n]

    def lam(self, n: int) -> float:
        return float(self.eigenvalues[n])

    @property
    def eigenvalues(self) -> np.ndarray:
        """lambda(n) for n = 0..n_max (entry 0 is 0)."""
        if self._lam is None:
            half = (self.weight - 1) / 2.0
            vals = np.zeros(self.n_max + 1)
            for n in range(1, self.n_max + 1):
                # exact ratio first, so huge a(n) never overflow a float
                vals[n] = math.exp(math.log(abs(self.coeffs[n])) - half * math.log(n)) if self.coeffs[n] else 0.0
                if self.coeffs[n] < 0:
                    vals[n] = -vals[n]
            vals.setflags(write=False)
            object.__setattr__(self, "_lam", vals)
        return self._lam

    def with_omega(self, omega: float) -> EigenformData:
        if not omega > 0:
            raise ValueError(f"harmonic weight must be positive, got {omega}")
        return replace(self, omega=float(omega), _lam=self._lam)

    def validate(self, hecke_limit: int | None = None) -> None:
        """Raise EigenDataError on the first failed gate.

        Gates: a(1) = 1; |lambda(p)| <= 2 for primes p not dividing the level;
        exact Hecke relations for m <= n, mn <= min(n_max, hecke_limit).
        """
        if self.n_max < 1 or self.coeffs[1] != 1:
            raise EigenDataError("a(1) must equal 1", n=1)
        lam = self.eigenvalues
        for p in _primes_upto(self.n_max):
            if self.level % p and abs(lam[p]) > 2.0 + 1e-12:
                raise EigenDataError(f"|lambda({p})| = {abs(lam[p]):.6g} exceeds 2", n=p)
        top = self.n_max if hecke_limit is None else min(self.n_max, hecke_limit)
        for m in range(2, math.isqrt(top) + 1):
            if math.gcd(m, self.level) != 1:
                continue
            for n in range(m, top // m + 1):
                if math.gcd(n, self.level) == 1 and hecke_relation_residual(self, m, n):
                    raise EigenDataError(f"Hecke relation fails at (m, n) = ({m}, {n})", n=m * n)


def _primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


@lru_cache(maxsize=16)
def eigenform(weight: int, n_max: int) -> EigenformData:
    """The normalised level-one eigenform of a weight with dim S_k = 1."""
    if weight not in SUPPORTED_WEIGHTS:
        raise ValueError(
            f"weight {weight} unsupported: need dim S_k = 1, i.e. one of {sorted(SUPPORTED_WEIGHTS)}"
        )
    e4, e6 = SUPPORTED_WEIGHTS[weight]
    series = qexp_delta(n_max)
    if e4:
        series = series * eisenstein(4, n_max).power(e4)
    if e6:
        series = series * eisenstein(6, n_max).power(e6)
    return EigenformData(1, weight, series.coeffs)


def hecke_relation_residual(f: EigenformData, m: int, n: int) -> int:
    """|a(m)a(n) - sum_{d | (m,n)} d^(k-1) a(mn/d^2)| in exact integers."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    if math.gcd(m * n, f.level) != 1:
        raise ValueError(f"gcd(mn, level) must be 1 for (m, n) = ({m}, {n})")
    if m * n > f.n_max:
        raise InsufficientTruncationError(f"mn = {m * n} exceeds n_max = {f.n_max}")
    g = math.gcd(m, n)
    rhs = sum(d ** (f.weight - 1) * f.coeffs[m * n // (d * d)] for d in range(1, g + 1) if g % d == 0)
    return abs(f.coeffs[m] * f.coeffs[n] - rhs)


# --- trace formula ------------------------------------------------------------


def petersson_tail_bound(m: int, n: int, weight: int, c0: int) -> float:
    """Bound on 2 pi sum_{c > c0} |S(m,n;c)|/c |J_{k-1}(4 pi sqrt(mn)/c)|.

    Uses |S|/c <= 1, |J_v(x)| <= e^{x^2/4} (x/2)^v / v! and
    sum_{c > c0} c^{-v} <= c0^{1-v}/(v-1). Needs 4 pi sqrt(mn)/c0 <= 1.
    """
    nu = weight - 1
    root = math.sqrt(m * n)
    x0 = 4 * math.pi * root / c0
    if x0 > 1.0:
        raise ValueError("tail bound needs c0 >= 4 pi sqrt(mn)")
    log_bound = (
        math.log(2 * math.pi)
        + x0 * x0 / 4
        + nu * math.log(2 * math.pi * root)
        - math.lgamma(nu + 1)
        + (1 - nu) * math.log(c0)
        - math.log(nu - 1)
    )
    return math.exp(log_bound)


def trace_cmax(m: int, n: int, weight: int, tol: float = TAIL_TOL) -> int:
    """max(ceil(8 pi sqrt(mn)), smallest c0 whose tail bound is below tol)."""
    c0 = max(1, math.ceil(8 * math.pi * math.sqrt(m * n)))
    while petersson_tail_bound(m, n, weight, c0) >= tol:
        c0 = max(c0 + 1, int(c0 * 1.05))
    return c0


def _kloosterman_bessel_sums(vals: np.ndarray, weight: int, c_max: int, level: int = 1) -> np.ndarray:
    """sum_{c <= c_max, level | c} S(m,n;c)/c J_{k-1}(4 pi sqrt(mn)/c), reduced in c order."""
    cs = np.arange(level, c_max + 1, level, dtype=np.int64)
    sums = trace_sums(np.asarray(vals, dtype=np.int64), np.array([weight - 1]), cs)
    return sums[0]


def trace_sums(vals: np.ndarray, nus: np.ndarray, cs: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """sum over cs of S(v_i, v_j; c)/c J_nu(4 pi sqrt(v_i v_j)/c), as out[l, i, j].

    The kernel runs over chunks of cs; each chunk is reduced with fsum and the
    chunk totals are reduced with fsum again, always in c order.
    """
    nv, nl = len(vals), len(nus)
    partial = []
    for start in range(0, len(cs), chunk):
        block = kernels.trace_block(vals, np.asarray(nus, dtype=np.int64), cs[start : start + chunk])
        partial.append(_reduce_block(block))
    out = np.zeros((nl, nv, nv))
    for l in range(nl):
        for i in range(nv):
            for j in range(i, nv):
                out[l, i, j] = out[l, j, i] = math.fsum(p[l, i, j] for p in partial)
    return out


def _reduce_block(block: np.ndarray) -> np.ndarray:
    _, nl, nv, _ = block.shape
    out = np.zeros((nl, nv, nv))
    for l in range(nl):
        for i in range(nv):
            for j in range(i, nv):
                out[l, i, j] = math.fsum(block[:, l, i, j].tolist())
    return out


def _sign(weight: int) -> float:
    # i^{-k} for even k, exactly
    return 1.0 if (weight // 2) % 2 == 0 else -1.0


@dataclass(frozen=True)
class HarmonicCalibration:
    omega: float
    correction: float
    c_max: int
    tail_bound: float
    implied_l_value: float


def calibrate_harmonic_weight(f: EigenformData, c_max: int | None = None) -> HarmonicCalibration:
    """omega = 1 + 2 pi i^{-k} sum_c S(1,1;c)/c J_{k-1}(4 pi / c).

    Valid because the space is one-dimensional, so the (1,1) trace formula
    has a single spectral term omega * lambda(1)^2 = omega.
    """
    if f.level != 1 or f.weight not in SUPPORTED_WEIGHTS:
        raise ValueError("calibration needs a level-one weight with dim S_k = 1")
    c_max = trace_cmax(1, 1, f.weight) if c_max is None else int(c_max)
    tail = petersson_tail_bound(1, 1, f.weight, c_max)
    if tail >= TAIL_TOL:
        raise TailBoundError(f"tail bound {tail:.2e} at c_max = {c_max} exceeds {TAIL_TOL}")
    total = _kloosterman_bessel_sums(np.array([1]), f.weight, c_max)[0, 0]
    correction = 2 * math.pi * _sign(f.weight) * total
    omega = 1.0 + correction
    if not omega > 0:
        raise ArithmeticError(f"calibrated weight {omega} is not positive")
    return HarmonicCalibration(omega, correction, c_max, tail, 2 * math.pi**2 / (f.weight * omega))


@dataclass(frozen=True)
class PeterssonCheck:
    weight: int
    m: int
    n: int
    c_max: int
    spectral: float
    geometric: float
    residual: float
    tail_bound: float


def petersson_check(f: EigenformData, ms: Iterable[int], c_max: int | None = None) -> list[PeterssonCheck]:
    """Trace-formula residuals for all pairs from ``ms``, one c-sweep shared by all."""
    ms = sorted(set(int(m) for m in ms))
    if f.omega is None:
        f = f.with_omega(calibrate_harmonic_weight(f).omega)
    top = max(ms)
    c_max = max(trace_cmax(top, top, f.weight), trace_cmax(1, 1, f.weight)) if c_max is None else int(c_max)
    sums = _kloosterman_bessel_sums(np.array(ms), f.weight, c_max, f.level)
    out = []
    for i, m in enumerate(ms):
        for j, n in enumerate(ms):
            tail = petersson_tail_bound(m, n, f.weight, c_max)
            if tail >= TAIL_TOL:
                raise TailBoundError(f"tail bound {tail:.2e} for ({m}, {n}) at c_max = {c_max}")
            spectral = f.omega * f.lam(m) * f.lam(n)
            geometric = float(m == n) + 2 * math.pi * _sign(f.weight) * sums[i, j]
            out.append(PeterssonCheck(f.weight, m, n, c_max, spectral, geometric, abs(spectral - geometric), tail))
    return out


def petersson_residual(f: EigenformData, m: int, n: int, c_max: int | None = None) -> float:
    checks = petersson_check(f, [m, n], c_max)
    return next(c.residual for c in checks if (c.m, c.n) == (m, n))


# --- ingestion ----------------------------------------------------------------


def dump_eigenvalues(f: EigenformData, stream: TextIO | None = None) -> str:
    """Write the CSV exchange format; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["level", "weight", "n_max"])
    writer.writerow([f.level, f.weight, f.n_max])
    writer.writerow(["n", "a_n"])
    for n in range(1, f.n_max + 1):
        writer.writerow([n, f.coeffs[n]])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def load_eigenvalues(source: TextIO | str, hecke_limit: int | None = None) -> EigenformData:
    """Parse and validate the CSV exchange format.

    Layout: a ``level,weight,n_max`` header and its row, then ``n,a_n`` and one
    row per n = 1..n_max in order.
    """
    text = source if isinstance(source, str) else source.read()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(cell.strip() for cell in r)]
    if len(rows) < 3 or [c.strip() for c in rows[0]] != ["level", "weight", "n_max"]:
        raise EigenDataError("missing 'level,weight,n_max' header")
    try:
        level, weight, n_max = (int(c) for c in rows[1])
    except ValueError as exc:
        raise EigenDataError(f"bad header values {rows[1]}") from exc
    if level < 1 or weight < 2 or weight % 2 or n_max < 1:
        raise EigenDataError(f"bad header values {rows[1]}")
    if [c.strip() for c in rows[2]] != ["n", "a_n"]:
        raise EigenDataError("missing 'n,a_n' column header")
    coeffs = [0]
    for line, row in enumerate(rows[3:], start=4):
        if len(row) != 2:
            raise EigenDataError(f"line {line}: expected two fields, got {len(row)}")
        try:
            n, a = int(row[0]), int(row[1])
        except ValueError as exc:
            raise EigenDataError(f"line {line}: non-integer field") from exc
        if n != len(coeffs):
            raise EigenDataError(f"line {line}: expected n = {len(coeffs)}, got {n}", n=n)
        coeffs.append(a)
    if len(coeffs) - 1 != n_max:
        raise EigenDataError(f"header declares n_max = {n_max}, file has {len(coeffs) - 1} rows")
    data = EigenformData(level, weight, tuple(coeffs))
    data.validate(hecke_limit)
    return data
