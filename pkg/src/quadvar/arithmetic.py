"""Exact modular arithmetic and root-of-unity tables.

Everything here is pure and deterministic. The only shared state is the
per-modulus root table cache, which is filled once per modulus and read-only
afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Factorization",
    "NotInvertibleError",
    "Residue",
    "crt_lift",
    "divisor_count",
    "e_frac",
    "epsilon",
    "euler_phi",
    "factorize",
    "gauss_sum",
    "jacobi_symbol",
    "mod_inverse",
    "root_table",
    "split_by_radical",
    "units",
]


class NotInvertibleError(ValueError):
    """Raised when an inverse or CRT lift does not exist."""


@dataclass(frozen=True)
class Residue:
    value: int
    modulus: int

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError(f"modulus must be >= 1, got {self.modulus}")
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"value {self.value} not reduced mod {self.modulus}")

    @classmethod
    def of(cls, value: int, modulus: int) -> Residue:
        return cls(value % modulus, modulus)

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        primes = [p for p, _ in self.factors]
        if primes != sorted(set(primes)):
            raise ValueError("primes must be strictly increasing")
        if math.prod(p**e for p, e in self.factors) != self.n:
            raise ValueError("factors do not multiply to n")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


def factorize(n: int) -> Factorization:
    """Trial division; fine for the moduli used here (up to ~1e8)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    factors = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        factors.append((m, 1))
    return Factorization(n, tuple(factors))


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n).factors)


def euler_phi(n: int) -> int:
    return math.prod((p - 1) * p ** (e - 1) for p, e in factorize(n).factors)


@lru_cache(maxsize=4096)
def root_table(c: int) -> np.ndarray:
    """exp(2*pi*i*j/c) for j = 0..c-1, one trig evaluation per entry."""
    if c < 1:
        raise ValueError(f"modulus must be >= 1, got {c}")
    table = np.exp(2j * np.pi * np.arange(c) / c)
    table.flags.writeable = False
    return table


def e_frac(numerator: int, c: int) -> complex:
    """exp(2*pi*i*numerator/c), read from the table for modulus c."""
    return complex(root_table(c)[numerator % c])


def mod_inverse(a: int, c: int) -> Residue:
    if c < 1:
        raise ValueError(f"modulus must be >= 1, got {c}")
    try:
        return Residue(pow(a, -1, c), c)
    except ValueError:
        raise NotInvertibleError(f"{a} is not invertible mod {c}") from None


def crt_lift(a1: Residue, a2: Residue) -> Residue:
    """Combine residues mod coprime c1, c2 as a1*c2*d2 + a2*c1*d1."""
    c1, c2 = a1.modulus, a2.modulus
    if math.gcd(c1, c2) != 1:
        raise NotInvertibleError(f"moduli {c1} and {c2} are not coprime")
    d1 = pow(c1, -1, c2) if c2 > 1 else 0
    d2 = pow(c2, -1, c1) if c1 > 1 else 0
    c = c1 * c2
    return Residue((a1.value * c2 * d2 + a2.value * c1 * d1) % c, c)


def jacobi_symbol(n: int, c: int) -> int:
    if c < 1 or c % 2 == 0:
        raise ValueError(f"Jacobi symbol needs an odd positive modulus, got {c}")
    n %= c
    result = 1
    while n:
        while n % 2 == 0:
            n //= 2
            if c % 8 in (3, 5):
                result = -result
        n, c = c, n
        if n % 4 == 3 and c % 4 == 3:
            result = -result
        n %= c
    return result if c == 1 else 0


def epsilon(c: int) -> complex:
    """1 for c = 1 mod 4, i for c = 3 mod 4; undefined for even c."""
    if c % 2 == 0:
        raise ValueError(f"epsilon_c is only defined for odd c, got {c}")
    return 1.0 + 0j if c % 4 == 1 else 1j


def gauss_sum(n: int, c: int, method: str = "direct") -> complex:
    """Quadratic Gauss sum sum_{t mod c} e(n t^2 / c)."""
    if c < 1:
        raise ValueError(f"modulus must be >= 1, got {c}")
    if method == "direct":
        t = np.arange(c, dtype=np.int64)
        idx = ((t * t) % c * (n % c)) % c
        return complex(np.sum(root_table(c)[idx]))
    if method == "closed_form":
        if c % 2 == 0:
            raise ValueError(f"closed form needs odd c, got {c}")
        if math.gcd(n, c) != 1:
            raise NotInvertibleError(f"closed form needs gcd(n, c) = 1, got n={n}, c={c}")
        return jacobi_symbol(n, c) * epsilon(c) * math.sqrt(c)
    raise ValueError(f"unknown method {method!r}")


def split_by_radical(c: int, m: int) -> tuple[int, int]:
    """Split c = c1*c2 with gcd(c1, m) = 1 and every prime of c2 dividing m."""
    if c < 1 or m < 1:
        raise ValueError("c and m must be positive")
    c1 = c
    g = math.gcd(c1, m)
    while g > 1:
        c1 //= g
        g = math.gcd(c1, g)
    return c1, c // c1


@lru_cache(maxsize=1024)
def units(c: int) -> tuple[np.ndarray, np.ndarray]:
    """Residues coprime to c (ascending) and their inverses mod c."""
    if c == 1:
        xs = np.zeros(1, dtype=np.int64)
        return xs, xs.copy()
    xs = np.array([x for x in range(1, c) if math.gcd(x, c) == 1], dtype=np.int64)
    inv = np.array([pow(int(x), -1, c) for x in xs], dtype=np.int64)
    xs.flags.writeable = False
    inv.flags.writeable = False
    return xs, inv
