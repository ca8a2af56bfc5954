"""Compactly supported smooth windows built from exp(-1/(1 - t^2)).

The basic shape is the plateau u(s): 1 for |s| <= a, 0 for |s| >= b and a
smooth monotone step in between. The defaults a = 1, b = 1.1 give the family
window used for the weight average; a = 0 gives a plain bump. A window on the
real line is u((x - m)/w), where the centre m and width w are fixed by the
support (lo, hi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import ClassVar

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "MOLLIFIER_MASS",
    "ConvergenceError",
    "PlateauWindow",
    "SmoothWindow",
    "mollifier_derivative",
    "smooth_step",
]

MAX_ORDER = 40
_GL_X, _GL_W = leggauss(48)


class ConvergenceError(RuntimeError):
    """A quadrature failed its refinement check."""


def _mollifier(tau: np.ndarray) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    out = np.zeros_like(tau)
    inside = np.abs(tau) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - tau[inside] ** 2))
    return out


def _primitive(tau: np.ndarray) -> np.ndarray:
    """integral_{-1}^{tau} of the mollifier, for tau in [-1, 0]."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    # two panels, the first hugging the flat endpoint
    mid = (tau - 1.0) / 2.0
    total = np.zeros_like(tau)
    for a, b in ((np.full_like(tau, -1.0), mid), (mid, tau)):
        half = (b - a) / 2.0
        nodes = (a + b)[:, None] / 2.0 + half[:, None] * _GL_X[None, :]
        total += half * (_mollifier(nodes) @ _GL_W)
    return total


MOLLIFIER_MASS = float(2.0 * _primitive(np.array([0.0]))[0])


def smooth_step(tau) -> np.ndarray:
    """H(tau) = mass of the mollifier on [-1, tau], normalised so H(1) = 1."""
    tau = np.clip(np.asarray(tau, dtype=float), -1.0, 1.0)
    flat = tau.ravel()
    out = np.empty_like(flat)
    neg = flat <= 0.0
    out[neg] = _primitive(flat[neg]) / MOLLIFIER_MASS
    out[~neg] = 1.0 - _primitive(-flat[~neg]) / MOLLIFIER_MASS
    return out.reshape(tau.shape)


@lru_cache(maxsize=None)
def _derivative_polys(order: int) -> tuple[tuple[int, ...], ...]:
    """Integer coefficients (lowest degree first) of P_j for j <= order.

    d^j/dtau^j exp(-1/(1-tau^2)) = P_j(tau) / (1 - tau^2)^(2j) * exp(-1/(1-tau^2))
    with P_{j+1} = P_j' (1-tau^2)^2 + 4 j tau (1-tau^2) P_j - 2 tau P_j.
    """
    polys = [(1,)]
    for j in range(order):
        p = list(polys[-1])
        dp = [k * p[k] for k in range(1, len(p))] or [0]
        nxt = [0] * (len(p) + 4)
        # P' (1 - 2 tau^2 + tau^4)
        for k, coef in enumerate(dp):
            nxt[k] += coef
            nxt[k + 2] -= 2 * coef
            nxt[k + 4] += coef
        for k, coef in enumerate(p):
            # 4 j tau (1 - tau^2) P - 2 tau P
            nxt[k + 1] += (4 * j - 2) * coef
            nxt[k + 3] -= 4 * j * coef
        while len(nxt) > 1 and nxt[-1] == 0:
            nxt.pop()
        polys.append(tuple(nxt))
    return tuple(polys)


def mollifier_derivative(tau, j: int) -> np.ndarray:
    """j-th derivative of exp(-1/(1-tau^2)), zero outside (-1, 1)."""
    if j < 0 or j > MAX_ORDER:
        raise ValueError(f"derivative order {j} outside 0..{MAX_ORDER}")
    tau = np.asarray(tau, dtype=float)
    coeffs = _derivative_polys(j)[j]
    out = np.zeros_like(tau)
    inside = np.abs(tau) < 1.0
    t = tau[inside]
    one_minus = 1.0 - t * t
    if j <= 6:
        poly = np.polynomial.polynomial.polyval(t, np.array(coeffs, dtype=float))
        out[inside] = poly / one_minus ** (2 * j) * np.exp(-1.0 / one_minus)
    else:
        # high orders cancel badly in floating point; evaluate exactly
        out[inside] = [_exact_derivative(coeffs, j, float(x)) for x in t]
    return out


def _exact_derivative(coeffs: tuple[int, ...], j: int, tau: float) -> float:
    import mpmath

    with mpmath.workdps(60 + 3 * j):
        t = mpmath.mpf(tau)
        poly = mpmath.polyval(list(reversed(coeffs)), t)
        one_minus = 1 - t * t
        return float(poly / one_minus ** (2 * j) * mpmath.exp(-1 / one_minus))


class SmoothWindow:
    """Interface: support (lo, hi), values and derivatives up to ``max_order``."""

    lo: float
    hi: float
    max_order: int
    label: str

    def __call__(self, x) -> np.ndarray:
        return self.derivative(x, 0)

    def derivative(self, x, j: int) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError

    def fourier(self, t) -> np.ndarray:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class PlateauWindow(SmoothWindow):
    """u((x - m)/w) with u flat on |s| <= flat and supported on |s| <= 1.1.

    ``flat`` is measured in the same units as the 1.1 half-support; flat = 1
    is the standard plateau and flat = 0 is a bump.
    """

    lo: float
    hi: float
    flat: float = 1.0
    max_order: int = MAX_ORDER
    label: str = field(default="plateau")

    HALF: ClassVar[float] = 1.1

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ValueError(f"empty support ({self.lo}, {self.hi})")
        if not 0.0 <= self.flat < self.HALF:
            raise ValueError(f"flat part {self.flat} must lie in [0, {self.HALF})")
        if not 0 <= self.max_order <= MAX_ORDER:
            raise ValueError(f"max_order must lie in 0..{MAX_ORDER}")

    @classmethod
    def family(cls, center: float, scale: float, label: str = "family") -> PlateauWindow:
        """x -> u((x - center)/scale) with the standard plateau."""
        return cls(center - 1.1 * scale, center + 1.1 * scale, label=label)

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return 0.5 * (self.hi - self.lo) / self.HALF

    def scaled(self, factor: float) -> PlateauWindow:
        """The window x -> g(x / factor)."""
        return PlateauWindow(self.lo * factor, self.hi * factor, self.flat, self.max_order, self.label)

    def derivative(self, x, j: int) -> np.ndarray:
        if j < 0 or j > self.max_order:
            raise ValueError(f"derivative order {j} exceeds declared order {self.max_order}")
        x = np.asarray(x, dtype=float)
        s = (x - self.center) / self.width
        return _profile(s, j, self.flat) / self.width**j

    def fourier(self, t) -> np.ndarray:
        """g-hat(t) = integral g(y) e(t y) dy."""
        t = np.asarray(t, dtype=float)
        w = self.width
        return np.exp(2j * np.pi * t * self.center) * w * profile_transform(w * t, self.flat)


def _profile(s: np.ndarray, j: int, flat: float) -> np.ndarray:
    a, b = flat, 1.1
    mag = np.abs(s)
    out = np.zeros_like(s)
    if j == 0:
        out[mag <= a] = 1.0
    ramp = (mag > a) & (mag < b)
    tau = 1.0 - 2.0 * (mag[ramp] - a) / (b - a)
    if j == 0:
        out[ramp] = smooth_step(tau)
    else:
        # d tau / ds = -2 sign(s) / (b - a)
        slope = (-2.0 * np.sign(s[ramp]) / (b - a)) ** j
        out[ramp] = mollifier_derivative(tau, j - 1) / MOLLIFIER_MASS * slope
    return out


@lru_cache(maxsize=64)
def _bump_nodes(panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [0, 1] with the mollifier folded into the weights."""
    gx, gw = leggauss(16)
    edges = np.linspace(0.0, 1.0, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    z = ((lo + hi) / 2 + (hi - lo) / 2 * gx).ravel()
    w = ((hi - lo) / 2 * gw).ravel()
    return z, 2.0 * w * _mollifier(z)


def _bump_level(kappa: np.ndarray, panels: int) -> np.ndarray:
    z, w = _bump_nodes(panels)
    out = np.empty(kappa.size)
    step = max(1, 2_000_000 // z.size)
    for start in range(0, kappa.size, step):
        chunk = kappa[start : start + step]
        out[start : start + step] = np.cos(2.0 * np.pi * np.outer(chunk, z)) @ w
    return out


def _bump_panels(kappa: np.ndarray) -> np.ndarray:
    # about four panels of 16 nodes per two oscillations, in power-of-two levels
    need = 0.5 * kappa + 4.0
    return (1 << np.maximum(3, np.ceil(np.log2(need))).astype(np.int64)).astype(np.int64)


@lru_cache(maxsize=4)
def _ray_nodes(order: int, panels: int, reach: float) -> tuple[np.ndarray, np.ndarray]:
    gx, gw = leggauss(order)
    edges = np.linspace(-reach, reach, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    return ((lo + hi) / 2 + (hi - lo) / 2 * gx).ravel(), ((hi - lo) / 2 * gw).ravel()


def _bump_ray(kappa: np.ndarray, order: int = 64, panels: int = 6, reach: float = 6.0) -> np.ndarray:
    """Bump transform along the ray 1 + rho e^{3 i pi/4}.

    The mollifier is even, so B = 2 Re int_0^1. Moving the path to
    0 -> i oo -> 1 drops the imaginary-axis piece (it is purely imaginary),
    leaving -2 Re of the integral along the ray. The ray passes through the
    saddle of -1/(1 - s^2) + 2 pi i kappa s, so nothing cancels and the value
    keeps full relative accuracy where the real-line sum is all rounding.
    rho is sampled log-uniformly around the saddle distance 1/(2 sqrt(pi kappa)).
    """
    v, wv = _ray_nodes(order, panels, reach)
    rot = np.exp(0.75j * np.pi)
    out = np.empty(kappa.size)
    step = max(1, 1_000_000 // v.size)
    for start in range(0, kappa.size, step):
        k = kappa[start : start + step, None]
        saddle = 0.5 / np.sqrt(np.pi * k)
        rho = saddle * np.exp(v)[None, :]
        sig = 1.0 + rho * rot
        expo = -1.0 / (1.0 - sig * sig) + 2j * np.pi * k * sig
        out[start : start + step] = -2.0 * np.real((np.exp(expo) * rho) @ wv * rot)
    return out


RAY_FROM = 0.5


def bump_transform(kappa, tol: float = 1e-12) -> np.ndarray:
    """integral_{-1}^{1} exp(-1/(1-s^2)) cos(2 pi kappa s) ds.

    Small arguments use Gauss-Legendre panels on [-1, 1]; from ``RAY_FROM``
    on the integral is taken along a ray through the saddle point. The most
    oscillatory arguments of each group are recomputed with more nodes and
    ConvergenceError is raised if they move by more than ``tol`` on the real
    line, or by more than 1e-10 of exp(-sqrt(2 pi kappa)) on the ray.
    """
    kappa = np.abs(np.asarray(kappa, dtype=float))
    flat = kappa.ravel()
    out = np.empty(flat.size)
    near = flat < RAY_FROM
    idx = np.flatnonzero(near)
    if idx.size:
        out[idx] = _bump_level(flat[idx], 8)
        probe = idx[np.argsort(flat[idx], kind="stable")[-8:]]
        gap = float(np.max(np.abs(_bump_level(flat[probe], 16) - out[probe])))
        if gap > tol:
            raise ConvergenceError(f"bump transform moved by {gap:.2e} under refinement")
    idx = np.flatnonzero(~near)
    if idx.size:
        out[idx] = _bump_ray(flat[idx])
        order = np.argsort(flat[idx], kind="stable")
        probe = idx[np.concatenate([order[:4], order[-4:]])]
        fine = _bump_ray(flat[probe], order=96, panels=8, reach=7.0)
        # measured against the decay scale exp(-sqrt(2 pi kappa)) of the saddle
        scale = np.exp(-np.sqrt(2.0 * np.pi * flat[probe]))
        gap = float(np.max(np.abs(fine - out[probe]) / scale))
        if gap > 1e-10:
            raise ConvergenceError(f"bump transform moved by {gap:.2e} of its scale under refinement")
    return out.reshape(kappa.shape)


def profile_transform(s, flat: float = 1.0) -> np.ndarray:
    """U-hat(s) = integral u(z) e(s z) dz, real and even in s.

    One integration by parts turns the ramps into a mollifier bump centred
    at c0 = (flat + 1.1)/2 with half-width h = (1.1 - flat)/2, giving
    U-hat(s) = sin(2 pi s c0)/(pi s) * B(h s) / mass with B the bump transform.
    """
    s = np.abs(np.asarray(s, dtype=float))
    c0 = 0.5 * (flat + 1.1)
    h = 0.5 * (1.1 - flat)
    bump = bump_transform(h * s) / MOLLIFIER_MASS
    safe = np.where(s > 0, s, 1.0)
    lead = np.where(s > 0, np.sin(2.0 * np.pi * s * c0) / (np.pi * safe), 2.0 * c0)
    return lead * bump
