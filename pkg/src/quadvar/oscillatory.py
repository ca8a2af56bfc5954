"""Bessel values, window transforms and checks of oscillatory-integral identities.

Two Bessel-side identities are checked numerically, each side by its own
route:

* the even-order Bessel sum against a window,
  sum_{k even} 2 pi i^k J_{k-1}(x) g(k-1) = -2 pi int g-hat(t) sin(x cos 2 pi t) dt;
* the Fresnel pair
  2 int g-hat(t) F(x - 2 pi^2 t^2 x) dt = int_0^oo g(sqrt(2 y x)) F(y + x - pi/4) (pi y)^(-1/2) dy
  for F = sin and F = cos.

The quartic phase f(t) = x(-2 pi^2 t^2 + (2/3) pi^4 t^4) + 2 pi t y has three
stationary points for |y/x| < 2 sqrt(2)/3; ``stationary_phase_check`` compares
the leading stationary-phase sum with a contour-deformed quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import kernels
from .windows import ConvergenceError, PlateauWindow, SmoothWindow

__all__ = [
    "IdentityCheck",
    "MonotoneTailCheck",
    "PhaseContext",
    "StationaryPhaseResult",
    "bessel_envelope",
    "bessel_j",
    "bessel_sum_identity",
    "bessel_sum_identity_residual",
    "c_r_norm",
    "fourier_direct",
    "fourier_transform",
    "fresnel_identity",
    "fresnel_identity_residual",
    "monotone_tail_check",
    "parseval_residual",
    "phase",
    "phase_derivative",
    "sobolev_norm",
    "stationary_phase_check",
    "stationary_points",
]

PI = math.pi
COALESCENCE = 2.0 * math.sqrt(2.0) / 3.0
TAIL_TOL = 1e-9
_GX, _GW = leggauss(32)


def bessel_j(k: int, x: float) -> float:
    """J_k(x) for integer k >= 0 and x >= 0."""
    if k < 0 or x < 0:
        raise ValueError("bessel_j needs k >= 0 and x >= 0")
    return float(kernels.bessel_table(int(k), np.array([float(x)]))[0, k])


def bessel_envelope(k: int, x: float) -> float:
    """e (x/2)^k, an upper bound for |J_k(x)| when 0 < x < 1."""
    return math.e * (0.5 * x) ** k


def _panels(lo: float, hi: float, count: int, nodes=(_GX, _GW)):
    gx, gw = nodes
    edges = np.linspace(lo, hi, count + 1)
    a, b = edges[:-1, None], edges[1:, None]
    return ((a + b) / 2 + (b - a) / 2 * gx).ravel(), ((b - a) / 2 * gw).ravel()


def _graded_panels(edges: np.ndarray, nodes=(_GX, _GW)):
    gx, gw = nodes
    a, b = edges[:-1, None], edges[1:, None]
    return ((a + b) / 2 + (b - a) / 2 * gx).ravel(), ((b - a) / 2 * gw).ravel()


def _require_positive_support(g: SmoothWindow) -> None:
    if not g.lo > 0:
        raise ValueError(f"window support ({g.lo}, {g.hi}) must lie in (0, oo)")


# --- Fourier transforms -------------------------------------------------------


def fourier_direct(g: SmoothWindow, t, tol: float = 1e-10) -> np.ndarray:
    """g-hat(t) by quadrature over the support, doubling panels until stable."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    span = g.hi - g.lo
    count = max(8, int(np.max(np.abs(t))) * int(math.ceil(span)) // 2 + 8)
    prev = None
    for _ in range(12):
        y, w = _panels(g.lo, g.hi, count)
        vals = g(y) * w
        cur = np.array([np.sum(vals * np.exp(2j * PI * ti * y)) for ti in t])
        if prev is not None and np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur
        count *= 2
    raise ConvergenceError("direct Fourier quadrature did not settle")


def fourier_transform(g: SmoothWindow, t) -> np.ndarray:
    """g-hat(t) = int g(y) e(t y) dy."""
    return g.fourier(t)


def _envelope(g: SmoothWindow, t: np.ndarray) -> np.ndarray:
    # |g-hat| without the sin factor of the factorised transform
    if isinstance(g, PlateauWindow):
        from .windows import MOLLIFIER_MASS, bump_transform

        w = g.width
        h = 0.5 * (g.HALF - g.flat)
        return np.abs(bump_transform(h * w * t)) / (PI * t * MOLLIFIER_MASS)
    return np.abs(g.fourier(t))


def effective_cutoff(g: SmoothWindow, r: int = 0, tol: float = TAIL_TOL) -> float:
    """T0 with int_{T0}^oo |g-hat(t)| t^r dt estimated below ``tol``.

    The envelope is sampled on a geometric grid and replaced by its running
    maximum from the right before summing, so oscillation cannot hide mass.
    """
    scale = 1.0 / (g.hi - g.lo)
    chunks_t, chunks_e = [], []
    for decade in range(12):
        t = scale * np.geomspace(10.0**decade, 10.0 ** (decade + 1), 400, endpoint=False)
        env = _envelope(g, t) * t**r
        chunks_t.append(t)
        chunks_e.append(env)
        # stop once a whole decade sits far below the target
        if decade >= 1 and float(np.max(env * t)) < 1e-3 * tol:
            break
    else:
        raise ConvergenceError("window transform does not decay on the sampled range")
    t = np.concatenate(chunks_t)
    env = np.concatenate(chunks_e)
    run = np.maximum.accumulate(env[::-1])[::-1]
    tail = np.concatenate([np.cumsum((run[:-1] * np.diff(t))[::-1])[::-1], [0.0]])
    ok = np.flatnonzero(tail < tol)
    return float(t[ok[0]])


def parseval_residual(g: SmoothWindow, f: SmoothWindow) -> float:
    """|int g-hat f - int g f-hat| for two real windows."""
    lhs = _support_integral(f, lambda y: g.fourier(y))
    rhs = _support_integral(g, lambda y: f.fourier(y))
    return float(abs(lhs - rhs))


def _support_integral(g: SmoothWindow, other, panels: int = 64) -> complex:
    y, w = _panels(g.lo, g.hi, panels)
    return complex(np.sum(g(y) * other(y) * w))


# --- identity checks ----------------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    """Both sides of a checked identity plus a refinement diagnostic."""

    name: str
    x: float
    lhs: float
    rhs: float
    residual: float
    refined_residual: float
    nodes: int


def _halfline_integral(integrand, t_max: float, omega, density: float = 1.0) -> tuple[float, int]:
    """int_0^t_max integrand(t) dt with panel widths tied to local frequency."""
    edges = [0.0]
    while edges[-1] < t_max:
        step = 30.0 / (density * omega(edges[-1]))
        edges.append(min(t_max, edges[-1] + step))
    t, w = _graded_panels(np.array(edges))
    return float(np.sum(integrand(t) * w)), t.size


def bessel_sum_identity(x: float, g: SmoothWindow) -> IdentityCheck:
    """Even-order Bessel sum against g versus the window's transform."""
    _require_positive_support(g)
    if x <= 0:
        raise ValueError("x must be positive")
    ks = np.arange(2, int(math.floor(g.hi)) + 2, 2)
    orders = ks - 1
    inside = (orders > g.lo) & (orders < g.hi)
    ks, orders = ks[inside], orders[inside]
    table = kernels.bessel_table(int(orders.max()) if orders.size else 0, np.array([float(x)]))[0]
    signs = np.where((ks // 2) % 2 == 0, 1.0, -1.0)
    terms = 2 * PI * signs * table[orders] * g(orders.astype(float))
    lhs = math.fsum(terms.tolist())

    t0 = effective_cutoff(g)
    base = 2 * PI * (abs(getattr(g, "center", g.hi)) + (g.hi - g.lo) + x)

    def integrand(t):
        return np.real(g.fourier(t)) * np.sin(x * np.cos(2 * PI * t))

    def rhs_at(density):
        val, n = _halfline_integral(integrand, t0, lambda _t: base, density)
        return -2 * PI * 2 * val, n

    rhs, nodes = rhs_at(1.0)
    fine, _ = rhs_at(2.0)
    return IdentityCheck("bessel_sum", x, lhs, rhs, abs(lhs - rhs), abs(lhs - fine), nodes)


def bessel_sum_identity_residual(x: float, g: SmoothWindow) -> float:
    return bessel_sum_identity(x, g).residual


def fresnel_identity(x: float, g: SmoothWindow, parity: str = "sin") -> IdentityCheck:
    """Quadratic-phase window transform against the y = s^2 substituted integral."""
    _require_positive_support(g)
    if parity not in ("sin", "cos"):
        raise ValueError("parity must be 'sin' or 'cos'")
    if x <= 0:
        raise ValueError("x must be positive")
    fn = np.sin if parity == "sin" else np.cos
    t0 = effective_cutoff(g)
    base = 2 * PI * (abs(getattr(g, "center", g.hi)) + (g.hi - g.lo))

    def lhs_at(density):
        val, n = _halfline_integral(
            lambda t: np.real(g.fourier(t)) * fn(x - 2 * PI**2 * t * t * x),
            t0,
            lambda t: base + 4 * PI**2 * t * x,
            density,
        )
        return 4.0 * val, n

    root = math.sqrt(2.0 * x)
    s_lo, s_hi = g.lo / root, g.hi / root

    def rhs_at(density):
        count = int(density * (s_hi * (s_hi - s_lo) / PI + 8)) + 16
        s, w = _panels(s_lo, s_hi, count)
        vals = 2.0 * g(root * s) * fn(s * s + x - PI / 4) / math.sqrt(PI)
        return math.fsum((vals * w).tolist())

    lhs, nodes = lhs_at(1.0)
    rhs = rhs_at(1.0)
    lhs_fine, _ = lhs_at(2.0)
    rhs_fine = rhs_at(2.0)
    return IdentityCheck(f"fresnel_{parity}", x, lhs, rhs, abs(lhs - rhs), abs(lhs_fine - rhs_fine), nodes)


def fresnel_identity_residual(x: float, g: SmoothWindow, parity: str = "sin") -> float:
    return fresnel_identity(x, g, parity).residual


# --- stationary phase ---------------------------------------------------------


def phase(t, x: float, y: float):
    """f(t) = x(-2 pi^2 t^2 + (2/3) pi^4 t^4) + 2 pi t y; accepts complex t."""
    t2 = t * t
    return x * (-2 * PI**2 * t2 + (2.0 / 3.0) * PI**4 * t2 * t2) + 2 * PI * t * y


def phase_derivative(t, x: float, y: float, order: int = 1):
    if order == 1:
        return x * (-4 * PI**2 * t + (8.0 / 3.0) * PI**4 * t**3) + 2 * PI * y
    if order == 2:
        return x * (-4 * PI**2 + 8 * PI**4 * t * t)
    if order == 3:
        return 16 * PI**4 * x * t
    if order == 4:
        return 16 * PI**4 * x + 0.0 * t
    raise ValueError("order must be 1..4")


@dataclass(frozen=True)
class PhaseContext:
    """A stationary point beta of the quartic phase at (x, y)."""

    x: float
    y: float
    beta: float

    def __post_init__(self) -> None:
        if not self.x > 0:
            raise ValueError("x must be positive")
        if abs(phase_derivative(self.beta, self.x, self.y)) >= 1e-10 * max(self.x, abs(self.y)):
            raise ValueError(f"beta = {self.beta} is not stationary")

    @property
    def curvature(self) -> float:
        return float(phase_derivative(self.beta, self.x, self.y, 2))


def _safe_newton(x: float, y: float, lo: float, hi: float, seed: float) -> float:
    # Newton from the seed, falling back to bisection whenever a step leaves the bracket
    f_lo = phase_derivative(lo, x, y)
    t = seed
    tol = 1e-10 * max(x, abs(y))
    for _ in range(200):
        val = phase_derivative(t, x, y)
        if abs(val) < 0.01 * tol:
            return t
        if (val < 0) == (f_lo < 0):
            lo, f_lo = t, val
        else:
            hi = t
        step = t - val / phase_derivative(t, x, y, 2)
        t = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo < 1e-17 * max(1.0, abs(t)):
            break
    if abs(phase_derivative(t, x, y)) >= tol:
        raise ConvergenceError(f"stationary point near {seed} not resolved")
    return t


def stationary_points(x: float, y: float) -> tuple[float, float, float]:
    """The three real roots of f', ordered; ValueError once two of them merge."""
    if not x > 0:
        raise ValueError("x must be positive")
    if abs(y / x) >= COALESCENCE:
        raise ValueError(f"|y/x| = {abs(y / x):.4g} >= {COALESCENCE:.4g}: stationary points coalesce")
    outer = math.sqrt(1.5) / PI
    if y == 0:
        return (-outer, 0.0, outer)
    knee = 1.0 / (PI * math.sqrt(2.0))
    return (
        _safe_newton(x, y, -1.0, -knee, -outer),
        _safe_newton(x, y, -knee, knee, 0.0),
        _safe_newton(x, y, knee, 1.0, outer),
    )


@dataclass(frozen=True)
class StationaryPhaseResult:
    approx: complex
    quadrature: complex
    rel_error: float
    corrected: complex
    corrected_rel_error: float
    points: tuple[PhaseContext, ...]


def _contour_integral(x: float, y: float, density: float = 1.0, half: float = 0.6) -> complex:
    """int_R exp(i f(t)) dt: real segment plus two rays rotated by pi/8.

    Beyond |t| = half the quartic term dominates, and along t = +-(half + s e^{i pi/8})
    the integrand decays like exp(-Im f), so the rays are cut once Im f > 60.
    """
    gx, gw = leggauss(12)
    slope = x * (4 * PI**2 * half + (8.0 / 3.0) * PI**4 * half**3) + 2 * PI * abs(y)
    count = int(density * slope * 2 * half / (2 * PI)) + 20
    t, w = _panels(-half, half, count, (gx, gw))
    total = np.sum(w * np.exp(1j * phase(t, x, y)))
    rot = np.exp(1j * PI / 8)
    for sign in (1.0, -1.0):
        length = 1.0 / x
        while np.imag(phase(sign * (half + length * rot), x, y)) < 60.0:
            length *= 1.3
        s, w = _panels(0.0, length, int(200 * density), (gx, gw))
        total += np.sum(w * np.exp(1j * phase(sign * (half + s * rot), x, y)) * rot)
    return complex(total)


def stationary_phase_check(x: float, y: float) -> StationaryPhaseResult:
    """Leading stationary-phase sum for int exp(i f(t)) dt against quadrature.

    Each point contributes e(sgn(g'')/8) |g''|^(-1/2) e(g(beta)) with g = f/(2 pi).
    The middle point has g'' < 0 and the outer two g'' > 0. ``corrected``
    adds the next order term of each local expansion.
    """
    points = tuple(PhaseContext(x, y, b) for b in stationary_points(x, y))
    approx = 0j
    corrected = 0j
    for p in points:
        a = p.curvature
        lead = (
            np.exp(1j * PI / 4 * np.sign(a))
            * math.sqrt(2 * PI / abs(a))
            * np.exp(1j * phase(p.beta, x, y))
        )
        b = phase_derivative(p.beta, x, y, 3)
        d = phase_derivative(p.beta, x, y, 4)
        approx += lead
        corrected += lead * (1 + (1j / a) * (-d / (8 * a) + 5 * b * b / (24 * a * a)))
    quad = _contour_integral(x, y)
    check = _contour_integral(x, y, density=2.0)
    if abs(check - quad) > 1e-10 * max(1.0, abs(quad)):
        raise ConvergenceError(f"phase quadrature moved by {abs(check - quad):.2e}")
    return StationaryPhaseResult(
        complex(approx),
        quad,
        float(abs(approx - quad) / abs(quad)),
        complex(corrected),
        float(abs(corrected - quad) / abs(quad)),
        points,
    )


@dataclass(frozen=True)
class MonotoneTailCheck:
    a: float
    b: float
    mu: float
    integral: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.integral <= self.bound


def monotone_tail_check(x: float, y: float, a: float = 0.6, b: float | None = None) -> MonotoneTailCheck:
    """|int_a^b exp(i f)| against 4/mu on a stretch where f' is monotone.

    f'' > 0 beyond 1/(pi sqrt 2), so f' increases there and mu = f'(a) when
    that is positive. With b = None the upper end is infinity, reached along
    a ray rotated by pi/8.
    """
    knee = 1.0 / (PI * math.sqrt(2.0))
    if a <= knee:
        raise ValueError(f"a = {a} must exceed {knee:.6f} so that f' is monotone")
    mu = float(phase_derivative(a, x, y))
    if mu <= 0:
        raise ValueError("f' must be positive at a")
    gx, gw = leggauss(16)
    if b is None:
        rot = np.exp(1j * PI / 8)
        length = 1.0 / x
        while np.imag(phase(a + length * rot, x, y)) < 60.0:
            length *= 1.3
        s, w = _panels(0.0, length, 400, (gx, gw))
        value = np.sum(w * np.exp(1j * phase(a + s * rot, x, y)) * rot)
        upper = math.inf
    else:
        if b <= a:
            raise ValueError("need b > a")
        top = float(phase_derivative(b, x, y))
        count = int(top * (b - a) / (2 * PI)) + 20
        t, w = _panels(a, b, count, (gx, gw))
        value = np.sum(w * np.exp(1j * phase(t, x, y)))
        upper = b
    return MonotoneTailCheck(a, upper, mu, float(abs(value)), 4.0 / mu)


# --- norms --------------------------------------------------------------------


def c_r_norm(g: SmoothWindow, r: int) -> float:
    """int |g-hat(t) t^r| dt over the effective support of g-hat."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    first = _abs_moment(g, r, 1.0)
    t_max = effective_cutoff(g, r, tol=1e-12 * max(first, 1e-300))
    return _abs_moment(g, r, t_max)


def _abs_moment(g: SmoothWindow, r: int, t_max: float) -> float:
    # |g-hat| has kinks at zeros of the oscillating factor; for plateau windows
    # those sit at multiples of 1/(2 w c0), so panels are aligned to them
    if isinstance(g, PlateauWindow):
        # with t = s / w the integral is w^-r int |U-hat(s)| s^r ds, and the
        # aligned s panels do not depend on the window, so they are cached
        w = g.width
        spacing = 1.0 / (2.0 * 0.5 * (g.flat + g.HALF))
        need = max(1, int(math.ceil(w * t_max / spacing)))
        count = 1 << (need - 1).bit_length()
        s, weights, mag = _profile_table(g.flat, count)
        return 2.0 * w ** (-r) * math.fsum((mag * s**r * weights).tolist())
    spacing = 1.0 / (2.0 * (g.hi - g.lo))
    count = max(1, int(math.ceil(t_max / spacing)))
    t, w = _panels(0.0, count * spacing, count, leggauss(16))
    vals = np.abs(g.fourier(t)) * t**r * w
    return 2.0 * math.fsum(vals.tolist())


@lru_cache(maxsize=32)
def _profile_table(flat: float, count: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    from .windows import profile_transform

    spacing = 1.0 / (flat + PlateauWindow.HALF)
    s, w = _panels(0.0, count * spacing, count, leggauss(16))
    return s, w, np.abs(profile_transform(s, flat))


def sobolev_norm(g: SmoothWindow, T: int) -> float:
    """sum_{j <= T} sup |g^(j)|."""
    if T < 0 or T > g.max_order:
        raise ValueError(f"order {T} outside 0..{g.max_order}")
    return math.fsum(_derivative_sup(g, j) for j in range(T + 1))


@lru_cache(maxsize=512)
def _derivative_sup(g: SmoothWindow, j: int) -> float:
    samples = 10_001
    if isinstance(g, PlateauWindow):
        # derivatives are even or odd about the centre, so one half suffices
        lo, hi = g.center, g.hi
    else:
        lo, hi = g.lo, g.hi
    x = np.linspace(lo, hi, samples)
    vals = np.abs(g.derivative(x, j))
    k = int(np.argmax(vals))
    best = float(vals[k])
    left, right = x[max(k - 1, 0)], x[min(k + 1, samples - 1)]
    # golden-section refinement inside the bracketing cell
    ratio = (math.sqrt(5) - 1) / 2
    for _ in range(40):
        m1 = right - ratio * (right - left)
        m2 = left + ratio * (right - left)
        v1, v2 = np.abs(g.derivative(np.array([m1, m2]), j))
        best = max(best, float(v1), float(v2))
        if v1 >= v2:
            right = m2
        else:
            left = m1
    return best
