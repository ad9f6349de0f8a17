"""
String material model.

Density 1-forms and the constant-density reparametrization, stretch and
perfectly elastic tension, plus the classical transverse-string relations
used as an exact reference (tension law, Newton residuals, D'Alembert) and
the nonlinear comparator equations that the exact solution does *not*
satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonMonotoneMass, OutOfRange, UnknownModel
from .geometry import MetricChart, TangentVector, norm

QUAD_TOL = 1e-10
INVERT_TOL = 1e-10


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = QUAD_TOL,
                     max_depth: int = 50) -> float:
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson with absolute tolerance ``tol``."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s, eps, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = f(lm), f(rm)
        left = (m0 - a0) / 6.0 * (fa0 + 4 * flm + fm0)
        right = (b0 - m0) / 6.0 * (fm0 + 4 * frm + fb0)
        delta = left + right - s
        if depth >= max_depth or abs(delta) <= 15 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((a0, m0, fa0, flm, fm0, left, 0.5 * eps, depth + 1))
            stack.append((m0, b0, fm0, frm, fb0, right, 0.5 * eps, depth + 1))
    return total


@dataclass(frozen=True)
class DensityForm:
    """Density 1-form dμ = density_fn(x) dx on ``param_range``.

    ``antiderivative`` and ``inverse`` are optional closed forms of
    x ↦ m(x) and its inverse. With a closed form, the mass coordinate of the
    left end is ``antiderivative(a)`` rather than 0, so built-in strings land
    on the conventional m-ranges (e.g. [1/4, 9/4] for dμ = 2(x + 1/2) dx).
    """

    density_fn: Callable[[float], float]
    param_range: tuple
    antiderivative: Callable | None = None
    inverse: Callable | None = None
    spec: dict = field(default_factory=dict, compare=False)

    @property
    def m_offset(self) -> float:
        if self.antiderivative is None:
            return 0.0
        return float(self.antiderivative(self.param_range[0]))

    @property
    def m_range(self) -> tuple:
        a, b = self.param_range
        return (mass_coordinate(self, a), mass_coordinate(self, b))


def uniform_density(param_range, scale=1.0) -> DensityForm:
    """dμ = scale·dx."""
    k = float(scale)
    return DensityForm(
        lambda x: k + 0.0 * np.asarray(x, dtype=float),
        tuple(param_range),
        antiderivative=lambda x: k * x,
        inverse=lambda m: m / k,
        spec={"kind": "uniform", "scale": k},
    )


def affine_density(param_range, scale=2.0, shift=0.5) -> DensityForm:
    """dμ = scale·(x + shift)·dx, with m(x) = (scale/2)(x + shift)²."""
    a, s = float(scale), float(shift)
    return DensityForm(
        lambda x: a * (np.asarray(x, dtype=float) + s),
        tuple(param_range),
        antiderivative=lambda x: 0.5 * a * (x + s) ** 2,
        inverse=lambda m: np.sqrt(np.asarray(m, dtype=float) / (0.5 * a)) - s,
        spec={"kind": "affine", "scale": a, "shift": s},
    )


def reciprocal_density(param_range, scale=1.0) -> DensityForm:
    """dμ = scale·dx/x, with m(x) = scale·ln x."""
    k = float(scale)
    return DensityForm(
        lambda x: k / np.asarray(x, dtype=float),
        tuple(param_range),
        antiderivative=lambda x: k * np.log(x),
        inverse=lambda m: np.exp(np.asarray(m, dtype=float) / k),
        spec={"kind": "reciprocal", "scale": k},
    )


DENSITY_KINDS = {
    "uniform": (uniform_density, ("scale",)),
    "affine": (affine_density, ("scale", "shift")),
    "reciprocal": (reciprocal_density, ("scale",)),
}


def density_from_spec(spec: dict, param_range) -> DensityForm:
    kind = spec["kind"]
    ctor, keys = DENSITY_KINDS[kind]
    return ctor(param_range, **{k: spec[k] for k in keys if k in spec})


def _check_range(d: DensityForm, x):
    a, b = d.param_range
    span = abs(b - a)
    if not (a - 1e-14 * span <= x <= b + 1e-14 * span):
        raise OutOfRange(f"x = {x} outside parameter range [{a}, {b}]")


def cumulative_mass(d: DensityForm, x: float) -> float:
    """Mass of the string between the left end of ``param_range`` and ``x``."""
    _check_range(d, x)
    a = d.param_range[0]
    if d.antiderivative is not None:
        return float(d.antiderivative(x) - d.antiderivative(a))
    return adaptive_simpson(lambda s: float(d.density_fn(s)), a, float(x), QUAD_TOL)


def mass_coordinate(d: DensityForm, x: float) -> float:
    """m(x) including the antiderivative offset of closed-form densities."""
    if d.antiderivative is not None:
        _check_range(d, x)
        return float(d.antiderivative(x))
    return cumulative_mass(d, x)


def invert_mass(d: DensityForm, m: float) -> float:
    """Parameter x with ``mass_coordinate(d, x) == m``."""
    if d.inverse is not None:
        return float(d.inverse(m))
    a, b = d.param_range
    lo, hi = float(a), float(b)
    flo = mass_coordinate(d, lo) - m
    fhi = mass_coordinate(d, hi) - m
    if flo > INVERT_TOL or fhi < -INVERT_TOL:
        raise OutOfRange(f"mass coordinate {m} outside [{flo + m}, {fhi + m}]")
    if fhi <= flo:
        raise NonMonotoneMass("cumulative mass is not increasing")
    for _ in range(200):
        if hi - lo <= 1e-7 * max(1.0, abs(b - a)):
            break
        mid = 0.5 * (lo + hi)
        if mass_coordinate(d, mid) - m < 0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(20):
        r = mass_coordinate(d, x) - m
        if abs(r) <= INVERT_TOL:
            break
        rho = float(d.density_fn(x))
        if rho <= 0:
            raise NonMonotoneMass(f"density {rho} not positive at x = {x}")
        x = min(max(x - r / rho, a), b)
    return x


@dataclass(frozen=True)
class MaterialParams:
    rho: float
    T0: float
    c: float

    def __post_init__(self):
        if self.rho <= 0 or self.T0 <= 0 or self.c <= 0:
            raise ValueError("rho, T0 and c must be positive")
        if abs(self.c * self.c * self.rho - self.T0) > 1e-12 * self.T0:
            raise ValueError(f"c^2 * rho = {self.c ** 2 * self.rho} differs from T0 = {self.T0}")

    @classmethod
    def from_wave_speed(cls, c=1.0, rho=1.0):
        return cls(rho=rho, T0=c * c * rho, c=c)


@dataclass(frozen=True)
class ParametrizedCurve:
    """Curve m ↦ chart point on ``m_range``; ``eval`` broadcasts over arrays of m."""

    eval: Callable
    m_range: tuple

    def __call__(self, m):
        return self.eval(m)


def reparametrize_by_density(curve: Callable, d: DensityForm) -> ParametrizedCurve:
    """Reparametrize ``curve`` (a map x ↦ (X, Y)) so that dμ = dm.

    Closed-form densities use their analytic inverse; otherwise each m is
    inverted numerically by bisection followed by Newton polishing.
    """
    a, b = d.param_range
    probe = np.linspace(a, b, 33)
    if np.any(np.asarray(d.density_fn(probe), dtype=float) <= 0):
        raise NonMonotoneMass("density must be positive on the parameter range")
    m_range = d.m_range
    if not m_range[1] > m_range[0]:
        raise NonMonotoneMass("cumulative mass is not increasing")

    if d.inverse is not None:
        inv = d.inverse

        def at(m):
            return curve(inv(np.asarray(m, dtype=float)))
    else:
        def at(m):
            m = np.asarray(m, dtype=float)
            xs = np.array([invert_mass(d, float(mi)) for mi in m.ravel()]).reshape(m.shape)
            return curve(xs)

    return ParametrizedCurve(at, m_range)


def stretch_factor(chart: MetricChart, u_m: TangentVector) -> float:
    """σ = ∂s/∂m = |u_m|_g."""
    return norm(chart, u_m)


def tension(mp: MaterialParams, sigma: float) -> float:
    """Perfectly elastic tension T = T0·σ."""
    if sigma < 0:
        raise ValueError("stretch factor must be non-negative")
    return mp.T0 * sigma


def tension_vector(chart: MetricChart, mp: MaterialParams, u_m: TangentVector):
    """Tension force T·(unit tangent) in chart components; equals T0·u_m."""
    sigma = stretch_factor(chart, u_m)
    if sigma == 0:
        return (0.0, 0.0)
    t = tension(mp, sigma)
    return (t * u_m.vx / sigma, t * u_m.vy / sigma)


def _d1(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)


def _d2(f, x, h):
    return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)


def transverse_tension_field(u_x: Callable, C: float, x: float) -> float:
    """Tension magnitude C·sqrt(1 + u_x²) of a transversely vibrating string."""
    s = u_x(x)
    return C * math.sqrt(1.0 + s * s)


def tension_residual(u_x: Callable, C: float, x: float, h: float = 1e-3,
                     u_xx: Callable | None = None) -> float:
    """Horizontal force balance T_x/sqrt(1+u_x²) - T u_x u_xx/(1+u_x²)^(3/2).

    T_x (and u_xx when not supplied) come from fourth-order central
    differences of step ``h``.
    """
    if C == 0:
        return 0.0
    s = u_x(x)
    q = 1.0 + s * s
    sxx = u_xx(x) if u_xx is not None else _d1(u_x, x, h)
    T = C * math.sqrt(q)
    T_x = _d1(lambda z: transverse_tension_field(u_x, C, z), x, h)
    return T_x / math.sqrt(q) - T * s * sxx / q ** 1.5


def newton_residuals(u: Callable, x: float, t: float, rho: float, C: float,
                     h: float = 1e-3) -> tuple:
    """Residuals of Newton's law for a transverse string u(x, t).

    Returns ``(vertical, horizontal)`` with
    vertical = ρ u_tt - ∂_x(T sin θ) and horizontal = ∂_x(T cos θ), where
    T = C sqrt(1 + u_x²), sin θ = u_x/sqrt(1+u_x²), cos θ = 1/sqrt(1+u_x²).
    All derivatives are fourth-order central differences of step ``h``.
    """
    def slope(z):
        return _d1(lambda w: u(w, t), z, h)

    def vertical_force(z):
        s = slope(z)
        q = math.sqrt(1.0 + s * s)
        return C * q * (s / q)

    def horizontal_force(z):
        s = slope(z)
        q = math.sqrt(1.0 + s * s)
        return C * q * (1.0 / q)

    u_tt = _d2(lambda w: u(x, w), t, h)
    vertical = rho * u_tt - _d1(vertical_force, x, h)
    horizontal = _d1(horizontal_force, x, h)
    return vertical, horizontal


COMPARATOR_MODELS = ("cj_wrong_mass", "cj_fixed_mass", "linear")


def comparator_rhs(model: str, u_x: float, u_xx: float, T: float, rho: float) -> float:
    """u_tt predicted by one of the classical string equations.

    ``cj_wrong_mass`` divides by (1 + u_x²)², ``cj_fixed_mass`` by
    (1 + u_x²)^(3/2) and ``linear`` is the plain wave equation.
    """
    q = 1.0 + u_x * u_x
    if model == "linear":
        return T * u_xx / rho
    if model == "cj_wrong_mass":
        return T * u_xx / (rho * q * q)
    if model == "cj_fixed_mass":
        return T * u_xx / (rho * q ** 1.5)
    raise UnknownModel(f"unknown comparator model {model!r}")


def comparator_residual(model, u, x, t, T, rho, h=1e-3):
    """u_tt - comparator_rhs for a function u(x, t), derivatives by finite differences."""
    u_tt = _d2(lambda w: u(x, w), t, h)
    u_x = _d1(lambda w: u(w, t), x, h)
    u_xx = _d2(lambda w: u(w, t), x, h)
    return u_tt - comparator_rhs(model, u_x, u_xx, T, rho)


def dalembert(profile: Callable, L: float, c: float, x, t):
    """Fixed-end, zero-velocity solution ½[P(x+ct) + P(x-ct)].

    P is the odd, 2L-periodic extension of ``profile`` (which must vanish at
    0 and L and broadcast over arrays).
    """
    def ext(s):
        s = np.mod(np.asarray(s, dtype=float), 2 * L)
        upper = s > L
        r = np.where(upper, 2 * L - s, s)
        v = np.asarray(profile(r), dtype=float)
        return np.where(upper, -v, v)

    x = np.asarray(x, dtype=float)
    out = 0.5 * (ext(x + c * t) + ext(x - c * t))
    return out if out.ndim else float(out)


def flat_oracle(curve: Callable, m_range, c: float = 1.0) -> Callable:
    """Exact flat-target solution from rest for initial curve ``curve(m) -> (x, y)``.

    The endpoint-interpolating straight segment is static; the remainder of
    each component evolves by :func:`dalembert`.
    """
    m_a, m_b = (float(v) for v in m_range)
    L = m_b - m_a
    xa, ya = (float(v) for v in curve(np.array(m_a)))
    xb, yb = (float(v) for v in curve(np.array(m_b)))

    def line(s):
        w = s / L
        return xa + (xb - xa) * w, ya + (yb - ya) * w

    def rx(s):
        return np.asarray(curve(m_a + s)[0], dtype=float) - line(s)[0]

    def ry(s):
        return np.asarray(curve(m_a + s)[1], dtype=float) - line(s)[1]

    def solution(m, t):
        s = np.asarray(m, dtype=float) - m_a
        lx, ly = line(s)
        return lx + dalembert(rx, L, c, s, t), ly + dalembert(ry, L, c, s, t)

    return solution

