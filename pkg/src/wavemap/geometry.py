"""
Coordinate charts on Riemannian surfaces.

A chart carries the metric components g_ij(x, y), the six independent
Christoffel symbols Γ^k_ij (symmetric in i, j) and an open rectangular
domain. Everything here is a pure function of its inputs and broadcasts
over numpy arrays where noted, so the solver can evaluate a whole string
in one call.

Christoffel symbols are stored in the order

    (Γ^x_xx, Γ^x_xy, Γ^x_yy, Γ^y_xx, Γ^y_xy, Γ^y_yy)

and follow the convention that geodesics satisfy γ'' + Γ(γ', γ') = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import BaseMismatch, ChartDomainExceeded, NearBoundary, UnknownChart

EPS_CHART = 1e-6
GUARD = 1e6
FD_STEP_DEFAULT = 1e-5
BASE_TOL = 1e-12


class ChartPoint(NamedTuple):
    x: float
    y: float


class TangentVector(NamedTuple):
    base: ChartPoint
    vx: float
    vy: float


class Christoffel(NamedTuple):
    """The six independent symbols Γ^k_ij, named ``k i j``."""

    xxx: object
    xxy: object
    xyy: object
    yxx: object
    yxy: object
    yyy: object

    def contract(self, pxx, pxy, pyy):
        """Return Γ^k_ij P^ij for a symmetric tensor P given by its components."""
        ax = self.xxx * pxx + 2.0 * self.xxy * pxy + self.xyy * pyy
        ay = self.yxx * pxx + 2.0 * self.yxy * pxy + self.yyy * pyy
        return ax, ay

    def apply(self, u, v):
        """Return Γ^k_ij u^i v^j for vector pairs ``u = (ux, uy)``, ``v = (vx, vy)``."""
        ux, uy = u
        vx, vy = v
        return self.contract(ux * vx, 0.5 * (ux * vy + uy * vx), uy * vy)


MetricFn = Callable[[object, object], tuple]
ChristoffelFn = Callable[[object, object], Christoffel]


@dataclass(frozen=True)
class MetricChart:
    """Coordinate chart on a surface.

    Parameters
    ----------
    name : str
        Identifier.
    metric_fn : callable
        ``(x, y) -> (g_xx, g_xy, g_yy)``; must broadcast over arrays.
    christoffel_fn : callable or None
        ``(x, y) -> Christoffel``. When omitted the symbols are obtained by
        central differences of ``metric_fn`` with step 1e-5.
    domain : tuple
        ``(x_min, x_max, y_min, y_max)`` of the open coordinate rectangle.
    eps : float
        Margin kept away from every domain edge.
    """

    name: str
    metric_fn: MetricFn
    christoffel_fn: ChristoffelFn | None = None
    domain: tuple = (-GUARD, GUARD, -GUARD, GUARD)
    eps: float = EPS_CHART
    coord_names: tuple = ("x", "y")
    analytic: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.christoffel_fn is None:
            metric_fn = self.metric_fn
            object.__setattr__(
                self,
                "christoffel_fn",
                lambda x, y: _fd_symbols(metric_fn, x, y, FD_STEP_DEFAULT),
            )

    def metric(self, x, y):
        """Return the 2×2 metric matrix at a single point."""
        self.require(x, y)
        gxx, gxy, gyy = self.metric_fn(x, y)
        return np.array([[gxx, gxy], [gxy, gyy]], dtype=float)

    def christoffel(self, x, y) -> Christoffel:
        return self.christoffel_fn(x, y)

    def contains(self, x, y):
        """Elementwise test for strict interior membership (with margin)."""
        x0, x1, y0, y1 = self.domain
        e = self.eps
        x = np.asarray(x)
        y = np.asarray(y)
        return (x > x0 + e) & (x < x1 - e) & (y > y0 + e) & (y < y1 - e)

    def require(self, x, y):
        inside = self.contains(x, y)
        if not np.all(inside):
            bad = np.flatnonzero(~np.atleast_1d(inside))
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            ys = np.atleast_1d(np.asarray(y, dtype=float))
            i = int(bad[0])
            xi = float(xs[i] if xs.size > 1 else xs[0])
            yi = float(ys[i] if ys.size > 1 else ys[0])
            raise ChartDomainExceeded(
                f"node {i} at ({xi!r}, {yi!r}) outside {self.name} chart domain"
            )


def _euclidean_metric(x, y):
    one = np.ones(np.broadcast(x, y).shape)
    return one, 0.0 * one, one


def _euclidean_symbols(x, y):
    z = np.zeros(np.broadcast(x, y).shape)
    return Christoffel(z, z, z, z, z, z)


def _sphere_metric(x, y):
    c = np.cos(y)
    one = np.ones(np.broadcast(x, y).shape)
    return c * c * one, 0.0 * one, one


def _sphere_symbols(x, y):
    z = np.zeros(np.broadcast(x, y).shape)
    y = y + z
    return Christoffel(z, -np.tan(y), z, np.sin(y) * np.cos(y), z, z)


def _half_plane_metric(x, y):
    y = y + np.zeros(np.broadcast(x, y).shape)
    w = 1.0 / (y * y)
    return w, 0.0 * w, w


def _half_plane_symbols(x, y):
    z = np.zeros(np.broadcast(x, y).shape)
    r = 1.0 / (y + z)
    return Christoffel(z, -r, z, r, z, -r)


def builtin_chart(name: str, eps: float = EPS_CHART) -> MetricChart:
    """Return one of the analytic charts ``euclidean``, ``sphere``, ``half_plane``."""
    if name == "euclidean":
        return MetricChart(
            "euclidean", _euclidean_metric, _euclidean_symbols,
            (-GUARD, GUARD, -GUARD, GUARD), eps, analytic=True,
        )
    if name == "sphere":
        # longitude x, latitude y
        h = 0.5 * math.pi
        return MetricChart(
            "sphere", _sphere_metric, _sphere_symbols,
            (-GUARD, GUARD, -h, h), eps, analytic=True,
        )
    if name == "half_plane":
        return MetricChart(
            "half_plane", _half_plane_metric, _half_plane_symbols,
            (-GUARD, GUARD, 0.0, GUARD), eps, analytic=True,
        )
    raise UnknownChart(f"unknown chart {name!r}; expected euclidean, sphere or half_plane")


CHART_NAMES = ("euclidean", "sphere", "half_plane")


def _fd_symbols(metric_fn, x, y, h):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gp = [np.asarray(g, dtype=float) for g in metric_fn(x + h, y)]
    gm = [np.asarray(g, dtype=float) for g in metric_fn(x - h, y)]
    dx = [(a - b) / (2 * h) for a, b in zip(gp, gm)]
    gp = [np.asarray(g, dtype=float) for g in metric_fn(x, y + h)]
    gm = [np.asarray(g, dtype=float) for g in metric_fn(x, y - h)]
    dy = [(a - b) / (2 * h) for a, b in zip(gp, gm)]
    gxx, gxy, gyy = (np.asarray(g, dtype=float) for g in metric_fn(x, y))
    det = gxx * gyy - gxy * gxy
    ixx, ixy, iyy = gyy / det, -gxy / det, gxx / det

    # d[l][(i, j)] = ∂_l g_ij, with index 0 = x, 1 = y
    comp = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}
    d = (dx, dy)
    ginv = ((ixx, ixy), (ixy, iyy))

    def first_kind(i, j, l):
        return 0.5 * (d[i][comp[(j, l)]] + d[j][comp[(i, l)]] - d[l][comp[(i, j)]])

    out = []
    for k in (0, 1):
        for i, j in ((0, 0), (0, 1), (1, 1)):
            out.append(ginv[k][0] * first_kind(i, j, 0) + ginv[k][1] * first_kind(i, j, 1))
    return Christoffel(*out)


def christoffel_fd(chart: MetricChart, p: ChartPoint, h: float = 1e-4) -> Christoffel:
    """Christoffel symbols from central differences of the metric.

    Independent of ``chart.christoffel_fn``; used to validate the analytic
    symbols and to back charts defined by their metric alone.

    Raises
    ------
    NearBoundary
        If the difference stencil around ``p`` leaves the chart domain.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    x, y = p
    for sx, sy in ((h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)):
        if not np.all(chart.contains(np.asarray(x) + sx, np.asarray(y) + sy)):
            raise NearBoundary(f"stencil of width {h} around ({x}, {y}) leaves {chart.name}")
    return _fd_symbols(chart.metric_fn, x, y, h)


def _check_base(v: TangentVector, w: TangentVector):
    if abs(v.base[0] - w.base[0]) > BASE_TOL or abs(v.base[1] - w.base[1]) > BASE_TOL:
        raise BaseMismatch(f"vectors based at {tuple(v.base)} and {tuple(w.base)}")


def inner(chart: MetricChart, v: TangentVector, w: TangentVector) -> float:
    """Metric inner product g_ij v^i w^j of two vectors at the same point."""
    _check_base(v, w)
    x, y = v.base
    chart.require(x, y)
    gxx, gxy, gyy = chart.metric_fn(x, y)
    return float(gxx * v.vx * w.vx + gxy * (v.vx * w.vy + v.vy * w.vx) + gyy * v.vy * w.vy)


def norm(chart: MetricChart, v: TangentVector) -> float:
    return math.sqrt(max(inner(chart, v, v), 0.0))


def _scalar_symbols(chart, x, y):
    return tuple(float(s) for s in chart.christoffel(x, y))


def _transport_rhs(chart, x, y, dx, dy, vx, vy):
    g = Christoffel(*_scalar_symbols(chart, x, y))
    ax, ay = g.apply((dx, dy), (vx, vy))
    return -ax, -ay


def parallel_transport(
    chart: MetricChart,
    path: Sequence[ChartPoint],
    v0: TangentVector,
    max_substep: float = 2e-3,
) -> TangentVector:
    """Parallel transport ``v0`` along the chart-straight polyline ``path``.

    Each segment is split into equal substeps no longer than ``max_substep``
    (in chart coordinates) and advanced with the classical RK4 update of
    dv^k/ds = -Γ^k_ij γ'^i v^j.
    """
    if len(path) < 2:
        raise ValueError("path needs at least two points")
    p0 = path[0]
    if abs(v0.base[0] - p0[0]) > BASE_TOL or abs(v0.base[1] - p0[1]) > BASE_TOL:
        raise BaseMismatch("v0 must be based at the first path point")
    xs = np.array([p[0] for p in path], dtype=float)
    ys = np.array([p[1] for p in path], dtype=float)
    chart.require(xs, ys)

    vx, vy = float(v0.vx), float(v0.vy)
    for k in range(len(path) - 1):
        ax, ay = xs[k], ys[k]
        dx, dy = xs[k + 1] - ax, ys[k + 1] - ay
        length = math.hypot(dx, dy)
        nsub = max(1, math.ceil(length / max_substep))
        h = 1.0 / nsub
        for j in range(nsub):
            s = j * h
            x0, y0 = ax + s * dx, ay + s * dy
            xm, ym = ax + (s + 0.5 * h) * dx, ay + (s + 0.5 * h) * dy
            x1, y1 = ax + (s + h) * dx, ay + (s + h) * dy
            k1 = _transport_rhs(chart, x0, y0, dx, dy, vx, vy)
            k2 = _transport_rhs(chart, xm, ym, dx, dy, vx + 0.5 * h * k1[0], vy + 0.5 * h * k1[1])
            k3 = _transport_rhs(chart, xm, ym, dx, dy, vx + 0.5 * h * k2[0], vy + 0.5 * h * k2[1])
            k4 = _transport_rhs(chart, x1, y1, dx, dy, vx + h * k3[0], vy + h * k3[1])
            vx += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            vy += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    return TangentVector(ChartPoint(float(xs[-1]), float(ys[-1])), vx, vy)


def _geodesic_rhs(chart, x, y, vx, vy):
    chart.require(x, y)
    g = Christoffel(*_scalar_symbols(chart, x, y))
    ax, ay = g.apply((vx, vy), (vx, vy))
    return vx, vy, -ax, -ay


def _integrate_geodesic(chart, p0, v0, s_max, ds):
    if ds <= 0 or s_max <= 0:
        raise ValueError("ds and s_max must be positive")
    chart.require(*p0)
    nsteps = max(1, math.ceil(s_max / ds - 1e-9))
    h = s_max / nsteps
    state = (float(p0[0]), float(p0[1]), float(v0.vx), float(v0.vy))
    out = [state]
    for _ in range(nsteps):
        k1 = _geodesic_rhs(chart, *state)
        k2 = _geodesic_rhs(chart, *(s + 0.5 * h * k for s, k in zip(state, k1)))
        k3 = _geodesic_rhs(chart, *(s + 0.5 * h * k for s, k in zip(state, k2)))
        k4 = _geodesic_rhs(chart, *(s + h * k for s, k in zip(state, k3)))
        state = tuple(
            s + h / 6.0 * (a + 2 * b + 2 * c + d)
            for s, a, b, c, d in zip(state, k1, k2, k3, k4)
        )
        chart.require(state[0], state[1])
        out.append(state)
    return out


def geodesic_evolve(
    chart: MetricChart,
    p0: ChartPoint,
    v0: TangentVector,
    s_max: float,
    ds: float,
) -> list[ChartPoint]:
    """Integrate the geodesic through ``p0`` with initial velocity ``v0``.

    Uses fixed-step RK4; the step is shrunk slightly so the last point lands
    exactly at ``s_max``. Returns all points including ``p0``.
    """
    return [ChartPoint(s[0], s[1]) for s in _integrate_geodesic(chart, p0, v0, s_max, ds)]


def geodesic_velocities(chart, p0, v0, s_max, ds):
    """Same integration as :func:`geodesic_evolve`, returning the tangent vectors."""
    return [
        TangentVector(ChartPoint(s[0], s[1]), s[2], s[3])
        for s in _integrate_geodesic(chart, p0, v0, s_max, ds)
    ]
