"""
Method-of-lines solver for the wave map equation ∇_{u_t} u_t = c² ∇_{u_m} u_m.

In chart coordinates the equation reads

    u_tt^k = c² u_mm^k + Γ^k_ij(u) (c² u_m^i u_m^j - u_t^i u_t^j)

on a uniform m-grid with fixed endpoints. u_mm is the standard three-point
second difference. The quadratic term u_m^i u_m^j is, by default, the
symmetrised product of the forward and backward differences
(``products="split"``), which keeps arc-length sampled geodesics such as
y = e^m in the half plane exactly stationary on the grid; ``"central"`` uses
the square of the central difference instead. Both are second order.

Positions and velocities advance together with classical RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ChartDomainExceeded, NonFinite
from .geometry import MetricChart

PRODUCTS = ("split", "central")


@dataclass(frozen=True)
class StringState:
    """Snapshot of the discrete string.

    ``pos`` and ``vel`` are read-only ``(n, 2)`` arrays of chart coordinates
    and chart-coordinate velocities at m_i = m0 + i·dm.
    """

    t: float
    m0: float
    dm: float
    n: int
    pos: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("a string needs at least 3 nodes")
        if self.dm <= 0:
            raise ValueError("dm must be positive")
        for name in ("pos", "vel"):
            a = np.array(getattr(self, name), dtype=float)
            if a.shape != (self.n, 2):
                raise ValueError(f"{name} must have shape ({self.n}, 2), got {a.shape}")
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    @property
    def m(self) -> np.ndarray:
        return self.m0 + self.dm * np.arange(self.n)


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.5
    scheme: str = "rk4_mol"
    record_every: int = 1
    max_steps: int = 10_000_000
    products: str = "split"

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.scheme != "rk4_mol":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.products not in PRODUCTS:
            raise ValueError(f"products must be one of {PRODUCTS}")

    def dt(self, dm: float, c: float) -> float:
        return self.cfl * dm / c


def _gradient_products(x, y, dm, products):
    fx = (x[2:] - x[1:-1]) / dm
    bx = (x[1:-1] - x[:-2]) / dm
    fy = (y[2:] - y[1:-1]) / dm
    by = (y[1:-1] - y[:-2]) / dm
    if products == "split":
        return fx * bx, 0.5 * (fx * by + bx * fy), fy * by
    cx = 0.5 * (fx + bx)
    cy = 0.5 * (fy + by)
    return cx * cx, cx * cy, cy * cy


def accelerations(chart: MetricChart, pos, vel, dm: float, c: float, products: str = "split"):
    """Chart-coordinate accelerations at every node; endpoints get zero."""
    pos = np.asarray(pos, dtype=float)
    vel = np.asarray(vel, dtype=float)
    x, y = pos[:, 0], pos[:, 1]
    xi, yi = x[1:-1], y[1:-1]
    chart.require(x, y)
    c2 = c * c
    pxx, pxy, pyy = _gradient_products(x, y, dm, products)
    vx, vy = vel[1:-1, 0], vel[1:-1, 1]
    gam = chart.christoffel(xi, yi)
    gx, gy = gam.contract(c2 * pxx - vx * vx, c2 * pxy - vx * vy, c2 * pyy - vy * vy)
    inv = 1.0 / (dm * dm)
    acc = np.zeros_like(pos)
    acc[1:-1, 0] = c2 * (x[2:] - 2.0 * xi + x[:-2]) * inv + gx
    acc[1:-1, 1] = c2 * (y[2:] - 2.0 * yi + y[:-2]) * inv + gy
    return acc


def wave_map_accel(chart: MetricChart, state: StringState, i: int, c: float,
                   products: str = "split"):
    """Acceleration ``(a_x, a_y)`` of interior node ``i``."""
    if not 1 <= i <= state.n - 2:
        raise IndexError(f"node {i} is not interior")
    sl = slice(i - 1, i + 2)
    a = accelerations(chart, state.pos[sl], state.vel[sl], state.dm, c, products)
    return float(a[1, 0]), float(a[1, 1])


def explicit_accel(chart_name: str, pos3, vel, dm: float, c: float = 1.0):
    """Acceleration from the written-out coordinate systems, without Christoffel symbols.

    ``pos3`` is the three-point stencil ``[(x-, y-), (x, y), (x+, y+)]`` and
    ``vel = (x_t, y_t)`` the centre velocity. Quadratic gradient terms use the
    same split products as the default solver path, e.g.
    x_m y_m = ½(D⁺x D⁻y + D⁻x D⁺y).
    """
    (x0, y0), (x1, y1), (x2, y2) = pos3
    xt, yt = vel
    fx, bx = (x2 - x1) / dm, (x1 - x0) / dm
    fy, by = (y2 - y1) / dm, (y1 - y0) / dm
    xm_xm = fx * bx
    xm_ym = 0.5 * (fx * by + bx * fy)
    ym_ym = fy * by
    xmm = (x2 - 2 * x1 + x0) / dm ** 2
    ymm = (y2 - 2 * y1 + y0) / dm ** 2
    c2 = c * c
    y = y1
    if chart_name == "euclidean":
        return c2 * xmm, c2 * ymm
    if chart_name == "sphere":
        ax = c2 * xmm - 2.0 * math.tan(y) * (c2 * xm_ym - xt * yt)
        ay = c2 * ymm + math.sin(y) * math.cos(y) * (c2 * xm_xm - xt * xt)
        return ax, ay
    if chart_name == "half_plane":
        ax = c2 * xmm - 2.0 * (c2 * xm_ym - xt * yt) / y
        ay = c2 * ymm + ((c2 * xm_xm - xt * xt) - (c2 * ym_ym - yt * yt)) / y
        return ax, ay
    raise ValueError(f"no explicit system for chart {chart_name!r}")


def initial_state(chart: MetricChart, curve, n: int, v0=None) -> StringState:
    """Sample ``curve`` on ``n`` uniform nodes of its m-range.

    ``v0`` may be ``None`` (rest), an ``(n, 2)`` array, or a callable
    ``m -> (vx, vy)``. Endpoint velocities are forced to zero.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    m_a, m_b = curve.m_range
    dm = (m_b - m_a) / (n - 1)
    m = m_a + dm * np.arange(n)
    xs, ys = curve(m)
    pos = np.column_stack([np.broadcast_to(np.asarray(xs, dtype=float), m.shape),
                           np.broadcast_to(np.asarray(ys, dtype=float), m.shape)])
    chart.require(pos[:, 0], pos[:, 1])
    if v0 is None:
        vel = np.zeros_like(pos)
    elif callable(v0):
        vx, vy = v0(m)
        vel = np.column_stack([np.broadcast_to(vx, m.shape), np.broadcast_to(vy, m.shape)]).astype(float)
    else:
        vel = np.array(v0, dtype=float)
    vel[0] = vel[-1] = 0.0
    return StringState(0.0, float(m_a), float(dm), int(n), pos, vel)


def step(chart: MetricChart, state: StringState, cfg: SolverConfig, c: float,
         dt: float | None = None) -> StringState:
    """Advance one RK4 step of size ``dt`` (default ``cfg.cfl·dm/c``)."""
    dt_max = cfg.dt(state.dm, c)
    if dt is None:
        dt = dt_max
    if dt > dt_max * (1 + 1e-12):
        raise ValueError(f"dt = {dt} violates the CFL bound {dt_max}")
    p0, v0 = state.pos, state.vel
    dm, pr = state.dm, cfg.products

    def acc(p, v):
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v))):
            raise NonFinite(f"non-finite values in a stage at t = {state.t}", state=state, t=state.t)
        return accelerations(chart, p, v, dm, c, pr)

    try:
        with np.errstate(all="ignore"):
            a1 = acc(p0, v0)
            p2, v2 = p0 + 0.5 * dt * v0, v0 + 0.5 * dt * a1
            a2 = acc(p2, v2)
            p3, v3 = p0 + 0.5 * dt * v2, v0 + 0.5 * dt * a2
            a3 = acc(p3, v3)
            p4, v4 = p0 + dt * v3, v0 + dt * a3
            a4 = acc(p4, v4)
            pos = p0 + (dt / 6.0) * (v0 + 2.0 * v2 + 2.0 * v3 + v4)
            vel = v0 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    except NonFinite:
        raise
    except ChartDomainExceeded as exc:
        raise ChartDomainExceeded(f"t = {state.t}: {exc}", state=state, t=state.t) from None
    t = state.t + dt
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
        raise NonFinite(f"non-finite values at t = {t}", state=state, t=t)
    try:
        chart.require(pos[:, 0], pos[:, 1])
    except ChartDomainExceeded as exc:
        raise ChartDomainExceeded(f"t = {t}: {exc}", state=state, t=t) from None
    return StringState(t, state.m0, state.dm, state.n, pos, vel)


def n_steps(t_end: float, dm: float, c: float, cfl: float) -> int:
    return max(1, math.ceil(t_end / (cfl * dm / c) - 1e-9))


def simulate(chart: MetricChart, state0: StringState, c: float, t_end: float,
             cfg: SolverConfig = SolverConfig()) -> list[StringState]:
    """Integrate from ``state0`` over a duration ``t_end``.

    The step is ``t_end / N`` with N the smallest count satisfying the CFL
    bound, so the last frame lands exactly on ``state0.t + t_end``. Frames are
    recorded every ``cfg.record_every`` steps plus the final step.

    On a solver abort the exception gets the recorded frames attached as
    ``frames``.
    """
    nsteps = n_steps(t_end, state0.dm, c, cfg.cfl)
    if nsteps > cfg.max_steps:
        raise ValueError(f"{nsteps} steps exceed max_steps = {cfg.max_steps}")
    dt = t_end / nsteps
    t0 = state0.t
    frames = [state0]
    state = state0
    for k in range(1, nsteps + 1):
        try:
            state = step(chart, state, cfg, c, dt)
        except ChartDomainExceeded as exc:
            exc.frames = frames
            raise
        state = replace(state, t=t0 + k * dt)
        if k % cfg.record_every == 0 or k == nsteps:
            frames.append(state)
    return frames


def run(scenario, cfg: SolverConfig | None = None):
    """Run a scenario; returns ``(frames, EnergyReport)``.

    Solver aborts propagate with ``t`` (failure time) and ``frames`` set.
    """
    from .diagnostics import energy_report

    chart, curve, mp = scenario.build()
    if cfg is None:
        cfg = scenario.solver_config()
    state0 = initial_state(chart, curve, scenario.n)
    frames = simulate(chart, state0, mp.c, scenario.t_end, cfg)
    return frames, energy_report(chart, frames, mp)
