"""
Post-processing of recorded frames: discrete energy, errors against an
oracle, period estimation and convergence orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoPeriodFound


@dataclass
class EnergyReport:
    samples: list = field(default_factory=list)  # (t, kinetic, potential, total)
    relative_drift: float = 0.0
    estimated_period: float | None = None
    convergence: list | None = None


def trapezoid_weights(n: int, dm: float) -> np.ndarray:
    w = np.full(n, dm)
    w[0] = w[-1] = 0.5 * dm
    return w


def grid_derivative(f: np.ndarray, dm: float) -> np.ndarray:
    """Fourth-order accurate first derivative along axis 0 (needs n >= 5)."""
    f = np.asarray(f, dtype=float)
    n = f.shape[0]
    if n < 5:
        return np.gradient(f, dm, axis=0, edge_order=2 if n >= 3 else 1)
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dm)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * dm)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * dm)
    d[-1] = -(-25 * f[-1] + 48 * f[-2] - 36 * f[-3] + 16 * f[-4] - 3 * f[-5]) / (12 * dm)
    d[-2] = -(-3 * f[-1] - 10 * f[-2] + 18 * f[-3] - 6 * f[-4] + f[-5]) / (12 * dm)
    return d


def _quad_form(chart, pos, v):
    gxx, gxy, gyy = chart.metric_fn(pos[:, 0], pos[:, 1])
    return gxx * v[:, 0] ** 2 + 2 * gxy * v[:, 0] * v[:, 1] + gyy * v[:, 1] ** 2


def energy(chart, state, mp) -> tuple:
    """Kinetic and potential energy ½ρ∫|u_t|² dm and ½T0∫|u_m|² dm.

    Norms are taken in the chart metric; integrals use trapezoid weights and
    u_m comes from fourth-order differences on the solver grid.
    """
    w = trapezoid_weights(state.n, state.dm)
    um = grid_derivative(state.pos, state.dm)
    kin = 0.5 * mp.rho * float(np.sum(w * _quad_form(chart, state.pos, state.vel)))
    pot = 0.5 * mp.T0 * float(np.sum(w * _quad_form(chart, state.pos, um)))
    return kin, pot


def energy_report(chart, frames, mp) -> EnergyReport:
    samples = []
    for f in frames:
        k, p = energy(chart, f, mp)
        samples.append((f.t, k, p, k + p))
    totals = [s[3] for s in samples]
    drift = (max(totals) - min(totals)) / totals[0] if totals[0] else float("inf")
    return EnergyReport(samples=samples, relative_drift=drift)


def error_vs_oracle(frames, oracle) -> tuple:
    """Per-frame L∞ and discrete L² errors of chart coordinates against ``oracle(m, t)``."""
    linf, l2 = [], []
    for f in frames:
        ox, oy = oracle(f.m, f.t)
        dx = f.pos[:, 0] - np.asarray(ox, dtype=float)
        dy = f.pos[:, 1] - np.asarray(oy, dtype=float)
        linf.append(float(max(np.max(np.abs(dx)), np.max(np.abs(dy)))))
        w = trapezoid_weights(f.n, f.dm)
        l2.append(math.sqrt(float(np.sum(w * (dx * dx + dy * dy)))))
    return linf, l2


def distance_to_initial(frames) -> np.ndarray:
    """Discrete L² distance D(t) of every frame from the first frame."""
    p0 = frames[0].pos
    w = trapezoid_weights(frames[0].n, frames[0].dm)
    return np.array([math.sqrt(float(np.sum(w * np.sum((f.pos - p0) ** 2, axis=1))))
                     for f in frames])


def recurrence_minima(frames, depth: float = 0.5) -> list:
    """Times and depths of the returns to the initial curve.

    Each maximal run of frames with D(t) < ``depth·max D`` contributes one
    return: its lowest sample, refined by a parabola through the neighbours.
    A lowest sample on the final frame is not counted.
    The run starting at t = 0 (D = 0) is the first return.
    """
    ts = np.array([f.t for f in frames])
    d = distance_to_initial(frames)
    if len(d) < 3:
        return [(float(ts[0]), 0.0)]
    cut = depth * float(np.max(d))
    out = [(float(ts[0]), 0.0)]
    below = d < cut
    k = 0
    while k < len(d) and below[k]:
        k += 1
    while k < len(d):
        if not below[k]:
            k += 1
            continue
        j = k
        while j < len(d) and below[j]:
            j += 1
        km = k + int(np.argmin(d[k:j]))
        if km == len(d) - 1:
            break  # still descending when the run ends
        out.append(_refine_minimum(ts, d, km))
        k = j
    return out


def _refine_minimum(ts, d, k):
    t0, t1, t2 = ts[k - 1], ts[k], ts[k + 1]
    d0, d1, d2 = d[k - 1], d[k], d[k + 1]
    denom = (t0 - t1) * (t0 - t2) * (t1 - t2)
    a = (t2 * (d1 - d0) + t1 * (d0 - d2) + t0 * (d2 - d1)) / denom
    b = (t2 * t2 * (d0 - d1) + t1 * t1 * (d2 - d0) + t0 * t0 * (d1 - d2)) / denom
    if a > 0:
        tm = -b / (2 * a)
        if t0 <= tm <= t2:
            c0 = d1 - a * t1 * t1 - b * t1
            return float(tm), max(0.0, float(c0 - b * b / (4 * a)))
    return float(t1), float(d1)


def estimate_period(frames, depth: float = 0.5) -> float:
    """Mean gap between successive returns of the string to its initial shape."""
    mins = recurrence_minima(frames, depth)
    if len(mins) < 2:
        raise NoPeriodFound(f"only {len(mins)} return(s) to the initial curve before t = {frames[-1].t}")
    ts = [t for t, _ in mins]
    return float(np.mean(np.diff(ts)))


def cycle_shape_distances(frames, depth: float = 0.5) -> list:
    """D at each return after the first: 0 for an exactly periodic string."""
    return [dist for _, dist in recurrence_minima(frames, depth)[1:]]


def centroid_drift_ratio(frames) -> float:
    """Mean leftward over mean rightward speed of the mean x-coordinate.

    Values above 1 mean the string sweeps left faster than it returns right.
    """
    ts = np.array([f.t for f in frames])
    xc = np.array([float(np.mean(f.pos[:, 0])) for f in frames])
    v = np.diff(xc) / np.diff(ts)
    left = -v[v < 0]
    right = v[v > 0]
    if left.size == 0 or right.size == 0:
        return float("nan")
    return float(np.mean(left) / np.mean(right))


def _final_error(coarse, fine):
    """L∞ difference of two final frames; ``fine`` must nest the coarse grid."""
    ratio = (fine.n - 1) // (coarse.n - 1)
    if (coarse.n - 1) * ratio != fine.n - 1:
        raise ValueError("reference grid does not nest the coarse grid")
    sub = fine.pos[::ratio]
    return float(np.max(np.abs(coarse.pos - sub)))


def convergence_order(scenario, n_list, reference="fine", cfg=None) -> list:
    """Grid-refinement study.

    ``reference`` is either an oracle ``(m, t) -> (x, y)`` (error = max L∞
    over all recorded frames) or ``"fine"`` (error = final-frame L∞ against a
    run with 4× the finest resolution). Returns ``(n, error, order)`` tuples;
    order is ``None`` for the first entry and ``nan`` once errors saturate at
    round-off.
    """
    from dataclasses import replace

    from .solver import run

    n_list = list(n_list)
    if len(n_list) < 3 or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing with at least 3 entries")
    errors = []
    if callable(reference):
        for n in n_list:
            frames, _ = run(replace(scenario, n=n), cfg)
            linf, _ = error_vs_oracle(frames, reference)
            errors.append(max(linf))
    else:
        ref_n = 4 * (n_list[-1] - 1) + 1
        ref_frames, _ = run(replace(scenario, n=ref_n, record_every=10 ** 9), cfg)
        for n in n_list:
            frames, _ = run(replace(scenario, n=n, record_every=10 ** 9), cfg)
            errors.append(_final_error(frames[-1], ref_frames[-1]))
    return orders_from_errors(n_list, errors)


def orders_from_errors(n_list, errors, floor: float = 1e-13) -> list:
    out = []
    for k, (n, e) in enumerate(zip(n_list, errors)):
        if k == 0:
            out.append((n, e, None))
            continue
        prev = errors[k - 1]
        if prev <= floor or e <= floor:
            out.append((n, e, float("nan")))
        else:
            h_ratio = (n - 1) / (n_list[k - 1] - 1)
            out.append((n, e, math.log(prev / e) / math.log(h_ratio)))
    return out
