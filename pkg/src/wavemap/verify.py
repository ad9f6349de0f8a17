"""
Self-check suites run by ``wavemap verify``.

Each suite returns a list of :class:`Check` records; a suite passes when all
of its checks pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import convergence_order, error_vs_oracle, estimate_period, energy_report
from .geometry import (ChartPoint, TangentVector, builtin_chart, christoffel_fd, geodesic_velocities,
                       norm, parallel_transport)
from .scenarios import builtin_scenario
from .solver import run
from .strings import flat_oracle

SUITES = ("geometry", "flat-oracle", "energy", "period", "convergence")


@dataclass
class Check:
    name: str
    measured: float
    threshold: str
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name}: measured {self.measured:.6g} (require {self.threshold})"


def _random_points(chart_name, rng, count):
    x = rng.uniform(-3.0, 3.0, count)
    if chart_name == "sphere":
        y = rng.uniform(-1.4, 1.4, count)
    elif chart_name == "half_plane":
        y = rng.uniform(0.5, 5.0, count)
    else:
        y = rng.uniform(-3.0, 3.0, count)
    return x, y


def suite_geometry(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    checks = []
    for name in ("euclidean", "sphere", "half_plane"):
        chart = builtin_chart(name)
        x, y = _random_points(name, rng, 100)
        worst = 0.0
        for xi, yi in zip(x, y):
            fd = christoffel_fd(chart, ChartPoint(xi, yi), 1e-4)
            an = chart.christoffel(xi, yi)
            worst = max(worst, max(abs(float(a) - float(b)) for a, b in zip(fd, an)))
        checks.append(Check(f"christoffel fd vs analytic [{name}]", worst, "<= 1e-6", worst <= 1e-6))

        iso, trip = 0.0, 0.0
        for _ in range(5):
            k = int(rng.integers(1, 51))
            px, py = _random_points(name, rng, 1)
            steps = rng.normal(scale=0.05, size=(k, 2))
            pts = np.vstack([[px[0], py[0]], [px[0], py[0]] + np.cumsum(steps, axis=0)])
            if name == "sphere":
                pts[:, 1] = np.clip(pts[:, 1], -1.45, 1.45)
            elif name == "half_plane":
                pts[:, 1] = np.maximum(pts[:, 1], 0.5)
            path = [ChartPoint(*p) for p in pts]
            v0 = TangentVector(path[0], *rng.normal(size=2))
            v1 = parallel_transport(chart, path, v0)
            n0 = norm(chart, v0)
            iso = max(iso, abs(norm(chart, v1) - n0) / n0)
            back = parallel_transport(chart, path[::-1], v1)
            trip = max(trip, math.hypot(back.vx - v0.vx, back.vy - v0.vy) / math.hypot(v0.vx, v0.vy))
        checks.append(Check(f"transport isometry [{name}]", iso, "<= 1e-8 relative", iso <= 1e-8))
        checks.append(Check(f"transport round trip [{name}]", trip, "<= 1e-8", trip <= 1e-8))

        p0 = ChartPoint(0.0, 0.3 if name == "sphere" else 1.0)
        v0 = TangentVector(p0, 0.6, 0.4)
        samples = geodesic_velocities(chart, p0, v0, 10.0, 1e-3)
        speeds = np.array([norm(chart, v) for v in samples])
        drift = float(np.max(np.abs(speeds - speeds[0])) / speeds[0])
        checks.append(Check(f"geodesic speed drift [{name}]", drift, "<= 1e-6 relative", drift <= 1e-6))
    return checks


def suite_flat_oracle() -> list:
    sc = builtin_scenario("e2-classic")
    errs = []
    for n in (201, 401):
        s = replace(sc, n=n, cfl=0.5)
        frames, _ = run(s)
        _, curve, _ = s.build()
        linf, _ = error_vs_oracle(frames, flat_oracle(curve, curve.m_range, s.c))
        errs.append(max(linf))
    ratio = errs[0] / errs[1]
    return [
        Check("e2-classic L-inf error, n = 201, t in [0, 2]", errs[0], "<= 5e-3", errs[0] <= 5e-3),
        Check("error ratio n = 201 / n = 401", ratio, "in [3.2, 4.8]", 3.2 <= ratio <= 4.8),
    ]


def three_period_drift(name: str, n: int = 401, cfl: float = 0.25, horizon: float = 13.0):
    """Energy drift over three estimated periods; returns ``(drift, period)``."""
    sc = replace(builtin_scenario(name), n=n, cfl=cfl, t_end=horizon, record_every=4)
    chart, curve, mp = sc.build()
    frames, _ = run(sc)
    period = estimate_period([f for f in frames if f.t <= horizon])
    kept = [f for f in frames if f.t <= 3 * period + 1e-12]
    return energy_report(chart, kept, mp).relative_drift, period


def suite_energy() -> list:
    checks = []
    for name in ("s2-small", "h2-horizontal"):
        drift, period = three_period_drift(name)
        checks.append(Check(f"{name} energy drift over 3 x {period:.4g}", drift, "<= 1e-3", drift <= 1e-3))
    return checks


def measured_period(name: str, cycles: float = 2.5):
    sc = builtin_scenario(name)
    nominal = 2 * (sc.m_range[1] - sc.m_range[0]) / sc.c
    sc = replace(sc, t_end=cycles * nominal, record_every=1)
    frames, _ = run(sc)
    dt = sc.cfl * (sc.m_range[1] - sc.m_range[0]) / (sc.n - 1) / sc.c
    return estimate_period(frames), nominal, dt


def suite_period() -> list:
    checks = []
    for name in ("e2-classic", "e2-affine-density"):
        p, nominal, dt = measured_period(name)
        err = abs(p - nominal)
        checks.append(Check(f"{name} period (expect {nominal:g})", p, f"within 2 dt = {2 * dt:.3g}",
                            err <= 2 * dt))
    return checks


def suite_convergence() -> list:
    checks = []
    sc = builtin_scenario("e2-classic")
    _, curve, _ = sc.build()
    rows = convergence_order(sc, [51, 101, 201], flat_oracle(curve, curve.m_range, sc.c))
    for n, e, order in rows[1:]:
        checks.append(Check(f"e2-classic order at n = {n} (oracle)", order, "in [1.8, 2.2]",
                            1.8 <= order <= 2.2))
    sc = replace(builtin_scenario("s2-small"), t_end=1.5)
    rows = convergence_order(sc, [51, 101, 201], "fine")
    for n, e, order in rows[1:]:
        checks.append(Check(f"s2-small order at n = {n} (fine reference)", order, "in [1.8, 2.2]",
                            1.8 <= order <= 2.2))
    return checks


def run_suite(name: str) -> list:
    table = {
        "geometry": suite_geometry,
        "flat-oracle": suite_flat_oracle,
        "energy": suite_energy,
        "period": suite_period,
        "convergence": suite_convergence,
    }
    if name == "all":
        out = []
        for s in SUITES:
            out.extend(table[s]())
        return out
    if name not in table:
        raise KeyError(name)
    return table[name]()
