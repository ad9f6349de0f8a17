import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavemap.errors import BaseMismatch, ChartDomainExceeded, NearBoundary, UnknownChart
from wavemap.geometry import (ChartPoint, MetricChart, TangentVector, builtin_chart, christoffel_fd,
                              geodesic_evolve, geodesic_velocities, inner, norm, parallel_transport)


def test_euclidean_is_flat():
    ch = builtin_chart("euclidean")
    assert np.allclose(ch.metric(0.3, -7.0), np.eye(2))
    assert all(float(g) == 0.0 for g in ch.christoffel(0.3, -7.0))


def test_sphere_symbols():
    g = builtin_chart("sphere").christoffel(0.3, 0.2)
    assert g.xxy == pytest.approx(-math.tan(0.2), abs=1e-15)
    assert g.yxx == pytest.approx(math.sin(0.2) * math.cos(0.2), abs=1e-15)
    assert g.xxx == g.xyy == g.yxy == g.yyy == 0.0


def test_half_plane_symbols():
    g = builtin_chart("half_plane").christoffel(0.0, 2.0)
    assert (g.xxy, g.yxx, g.yyy) == (-0.5, 0.5, -0.5)
    assert g.xxx == g.xyy == g.yxy == 0.0


def test_unknown_chart():
    with pytest.raises(UnknownChart):
        builtin_chart("torus")


@pytest.mark.parametrize("name", ["euclidean", "sphere", "half_plane"])
def test_metric_symmetric_positive(name):
    ch = builtin_chart(name)
    for x, y in [(0.0, 0.5), (2.0, 1.2), (-1.0, 0.9)]:
        g = ch.metric(x, y)
        assert np.array_equal(g, g.T)
        assert np.all(np.linalg.eigvalsh(g) > 0)


def test_sphere_domain_excludes_poles():
    ch = builtin_chart("sphere")
    assert ch.contains(0.0, 1.5)
    assert not ch.contains(0.0, math.pi / 2)
    with pytest.raises(ChartDomainExceeded, match="node 1"):
        ch.require(np.array([0.0, 0.0]), np.array([0.0, 1.6]))


def test_fd_euclidean_zero():
    fd = christoffel_fd(builtin_chart("euclidean"), ChartPoint(0.4, -1.1), 1e-4)
    assert max(abs(v) for v in fd) <= 1e-8


def test_fd_sphere_matches_analytic():
    ch = builtin_chart("sphere")
    fd = christoffel_fd(ch, ChartPoint(0.3, 0.2), 1e-4)
    an = ch.christoffel(0.3, 0.2)
    assert max(abs(a - b) for a, b in zip(fd, an)) <= 1e-6


def test_fd_half_plane():
    fd = christoffel_fd(builtin_chart("half_plane"), ChartPoint(1.0, 1.0), 1e-4)
    assert fd.xxy == pytest.approx(-1.0, abs=1e-6)


def test_fd_near_boundary():
    with pytest.raises(NearBoundary):
        christoffel_fd(builtin_chart("half_plane"), ChartPoint(0.0, 5e-5), 1e-4)


def test_user_chart_defaults_to_fd_symbols():
    # conformal metric e^{2y}(dx² + dy²): Γ^x_xy = 1, Γ^y_xx = -1, Γ^y_yy = 1
    ch = MetricChart("conformal", lambda x, y: (np.exp(2 * y), 0.0 * x, np.exp(2 * y)))
    g = ch.christoffel(0.2, 0.3)
    assert g.xxy == pytest.approx(1.0, abs=1e-6)
    assert g.yxx == pytest.approx(-1.0, abs=1e-6)
    assert g.yyy == pytest.approx(1.0, abs=1e-6)


def test_inner_examples():
    e = builtin_chart("euclidean")
    p = ChartPoint(3.0, 4.0)
    assert inner(e, TangentVector(p, 1, 0), TangentVector(p, 0, 1)) == 0.0
    s = builtin_chart("sphere")
    q = ChartPoint(0.0, 0.7)
    assert inner(s, TangentVector(q, 1, 0), TangentVector(q, 1, 0)) == pytest.approx(math.cos(0.7) ** 2)
    h = builtin_chart("half_plane")
    r = ChartPoint(0.0, 2.0)
    assert inner(h, TangentVector(r, 1, 1), TangentVector(r, 1, 1)) == pytest.approx(0.5)


def test_inner_base_mismatch():
    e = builtin_chart("euclidean")
    with pytest.raises(BaseMismatch):
        inner(e, TangentVector(ChartPoint(0, 0), 1, 0), TangentVector(ChartPoint(0, 1e-9), 1, 0))


def test_transport_flat_is_identity():
    e = builtin_chart("euclidean")
    path = [ChartPoint(0, 0), ChartPoint(1, 2), ChartPoint(-3, 0.5)]
    v = parallel_transport(e, path, TangentVector(path[0], 0.3, -0.8))
    assert (v.vx, v.vy) == pytest.approx((0.3, -0.8), abs=1e-14)
    assert v.base == path[-1]


def test_transport_along_equator_keeps_normal():
    s = builtin_chart("sphere")
    path = [ChartPoint(x, 0.0) for x in np.linspace(0.0, 1.0, 11)]
    v = parallel_transport(s, path, TangentVector(path[0], 0.0, 1.0))
    assert (v.vx, v.vy) == pytest.approx((0.0, 1.0), abs=1e-12)


def test_transport_round_trip_on_sphere_circle():
    # a latitude circle is not a geodesic, so transport genuinely rotates the vector
    s = builtin_chart("sphere")
    path = [ChartPoint(x, 0.6) for x in np.linspace(0.0, 2.0, 21)]
    v0 = TangentVector(path[0], 1.0, 0.0)
    v1 = parallel_transport(s, path, v0)
    assert abs(v1.vy) > 0.1
    back = parallel_transport(s, path[::-1], v1)
    assert (back.vx, back.vy) == pytest.approx((1.0, 0.0), abs=1e-8)


def test_transport_needs_two_points():
    e = builtin_chart("euclidean")
    with pytest.raises(ValueError):
        parallel_transport(e, [ChartPoint(0, 0)], TangentVector(ChartPoint(0, 0), 1, 0))


def test_transport_leaves_chart():
    h = builtin_chart("half_plane")
    path = [ChartPoint(0, 1.0), ChartPoint(0, -1.0)]
    with pytest.raises(ChartDomainExceeded):
        parallel_transport(h, path, TangentVector(path[0], 1, 0))


@settings(max_examples=25, deadline=None)
@given(st.floats(-2, 2), st.floats(0.5, 3), st.floats(-1, 1), st.floats(-1, 1),
       st.lists(st.tuples(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1)), min_size=1, max_size=50))
def test_transport_isometry_half_plane(x0, y0, vx, vy, steps):
    h = builtin_chart("half_plane")
    pts = np.vstack([[x0, y0], [x0, y0] + np.cumsum(steps, axis=0)])
    pts[:, 1] = np.maximum(pts[:, 1], 0.3)
    path = [ChartPoint(*p) for p in pts]
    v0 = TangentVector(path[0], vx, vy)
    n0 = norm(h, v0)
    v1 = parallel_transport(h, path, v0)
    assert abs(norm(h, v1) - n0) <= 1e-8 * max(n0, 1e-300)


def test_geodesic_straight_line():
    e = builtin_chart("euclidean")
    pts = geodesic_evolve(e, ChartPoint(0, 0), TangentVector(ChartPoint(0, 0), 1, 0), 1.0, 1e-2)
    assert pts[-1] == pytest.approx((1.0, 0.0), abs=1e-14)
    assert all(p.y == 0.0 for p in pts)


def test_geodesic_equator():
    s = builtin_chart("sphere")
    pts = geodesic_evolve(s, ChartPoint(0, 0), TangentVector(ChartPoint(0, 0), 1, 0), 3.0, 1e-2)
    assert max(abs(p.y) for p in pts) == 0.0
    assert pts[-1].x == pytest.approx(3.0, abs=1e-12)


def test_geodesic_half_plane_vertical():
    h = builtin_chart("half_plane")
    p0 = ChartPoint(0.0, 1.0)
    pts = geodesic_evolve(h, p0, TangentVector(p0, 0.0, 1.0), 1.0, 1e-3)
    assert pts[-1].x == 0.0
    assert pts[-1].y == pytest.approx(math.e, abs=1e-10)


def test_geodesic_half_plane_semicircle():
    # unit-speed geodesic through (0, 1) heading right traces x² + y² = 1
    h = builtin_chart("half_plane")
    p0 = ChartPoint(0.0, 1.0)
    pts = geodesic_evolve(h, p0, TangentVector(p0, 1.0, 0.0), 1.5, 1e-3)
    r = [math.hypot(p.x, p.y) for p in pts]
    assert max(abs(v - 1.0) for v in r) <= 1e-10
    # x = tanh s on this geodesic
    assert pts[-1].x == pytest.approx(math.tanh(1.5), abs=1e-10)


@pytest.mark.parametrize("name", ["euclidean", "sphere", "half_plane"])
def test_geodesic_speed_conserved(name):
    ch = builtin_chart(name)
    p0 = ChartPoint(0.0, 0.3 if name == "sphere" else 1.0)
    vs = geodesic_velocities(ch, p0, TangentVector(p0, 0.6, 0.4), 10.0, 1e-3)
    speeds = np.array([norm(ch, v) for v in vs])
    assert np.max(np.abs(speeds - speeds[0])) / speeds[0] <= 1e-6


def test_geodesic_bad_arguments():
    e = builtin_chart("euclidean")
    p = ChartPoint(0, 0)
    with pytest.raises(ValueError):
        geodesic_evolve(e, p, TangentVector(p, 1, 0), 1.0, 0.0)
    with pytest.raises(ValueError):
        geodesic_evolve(e, p, TangentVector(p, 1, 0), -1.0, 0.1)


def test_geodesic_leaves_chart():
    h = builtin_chart("half_plane")
    p0 = ChartPoint(0.0, 1.0)
    # heading down, y = e^{-s} reaches the 1e-6 margin near s = 13.8
    with pytest.raises(ChartDomainExceeded):
        geodesic_evolve(h, p0, TangentVector(p0, 0.0, -1.0), 20.0, 1e-2)
