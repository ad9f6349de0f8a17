"""
Scenario registry and JSON scenario files.

A scenario names a chart, an initial curve and the run parameters. Closed
form curves are stored as an expression identifier with parameters plus a
density 1-form, so a scenario serialises to plain JSON:

    {"name": "e2-classic", "chart": "euclidean",
     "curve": {"kind": "builtin", "expr": "sine_graph",
               "params": {"amplitude": 1.0, "wavenumber": 3.141592653589793},
               "param_range": [0.0, 1.0],
               "density": {"kind": "uniform", "scale": 1.0}},
     "m_range": [0.0, 1.0], "c": 1.0, "rho": 1.0, "n": 201,
     "t_end": 2.0, "cfl": 0.5, "record_every": 4}

Sampled curves use ``{"kind": "samples", "m": [...], "x": [...], "y": [...]}``
and are interpolated with a monotone (PCHIP) cubic in m.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (ParseError, SchemaError, UnknownChart,
                     UnknownScenario, ValidationError)
from .geometry import CHART_NAMES, builtin_chart
from .solver import SolverConfig
from .strings import (DENSITY_KINDS, MaterialParams, ParametrizedCurve, density_from_spec,
                     reparametrize_by_density)

PI = math.pi


def _sine_graph(amplitude=1.0, wavenumber=PI):
    return lambda s: (s, amplitude * np.sin(wavenumber * s))


def _horizontal(height=1.0):
    return lambda s: (s, height + 0.0 * s)


def _vertical_sine(amplitude=0.5, phase=1.0):
    return lambda s: (amplitude * s * np.sin(s - phase), s)


CURVE_EXPRS = {
    "sine_graph": (_sine_graph, ("amplitude", "wavenumber")),
    "horizontal": (_horizontal, ("height",)),
    "vertical_sine": (_vertical_sine, ("amplitude", "phase")),
}


@dataclass(frozen=True)
class Scenario:
    name: str
    chart: str
    curve: dict
    m_range: tuple
    n: int
    t_end: float
    c: float = 1.0
    rho: float = 1.0
    cfl: float = 0.5
    record_every: int = 1
    outputs: tuple = ("csv",)
    description: str = field(default="", compare=False)

    @property
    def T0(self) -> float:
        return self.c * self.c * self.rho

    @property
    def density(self):
        return self.curve.get("density") if self.curve.get("kind") == "builtin" else None

    def material(self) -> MaterialParams:
        return MaterialParams.from_wave_speed(self.c, self.rho)

    def solver_config(self, **overrides) -> SolverConfig:
        kw = {"cfl": self.cfl, "record_every": self.record_every}
        kw.update(overrides)
        return SolverConfig(**kw)

    def build(self):
        """Return ``(chart, ParametrizedCurve, MaterialParams)``."""
        chart = builtin_chart(self.chart)
        return chart, build_curve(self.curve), self.material()

    def to_json(self) -> dict:
        d = {
            "name": self.name,
            "chart": self.chart,
            "curve": _jsonable(self.curve),
            "m_range": [float(v) for v in self.m_range],
            "c": float(self.c),
            "rho": float(self.rho),
            "n": int(self.n),
            "t_end": float(self.t_end),
            "cfl": float(self.cfl),
            "record_every": int(self.record_every),
        }
        return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


def build_curve(spec: dict) -> ParametrizedCurve:
    kind = spec["kind"]
    if kind == "builtin":
        ctor, _ = CURVE_EXPRS[spec["expr"]]
        shape = ctor(**spec.get("params", {}))
        density = density_from_spec(spec["density"], spec["param_range"])
        return reparametrize_by_density(shape, density)
    if kind == "samples":
        m = np.asarray(spec["m"], dtype=float)
        fx = PchipInterpolator(m, np.asarray(spec["x"], dtype=float))
        fy = PchipInterpolator(m, np.asarray(spec["y"], dtype=float))
        return ParametrizedCurve(lambda s: (fx(s), fy(s)), (float(m[0]), float(m[-1])))
    raise SchemaError(f"unknown curve kind {kind!r}")


def _builtin_curve(expr, params, param_range, density):
    return {"kind": "builtin", "expr": expr, "params": dict(params),
            "param_range": list(param_range), "density": dict(density)}


UNIFORM = {"kind": "uniform", "scale": 1.0}

# t_end of the curved scenarios is three measured returns to the initial shape
_REGISTRY = {
    "e2-classic": dict(
        chart="euclidean",
        curve=_builtin_curve("sine_graph", {"amplitude": 1.0, "wavenumber": PI}, (0.0, 1.0), UNIFORM),
        m_range=(0.0, 1.0), n=201, t_end=2.0, record_every=4,
        description="flat plane; graph y = sin(pi x) with uniform density dm = dx; period 2",
    ),
    "e2-affine-density": dict(
        chart="euclidean",
        curve=_builtin_curve("sine_graph", {"amplitude": 1.0, "wavenumber": PI}, (0.0, 1.0),
                             {"kind": "affine", "scale": 2.0, "shift": 0.5}),
        m_range=(0.25, 2.25), n=201, t_end=4.0, record_every=4,
        description="flat plane; same graph with density 2(x + 1/2) dx, m = (x + 1/2)^2; period 4",
    ),
    "s2-small": dict(
        chart="sphere",
        curve=_builtin_curve("sine_graph", {"amplitude": 0.5, "wavenumber": 2 * PI / 3}, (0.0, 1.5), UNIFORM),
        m_range=(0.0, 1.5), n=401, t_end=10.5, record_every=8,
        description="unit sphere (longitude x, latitude y); y = 1/2 sin(2 pi x / 3); quasi-periodic",
    ),
    "s2-large": dict(
        chart="sphere",
        curve=_builtin_curve("sine_graph", {"amplitude": 1.0, "wavenumber": 2 * PI / 3}, (0.0, 1.5), UNIFORM),
        m_range=(0.0, 1.5), n=401, t_end=10.5, record_every=8,
        description="unit sphere; y = sin(2 pi x / 3); strongly nonlinear",
    ),
    "h2-horizontal": dict(
        chart="half_plane",
        curve=_builtin_curve("horizontal", {"height": 1.0}, (0.0, 2.0), UNIFORM),
        m_range=(0.0, 2.0), n=401, t_end=10.5, record_every=8,
        description="upper half plane; horizontal segment y = 1, 0 <= x <= 2 (not a geodesic)",
    ),
    "h2-small": dict(
        chart="half_plane",
        curve=_builtin_curve("vertical_sine", {"amplitude": 0.5, "phase": 1.0}, (1.0, PI + 1.0),
                             {"kind": "reciprocal", "scale": 1.0}),
        m_range=(0.0, math.log(PI + 1.0)), n=401, t_end=8.0, record_every=8,
        description="upper half plane; x = 1/2 y sin(y - 1) with y = e^m (arc length of the vertical geodesic)",
    ),
    "h2-large": dict(
        chart="half_plane",
        curve=_builtin_curve("vertical_sine", {"amplitude": 1.0, "phase": 1.0}, (1.0, PI + 1.0),
                             {"kind": "reciprocal", "scale": 1.0}),
        m_range=(0.0, math.log(PI + 1.0)), n=401, t_end=7.6, record_every=8,
        description="upper half plane; x = y sin(y - 1) with y = e^m; strongly nonlinear",
    ),
}

SCENARIO_NAMES = tuple(_REGISTRY)


def builtin_scenario(name: str) -> Scenario:
    try:
        spec = _REGISTRY[name]
    except KeyError:
        raise UnknownScenario(f"unknown scenario {name!r}; built-ins: {', '.join(SCENARIO_NAMES)}") from None
    return Scenario(name=name, **spec)


def geodesic_scenario(chart: str, n: int = 401, t_end: float = 5.0) -> Scenario:
    """A string at rest along a constant-speed geodesic arc.

    ``sphere``: the equator x = m, y = 0 for 0 <= m <= 3/2.
    ``half_plane``: the vertical line x = 0, y = e^m for 0 <= m <= 1.
    """
    if chart == "sphere":
        curve = _builtin_curve("horizontal", {"height": 0.0}, (0.0, 1.5), UNIFORM)
        m_range = (0.0, 1.5)
    elif chart == "half_plane":
        curve = _builtin_curve("vertical_sine", {"amplitude": 0.0, "phase": 1.0}, (1.0, math.e),
                               {"kind": "reciprocal", "scale": 1.0})
        m_range = (0.0, 1.0)
    elif chart == "euclidean":
        curve = _builtin_curve("horizontal", {"height": 0.0}, (0.0, 1.0), UNIFORM)
        m_range = (0.0, 1.0)
    else:
        raise UnknownChart(chart)
    return Scenario(name=f"{chart}-geodesic", chart=chart, curve=curve, m_range=m_range,
                    n=n, t_end=t_end, record_every=50)


# -- JSON ingestion ---------------------------------------------------------

_TOP_REQUIRED = {"name", "chart", "curve", "m_range", "n", "t_end"}
_TOP_OPTIONAL = {"c", "rho", "cfl", "record_every"}
_SAMPLE_KEYS = {"kind", "m", "x", "y"}


def _number(d, key, where):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}{key}: expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise SchemaError(f"{where}{key}: must be finite")
    return float(v)


def _integer(d, key, where):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{where}{key}: expected an integer")
    return v


def _pair(d, key, where):
    v = d[key]
    if not isinstance(v, list) or len(v) != 2:
        raise SchemaError(f"{where}{key}: expected a list of two numbers")
    return tuple(_number({"v": x}, "v", f"{where}{key}.") for x in v)


def _check_keys(d, required, optional, where):
    if not isinstance(d, dict):
        raise SchemaError(f"{where or 'scenario'}: expected an object")
    missing = required - d.keys()
    if missing:
        raise SchemaError(f"{where}missing key(s): {', '.join(sorted(missing))}")
    unknown = d.keys() - required - optional
    if unknown:
        raise SchemaError(f"{where}unknown key(s): {', '.join(sorted(unknown))}")


def _parse_curve(d):
    where = "curve."
    if not isinstance(d, dict) or "kind" not in d:
        raise SchemaError("curve: expected an object with a 'kind'")
    kind = d["kind"]
    if kind == "builtin":
        _check_keys(d, {"kind", "expr", "param_range", "density"}, {"params"}, where)
        expr = d["expr"]
        if expr not in CURVE_EXPRS:
            raise SchemaError(f"curve.expr: unknown expression {expr!r}; known: {', '.join(CURVE_EXPRS)}")
        keys = CURVE_EXPRS[expr][1]
        params = d.get("params", {})
        _check_keys(params, set(), set(keys), "curve.params.")
        params = {k: _number(params, k, "curve.params.") for k in params}
        dens = d["density"]
        if not isinstance(dens, dict) or dens.get("kind") not in DENSITY_KINDS:
            raise SchemaError(f"curve.density.kind: expected one of {', '.join(DENSITY_KINDS)}")
        _check_keys(dens, {"kind"}, set(DENSITY_KINDS[dens["kind"]][1]), "curve.density.")
        dens = {"kind": dens["kind"], **{k: _number(dens, k, "curve.density.") for k in dens if k != "kind"}}
        pr = _pair(d, "param_range", where)
        return _builtin_curve(expr, params, pr, dens)
    if kind == "samples":
        _check_keys(d, _SAMPLE_KEYS, set(), where)
        cols = {}
        for k in ("m", "x", "y"):
            v = d[k]
            if not isinstance(v, list) or len(v) < 2:
                raise SchemaError(f"curve.{k}: expected a list of at least two numbers")
            cols[k] = [_number({"v": x}, "v", f"curve.{k}[{i}].") for i, x in enumerate(v)]
        if not len(cols["m"]) == len(cols["x"]) == len(cols["y"]):
            raise SchemaError("curve: m, x and y must have equal lengths")
        if any(b <= a for a, b in zip(cols["m"], cols["m"][1:])):
            raise ValidationError("curve.m: sample parameters must be strictly increasing")
        return {"kind": "samples", **cols}
    raise SchemaError(f"curve.kind: expected 'builtin' or 'samples', got {kind!r}")


def scenario_from_dict(d: dict) -> Scenario:
    """Build and validate a Scenario from a parsed JSON object."""
    _check_keys(d, _TOP_REQUIRED, _TOP_OPTIONAL, "")
    if not isinstance(d["name"], str):
        raise SchemaError("name: expected a string")
    if d["chart"] not in CHART_NAMES:
        raise SchemaError(f"chart: expected one of {', '.join(CHART_NAMES)}, got {d['chart']!r}")
    kw = {
        "name": d["name"],
        "chart": d["chart"],
        "curve": _parse_curve(d["curve"]),
        "m_range": _pair(d, "m_range", ""),
        "n": _integer(d, "n", ""),
        "t_end": _number(d, "t_end", ""),
    }
    for k in ("c", "rho", "cfl"):
        if k in d:
            kw[k] = _number(d, k, "")
    if "record_every" in d:
        kw["record_every"] = _integer(d, "record_every", "")
    sc = Scenario(**kw)
    validate(sc)
    return sc


def validate(sc: Scenario) -> None:
    """Check scenario invariants; raises ValidationError naming the problem."""
    if sc.n < 3:
        raise ValidationError(f"n = {sc.n}: need at least 3 nodes")
    if sc.t_end <= 0:
        raise ValidationError("t_end must be positive")
    if sc.c <= 0 or sc.rho <= 0:
        raise ValidationError("c and rho must be positive")
    if not 0 < sc.cfl <= 1:
        raise ValidationError("cfl must lie in (0, 1]")
    if sc.record_every < 1:
        raise ValidationError("record_every must be >= 1")
    try:
        curve = build_curve(sc.curve)
    except (ValueError, ArithmeticError) as exc:
        raise ValidationError(f"curve: {exc}") from None
    a, b = curve.m_range
    scale = max(1.0, abs(a), abs(b))
    if abs(a - sc.m_range[0]) > 1e-12 * scale or abs(b - sc.m_range[1]) > 1e-12 * scale:
        raise ValidationError(f"m_range {list(sc.m_range)} does not match the curve's mass range [{a}, {b}]")
    chart = builtin_chart(sc.chart)
    dm = (b - a) / (sc.n - 1)
    m = a + dm * np.arange(sc.n)
    with np.errstate(all="ignore"):
        xs, ys = curve(m)
    xs = np.broadcast_to(np.asarray(xs, dtype=float), m.shape)
    ys = np.broadcast_to(np.asarray(ys, dtype=float), m.shape)
    bad = ~(np.isfinite(xs) & np.isfinite(ys) & chart.contains(xs, ys))
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ValidationError(
            f"initial curve node {i} at m = {m[i]!r}, (x, y) = ({xs[i]!r}, {ys[i]!r}) "
            f"lies outside the {sc.chart} chart domain"
        )


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return scenario_from_dict(d)


def save_scenario(sc: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sc.to_json(), fh, indent=2)
        fh.write("\n")


def resolve(ref: str) -> Scenario:
    """A built-in name or a path to a JSON scenario file."""
    if ref in _REGISTRY:
        return builtin_scenario(ref)
    if ref.endswith(".json"):
        return load_scenario(ref)
    raise UnknownScenario(f"unknown scenario {ref!r}; built-ins: {', '.join(SCENARIO_NAMES)}")
