import json
import math

import numpy as np
import pytest

from wavemap.cli import main
from wavemap.output import fmt, read_frames, render_svg, FrameTable

POLAR = {
    # a latitude string spanning more than half the sphere slides over the pole
    "name": "polar", "chart": "sphere",
    "curve": {"kind": "builtin", "expr": "horizontal", "params": {"height": 1.2},
              "param_range": [0.0, 5.0], "density": {"kind": "uniform", "scale": 1.0}},
    "m_range": [0.0, 5.0], "n": 101, "t_end": 6.0, "record_every": 4,
}


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def e2_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("e2")
    assert run_cli("run", "e2-classic", "--out", out, "--svg") == 0
    return out


def test_run_writes_outputs(e2_run):
    lines = (e2_run / "frames.csv").read_text().splitlines()
    assert lines[0] == "t,i,m,x,y"
    assert (len(lines) - 1) % 201 == 0
    assert (e2_run / "energy.csv").read_text().splitlines()[0] == "t,kinetic,potential,total"
    manifest = json.loads((e2_run / "manifest.json").read_text())
    assert manifest["status"] == "ok" and manifest["t_last"] == pytest.approx(2.0)
    assert all((e2_run / f).exists() for f in manifest["files"])


def test_run_final_frame_near_initial(e2_run):
    table = read_frames(e2_run / "frames.csv")
    assert table.times[-1] == pytest.approx(2.0)
    assert np.max(np.abs(table.pos[-1] - table.pos[0])) <= 5e-3


def test_csv_values_round_trip(e2_run):
    row = (e2_run / "frames.csv").read_text().splitlines()[150].split(",")
    for v in row[2:]:
        assert fmt(float(v)) == v
    assert fmt(0.1) == "0.10000000000000001"
    x = math.pi / 7
    assert float(fmt(x)) == x


def test_run_is_byte_deterministic(e2_run, tmp_path):
    assert run_cli("run", "e2-classic", "--out", tmp_path, "--svg") == 0
    for name in ("frames.csv", "energy.csv", "manifest.json", "snapshot_000.svg"):
        assert (tmp_path / name).read_bytes() == (e2_run / name).read_bytes()


def test_svg_stroke_widths(e2_run):
    svg = (e2_run / "snapshot_000.svg").read_text()
    assert svg.count('stroke-width="2.5"') == 1
    assert svg.count('stroke-width="0.8"') >= 1
    assert svg.startswith("<svg")


def test_sphere_run_has_embedding_columns(tmp_path):
    assert run_cli("run", "s2-small", "--n", 21, "--t-end", 0.5, "--out", tmp_path) == 0
    lines = (tmp_path / "frames.csv").read_text().splitlines()
    assert lines[0] == "t,i,m,x,y,X,Y,Z"
    _, _, _, x, y, X, Y, Z = (float(v) for v in lines[5].split(","))
    assert (X, Y, Z) == pytest.approx((math.cos(x) * math.cos(y), math.sin(x) * math.cos(y), math.sin(y)))


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("WAVEMAP_OUT", str(tmp_path))
    assert run_cli("run", "h2-horizontal", "--n", 11, "--t-end", 0.2) == 0
    assert (tmp_path / "h2-horizontal" / "frames.csv").exists()


def test_run_json_file(tmp_path):
    p = tmp_path / "polar.json"
    p.write_text(json.dumps(dict(POLAR, t_end=0.5)))
    assert run_cli("run", p, "--out", tmp_path / "o") == 0


def test_run_abort_keeps_partial_outputs(tmp_path, capsys):
    p = tmp_path / "polar.json"
    p.write_text(json.dumps(POLAR))
    assert run_cli("run", p, "--out", tmp_path / "o") == 2
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["status"] == "aborted"
    assert 0 < manifest["failure_time"] < 6.0
    assert "sphere chart domain" in manifest["failure"]
    assert read_frames(tmp_path / "o" / "frames.csv").times[-1] <= manifest["failure_time"]
    assert "aborted" in capsys.readouterr().err


def test_usage_errors(tmp_path, capsys):
    assert run_cli("run", "missing-name", "--out", tmp_path) == 1
    assert "unknown scenario" in capsys.readouterr().err
    assert run_cli("run", "e2-classic", "--n", 2, "--out", tmp_path) == 1
    with pytest.raises(SystemExit) as info:
        run_cli("frobnicate")
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        run_cli("run", "e2-classic", "--n", "many")
    assert info.value.code == 1


def test_bad_json_is_usage_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{")
    assert run_cli("run", p) == 1
    q = tmp_path / "strict.json"
    q.write_text(json.dumps(dict(POLAR, extra=1)))
    assert run_cli("run", q) == 1


def test_io_errors(tmp_path):
    assert run_cli("run", tmp_path / "nope.json") == 3
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run_cli("run", "e2-classic", "--n", 11, "--t-end", 0.1, "--out", blocker / "sub") == 3
    assert run_cli("plot", tmp_path / "missing.csv") == 3


def test_plot_windows(e2_run, tmp_path, capsys):
    assert run_cli("plot", e2_run / "frames.csv", "--snapshots", "0,1,2", "--out", tmp_path) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["snapshot_000.svg", "snapshot_001.svg"]
    assert run_cli("plot", e2_run / "frames.csv", "--snapshots", "0,1,2", "--out", tmp_path / "b") == 0
    assert (tmp_path / "snapshot_001.svg").read_bytes() == (tmp_path / "b" / "snapshot_001.svg").read_bytes()


def test_plot_single_frame(tmp_path):
    csv = tmp_path / "one.csv"
    csv.write_text("t,i,m,x,y\n0,0,0,0,0\n0,1,0.5,0.5,1\n0,2,1,1,0\n")
    assert run_cli("plot", csv, "--out", tmp_path) == 0
    svg = (tmp_path / "snapshot_000.svg").read_text()
    assert svg.count("<path") == 1 and 'stroke-width="2.5"' in svg


def test_plot_malformed_csv(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("t,i,m,x,y\n0,0,0,zero,0\n")
    assert run_cli("plot", csv) == 1
    csv.write_text("a,b\n")
    assert run_cli("plot", csv) == 1
    assert run_cli("plot", csv, "--size", "wide") == 1


def test_render_equal_aspect():
    table = FrameTable([0.0], np.array([0.0, 1.0]), [np.array([[0.0, 0.0], [4.0, 1.0]])])
    svg = render_svg(table, (0.0, 0.0), (800, 600))
    d = svg.split('<path d="M')[1].split('"')[0]
    (x0, y0), (x1, y1) = [tuple(map(float, s.strip().split())) for s in d.split("L")]
    assert (x1 - x0) / (y0 - y1) == pytest.approx(4.0, rel=1e-3)


def test_scenarios_listing(capsys):
    assert run_cli("scenarios") == 0
    out = capsys.readouterr().out
    for name in ("e2-classic", "e2-affine-density", "s2-small", "s2-large", "h2-horizontal",
                 "h2-small", "h2-large"):
        assert name in out


def test_verify_geometry(capsys):
    assert run_cli("verify", "geometry") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 12


def test_verify_flat_oracle(capsys):
    assert run_cli("verify", "flat-oracle") == 0
    assert "checks passed" in capsys.readouterr().out


def test_verify_unknown_suite():
    with pytest.raises(SystemExit) as info:
        run_cli("verify", "everything")
    assert info.value.code == 1
