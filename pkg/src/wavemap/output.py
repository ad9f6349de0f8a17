"""CSV serialisation of frames and energy, and SVG snapshot plots."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError

FRAME_HEADER = ["t", "i", "m", "x", "y"]
EMBED_HEADER = ["X", "Y", "Z"]
ENERGY_HEADER = ["t", "kinetic", "potential", "total"]


def fmt(v: float) -> str:
    """17 significant digits: round-trips any binary64 value."""
    return format(float(v), ".17g")


def sphere_embedding(x, y):
    return np.cos(x) * np.cos(y), np.sin(x) * np.cos(y), np.sin(y)


def write_frames(path, frames, chart_name: str, embed: bool | None = None) -> None:
    if embed is None:
        embed = chart_name == "sphere"
    header = FRAME_HEADER + (EMBED_HEADER if embed else [])
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for f in frames:
            m = f.m
            x, y = f.pos[:, 0], f.pos[:, 1]
            cols = [x, y]
            if embed:
                cols.extend(sphere_embedding(x, y))
            t = fmt(f.t)
            for i in range(f.n):
                row = [t, str(i), fmt(m[i])] + [fmt(c[i]) for c in cols]
                fh.write(",".join(row) + "\n")


def write_energy(path, report) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(",".join(ENERGY_HEADER) + "\n")
        for s in report.samples:
            fh.write(",".join(fmt(v) for v in s) + "\n")


@dataclass
class FrameTable:
    """Frames read back from CSV: ``times[k]`` and ``(n, 2)`` chart positions."""

    times: list
    m: np.ndarray
    pos: list


def read_frames(path) -> FrameTable:
    try:
        with open(path, newline="", encoding="ascii") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not an ASCII CSV file ({exc})") from None
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = rows[0]
    if header[:5] != FRAME_HEADER or header[5:] not in ([], EMBED_HEADER):
        raise ParseError(f"{path}: unexpected header {','.join(header)}")
    times, pos, m = [], [], None
    cur_t, cur = None, []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            t, i, mi, x, y = float(row[0]), int(row[1]), float(row[2]), float(row[3]), float(row[4])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
        if cur_t is None or t != cur_t:
            if cur:
                pos.append(np.array(cur))
            times.append(t)
            cur_t, cur = t, []
            if i != 0:
                raise ParseError(f"{path}:{lineno}: frame at t = {t} does not start at node 0")
            if m is None:
                m = []
        if i != len(cur):
            raise ParseError(f"{path}:{lineno}: node index {i} out of sequence")
        if len(times) == 1:
            m.append(mi)
        cur.append((x, y))
    if cur:
        pos.append(np.array(cur))
    if not pos:
        raise ParseError(f"{path}: no frames")
    n = len(pos[0])
    if any(len(p) != n for p in pos):
        raise ParseError(f"{path}: frames have differing node counts")
    return FrameTable(times, np.array(m), pos)


def snapshot_windows(times, snapshots=None) -> list:
    """Split the time axis at the requested snapshot times.

    No snapshots: one window over everything. One snapshot ``s``: ``[s, end]``.
    Otherwise consecutive pairs.
    """
    t0, t1 = times[0], times[-1]
    if not snapshots:
        return [(t0, t1)]
    s = sorted(snapshots)
    if len(s) == 1:
        return [(s[0], t1)]
    return list(zip(s[:-1], s[1:]))


def _pick(indices, limit):
    if len(indices) <= limit:
        return indices
    keep = np.unique(np.round(np.linspace(0, len(indices) - 1, limit)).astype(int))
    return [indices[k] for k in keep]


def render_svg(table: FrameTable, window, size=(800, 600), max_curves: int = 16,
               bounds=None) -> str:
    """SVG of the frames inside ``window``: first curve thick, later curves thin."""
    w, h = size
    lo, hi = window
    tol = 1e-9 * max(1.0, abs(hi))
    idx = [k for k, t in enumerate(table.times) if lo - tol <= t <= hi + tol]
    idx = _pick(idx, max_curves)

    if bounds is None:
        allp = np.concatenate(table.pos)
        bounds = (allp[:, 0].min(), allp[:, 0].max(), allp[:, 1].min(), allp[:, 1].max())
    x0, x1, y0, y1 = bounds
    span_x = max(x1 - x0, 1e-12)
    span_y = max(y1 - y0, 1e-12)
    x0, x1 = x0 - 0.05 * span_x, x1 + 0.05 * span_x
    y0, y1 = y0 - 0.05 * span_y, y1 + 0.05 * span_y
    pad = 40.0
    scale = min((w - 2 * pad) / (x1 - x0), (h - 2 * pad) / (y1 - y0))
    ox = pad + 0.5 * ((w - 2 * pad) - scale * (x1 - x0))
    oy = pad + 0.5 * ((h - 2 * pad) - scale * (y1 - y0))

    def sx(v):
        return ox + scale * (v - x0)

    def sy(v):
        return h - (oy + scale * (v - y0))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{sx(x0):.2f}" y="{sy(y1):.2f}" width="{scale * (x1 - x0):.2f}" '
        f'height="{scale * (y1 - y0):.2f}" fill="none" stroke="#999" stroke-width="0.5"/>',
        f'<text x="{sx(x0):.2f}" y="{sy(y0) + 14:.2f}" font-size="11" font-family="sans-serif">{x0:.3g}</text>',
        f'<text x="{sx(x1) - 30:.2f}" y="{sy(y0) + 14:.2f}" font-size="11" font-family="sans-serif">{x1:.3g}</text>',
        f'<text x="{sx(x0) - 36:.2f}" y="{sy(y0):.2f}" font-size="11" font-family="sans-serif">{y0:.3g}</text>',
        f'<text x="{sx(x0) - 36:.2f}" y="{sy(y1) + 10:.2f}" font-size="11" font-family="sans-serif">{y1:.3g}</text>',
        f'<text x="{w / 2:.2f}" y="{h - 8:.2f}" font-size="12" font-family="sans-serif">'
        f't = {table.times[idx[0]] if idx else lo:.4g} .. {table.times[idx[-1]] if idx else hi:.4g}</text>',
    ]
    for j, k in enumerate(idx):
        p = table.pos[k]
        d = "M" + " L".join(f"{sx(a):.2f} {sy(b):.2f}" for a, b in p)
        width = 2.5 if j == 0 else 0.8
        out.append(f'<path d="{d}" fill="none" stroke="black" stroke-width="{width}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_frames(csv_path, out_dir=None, snapshots=None, size=(800, 600)) -> list:
    """Write one ``snapshot_KKK.svg`` per window; returns the written paths."""
    table = read_frames(csv_path)
    out_dir = Path(out_dir) if out_dir is not None else Path(csv_path).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    allp = np.concatenate(table.pos)
    bounds = (allp[:, 0].min(), allp[:, 0].max(), allp[:, 1].min(), allp[:, 1].max())
    paths = []
    for k, win in enumerate(snapshot_windows(table.times, snapshots)):
        path = out_dir / f"snapshot_{k:03d}.svg"
        path.write_text(render_svg(table, win, size, bounds=bounds), encoding="ascii")
        paths.append(path)
    return paths


def cycle_windows(times, period: float, per_cycle: int = 2) -> list:
    """Snapshot boundaries splitting the run into ``per_cycle`` panels per period."""
    if not math.isfinite(period) or period <= 0:
        return [times[0], times[-1]]
    step = period / per_cycle
    count = int(math.floor((times[-1] - times[0]) / step + 1e-9))
    return [times[0] + k * step for k in range(count + 1)]
