"""SVG rendering of the image of a null-coordinate grid."""
from __future__ import annotations

import json

import numpy as np

from .diffops import NULL, SmoothMap

LINE_SAMPLES = 65
PAD = 0.05


def _fmt(x: float) -> str:
    s = format(float(x), ".9g")
    return "0" if s == "-0" else s


def null_grid_lines(F: SmoothMap, box, lines: int, samples: int = LINE_SAMPLES):
    """Source-frame polylines of the lines u = const and v = const inside ``box``.

    ``box`` is ``[[lo, hi], [lo, hi]]`` in the map's own source frame.  For a
    Cartesian map the null lines are clipped to the box, which leaves gaps
    (returned as NaN rows).
    """
    (lo0, hi0), (lo1, hi1) = box
    w = (np.arange(lines) + 1) / (lines + 1)
    s = np.linspace(0.0, 1.0, samples)
    if F.frame == NULL:
        out = []
        for a in lo0 + (hi0 - lo0) * w:
            out.append(np.column_stack([np.full(samples, a), lo1 + (hi1 - lo1) * s]))
        for b in lo1 + (hi1 - lo1) * w:
            out.append(np.column_stack([lo0 + (hi0 - lo0) * s, np.full(samples, b)]))
        return out
    corners = np.array([[lo0, lo1], [lo0, hi1], [hi0, lo1], [hi0, hi1]])
    u, v = corners[:, 0] + corners[:, 1], corners[:, 0] - corners[:, 1]
    ua, ub, va, vb = u.min(), u.max(), v.min(), v.max()
    out = []
    for a in ua + (ub - ua) * w:
        vs = va + (vb - va) * s
        out.append(np.column_stack([(a + vs) / 2, (a - vs) / 2]))
    for b in va + (vb - va) * w:
        us = ua + (ub - ua) * s
        out.append(np.column_stack([(us + b) / 2, (us - b) / 2]))
    inside = []
    for pts in out:
        mask = ((pts[:, 0] >= lo0) & (pts[:, 0] <= hi0) & (pts[:, 1] >= lo1)
                & (pts[:, 1] <= hi1))
        pts = pts.copy()
        pts[~mask] = np.nan
        inside.append(pts)
    return inside


def _runs(img: np.ndarray):
    """Split a polyline at NaN rows."""
    ok = np.isfinite(img).all(axis=1)
    start = None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            yield img[start:i]
            start = None
    if start is not None:
        yield img[start:]


def render_grid(F: SmoothMap, box, lines: int = 9, diamond: bool = False,
                metadata: dict | None = None) -> tuple:
    """Return ``(svg_text, info)``; image coordinates are Cartesian (X, T)."""
    polylines = []
    excluded = 0
    for src in null_grid_lines(F, box, lines):
        valid = np.isfinite(src).all(axis=1)
        img = np.full_like(src, np.nan)
        if valid.any():
            img[valid] = F.image(src[valid])
        lost = valid & ~np.isfinite(img).all(axis=1)
        excluded += int(lost.sum())
        if F.frame == NULL:
            img = np.column_stack([(img[:, 0] + img[:, 1]) / 2, (img[:, 0] - img[:, 1]) / 2])
        polylines.extend(run for run in _runs(img) if len(run) >= 2)

    pts = list(polylines)
    if diamond:
        pts.append(np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]))
    if pts:
        allpts = np.vstack(pts)
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    else:
        lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    span = np.maximum(hi - lo, 1e-12)
    lo, hi = lo - PAD * span, hi + PAD * span
    width, height = hi - lo
    view = f"{_fmt(lo[0])} {_fmt(-hi[1])} {_fmt(width)} {_fmt(height)}"

    stroke = _fmt(0.002 * max(width, height))
    meta = dict(metadata or {})
    meta["excluded_samples"] = excluded
    meta["polylines"] = len(polylines)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view}" width="600" height="600">',
        f"<metadata>{json.dumps(meta, sort_keys=True)}</metadata>",
        '<g fill="none" stroke-linejoin="round" vector-effect="non-scaling-stroke">',
    ]
    if diamond:
        out.append('<polyline class="diamond" stroke="#c0392b" '
                   f'stroke-width="{stroke}" points="1,0 0,1 -1,0 0,-1 1,0"/>')
    for run in polylines:
        coords = " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in run)
        out.append(f'<polyline class="grid" stroke="#1f3a5f" stroke-width="{stroke}" '
                   f'points="{coords}"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n", meta
