"""Plain-text outputs: key=value blocks and a hand-written log-log SVG chart."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .convergence import TruncationTable

__all__ = ["key_value_block", "render_svg", "emit_svg"]

_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 72, 24, 24, 56
_SERIES = (("err_target", "#1f77b4"), ("bound", "#d62728"))


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def key_value_block(items) -> str:
    """``key=value`` lines, floats in shortest round-trip form."""
    pairs = items.items() if isinstance(items, dict) else items
    return "".join(f"{k}={_num(v)}\n" for k, v in pairs)


def _log_range(values: np.ndarray) -> tuple[float, float]:
    lo, hi = math.log10(values.min()), math.log10(values.max())
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5
    return math.floor(lo), math.ceil(hi)


def _c(v: float) -> str:
    return f"{v:.2f}"


def render_svg(table: TruncationTable) -> str:
    """A standalone SVG of ``err_target`` and ``bound`` against ``lambda``.

    Both axes are logarithmic; rows with a non-positive value are left out
    of that series.  The output depends only on the table values.
    """
    if len(table) == 0:
        raise ValueError("cannot plot an empty table")
    lam = np.asarray(table.lambdas, dtype=float)
    series = {name: np.asarray(getattr(table, name), dtype=float) for name, _ in _SERIES}
    ys = np.concatenate([v[v > 0] for v in series.values()])
    if ys.size == 0:
        ys = np.array([1.0])
    x0, x1 = _log_range(lam)
    y0, y1 = _log_range(ys)
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def px(x):
        return _LEFT + pw * (math.log10(x) - x0) / (x1 - x0)

    def py(y):
        return _TOP + ph * (1.0 - (math.log10(y) - y0) / (y1 - y0))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for e in range(x0, x1 + 1):
        x = _c(px(10.0 ** e))
        out.append(f'<line x1="{x}" y1="{_TOP + ph}" x2="{x}" y2="{_TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{_TOP + ph + 20}" text-anchor="middle">1e{e}</text>')
    for e in range(y0, y1 + 1):
        y = _c(py(10.0 ** e))
        out.append(f'<line x1="{_LEFT - 5}" y1="{y}" x2="{_LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 8}" y="{y}" text-anchor="end" dy="4">1e{e}</text>')
    out.append(
        f'<text x="{_LEFT + pw / 2:.2f}" y="{_H - 12}" text-anchor="middle">lambda</text>'
    )
    for k, (name, colour) in enumerate(_SERIES):
        vals = series[name]
        pts = [(px(a), py(b)) for a, b in zip(lam, vals) if b > 0]
        if len(pts) > 1:
            path = " ".join(f"{_c(a)},{_c(b)}" for a, b in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        for a, b in pts:
            out.append(f'<circle cx="{_c(a)}" cy="{_c(b)}" r="3" fill="{colour}"/>')
        ly = _TOP + 16 + 16 * k
        out.append(f'<rect x="{_LEFT + pw - 110}" y="{ly - 9}" width="10" height="10" fill="{colour}"/>')
        out.append(f'<text x="{_LEFT + pw - 94}" y="{ly}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(table: TruncationTable, path) -> None:
    Path(path).write_text(render_svg(table), encoding="utf-8")
