"""Static SVG charts: the threshold sweep and a cluster timeline.

Written by hand so the bytes depend only on the data.
"""
from __future__ import annotations

from typing import Sequence

from .core import MINUTES_PER_DAY, Cluster, DensityPrototype, Mode
from .sim import SweepResult

_W, _H = 640, 360
_L, _R, _T, _B = 60, 60, 30, 50

_MODE_COLORS = {Mode.COMFORT: "#2a9d8f", Mode.BALANCE: "#e9c46a", Mode.ECO: "#264653"}


def _f(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / n for k in range(n + 1)]


def _polyline(xs: Sequence[float], ys: Sequence[float], style: str) -> str:
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in zip(xs, ys))
    return f'<polyline fill="none" {style} points="{pts}"/>'


def sweep_svg(sweep: SweepResult, unit: str = "Wh") -> str:
    """Energy (solid, left axis) and test error (dashed, right axis) against
    the density threshold, with the three mode thresholds marked."""
    pw, ph = _W - _L - _R, _H - _T - _B
    xs = [p.d_star for p in sweep.points]
    energy = [p.mean_energy for p in sweep.points]
    error = [p.mean_error for p in sweep.points]
    x_hi = max(max(xs), max(sweep.modes.values())) or 1.0
    e_hi = max(energy) * 1.1 or 1.0
    r_hi = max(max(error) * 1.1, 0.05)

    def sx(v: float) -> float:
        return _L + pw * v / x_hi

    def sy_e(v: float) -> float:
        return _T + ph * (1 - v / e_hi)

    def sy_r(v: float) -> float:
        return _T + ph * (1 - v / r_hi)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="{_L}" y="{_T}" width="{pw}" height="{ph}" fill="none" stroke="#999"/>',
    ]
    for v in _ticks(0, x_hi):
        out.append(f'<text x="{_f(sx(v))}" y="{_H - _B + 16}" text-anchor="middle">{v:.2f}</text>')
    for v in _ticks(0, e_hi):
        out.append(f'<text x="{_L - 6}" y="{_f(sy_e(v) + 4)}" text-anchor="end" fill="#1d4ed8">{v:.1f}</text>')
    for v in _ticks(0, r_hi):
        out.append(f'<text x="{_W - _R + 6}" y="{_f(sy_r(v) + 4)}" fill="#b91c1c">{v:.2f}</text>')
    out.append(f'<text x="{_L + pw / 2}" y="{_H - 12}" text-anchor="middle">density threshold D*</text>')
    out.append(f'<text x="14" y="{_T + ph / 2}" transform="rotate(-90 14 {_T + ph / 2})" text-anchor="middle" fill="#1d4ed8">energy ({unit}/day)</text>')
    out.append(f'<text x="{_W - 14}" y="{_T + ph / 2}" transform="rotate(90 {_W - 14} {_T + ph / 2})" text-anchor="middle" fill="#b91c1c">error rate</text>')
    for mode, d in sweep.modes.items():
        x = _f(sx(d))
        color = _MODE_COLORS[mode]
        out.append(f'<line x1="{x}" y1="{_T}" x2="{x}" y2="{_T + ph}" stroke="{color}" stroke-dasharray="2,3"/>')
        out.append(f'<text x="{x}" y="{_T - 6}" text-anchor="middle" fill="{color}">{mode.value}</text>')
    out.append(_polyline([sx(v) for v in xs], [sy_e(v) for v in energy], 'stroke="#1d4ed8" stroke-width="2"'))
    out.append(_polyline([sx(v) for v in xs], [sy_r(v) for v in error], 'stroke="#b91c1c" stroke-width="2" stroke-dasharray="6,4"'))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def timeline_svg(proto: DensityPrototype, clusters: Sequence[Cluster], d_star: float = 0.0) -> str:
    """Density bars over the day with cluster spans shaded beneath."""
    pw, ph = _W - _L - 20, _H - _T - _B
    d_hi = max(float(proto.bins.max()), d_star, 1e-9) * 1.1
    bw = pw / proto.n

    def sy(v: float) -> float:
        return _T + ph * (1 - v / d_hi)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="{_L}" y="{_T}" width="{pw}" height="{ph}" fill="none" stroke="#999"/>',
    ]
    for c in clusters:
        x0 = _L + c.start_bin * bw
        out.append(f'<rect x="{_f(x0)}" y="{_T}" width="{_f(c.size * bw)}" height="{ph}" fill="#a7f3d0" opacity="0.6"/>')
    for i, v in enumerate(proto.bins.tolist()):
        if v > 0:
            color = "#1f2937" if v > d_star else "#9ca3af"
            out.append(f'<rect x="{_f(_L + i * bw)}" y="{_f(sy(v))}" width="{_f(bw)}" height="{_f(_T + ph - sy(v))}" fill="{color}"/>')
    if d_star > 0:
        y = _f(sy(d_star))
        out.append(f'<line x1="{_L}" y1="{y}" x2="{_L + pw}" y2="{y}" stroke="#b91c1c" stroke-dasharray="4,3"/>')
    for hour in range(0, 25, 3):
        x = _f(_L + pw * hour * 60 / MINUTES_PER_DAY)
        out.append(f'<text x="{x}" y="{_H - _B + 16}" text-anchor="middle">{hour:02d}:00</text>')
    for v in _ticks(0, d_hi, 4):
        out.append(f'<text x="{_L - 6}" y="{_f(sy(v) + 4)}" text-anchor="end">{v:.2f}</text>')
    out.append(f'<text x="{_L + pw / 2}" y="{_H - 12}" text-anchor="middle">time of day ({len(clusters)} clusters)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
