"""Self-contained SVG emission for scan results.

Writes plain SVG text so a plot never needs an external rendering stack:
heat maps for parameter grids, error-bar curves for cuts, and overlaid
scaled curves for collapse checks.
"""

from __future__ import annotations

from typing import Optional, Sequence

W, H = 640, 480
ML, MR, MT, MB = 70, 30, 30, 55
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


class _Canvas:
    def __init__(self):
        self.parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
                      f'viewBox="0 0 {W} {H}">',
                      f'<rect width="{W}" height="{H}" fill="white"/>']

    def line(self, x1, y1, x2, y2, color="#000", width=1.0):
        self.parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                          f'stroke="{color}" stroke-width="{width}"/>')

    def rect(self, x, y, w, h, fill):
        self.parts.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" height="{h:.2f}" '
                          f'fill="{fill}"/>')

    def circle(self, x, y, r, color):
        self.parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.1f}" fill="{color}"/>')

    def text(self, x, y, s, size=12, anchor="middle", color="#000"):
        self.parts.append(f'<text x="{x:.2f}" y="{y:.2f}" font-size="{size}" '
                          f'font-family="sans-serif" text-anchor="{anchor}" '
                          f'fill="{color}">{_esc(s)}</text>')

    def polyline(self, pts, color, width=1.5):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                          f'stroke-width="{width}"/>')

    def write(self, path: str):
        self.parts.append("</svg>")
        with open(path, "w") as fh:
            fh.write("\n".join(self.parts))


def _scales(x_lo, x_hi, y_lo, y_hi):
    if x_hi == x_lo:
        x_hi = x_lo + 1
    if y_hi == y_lo:
        y_hi = y_lo + 1

    def sx(x):
        return ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR)

    def sy(y):
        return H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB)

    return sx, sy


def _axes(cv, sx, sy, x_lo, x_hi, y_lo, y_hi, xlabel, ylabel, title=""):
    cv.line(ML, H - MB, W - MR, H - MB)
    cv.line(ML, MT, ML, H - MB)
    for i in range(5):
        xv = x_lo + i * (x_hi - x_lo) / 4
        yv = y_lo + i * (y_hi - y_lo) / 4
        cv.line(sx(xv), H - MB, sx(xv), H - MB + 4)
        cv.text(sx(xv), H - MB + 18, f"{xv:.3g}", size=11)
        cv.line(ML - 4, sy(yv), ML, sy(yv))
        cv.text(ML - 8, sy(yv) + 4, f"{yv:.3g}", size=11, anchor="end")
    cv.text((ML + W - MR) / 2, H - 12, xlabel)
    cv.text(16, (MT + H - MB) / 2, ylabel, anchor="middle")
    if title:
        cv.text((ML + W - MR) / 2, MT - 8, title, size=14)


def _color_map(v: float) -> str:
    # blue (0) -> white (0.5) -> red (1)
    v = min(max(v, 0.0), 1.0)
    if v < 0.5:
        t = v / 0.5
        r, g, b = int(49 + t * (255 - 49)), int(104 + t * (255 - 104)), 255
    else:
        t = (v - 0.5) / 0.5
        r, g, b = 255, int(255 - t * (255 - 64)), int(255 - t * (255 - 40))
    return f"rgb({r},{g},{b})"


def heatmap(points: Sequence[tuple[float, float, float]], path: str,
            xlabel: str = "p_j", ylabel: str = "p_k", title: str = "",
            diagonal: bool = True) -> None:
    """Colored cells for (x, y, value) samples on [0,1]^2, with the
    anti-diagonal self-duality guide line."""
    if not points:
        raise ValueError("nothing to plot")
    vals = [v for (_, _, v) in points]
    v_lo, v_hi = min(vals), max(vals)
    span = (v_hi - v_lo) or 1.0
    xs = sorted({p[0] for p in points})
    ys = sorted({p[1] for p in points})
    dx = min((b - a for a, b in zip(xs, xs[1:])), default=0.1)
    dy = min((b - a for a, b in zip(ys, ys[1:])), default=0.1)
    cv = _Canvas()
    sx, sy = _scales(0.0, 1.0, 0.0, 1.0)
    for x, y, v in points:
        cx, cy = sx(x), sy(y)
        wpx = sx(dx) - sx(0)
        hpx = sy(0) - sy(dy)
        cv.rect(cx - wpx / 2, cy - hpx / 2, wpx, hpx, _color_map((v - v_lo) / span))
    if diagonal:
        cv.polyline([(sx(0), sy(1)), (sx(1), sy(0))], "#555", 1.0)
    _axes(cv, sx, sy, 0.0, 1.0, 0.0, 1.0, xlabel, ylabel,
          title or f"range [{v_lo:.3g}, {v_hi:.3g}]")
    cv.write(path)


def curves(series: dict, path: str, xlabel: str, ylabel: str, title: str = "",
           vline: Optional[float] = None) -> None:
    """Error-bar curves keyed by legend label: {label: [(x, y, yerr), ...]}."""
    if not series:
        raise ValueError("nothing to plot")
    all_pts = [p for pts in series.values() for p in pts]
    x_lo = min(p[0] for p in all_pts)
    x_hi = max(p[0] for p in all_pts)
    y_lo = min(p[1] - p[2] for p in all_pts)
    y_hi = max(p[1] + p[2] for p in all_pts)
    pad = 0.05 * (y_hi - y_lo or 1.0)
    cv = _Canvas()
    sx, sy = _scales(x_lo, x_hi, y_lo - pad, y_hi + pad)
    for i, (label, pts) in enumerate(sorted(series.items(), key=lambda kv: str(kv[0]))):
        color = PALETTE[i % len(PALETTE)]
        pts = sorted(pts)
        cv.polyline([(sx(x), sy(y)) for x, y, _ in pts], color)
        for x, y, err in pts:
            cv.circle(sx(x), sy(y), 2.5, color)
            if err:
                cv.line(sx(x), sy(y - err), sx(x), sy(y + err), color)
        cv.text(W - MR - 8, MT + 16 + 16 * i, str(label), anchor="end", color=color)
    if vline is not None and x_lo <= vline <= x_hi:
        cv.line(sx(vline), MT, sx(vline), H - MB, "#888", 1.0)
    _axes(cv, sx, sy, x_lo, x_hi, y_lo - pad, y_hi + pad, xlabel, ylabel, title)
    cv.write(path)


def collapse_overlay(curves_by_size: dict, p_c: float, nu: float, path: str,
                     ylabel: str = "observable", title: str = "") -> None:
    """Scaled-coordinate overlay (x = (p - p_c) L^(1/nu)) of all sizes."""
    series = {}
    for size, pts in curves_by_size.items():
        scale = float(size) ** (1.0 / nu)
        series[f"L={size}"] = [((p - p_c) * scale, y, err) for p, y, err in pts]
    curves(series, path, xlabel=f"(p - {p_c:.3f}) L^(1/{nu:.2f})", ylabel=ylabel,
           title=title or "data collapse", vline=0.0)
