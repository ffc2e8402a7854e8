"""Monte-Carlo aggregation, finite-size-scaling collapse, and decay fits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class SampleStats:
    """Ensemble means with standard errors at one parameter point and size."""

    p_j: float
    p_k: float
    lx: int
    ly: int
    n_t: int
    half_cycle: bool
    n_s: int
    s_topo_mean: float
    s_topo_sem: Optional[float]
    bmi_mean: float
    bmi_sem: Optional[float]
    wilson_mean: float
    wilson_sem: Optional[float]


def mean_sem(values: Sequence[float]) -> tuple[float, Optional[float]]:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("no samples to aggregate")
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, None
    return mean, float(arr.std(ddof=1) / np.sqrt(arr.size))


def aggregate(samples, p_j: float, p_k: float, lx: int, ly: int, n_t: int,
              half_cycle: bool) -> SampleStats:
    """Means and standard errors of the per-trajectory diagnostics."""
    if not samples:
        raise ValueError("no samples to aggregate")
    st, st_sem = mean_sem([s.s_topo for s in samples])
    bm, bm_sem = mean_sem([s.bmi for s in samples])
    wl, wl_sem = mean_sem([s.wilson_abs for s in samples])
    return SampleStats(p_j, p_k, lx, ly, n_t, half_cycle, len(samples),
                       st, st_sem, bm, bm_sem, wl, wl_sem)


# -- finite-size-scaling data collapse ---------------------------------------


@dataclass
class CollapseResult:
    p_c: float
    nu: float
    objective: float
    trace: list = field(default_factory=list, repr=False)
    degenerate: bool = False
    converged: bool = True
    corrections_to_scaling: bool = False

    def as_dict(self) -> dict:
        return {"p_c": self.p_c, "nu": self.nu, "objective": self.objective,
                "degenerate": self.degenerate, "converged": self.converged,
                "corrections_to_scaling": self.corrections_to_scaling,
                "trace": [list(t) for t in self.trace]}


def _collapse_objective(curves, p_c: float, nu: float) -> float:
    """Leave-one-size-out scatter of the scaled data around the master curve.

    Every point of one size is compared with the linear interpolation of the
    pooled points of the other sizes in the scaled coordinate
    x = (p - p_c) * L**(1/nu); deviations are normalised by the combined
    error bars.
    """
    inv_nu = 1.0 / nu
    scaled = []
    for size, pts in curves.items():
        p, y, yerr = (np.asarray(col, dtype=float) for col in zip(*pts))
        scaled.append((size, (p - p_c) * float(size) ** inv_nu, y, yerr))
    total, count = 0.0, 0
    for i, (size, x_i, y_i, e_i) in enumerate(scaled):
        xs, ys, es = [], [], []
        for j, (_, x_j, y_j, e_j) in enumerate(scaled):
            if j != i:
                xs.append(x_j)
                ys.append(y_j)
                es.append(e_j)
        x_o = np.concatenate(xs)
        order = np.argsort(x_o)
        x_o = x_o[order]
        y_o = np.concatenate(ys)[order]
        e_o = np.concatenate(es)[order]
        inside = (x_i >= x_o[0]) & (x_i <= x_o[-1])
        if not inside.any():
            continue
        y_hat = np.interp(x_i[inside], x_o, y_o)
        e_hat = np.interp(x_i[inside], x_o, e_o)
        w = e_i[inside] ** 2 + e_hat ** 2
        w[w <= 0] = np.inf
        total += float((((y_i[inside] - y_hat) ** 2) / w).sum())
        count += int(inside.sum())
    if count == 0:
        return float("inf")
    return total / count


def _nelder_mead(f, x0, steps, tol=1e-4, max_iter=200):
    """Plain two-parameter simplex descent with a relative-size stop rule."""
    pts = [np.asarray(x0, dtype=float)]
    for i, s in enumerate(steps):
        q = pts[0].copy()
        q[i] += s
        pts.append(q)
    vals = [f(p) for p in pts]
    for _ in range(max_iter):
        order = np.argsort(vals)
        pts = [pts[i] for i in order]
        vals = [vals[i] for i in order]
        spread = max(abs(vals[-1] - vals[0]), 0.0)
        scale = max(abs(vals[0]), 1e-12)
        if spread / scale < tol:
            return pts[0], vals[0], True
        centroid = np.mean(pts[:-1], axis=0)
        refl = centroid + (centroid - pts[-1])
        f_r = f(refl)
        if f_r < vals[0]:
            expand = centroid + 2.0 * (centroid - pts[-1])
            f_e = f(expand)
            pts[-1], vals[-1] = (expand, f_e) if f_e < f_r else (refl, f_r)
        elif f_r < vals[-2]:
            pts[-1], vals[-1] = refl, f_r
        else:
            contract = centroid + 0.5 * (pts[-1] - centroid)
            f_c = f(contract)
            if f_c < vals[-1]:
                pts[-1], vals[-1] = contract, f_c
            else:
                for i in range(1, len(pts)):
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
                    vals[i] = f(pts[i])
    return pts[int(np.argmin(vals))], min(vals), False


def _grid_simplex(curves: dict, search_box, p_step: float, nu_step: float,
                  refine: bool) -> tuple[float, float, float, list, bool]:
    (p_lo, p_hi), (nu_lo, nu_hi) = search_box
    p_grid = np.arange(p_lo, p_hi + 0.5 * p_step, p_step)
    nu_grid = np.arange(nu_lo, nu_hi + 0.5 * nu_step, nu_step)
    trace = []
    best = (float("inf"), float(p_grid[0]), float(nu_grid[0]))
    for p_c in p_grid:
        for nu in nu_grid:
            obj = _collapse_objective(curves, float(p_c), float(nu))
            trace.append((float(p_c), float(nu), obj))
            if obj < best[0]:
                best = (obj, float(p_c), float(nu))
    obj, p_c, nu = best
    converged = True
    if refine and np.isfinite(obj):
        def clipped(x):
            pc = min(max(x[0], p_lo), p_hi)
            nv = min(max(x[1], max(nu_lo, 1e-3)), nu_hi)
            return _collapse_objective(curves, pc, nv)

        x, val, converged = _nelder_mead(clipped, (p_c, nu), (p_step, nu_step))
        if val <= obj:
            p_c = float(min(max(x[0], p_lo), p_hi))
            nu = float(min(max(x[1], max(nu_lo, 1e-3)), nu_hi))
            obj = val
    return p_c, nu, obj, trace, converged


def data_collapse(curves: dict, search_box: tuple[tuple[float, float], tuple[float, float]],
                  p_step: float = 0.005, nu_step: float = 0.05,
                  refine: bool = True, pair_guard: float = 0.015) -> CollapseResult:
    """Best (p_c, nu) collapsing curves {L: [(p, y, yerr), ...]} onto one master curve.

    Coarse grid search over the box followed by simplex refinement.  Curves
    that carry no size dependence are flagged degenerate.  When the optimum
    over all sizes and the optimum over the two largest sizes disagree in p_c
    by more than `pair_guard`, the smallest sizes are breaking
    single-parameter scaling; the result is then taken from the largest pair
    and flagged `corrections_to_scaling`.
    """
    if len(curves) < 3:
        raise ValueError("need at least three sizes for a collapse")
    for size, pts in curves.items():
        if len(pts) < 5:
            raise ValueError(f"size {size} has fewer than 5 points")
    ys = np.concatenate([[p[1] for p in pts] for pts in curves.values()])
    if float(ys.max() - ys.min()) < 1e-12:
        return CollapseResult(p_c=float("nan"), nu=float("nan"),
                              objective=0.0, degenerate=True, converged=False)

    p_c, nu, obj, trace, converged = _grid_simplex(curves, search_box,
                                                   p_step, nu_step, refine)
    corrections = False
    top = {size: curves[size] for size in sorted(curves)[-2:]}
    t_pc, t_nu, t_obj, t_trace, t_conv = _grid_simplex(top, search_box,
                                                       p_step, nu_step, refine)
    if abs(t_pc - p_c) > pair_guard:
        corrections = True
        p_c, nu, obj, converged = t_pc, t_nu, t_obj, t_conv
        trace = trace + t_trace
    return CollapseResult(p_c=p_c, nu=nu, objective=obj, trace=trace,
                          converged=converged, corrections_to_scaling=corrections)


def bootstrap_collapse(curves: dict, search_box, rng: np.random.Generator,
                       resamples: int = 200, **kwargs) -> tuple[float, float]:
    """Parametric bootstrap spread (std) of the fitted (p_c, nu)."""
    pcs, nus = [], []
    for _ in range(resamples):
        jittered = {
            size: [(p, y + rng.normal(0.0, e if e > 0 else 0.0), e) for (p, y, e) in pts]
            for size, pts in curves.items()
        }
        res = data_collapse(jittered, search_box, refine=False, **kwargs)
        if not res.degenerate:
            pcs.append(res.p_c)
            nus.append(res.nu)
    if not pcs:
        return float("nan"), float("nan")
    return float(np.std(pcs)), float(np.std(nus))


# -- power-law decay fit -------------------------------------------------------


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    kappa: float
    residual: float
    cov: tuple[tuple[float, float], tuple[float, float]]
    n_points: int

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "kappa": self.kappa, "residual": self.residual,
                "cov": [list(r) for r in self.cov], "n_points": self.n_points}


def fit_power_law(points: Sequence[tuple[float, float, float]]) -> PowerLawFit:
    """Weighted least squares of log I against log d for I ~ alpha / d**kappa."""
    clean = []
    for d, i_val, i_err in points:
        if d <= 0:
            raise ValueError("distances must be positive")
        if i_val <= 0:
            warnings.warn(f"dropping non-positive value at d={d}", stacklevel=2)
            continue
        clean.append((d, i_val, i_err))
    if len(clean) < 3:
        raise ValueError("need at least 3 positive points to fit")
    d = np.array([c[0] for c in clean], dtype=float)
    val = np.array([c[1] for c in clean], dtype=float)
    err = np.array([c[2] for c in clean], dtype=float)
    x = np.log(d)
    y = np.log(val)
    sigma = np.where(err > 0, err / val, 1.0)
    w = 1.0 / sigma ** 2
    # model y = a - kappa x
    sw, swx, swxx = w.sum(), (w * x).sum(), (w * x * x).sum()
    swy, swxy = (w * y).sum(), (w * x * y).sum()
    det = sw * swxx - swx ** 2
    a = (swxx * swy - swx * swxy) / det
    slope = (sw * swxy - swx * swy) / det
    kappa = -slope
    resid = float((w * (y - (a + slope * x)) ** 2).sum())
    cov = ((swxx / det, swx / det), (swx / det, sw / det))
    return PowerLawFit(alpha=float(np.exp(a)), kappa=float(kappa), residual=resid,
                       cov=cov, n_points=len(clean))


# -- transition-point estimators ------------------------------------------------


def crossing_point(p: Sequence[float], y_small: Sequence[float],
                   y_large: Sequence[float]) -> float:
    """Parameter where two size curves cross, by sign change of the difference."""
    p = np.asarray(p, dtype=float)
    diff = np.asarray(y_small, dtype=float) - np.asarray(y_large, dtype=float)
    sign = np.sign(diff)
    for i in range(len(p) - 1):
        if sign[i] != sign[i + 1] and sign[i] != 0:
            frac = diff[i] / (diff[i] - diff[i + 1])
            return float(p[i] + frac * (p[i + 1] - p[i]))
    if (diff == 0).any():
        return float(p[np.argmin(np.abs(diff))])
    raise ValueError("curves do not cross on the sampled window")


def rise_midpoint(p: Sequence[float], y: Sequence[float]) -> float:
    """Parameter where the (monotone-enforced) curve passes half its range."""
    p = np.asarray(p, dtype=float)
    y = np.maximum.accumulate(np.asarray(y, dtype=float))
    target = 0.5 * (y.min() + y.max())
    return float(np.interp(target, y, p))


def steepest_rise(p: Sequence[float], y: Sequence[float]) -> float:
    """Parameter of maximal centred slope, refined by a parabola through neighbours."""
    p = np.asarray(p, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(p) < 3:
        raise ValueError("need at least three points")
    slope = (y[2:] - y[:-2]) / (p[2:] - p[:-2])
    mids = p[1:-1]
    k = int(np.argmax(slope))
    if 0 < k < len(slope) - 1:
        s_m, s_0, s_p = slope[k - 1], slope[k], slope[k + 1]
        denom = s_m - 2 * s_0 + s_p
        if denom < 0:
            shift = 0.5 * (s_m - s_p) / denom
            return float(mids[k] + shift * (mids[k + 1] - mids[k]))
    return float(mids[k])
