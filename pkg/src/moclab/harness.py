"""Experiment orchestration: cuts, grids, parallel sampling, persistence.

A plan enumerates (parameter point) x (lattice size); every sample is an
independent trajectory seeded from (master_seed, size index, point index,
sample index), so reruns of the same plan are byte-identical regardless of
the worker pool.  Full-cycle and half-cycle diagnostics are paired: the half
variant continues the same trajectory by one extra Z round.
"""

from __future__ import annotations

import csv
import multiprocessing as mp
import os
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import circuits, diagnostics
from .analysis import aggregate, mean_sem
from .circuits import Chain, CircuitConfig, RngStream
from .lattice import build_lieb_lattice, bmi_regions, tee_regions, wilson_line

CUTS = ("i", "ii", "iii", "iv", "v", "vi", "grid")

CSV_COLUMNS = ["model", "cut", "p_j", "p_k", "p_zx", "lx", "ly", "n_t",
               "half_cycle", "n_s", "s_topo_mean", "s_topo_sem", "bmi_mean",
               "bmi_sem", "wilson_len", "wilson_mean", "wilson_sem"]

DEFAULT_CUT_SIZES = ((8, 5), (10, 6), (12, 7))


def cut_point(cut: str, p: float) -> tuple[float, float]:
    """Map a scan parameter to (p_j, p_k) along the named cut."""
    if cut == "i":
        return p, 1.0
    if cut == "ii":
        return 0.0, p
    if cut == "iii":
        return p, 1.0 - p
    if cut == "iv":
        return p, p + 0.5
    if cut == "v":
        return p, p + 0.25
    if cut == "vi":
        return 1.0, p
    raise ValueError(f"unknown cut {cut!r}")


@dataclass(frozen=True)
class ExperimentPlan:
    model: str = "fs_moc"
    cut: str = "i"
    params: tuple[float, ...] = ()
    sizes: tuple[tuple[int, int], ...] = DEFAULT_CUT_SIZES
    n_t: int = 30
    half_cycle_variants: tuple[bool, ...] = (False,)
    n_s: int = 500
    master_seed: int = 1
    wilson_length: int = 0          # 0 -> pick per size below
    mi_distances: tuple[int, ...] = ()
    outcome_policy: str = "force_plus"
    p_zx: float = 0.5

    def points(self) -> list[tuple[float, float]]:
        if self.cut == "grid":
            return [(float(a), float(b)) for b in self.params for a in self.params]
        pts = [cut_point(self.cut, float(p)) for p in self.params]
        for p_j, p_k in pts:
            if not (0 <= p_j <= 1 and 0 <= p_k <= 1):
                raise ValueError(f"cut {self.cut} point ({p_j}, {p_k}) leaves [0,1]^2")
        return pts


@dataclass
class ResultRow:
    model: str
    cut: str
    p_j: float
    p_k: float
    p_zx: float
    lx: int
    ly: int
    n_t: int
    half_cycle: bool
    n_s: int
    s_topo_mean: Optional[float]
    s_topo_sem: Optional[float]
    bmi_mean: Optional[float]
    bmi_sem: Optional[float]
    wilson_len: int
    wilson_mean: Optional[float]
    wilson_sem: Optional[float]
    error: Optional[str] = None

    def csv_values(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "1" if v else "0"
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [fmt(getattr(self, c)) for c in CSV_COLUMNS]


def default_wilson_length(lx: int) -> int:
    """Length-7 string when it fits, else the longest admissible odd length."""
    return min(7, lx - 2)


_WORKER_CACHE: dict = {}


def _lattice_bundle(lx: int, ly: int, wilson_len: int):
    key = (lx, ly, wilson_len)
    bundle = _WORKER_CACHE.get(key)
    if bundle is None:
        lat = build_lieb_lattice(lx, ly)
        bundle = (lat, tee_regions(lat), bmi_regions(lat),
                  wilson_line(lat, wilson_len).as_pauli(lat.nq))
        _WORKER_CACHE[key] = bundle
    return bundle


def _run_samples(args) -> list[tuple]:
    """One chunk of trajectories; returns per-sample diagnostic tuples."""
    (model, lx, ly, p_j, p_k, p_zx, n_t, variants, outcome_policy,
     master_seed, size_ix, point_ix, lo, hi, wilson_len, mi_distances) = args
    lat, tee_regs, bmi_regs, wilson_op = _lattice_bundle(lx, ly, wilson_len)
    cfg = CircuitConfig(p_j=p_j, p_k=p_k, p_zx=p_zx, n_t=n_t, model=model,
                        outcome_policy=outcome_policy, master_seed=master_seed)
    runner = circuits.run_fs_moc if model == "fs_moc" else circuits.run_zx_randomized
    out = []
    for k in range(lo, hi):
        rng = RngStream.for_sample(master_seed, (size_ix, point_ix, k), outcome_policy)
        t = runner(lat, cfg, rng)
        rec = []
        if False in variants:
            rec.append(diagnostics.evaluate(t, lat, tee_regs, bmi_regs, wilson_op,
                                            mi_distances or None))
        if True in variants:
            circuits._z_round(t, lat, p_j, p_k, rng.basis, rng.outcome)
            rec.append(diagnostics.evaluate(t, lat, tee_regs, bmi_regs, wilson_op,
                                            mi_distances or None))
        out.append(tuple(rec))
    return out


def parallel_map(fn, tasks: list, workers: Optional[int] = None) -> list:
    """Order-preserving map over a process pool; small task lists run inline."""
    workers = workers if workers is not None else (os.cpu_count() or 1)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    with ctx.Pool(processes=min(workers, len(tasks))) as pool:
        return pool.map(fn, tasks, chunksize=1)


def run_plan(plan: ExperimentPlan, workers: Optional[int] = None,
             progress: bool = False) -> list[ResultRow]:
    """Execute every (point, size) of the plan and aggregate into rows.

    Per-point failures are recorded on the row rather than aborting the scan.
    """
    if plan.model not in ("fs_moc", "zx_randomized"):
        raise ValueError("run_plan drives the full-lattice models")
    points = plan.points()
    rows: list[ResultRow] = []
    workers = workers if workers is not None else (os.cpu_count() or 1)
    for size_ix, (lx, ly) in enumerate(plan.sizes):
        wilson_len = plan.wilson_length or default_wilson_length(lx)
        for point_ix, (p_j, p_k) in enumerate(points):
            base = dict(model=plan.model, cut=plan.cut, p_j=p_j, p_k=p_k,
                        p_zx=plan.p_zx if plan.model == "zx_randomized" else 0.0,
                        lx=lx, ly=ly, n_t=plan.n_t, n_s=plan.n_s,
                        wilson_len=wilson_len)
            try:
                chunk = max(1, plan.n_s // max(1, 4 * workers))
                bounds = list(range(0, plan.n_s, chunk)) + [plan.n_s]
                tasks = [(plan.model, lx, ly, p_j, p_k, plan.p_zx, plan.n_t,
                          plan.half_cycle_variants, plan.outcome_policy,
                          plan.master_seed, size_ix, point_ix, lo, hi,
                          wilson_len, plan.mi_distances)
                         for lo, hi in zip(bounds[:-1], bounds[1:])]
                samples: list[tuple] = []
                for part in parallel_map(_run_samples, tasks, workers):
                    samples.extend(part)
                for v_ix, half in enumerate([h for h in (False, True)
                                             if h in plan.half_cycle_variants]):
                    vals = [s[v_ix] for s in samples]
                    stats = aggregate(vals, p_j, p_k, lx, ly, plan.n_t, half)
                    rows.append(ResultRow(
                        half_cycle=half,
                        s_topo_mean=stats.s_topo_mean, s_topo_sem=stats.s_topo_sem,
                        bmi_mean=stats.bmi_mean, bmi_sem=stats.bmi_sem,
                        wilson_mean=stats.wilson_mean, wilson_sem=stats.wilson_sem,
                        **base))
            except Exception as exc:  # record, keep scanning
                for half in plan.half_cycle_variants:
                    rows.append(ResultRow(
                        half_cycle=half, s_topo_mean=None, s_topo_sem=None,
                        bmi_mean=None, bmi_sem=None, wilson_mean=None,
                        wilson_sem=None, error=str(exc), **base))
            if progress:
                print(f"  ({lx},{ly}) point ({p_j:.3f},{p_k:.3f}) done", flush=True)
    return rows


def _mi_samples(args) -> list[list[int]]:
    (lx, ly, p_j, p_k, n_t, half_cycle, outcome_policy, master_seed,
     lo, hi, distances) = args
    key = ("mi", lx, ly)
    lat = _WORKER_CACHE.get(key)
    if lat is None:
        lat = build_lieb_lattice(lx, ly)
        _WORKER_CACHE[key] = lat
    cfg = CircuitConfig(p_j=p_j, p_k=p_k, n_t=n_t, half_cycle=half_cycle,
                        outcome_policy=outcome_policy, master_seed=master_seed)
    out = []
    for k in range(lo, hi):
        rng = RngStream.for_sample(master_seed, (9, 0, k), outcome_policy)
        t = circuits.run_fs_moc(lat, cfg, rng)
        out.append([i for (_, i) in diagnostics.mi_vs_distance(t, lat, distances)])
    return out


def run_mi_scan(lx: int, ly: int, p_j: float, p_k: float, distances: Sequence[int],
                n_s: int, n_t: int = 30, half_cycle: bool = False,
                master_seed: int = 1, workers: Optional[int] = None
                ) -> list[tuple[int, float, float]]:
    """Ensemble-averaged mutual information per boundary separation."""
    workers = workers if workers is not None else (os.cpu_count() or 1)
    chunk = max(1, n_s // max(1, 4 * workers))
    bounds = list(range(0, n_s, chunk)) + [n_s]
    tasks = [(lx, ly, p_j, p_k, n_t, half_cycle, "force_plus", master_seed,
              lo, hi, tuple(distances)) for lo, hi in zip(bounds[:-1], bounds[1:])]
    rows: list[list[int]] = []
    for part in parallel_map(_mi_samples, tasks, workers):
        rows.extend(part)
    arr = np.asarray(rows, dtype=float)
    out = []
    for j, d in enumerate(distances):
        m, sem = mean_sem(arr[:, j])
        out.append((int(d), m, sem if sem is not None else 0.0))
    return out


def _ptfi_mi_samples(args) -> list[float]:
    (length, p, n_t, half_cycle, segment, master_seed, salt, lo, hi) = args
    chain = Chain(length)
    cfg = CircuitConfig(p_j=p, p_k=0.0, n_t=n_t, half_cycle=half_cycle,
                        model="ptfi_1d", master_seed=master_seed)
    from .lattice import Region
    if segment:
        q = max(1, length // 4)
        a = Region(frozenset(range(q)), "BMI_A")
        b = Region(frozenset(range(length // 2, length // 2 + q)), "BMI_B")
    else:
        i, j = chain.antipodal_sites()
        a = Region(frozenset({i}), "BMI_A")
        b = Region(frozenset({j}), "BMI_B")
    out = []
    for k in range(lo, hi):
        rng = RngStream.for_sample(master_seed, (salt, length, k), "force_plus")
        t = circuits.run_ptfi(chain, cfg, rng)
        out.append(float(diagnostics.bmi(t, a, b)))
    return out


def ptfi_mi_curve(length: int, ps: Sequence[float], n_s: int, n_t: Optional[int] = None,
                  half_cycle: bool = False, segment: bool = False,
                  master_seed: int = 1, workers: Optional[int] = None
                  ) -> list[tuple[float, float, float]]:
    """Mutual information of the chain model across p.

    `segment=False` pairs the two antipodal sites; `segment=True` pairs two
    antipodal quarter-chain segments, whose curves for different lengths
    cross at the transition when evaluated after the trailing bond round.
    """
    n_t = n_t if n_t is not None else 2 * length
    workers = workers if workers is not None else (os.cpu_count() or 1)
    out = []
    for ip, p in enumerate(ps):
        chunk = max(1, n_s // max(1, 4 * workers))
        bounds = list(range(0, n_s, chunk)) + [n_s]
        tasks = [(length, float(p), n_t, half_cycle, segment, master_seed, ip, lo, hi)
                 for lo, hi in zip(bounds[:-1], bounds[1:])]
        vals: list[float] = []
        for part in parallel_map(_ptfi_mi_samples, tasks, workers):
            vals.extend(part)
        m, sem = mean_sem(vals)
        out.append((float(p), m, sem if sem is not None else 0.0))
    return out


# -- persistence -----------------------------------------------------------------


def emit_plot(csv_path: str, kind: str, out: Optional[str] = None,
              value: str = "s_topo_mean", half_cycle: bool = False,
              p_c: Optional[float] = None, nu: Optional[float] = None) -> str:
    """Render a scan CSV as a self-contained SVG; returns the output path."""
    from . import svgplot

    rows = [r for r in read_csv(csv_path) if r.half_cycle == half_cycle]
    out = out or (os.path.splitext(csv_path)[0] + f"_{kind}.svg")
    if kind == "heatmap":
        pts = [(r.p_j, r.p_k, getattr(r, value)) for r in rows
               if getattr(r, value) is not None]
        svgplot.heatmap(pts, out, title=value)
    elif kind == "curves":
        series = {f"L={k}": v
                  for k, v in rows_to_curves(rows, value, half_cycle).items()}
        svgplot.curves(series, out, xlabel="p", ylabel=value)
    elif kind == "collapse":
        if p_c is None or nu is None:
            raise ValueError("collapse plot needs p_c and nu")
        svgplot.collapse_overlay(rows_to_curves(rows, value, half_cycle),
                                 p_c, nu, out, ylabel=value)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    return out


def emit_csv(rows: Sequence[ResultRow], path: str) -> None:
    if not rows:
        raise ValueError("refusing to write an empty result table")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.csv_values())


def read_csv(path: str) -> list[ResultRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}")
        rows = []
        for rec in reader:
            vals = dict(zip(CSV_COLUMNS, rec))
            rows.append(ResultRow(
                model=vals["model"], cut=vals["cut"],
                p_j=float(vals["p_j"]), p_k=float(vals["p_k"]),
                p_zx=float(vals["p_zx"]), lx=int(vals["lx"]), ly=int(vals["ly"]),
                n_t=int(vals["n_t"]), half_cycle=vals["half_cycle"] == "1",
                n_s=int(vals["n_s"]),
                s_topo_mean=_opt_float(vals["s_topo_mean"]),
                s_topo_sem=_opt_float(vals["s_topo_sem"]),
                bmi_mean=_opt_float(vals["bmi_mean"]),
                bmi_sem=_opt_float(vals["bmi_sem"]),
                wilson_len=int(vals["wilson_len"]),
                wilson_mean=_opt_float(vals["wilson_mean"]),
                wilson_sem=_opt_float(vals["wilson_sem"])))
    return rows


def _opt_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def rows_to_curves(rows: Iterable[ResultRow], observable: str,
                   half_cycle: bool = False) -> dict:
    """Group scan rows into {L: [(p, y, yerr), ...]} keyed by lx for collapse."""
    curves: dict = {}
    for row in rows:
        if row.half_cycle != half_cycle or getattr(row, observable) is None:
            continue
        p = row.p_k if row.cut in ("ii", "vi") else row.p_j
        sem = getattr(row, observable.replace("_mean", "_sem")) or 0.0
        curves.setdefault(row.lx, []).append((p, getattr(row, observable), sem))
    for pts in curves.values():
        pts.sort()
    return curves
