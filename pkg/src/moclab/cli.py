"""Command-line front end.

Every flag can also be supplied through a flat key=value config file
(--config); explicit flags win.  Keys use the flag name with dashes replaced
by underscores, e.g. ``half_cycle=1``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import analysis, harness, percolation
from .circuits import CircuitConfig, RngStream, run_fs_moc, run_zx_randomized
from .diagnostics import evaluate
from .harness import (DEFAULT_CUT_SIZES, ExperimentPlan, default_wilson_length,
                      emit_csv, read_csv, rows_to_curves, run_plan)
from .lattice import bmi_regions, build_lieb_lattice, tee_regions, wilson_line
from .mbqc import paired_comparison


def _parse_bool(s) -> bool:
    if isinstance(s, bool):
        return s
    return str(s).strip().lower() in ("1", "true", "yes", "on")


_CONFIG_TYPES = {
    "lx": int, "ly": int, "nt": int, "ns": int, "seed": int, "workers": int,
    "pj": float, "pk": float, "pzx": float, "pmin": float, "pmax": float,
    "pstep": float, "half_cycle": _parse_bool, "force_plus": _parse_bool,
    "out": str, "cut": str, "sizes": str, "observable": str, "distances": str,
    "trials": int, "dim": int, "lz": int, "value": str, "kind": str,
    "numin": float, "numax": float, "pc": float, "nu": float, "csv": str,
}


def _load_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = line.split("=", 1)
            key = key.strip().replace("-", "_")
            conv = _CONFIG_TYPES.get(key, str)
            out[key] = conv(val.strip())
    return out


def _parse_sizes(text: str) -> tuple[tuple[int, int], ...]:
    sizes = []
    for part in text.split(","):
        a, b = part.lower().split("x")
        sizes.append((int(a), int(b)))
    return tuple(sizes)


def _parse_distances(text: str) -> tuple[int, ...]:
    if ":" in text:
        a, b = text.split(":")
        return tuple(range(int(a), int(b) + 1))
    return tuple(int(x) for x in text.split(","))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--lx", type=int, default=12)
    p.add_argument("--ly", type=int, default=7)
    p.add_argument("--nt", type=int, default=10)
    p.add_argument("--ns", type=int, default=100)
    p.add_argument("--pj", type=float, default=0.5)
    p.add_argument("--pk", type=float, default=0.5)
    p.add_argument("--pzx", type=float, default=0.5)
    p.add_argument("--half-cycle", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--force-plus", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", default=None)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="moclab",
                                 description="measurement-only circuit laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="single-point diagnostics")
    _add_common(p)
    p.add_argument("--model", choices=("fs_moc", "zx_randomized"), default="fs_moc")

    p = sub.add_parser("scan", help="parameter scan along a cut or grid")
    _add_common(p)
    p.add_argument("--cut", choices=harness.CUTS, default=None)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--model", choices=("fs_moc", "zx_randomized"), default="fs_moc")
    p.add_argument("--pmin", type=float, default=0.0)
    p.add_argument("--pmax", type=float, default=1.0)
    p.add_argument("--pstep", type=float, default=0.1)
    p.add_argument("--sizes", default=None, help="e.g. 8x5,10x6,12x7")

    p = sub.add_parser("collapse", help="finite-size-scaling fit on a scan CSV")
    _add_common(p)
    p.add_argument("--csv", required=True)
    p.add_argument("--observable", default="s_topo_mean")
    p.add_argument("--pmin", type=float, required=True)
    p.add_argument("--pmax", type=float, required=True)
    p.add_argument("--numin", type=float, default=0.4)
    p.add_argument("--numax", type=float, default=2.0)

    p = sub.add_parser("fit-kappa", help="power-law fit of MI vs distance")
    _add_common(p)
    p.add_argument("--csv", default=None, help="existing d,I,Ierr table to fit")
    p.add_argument("--distances", default="3:15")

    p = sub.add_parser("percolation", help="bond-percolation threshold oracle")
    _add_common(p)
    p.add_argument("--dim", type=int, choices=(2, 3), required=True)
    p.add_argument("--sizes", default=None, help="e.g. 16,32,64")
    p.add_argument("--trials", type=int, default=400)
    p.add_argument("--pmin", type=float, default=None)
    p.add_argument("--pmax", type=float, default=None)
    p.add_argument("--pstep", type=float, default=0.01)

    p = sub.add_parser("rbh-check", help="layered-measurement vs direct-circuit table")
    _add_common(p)
    p.add_argument("--lz", type=int, default=10)
    p.add_argument("--pks", default="0.3,0.75,0.9")

    p = sub.add_parser("plot", help="SVG plots from a scan CSV")
    _add_common(p)
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", choices=("heatmap", "curves", "collapse"), required=True)
    p.add_argument("--value", default="s_topo_mean")
    p.add_argument("--pc", type=float, default=None)
    p.add_argument("--nu", type=float, default=None)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    ap = _build_parser()
    if known.config:
        cfg = _load_config(known.config)
        for action in ap._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
            action.set_defaults(**{k: v for k, v in cfg.items()
                                   if any(a.dest == k for a in action._actions)})
    args = ap.parse_args(argv)
    return _DISPATCH[args.command](args)


def _cmd_simulate(args) -> int:
    lat = build_lieb_lattice(args.lx, args.ly)
    regs = (tee_regions(lat), bmi_regions(lat),
            wilson_line(lat, default_wilson_length(args.lx)).as_pauli(lat.nq))
    policy = "force_plus" if args.force_plus else "random"
    cfg = CircuitConfig(p_j=args.pj, p_k=args.pk, p_zx=args.pzx, n_t=args.nt,
                        half_cycle=args.half_cycle, outcome_policy=policy,
                        master_seed=args.seed, model=args.model)
    runner = run_fs_moc if args.model == "fs_moc" else run_zx_randomized
    vals = []
    for k in range(args.ns):
        rng = RngStream.for_sample(args.seed, (0, 0, k), policy)
        t = runner(lat, cfg, rng)
        vals.append(evaluate(t, lat, *regs))
    stats = analysis.aggregate(vals, args.pj, args.pk, args.lx, args.ly,
                               args.nt, args.half_cycle)
    print(json.dumps(stats.__dict__, indent=2))
    return 0


def _cmd_scan(args) -> int:
    if args.grid:
        cut = "grid"
    elif args.cut:
        cut = args.cut
    else:
        raise SystemExit("scan needs --cut or --grid")
    params = tuple(np.round(np.arange(args.pmin, args.pmax + args.pstep / 2,
                                      args.pstep), 10))
    sizes = _parse_sizes(args.sizes) if args.sizes else \
        (((args.lx, args.ly),) if cut == "grid" else DEFAULT_CUT_SIZES)
    plan = ExperimentPlan(model=args.model, cut=cut, params=params, sizes=sizes,
                          n_t=args.nt, n_s=args.ns, master_seed=args.seed,
                          p_zx=args.pzx,
                          half_cycle_variants=(False, True) if args.half_cycle
                          else (False,),
                          outcome_policy="force_plus" if args.force_plus else "random")
    rows = run_plan(plan, workers=args.workers, progress=True)
    out = args.out or f"scan_{cut}.csv"
    emit_csv(rows, out)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


def _cmd_collapse(args) -> int:
    rows = read_csv(args.csv)
    curves = rows_to_curves(rows, args.observable, half_cycle=args.half_cycle)
    res = analysis.data_collapse(curves, ((args.pmin, args.pmax),
                                          (args.numin, args.numax)))
    payload = res.as_dict()
    print(json.dumps(payload, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
    return 0


def _cmd_fit_kappa(args) -> int:
    if args.csv:
        pts = []
        with open(args.csv) as fh:
            for line in fh:
                if line.strip() and not line.startswith("d,"):
                    d, i_val, i_err = line.strip().split(",")
                    pts.append((float(d), float(i_val), float(i_err)))
    else:
        pts = harness.run_mi_scan(args.lx, args.ly, args.pj, args.pk,
                                  _parse_distances(args.distances), args.ns,
                                  n_t=args.nt, half_cycle=args.half_cycle,
                                  master_seed=args.seed, workers=args.workers)
    fit = analysis.fit_power_law(pts)
    payload = fit.as_dict()
    payload["points"] = [list(p) for p in pts]
    print(json.dumps(payload, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
    return 0


def _cmd_percolation(args) -> int:
    sizes = tuple(int(s) for s in args.sizes.split(",")) if args.sizes else \
        ((16, 32, 64) if args.dim == 2 else (8, 16, 24))
    rng = percolation.threshold_rng(args.seed)
    est = percolation.estimate_threshold(args.dim, sizes, args.trials, rng)
    payload = est.as_dict()
    if args.dim == 3:
        payload["surface"] = percolation.surface_threshold_from_duality(est).as_dict()
    print(json.dumps(payload, indent=2))
    out = args.out or f"percolation_{args.dim}d.json"
    with open(out, "w") as fh:
        json.dump(payload, fh, indent=2)
    lo = args.pmin if args.pmin is not None else max(0.0, est.p_hat - 0.1)
    hi = args.pmax if args.pmax is not None else min(1.0, est.p_hat + 0.1)
    curve_path = os.path.splitext(out)[0] + "_curve.csv"
    with open(curve_path, "w") as fh:
        fh.write("p,spanning_probability\n")
        for p in np.arange(lo, hi + args.pstep / 2, args.pstep):
            r = percolation.spanning_probability((sizes[-1],) * args.dim, float(p),
                                                 args.trials, rng)
            fh.write(f"{float(p)!r},{r!r}\n")
    print(f"wrote {out} and {curve_path}")
    return 0


def _cmd_rbh_check(args) -> int:
    p_ks = tuple(float(x) for x in args.pks.split(","))
    rows = paired_comparison(args.lx, args.ly, args.lz, p_ks, args.ns,
                             master_seed=args.seed, workers=args.workers)
    out = args.out or "rbh_check.csv"
    cols = list(rows[0].keys())
    with open(out, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c])
                              for c in cols) + "\n")
    print(f"wrote {out}")
    for row in rows:
        print(f"p_k={row['p_k']}: entropy z={row['entropy_zscore']:.2f} "
              f"wilson z={row['wilson_zscore']:.2f}")
    return 0


def _cmd_plot(args) -> int:
    if args.kind == "collapse" and (args.pc is None or args.nu is None):
        raise SystemExit("collapse plot needs --pc and --nu")
    out = harness.emit_plot(args.csv, args.kind, out=args.out, value=args.value,
                            half_cycle=args.half_cycle, p_c=args.pc, nu=args.nu)
    print(f"wrote {out}")
    return 0


_DISPATCH = {
    "simulate": _cmd_simulate,
    "scan": _cmd_scan,
    "collapse": _cmd_collapse,
    "fit-kappa": _cmd_fit_kappa,
    "percolation": _cmd_percolation,
    "rbh-check": _cmd_rbh_check,
    "plot": _cmd_plot,
}


if __name__ == "__main__":
    raise SystemExit(main())
