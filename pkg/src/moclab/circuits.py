"""Measurement schedulers for the gauge-Higgs circuit and its reference models.

One full cycle is a Z round (plaquette operators with probability p_k, then
edge-vertex couplings with probability p_j) followed by an X round
(single-edge X with probability 1-p_k, then single-vertex X with probability
1-p_j).  The half-cycle variant tacks one extra Z round onto the end before
diagnostics.

Basis coins and measurement outcomes come from two independent derived
streams, so a run can be replayed with the same measurement pattern but a
different outcome history.  Outcome randomness is consumed lazily (only when
an outcome is actually free), keeping the basis stream alignment exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .stabilizer import PauliString, Tableau

MODELS = ("fs_moc", "zx_randomized", "pure_gauge", "ptfi_1d", "ptfi_2d")
TAG_BASIS, TAG_OUTCOME = 0, 1

BoundaryHook = Callable[[Tableau, int, str], None]


@dataclass(frozen=True)
class CircuitConfig:
    """One trajectory ensemble: probabilities, length, termination, seeding."""

    p_j: float
    p_k: float
    p_zx: float = 0.5
    n_t: int = 10
    half_cycle: bool = False
    outcome_policy: str = "force_plus"
    master_seed: int = 0
    model: str = "fs_moc"

    def __post_init__(self):
        for name in ("p_j", "p_k", "p_zx"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.n_t < 1:
            raise ValueError("n_t must be >= 1")
        if self.outcome_policy not in ("force_plus", "random"):
            raise ValueError(f"unknown outcome policy {self.outcome_policy!r}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")


def derive_generator(master_seed: int, sample_index, tag: int) -> np.random.Generator:
    """Independent, replayable stream keyed by (master_seed, sample_index, tag)."""
    idx = sample_index if isinstance(sample_index, (tuple, list)) else (sample_index,)
    entropy = (int(master_seed) & 0xFFFFFFFFFFFFFFFF, *(int(i) for i in idx), tag)
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass
class RngStream:
    """Paired basis/outcome streams for one Monte-Carlo sample."""

    master_seed: int
    sample_index: tuple
    basis: np.random.Generator = field(repr=False)
    outcome: Optional[np.random.Generator] = field(repr=False, default=None)

    @classmethod
    def for_sample(cls, master_seed: int, sample_index,
                   outcome_policy: str = "force_plus",
                   outcome_salt: int = 0) -> "RngStream":
        idx = sample_index if isinstance(sample_index, tuple) else (sample_index,)
        basis = derive_generator(master_seed, idx, TAG_BASIS)
        outcome = None
        if outcome_policy == "random":
            outcome = derive_generator(master_seed, idx + (outcome_salt,), TAG_OUTCOME)
        return cls(master_seed, idx, basis, outcome)


def _measure_batch(t: Tableau, ops: Sequence[PauliString], prob: float,
                   basis: np.random.Generator, outcome) -> None:
    # one coin per candidate operator, always drawn, to keep streams aligned
    coins = basis.random(len(ops))
    for i in np.nonzero(coins < prob)[0]:
        t.project(ops[i], outcome)


def _z_round(t, geom, p_j, p_k, basis, outcome) -> None:
    _measure_batch(t, geom.plaq_ops, p_k, basis, outcome)
    we = getattr(geom, "we_ops", None)
    if we:
        _measure_batch(t, we, p_j, basis, outcome)


def _x_round(t, geom, p_j, p_k, basis, outcome) -> None:
    _measure_batch(t, geom.xe_ops, 1.0 - p_k, basis, outcome)
    xv = getattr(geom, "xv_ops", None)
    if xv:
        _measure_batch(t, xv, 1.0 - p_j, basis, outcome)


def run_fs_moc(lat, cfg: CircuitConfig, rng: RngStream,
               on_boundary: Optional[BoundaryHook] = None) -> Tableau:
    """Alternating-round circuit on the full vertex+edge lattice."""
    if cfg.model != "fs_moc":
        raise ValueError(f"config model {cfg.model!r} is not fs_moc")
    t = Tableau.plus_state(lat.nq)
    basis, outcome = rng.basis, rng.outcome
    for cycle in range(cfg.n_t):
        _z_round(t, lat, cfg.p_j, cfg.p_k, basis, outcome)
        if on_boundary:
            on_boundary(t, cycle, "z")
        _x_round(t, lat, cfg.p_j, cfg.p_k, basis, outcome)
        if on_boundary:
            on_boundary(t, cycle, "x")
    if cfg.half_cycle:
        _z_round(t, lat, cfg.p_j, cfg.p_k, basis, outcome)
        if on_boundary:
            on_boundary(t, cfg.n_t, "z")
    return t


def run_zx_randomized(lat, cfg: CircuitConfig, rng: RngStream,
                      on_boundary: Optional[BoundaryHook] = None) -> Tableau:
    """Per round a single coin picks the whole Z round or the whole X round.

    n_t counts rounds here.  A trailing half cycle forces one extra Z round.
    """
    if cfg.model != "zx_randomized":
        raise ValueError(f"config model {cfg.model!r} is not zx_randomized")
    t = Tableau.plus_state(lat.nq)
    basis, outcome = rng.basis, rng.outcome
    for r in range(cfg.n_t):
        if basis.random() < cfg.p_zx:
            _z_round(t, lat, cfg.p_j, cfg.p_k, basis, outcome)
            if on_boundary:
                on_boundary(t, r, "z")
        else:
            _x_round(t, lat, cfg.p_j, cfg.p_k, basis, outcome)
            if on_boundary:
                on_boundary(t, r, "x")
    if cfg.half_cycle:
        _z_round(t, lat, cfg.p_j, cfg.p_k, basis, outcome)
        if on_boundary:
            on_boundary(t, cfg.n_t, "z")
    return t


def run_pure_gauge(geom, cfg: CircuitConfig, rng: RngStream,
                   on_boundary: Optional[BoundaryHook] = None) -> Tableau:
    """Edge-only dynamics: plaquettes with p_k against single-edge X.

    Works on any geometry exposing nq, plaq_ops and xe_ops; on the open Lieb
    lattice the vertex qubits simply stay in their initial product state.
    """
    if cfg.model != "pure_gauge":
        raise ValueError(f"config model {cfg.model!r} is not pure_gauge")
    t = Tableau.plus_state(geom.nq)
    basis, outcome = rng.basis, rng.outcome
    for cycle in range(cfg.n_t):
        _measure_batch(t, geom.plaq_ops, cfg.p_k, basis, outcome)
        if on_boundary:
            on_boundary(t, cycle, "z")
        _measure_batch(t, geom.xe_ops, 1.0 - cfg.p_k, basis, outcome)
        if on_boundary:
            on_boundary(t, cycle, "x")
    if cfg.half_cycle:
        _measure_batch(t, geom.plaq_ops, cfg.p_k, basis, outcome)
        if on_boundary:
            on_boundary(t, cfg.n_t, "z")
    return t


def run_ptfi(geom, cfg: CircuitConfig, rng: RngStream,
             on_boundary: Optional[BoundaryHook] = None) -> Tableau:
    """Bond ZZ measurements with probability p_j against single-site X."""
    if cfg.model not in ("ptfi_1d", "ptfi_2d"):
        raise ValueError(f"config model {cfg.model!r} is not a ptfi variant")
    t = Tableau.plus_state(geom.nq)
    basis, outcome = rng.basis, rng.outcome
    for cycle in range(cfg.n_t):
        _measure_batch(t, geom.bond_ops, cfg.p_j, basis, outcome)
        if on_boundary:
            on_boundary(t, cycle, "z")
        _measure_batch(t, geom.site_ops, 1.0 - cfg.p_j, basis, outcome)
        if on_boundary:
            on_boundary(t, cycle, "x")
    if cfg.half_cycle:
        _measure_batch(t, geom.bond_ops, cfg.p_j, basis, outcome)
        if on_boundary:
            on_boundary(t, cfg.n_t, "z")
    return t


_RUNNERS = {
    "fs_moc": run_fs_moc,
    "zx_randomized": run_zx_randomized,
    "pure_gauge": run_pure_gauge,
    "ptfi_1d": run_ptfi,
    "ptfi_2d": run_ptfi,
}


def run_trajectory(geom, cfg: CircuitConfig, sample_index,
                   on_boundary: Optional[BoundaryHook] = None) -> Tableau:
    """Dispatch one sample of cfg.model with its derived streams."""
    rng = RngStream.for_sample(cfg.master_seed, sample_index, cfg.outcome_policy)
    return _RUNNERS[cfg.model](geom, cfg, rng, on_boundary)


class Chain:
    """Periodic 1d chain of sites with nearest-neighbour ZZ bonds."""

    def __init__(self, length: int, periodic: bool = True):
        if length < 3:
            raise ValueError("need at least 3 sites")
        self.length = length
        self.nq = length
        n_bonds = length if periodic else length - 1
        self.bonds = [(i, (i + 1) % length) for i in range(n_bonds)]
        self.bond_ops = [PauliString.from_supports(length, z_support=b) for b in self.bonds]
        self.site_ops = [PauliString.from_supports(length, x_support=(i,))
                         for i in range(length)]

    def antipodal_sites(self) -> tuple[int, int]:
        return 0, self.length // 2


class Grid:
    """Open 2d grid of sites with nearest-neighbour ZZ bonds."""

    def __init__(self, lx: int, ly: int):
        if lx < 2 or ly < 2:
            raise ValueError("need lx, ly >= 2")
        self.lx, self.ly = lx, ly
        self.nq = lx * ly
        self.bonds = []
        for y in range(ly):
            for x in range(lx - 1):
                self.bonds.append((y * lx + x, y * lx + x + 1))
        for y in range(ly - 1):
            for x in range(lx):
                self.bonds.append((y * lx + x, (y + 1) * lx + x))
        self.bond_ops = [PauliString.from_supports(self.nq, z_support=b) for b in self.bonds]
        self.site_ops = [PauliString.from_supports(self.nq, x_support=(i,))
                         for i in range(self.nq)]
