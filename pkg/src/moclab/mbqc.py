"""Layered single-qubit measurements on a 3d face/edge cluster state.

Qubits live on the faces and edges of an lx x ly x lz cubic lattice with a
periodic (torus) base and open z range [0, lz]; face qubits in the top slice
z = lz are removed, so the unmeasured in-plane edges at z = lz carry the
simulated 2d state.  Measuring every edge qubit in X and every face qubit in
X with probability p_k (Z otherwise), slab by slab, drives the boundary state
through exactly one plaquette-vs-edge-X cycle per slab; `boundary_state`
returns that state on the matching torus edge geometry for paired comparison
against the direct edge-only circuit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuits import CircuitConfig, RngStream, run_pure_gauge
from .lattice import Region
from .stabilizer import PauliString, Tableau


class TorusLattice:
    """Edge qubits of a periodic lx x ly square lattice."""

    def __init__(self, lx: int, ly: int):
        if lx < 2 or ly < 2:
            raise ValueError("need lx, ly >= 2")
        self.lx, self.ly = lx, ly
        self.n_sites = lx * ly
        self.nq = 2 * lx * ly
        self._build()

    def hedge(self, x: int, y: int) -> int:
        return (y % self.ly) * self.lx + (x % self.lx)

    def vedge(self, x: int, y: int) -> int:
        return self.n_sites + (y % self.ly) * self.lx + (x % self.lx)

    def face_edges(self, x: int, y: int) -> tuple[int, int, int, int]:
        return (self.hedge(x, y), self.hedge(x, y + 1),
                self.vedge(x, y), self.vedge(x + 1, y))

    def star_edges(self, x: int, y: int) -> tuple[int, int, int, int]:
        return (self.hedge(x, y), self.hedge(x - 1, y),
                self.vedge(x, y), self.vedge(x, y - 1))

    def _build(self) -> None:
        nq = self.nq
        self.plaq_ops = [PauliString.from_supports(nq, z_support=self.face_edges(x, y))
                         for y in range(self.ly) for x in range(self.lx)]
        self.xe_ops = [PauliString.from_supports(nq, x_support=(e,)) for e in range(nq)]
        self.star_ops = [PauliString.from_supports(nq, x_support=self.star_edges(x, y))
                         for y in range(self.ly) for x in range(self.lx)]

    def block_edge_region(self, w: int, h: int, label: str = "custom") -> Region:
        """Edges with both endpoints inside the vertex window [0,w) x [0,h)."""
        if not (2 <= w <= self.lx and 2 <= h <= self.ly):
            raise ValueError("block must fit inside the torus")
        qs = set()
        for y in range(h):
            for x in range(w - 1):
                qs.add(self.hedge(x, y))
        for y in range(h - 1):
            for x in range(w):
                qs.add(self.vedge(x, y))
        return Region(frozenset(qs), label)

    def block_loop(self, w: int, h: int) -> PauliString:
        """Z loop around the perimeter of the w x h plaquette block at the origin."""
        if not (1 <= w < self.lx and 1 <= h < self.ly):
            raise ValueError("loop must be contractible on the torus")
        edges = set()
        for x in range(w):
            edges.add(self.hedge(x, 0))
            edges.add(self.hedge(x, h))
        for y in range(h):
            edges.add(self.vedge(0, y))
            edges.add(self.vedge(w, y))
        return PauliString.from_supports(self.nq, z_support=edges)


@dataclass(frozen=True)
class RbhLattice:
    """Cell bookkeeping for the 3d cluster state over a torus base."""

    lx: int
    ly: int
    lz: int

    def __post_init__(self):
        if self.lz < 1:
            raise ValueError("need lz >= 1")
        if self.lx < 2 or self.ly < 2:
            raise ValueError("need lx, ly >= 2")

    @property
    def area(self) -> int:
        return self.lx * self.ly

    @property
    def nq(self) -> int:
        return 6 * self.area * self.lz + 2 * self.area

    # cell id blocks: in-plane edges, vertical edges, in-plane faces, vertical faces
    def ip_edge(self, e2d: int, z: int) -> int:
        return z * 2 * self.area + e2d

    def v_edge(self, v2d: int, z: int) -> int:
        return (self.lz + 1) * 2 * self.area + z * self.area + v2d

    def ip_face(self, f2d: int, z: int) -> int:
        return (self.lz + 1) * 2 * self.area + self.lz * self.area + z * self.area + f2d

    def v_face(self, e2d: int, z: int) -> int:
        return (self.lz + 1) * 2 * self.area + 2 * self.lz * self.area + z * 2 * self.area + e2d

    def base(self) -> TorusLattice:
        return TorusLattice(self.lx, self.ly)

    def boundary_edges(self) -> list[int]:
        """In-plane edge qubits of the unmeasured top slice, in 2d edge order."""
        return [self.ip_edge(e, self.lz) for e in range(2 * self.area)]

    def face_neighbours(self) -> list[tuple[int, tuple[int, ...]]]:
        """(face qubit, its four adjacent edge qubits) for every face qubit."""
        base = self.base()
        out = []
        for z in range(self.lz):
            for y in range(base.ly):
                for x in range(base.lx):
                    f2d = y * base.lx + x
                    edges = tuple(self.ip_edge(e, z) for e in base.face_edges(x, y))
                    out.append((self.ip_face(f2d, z), edges))
        for z in range(self.lz):
            for y in range(base.ly):
                for x in range(base.lx):
                    eh = base.hedge(x, y)
                    out.append((self.v_face(eh, z),
                                (self.ip_edge(eh, z), self.ip_edge(eh, z + 1),
                                 self.v_edge(y * base.lx + x, z),
                                 self.v_edge(y * base.lx + (x + 1) % base.lx, z))))
            for y in range(base.ly):
                for x in range(base.lx):
                    ev = base.vedge(x, y)
                    out.append((self.v_face(ev, z),
                                (self.ip_edge(ev, z), self.ip_edge(ev, z + 1),
                                 self.v_edge(y * base.lx + x, z),
                                 self.v_edge(((y + 1) % base.ly) * base.lx + x, z))))
        return out


def build_rbh_tableau(rbh: RbhLattice) -> Tableau:
    """Graph-state stabilizers X_q prod_{neighbours} Z for the CZ pattern."""
    nq = rbh.nq
    adj: dict[int, list[int]] = {q: [] for q in range(nq)}
    for f, edges in rbh.face_neighbours():
        for e in edges:
            adj[f].append(e)
            adj[e].append(f)
    t = Tableau(nq)
    for q in range(nq):
        z = 0
        for nbr in adj[q]:
            z |= 1 << nbr
        t._append_raw(1 << q, z, 0)
    return t


def measure_rbh_layers(t: Tableau, rbh: RbhLattice, p_k: float,
                       rng: RngStream) -> Tableau:
    """Measure slabs 0..lz-1 in order and return the boundary edge state.

    Within a slab every measured operator is single-qubit, so the internal
    order is immaterial; faces take X with probability p_k and Z otherwise,
    edges always take X.
    """
    if not 0.0 <= p_k <= 1.0:
        raise ValueError("p_k outside [0, 1]")
    nq = rbh.nq
    A = rbh.area
    basis, outcome = rng.basis, rng.outcome
    for z in range(rbh.lz):
        coins = basis.random(3 * A)
        for i in range(A):
            q = rbh.ip_face(i, z)
            if coins[i] < p_k:
                t.project(PauliString(nq, 1 << q, 0, 0), outcome)
            else:
                t.project(PauliString(nq, 0, 1 << q, 0), outcome)
        for i in range(2 * A):
            q = rbh.v_face(i, z)
            if coins[A + i] < p_k:
                t.project(PauliString(nq, 1 << q, 0, 0), outcome)
            else:
                t.project(PauliString(nq, 0, 1 << q, 0), outcome)
        for i in range(2 * A):
            t.project(PauliString(nq, 1 << rbh.ip_edge(i, z), 0, 0), outcome)
        for i in range(A):
            t.project(PauliString(nq, 1 << rbh.v_edge(i, z), 0, 0), outcome)
    return t.restricted_to(rbh.boundary_edges())


def boundary_state(rbh: RbhLattice, p_k: float, master_seed: int,
                   sample_index) -> Tableau:
    """One sample of the layered-measurement protocol, forced +1 outcomes."""
    rng = RngStream.for_sample(master_seed, sample_index, "force_plus")
    t = build_rbh_tableau(rbh)
    return measure_rbh_layers(t, rbh, p_k, rng)


def paired_comparison(lx: int, ly: int, lz: int, p_ks: Sequence[float],
                      n_s: int, master_seed: int = 0,
                      block: tuple[int, int] | None = None,
                      loop: tuple[int, int] | None = None,
                      workers: int | None = None) -> list[dict]:
    """Mean S_A and Wilson-loop indicator: layered protocol vs direct circuit.

    Returns one record per p_k with means, standard errors and the combined
    z-score style deviation used by the equivalence check.
    """
    from .harness import parallel_map  # local import to avoid a cycle

    block = block or (min(3, lx), min(3, ly))
    loop = loop or (min(3, lx - 1), min(3, ly - 1))
    rows = []
    for ip, p_k in enumerate(p_ks):
        tasks = [("rbh", lx, ly, lz, p_k, master_seed, (1000 + ip, k), block, loop)
                 for k in range(n_s)]
        tasks += [("gauge", lx, ly, lz, p_k, master_seed, (2000 + ip, k), block, loop)
                  for k in range(n_s)]
        vals = parallel_map(_comparison_sample, tasks, workers)
        rbh_vals = np.array(vals[:n_s], dtype=float)
        mg_vals = np.array(vals[n_s:], dtype=float)
        rec = {"p_k": p_k, "n_s": n_s}
        for j, name in enumerate(("entropy", "wilson")):
            a, b = rbh_vals[:, j], mg_vals[:, j]
            rec[f"rbh_{name}_mean"] = a.mean()
            rec[f"rbh_{name}_sem"] = a.std(ddof=1) / np.sqrt(n_s)
            rec[f"gauge_{name}_mean"] = b.mean()
            rec[f"gauge_{name}_sem"] = b.std(ddof=1) / np.sqrt(n_s)
            sem = np.hypot(rec[f"rbh_{name}_sem"], rec[f"gauge_{name}_sem"])
            rec[f"{name}_zscore"] = abs(a.mean() - b.mean()) / sem if sem > 0 else 0.0
        rows.append(rec)
    return rows


def _comparison_sample(args) -> tuple[int, int]:
    from .stabilizer import entanglement_entropy

    kind, lx, ly, lz, p_k, master_seed, sample_index, block, loop = args
    torus = TorusLattice(lx, ly)
    region = torus.block_edge_region(*block)
    loop_op = torus.block_loop(*loop)
    if kind == "rbh":
        rbh = RbhLattice(lx, ly, lz)
        t = boundary_state(rbh, p_k, master_seed, sample_index)
    else:
        cfg = CircuitConfig(p_j=0.0, p_k=p_k, n_t=lz, model="pure_gauge",
                            master_seed=master_seed)
        rng = RngStream.for_sample(master_seed, sample_index, "force_plus")
        t = run_pure_gauge(torus, cfg, rng)
    s = entanglement_entropy(t, region)
    w = 1 if t.anticommuting_mask(loop_op) == 0 else 0
    return s, w
