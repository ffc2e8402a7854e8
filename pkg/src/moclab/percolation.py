"""Classical bond-percolation oracles on square and cubic lattices.

Spanning is tested along the first axis of a fully open box with union-find
over the occupied bonds.  The threshold estimate is the crossing point of the
spanning curves of the two largest sizes, found by bisecting their
difference: at the threshold the spanning probability is size-independent
(up to corrections), so the crossing removes the bias a fixed target value
would inherit from the boundary geometry.  Single-size bisections to 1/2 are
still run per size and reported as the finite-size drift table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuits import derive_generator


class BondLattice:
    """Bond list of an open d-dimensional box, plus the spanning test."""

    def __init__(self, dims: Sequence[int], transverse: str = "open"):
        dims = tuple(int(d) for d in dims)
        if len(dims) not in (2, 3):
            raise ValueError("only 2d and 3d lattices")
        if any(l < 2 for l in dims):
            raise ValueError("each dimension needs at least 2 sites")
        if transverse not in ("open", "periodic"):
            raise ValueError("transverse must be open or periodic")
        self.dims = dims
        self.transverse = transverse
        sites = np.arange(int(np.prod(dims))).reshape(dims)
        pairs_a, pairs_b = [], []
        for axis in range(len(dims)):
            if axis == 0 or transverse == "open":
                sl_a = [slice(None)] * len(dims)
                sl_b = [slice(None)] * len(dims)
                sl_a[axis] = slice(0, -1)
                sl_b[axis] = slice(1, None)
                pairs_a.append(sites[tuple(sl_a)].ravel())
                pairs_b.append(sites[tuple(sl_b)].ravel())
            else:
                pairs_a.append(sites.ravel())
                pairs_b.append(np.roll(sites, -1, axis=axis).ravel())
        self.bond_a = np.concatenate(pairs_a)
        self.bond_b = np.concatenate(pairs_b)
        self.first_layer = [int(s) for s in sites[0].ravel()]
        self.last_layer = [int(s) for s in sites[-1].ravel()]

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_bonds(self) -> int:
        return len(self.bond_a)

    def spans(self, occupied: np.ndarray) -> bool:
        """Union the occupied bonds; True when the open faces connect."""
        parent = list(range(self.n_sites))
        size = [1] * self.n_sites
        for a, b in zip(self.bond_a[occupied].tolist(),
                        self.bond_b[occupied].tolist()):
            while parent[a] != a:        # find with path halving
                parent[a] = parent[parent[a]]
                a = parent[a]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]

        def root(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        left = {root(s) for s in self.first_layer}
        return any(root(s) in left for s in self.last_layer)

    def cluster_count(self, occupied: np.ndarray) -> int:
        """Number of connected components over all sites (BFS-oracle hook)."""
        parent = list(range(self.n_sites))
        size = [1] * self.n_sites
        merges = 0
        for a, b in zip(self.bond_a[occupied].tolist(),
                        self.bond_b[occupied].tolist()):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
            merges += 1
        return self.n_sites - merges


@dataclass
class ThresholdEstimate:
    p_hat: float
    stderr: float
    trials: int
    sizes: tuple[int, ...]
    per_size: dict[int, float] = field(default_factory=dict)
    converged: bool = True

    def as_dict(self) -> dict:
        return {"p_hat": self.p_hat, "stderr": self.stderr, "trials": self.trials,
                "sizes": list(self.sizes),
                "per_size": {str(k): v for k, v in self.per_size.items()},
                "converged": self.converged}


def _span_chunk(args) -> int:
    dims, transverse, p, trials, seed = args
    lat = BondLattice(dims, transverse)
    rng = derive_generator(seed, (0,), 0)
    hits = 0
    for _ in range(trials):
        if lat.spans(rng.random(lat.n_bonds) < p):
            hits += 1
    return hits


def spanning_probability(dims: Sequence[int], p: float, trials: int,
                         rng: np.random.Generator, transverse: str = "open",
                         workers: int = 1) -> float:
    """Fraction of independent bond configurations spanning the first axis."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p outside [0, 1]")
    if trials < 1:
        raise ValueError("need at least one trial")
    dims = tuple(dims)
    if workers > 1 and trials >= 2 * workers:
        from .harness import parallel_map
        n_chunks = 4 * workers
        per = [trials // n_chunks] * n_chunks
        for i in range(trials % n_chunks):
            per[i] += 1
        seeds = [int(rng.integers(1 << 62)) for _ in per]
        hits = sum(parallel_map(_span_chunk,
                                [(dims, transverse, p, t, s)
                                 for t, s in zip(per, seeds)], workers))
        return hits / trials
    lat = BondLattice(dims, transverse)
    hits = 0
    for _ in range(trials):
        if lat.spans(rng.random(lat.n_bonds) < p):
            hits += 1
    return hits / trials


def _bisect(fn, lo: float, hi: float, iters: int) -> float:
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if fn(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_threshold(dim: int, sizes: Sequence[int], trials: int,
                       rng: np.random.Generator, iters: int = 11,
                       drift_trials: Optional[int] = None,
                       workers: int = 1) -> ThresholdEstimate:
    """Threshold from the spanning-curve crossing of the two largest sizes.

    The drift table holds, per size, the parameter where that size alone
    spans with probability 1/2.  The quoted stderr combines the Monte-Carlo
    noise of one difference evaluation with the local slope of the
    difference, measured by a secant.
    """
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    if len(sizes) < 2:
        raise ValueError("need at least two sizes for a crossing")
    sizes = tuple(sorted(sizes))
    lo, hi = (0.2, 0.8) if dim == 2 else (0.05, 0.5)
    small, big = sizes[-2], sizes[-1]

    def diff(p: float) -> float:
        r_big = spanning_probability((big,) * dim, p, trials, rng, workers=workers)
        r_small = spanning_probability((small,) * dim, p, trials, rng, workers=workers)
        return r_big - r_small

    # localize first on the largest size alone: its spanning curve is strictly
    # monotone through 1/2, whereas the size difference is flat (zero) both
    # deep below and deep above the transition and would strand the bisection
    p0 = _bisect(lambda p: spanning_probability((big,) * dim, p, trials, rng,
                                                workers=workers) - 0.5,
                 lo, hi, iters)
    p_hat = _bisect(diff, max(lo, p0 - 0.06), min(hi, p0 + 0.06), iters)

    drift_trials = drift_trials if drift_trials is not None else max(trials // 2, 50)
    per_size: dict[int, float] = {}
    for length in sizes:
        per_size[length] = _bisect(
            lambda p, l=length: spanning_probability((l,) * dim, p, drift_trials,
                                                     rng, workers=workers) - 0.5,
            lo, hi, iters)

    delta = 0.02
    slope = (diff(min(1.0, p_hat + delta)) - diff(max(0.0, p_hat - delta))) / (2 * delta)
    noise = np.sqrt(2 * 0.25 / trials)
    converged = slope > 0
    stderr = float(noise / slope) if converged else float("inf")
    return ThresholdEstimate(p_hat=p_hat, stderr=stderr, trials=trials,
                             sizes=sizes, per_size=per_size, converged=converged)


def surface_threshold_from_duality(bond: ThresholdEstimate) -> ThresholdEstimate:
    """Membrane (surface) threshold 1 - p_bond with unchanged stderr."""
    return ThresholdEstimate(
        p_hat=1.0 - bond.p_hat, stderr=bond.stderr, trials=bond.trials,
        sizes=bond.sizes, per_size={k: 1.0 - v for k, v in bond.per_size.items()},
        converged=bond.converged)


def threshold_rng(master_seed: int) -> np.random.Generator:
    return derive_generator(master_seed, (0,), 7)
