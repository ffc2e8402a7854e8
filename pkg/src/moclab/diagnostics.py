"""Order diagnostics on a trajectory state.

All entropies are in bits.  The tripartite topological combination and the
boundary mutual information reduce to GF(2) ranks of the generator matrix
restricted to region columns; processing the columns region-by-region in one
elimination yields every cumulative rank the combinations need, so the seven
entropy terms cost three eliminations and the mutual information two.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gf2 import cumulative_ranks, pack_columns
from .lattice import Lattice, OperatorSupport, Region, bmi_regions_at
from .stabilizer import GroupSolver, Tableau


@dataclass(frozen=True)
class DiagnosticValues:
    """Per-trajectory values; Monte-Carlo averaging happens downstream."""

    s_topo: int
    bmi: int
    wilson_abs: int
    mi_by_distance: Optional[tuple[tuple[int, int], ...]] = None


def _region_masks(*regions) -> list[int]:
    masks = []
    for r in regions:
        m = getattr(r, "mask", None)
        if m is None:
            m = 0
            for q in r:
                m |= 1 << q
        masks.append(m)
    return masks


def _cumulative_region_ranks(t: Tableau, region_qubits: Sequence[Sequence[int]]) -> list[int]:
    """Ranks of the restricted generator matrix over growing unions of regions."""
    packed = t.packed()
    n_words = packed.shape[1] // 2
    cols = []
    boundaries = []
    for qubits in region_qubits:
        for q in qubits:
            w, b = q >> 6, np.uint64(q & 63)
            cols.append((packed[:, w] >> b) & np.uint64(1))
            cols.append((packed[:, n_words + (q >> 6)] >> b) & np.uint64(1))
        boundaries.append(len(cols))
    bits = np.column_stack(cols).astype(np.uint8)
    words = pack_columns(bits)
    return cumulative_ranks(words, len(cols), boundaries)


def _sorted_qubits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def tee(t: Tableau, a: Region, b: Region, c: Region) -> int:
    """Seven-term tripartite entropy combination isolating the topological bit."""
    ma, mb, mc = _region_masks(a, b, c)
    if (ma & mb) or (mb & mc) or (ma & mc):
        raise ValueError("regions must be pairwise disjoint")
    if t.n_gen < t.n:
        raise ValueError("entropy combination needs a pure state")
    qa, qb, qc = _sorted_qubits(ma), _sorted_qubits(mb), _sorted_qubits(mc)
    i_a, i_ab, i_abc = _cumulative_region_ranks(t, [qa, qb, qc])
    i_b, i_bc = _cumulative_region_ranks(t, [qb, qc])
    i_c, i_ca = _cumulative_region_ranks(t, [qc, qa])
    # region sizes cancel in the combination, leaving the rank terms
    return i_a + i_b + i_c - i_ab - i_bc - i_ca + i_abc


def bmi(t: Tableau, a: Region, b: Region) -> int:
    """Mutual information I(A:B) in bits between disjoint regions."""
    ma, mb = _region_masks(a, b)
    if ma & mb:
        raise ValueError("regions must be disjoint")
    if t.n_gen < t.n:
        raise ValueError("mutual information needs a pure state")
    qa, qb = _sorted_qubits(ma), _sorted_qubits(mb)
    i_a, i_ab = _cumulative_region_ranks(t, [qa, qb])
    (i_b,) = _cumulative_region_ranks(t, [qb])
    value = i_a + i_b - i_ab
    assert value >= 0
    return value


def wilson_abs(t: Tableau, gamma) -> int:
    """|<W>| for a Z-type string: 1 iff ±W is in the stabilizer group.

    For a full tableau the group is maximal, so membership (up to sign) is
    equivalent to commuting with every generator; otherwise fall back to the
    solver.
    """
    op = gamma.as_pauli(t.n) if isinstance(gamma, OperatorSupport) else gamma
    if op.x:
        raise ValueError("Wilson diagnostic expects a Z-type operator")
    if t.anticommuting_mask(op) != 0:
        return 0
    if t.n_gen == t.n:
        return 1
    return 1 if GroupSolver(t).contains(op) is not None else 0


def mi_vs_distance(t: Tableau, lat: Lattice, distances: Sequence[int]) -> list[tuple[int, int]]:
    """Boundary mutual information against horizontal pair separation."""
    out = []
    for d in distances:
        a, b = bmi_regions_at(lat, d)
        out.append((d, bmi(t, a, b)))
    return out


def evaluate(t: Tableau, lat: Lattice, tee_regs, bmi_regs, wilson_op,
             distances: Optional[Sequence[int]] = None) -> DiagnosticValues:
    """All requested diagnostics on one trajectory state."""
    mi = tuple(mi_vs_distance(t, lat, distances)) if distances else None
    return DiagnosticValues(
        s_topo=tee(t, *tee_regs),
        bmi=bmi(t, *bmi_regs),
        wilson_abs=wilson_abs(t, wilson_op),
        mi_by_distance=mi,
    )
