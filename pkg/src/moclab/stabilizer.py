"""Sign-tracked Pauli algebra and stabilizer tableau with projective measurement.

Pauli operators are stored as a pair of bit-vectors (Python integers) plus a
phase exponent, ``op = i**phase * X**x * Z**z``.  The tableau keeps one such
row per stabilizer generator and, for speed, a transposed view: for every
qubit a bitmask over generator indices that carry an X (or Z) there.  A
measurement then needs only O(|support|) integer XORs to find the
anticommuting generators.

Entanglement entropy is the GF(2) rank of the generator matrix restricted to
the region's columns minus the region size; `gf2` holds the packed
elimination used for that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .gf2 import gf2_rank

_PAULI_CHARS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}


def _mul_phase(phase_a: int, z_a: int, phase_b: int, x_b: int) -> int:
    # i^pa X^xa Z^za . i^pb X^xb Z^zb = i^(pa+pb) (-1)^(za.xb) X^(xa^xb) Z^(za^zb)
    return (phase_a + phase_b + 2 * (z_a & x_b).bit_count()) & 3


@dataclass(frozen=True)
class PauliString:
    """An n-qubit Pauli operator ``i**phase * X**x * Z**z``."""

    n: int
    x: int
    z: int
    phase: int = 0

    @classmethod
    def from_supports(cls, n: int, x_support: Iterable[int] = (),
                      z_support: Iterable[int] = (), sign: int = +1) -> "PauliString":
        """Build a Hermitian Pauli from X/Z qubit sets and an overall sign."""
        x = 0
        for q in x_support:
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            x |= 1 << q
        z = 0
        for q in z_support:
            if not 0 <= q < n:
                raise ValueError(f"qubit {q} out of range for n={n}")
            z |= 1 << q
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        phase = ((x & z).bit_count() + (0 if sign == 1 else 2)) & 3
        return cls(n, x, z, phase)

    @classmethod
    def from_label(cls, label: str, sign: int = +1) -> "PauliString":
        """Parse e.g. ``"XIZY"``; qubit 0 is the leftmost character."""
        xs, zs = [], []
        for q, c in enumerate(label):
            if c in "XY":
                xs.append(q)
            if c in "ZY":
                zs.append(q)
            if c not in "IXYZ":
                raise ValueError(f"bad Pauli character {c!r}")
        return cls.from_supports(len(label), xs, zs, sign)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @property
    def y_count(self) -> int:
        return (self.x & self.z).bit_count()

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - self.y_count) % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for a Hermitian operator."""
        if not self.is_hermitian:
            raise ValueError("sign undefined for non-Hermitian phase")
        return +1 if (self.phase - self.y_count) % 4 == 0 else -1

    def commutes_with(self, other: "PauliString") -> bool:
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        return PauliString(self.n, self.x ^ other.x, self.z ^ other.z,
                           _mul_phase(self.phase, self.z, other.phase, other.x))

    def __repr__(self) -> str:
        word = "".join(_PAULI_CHARS[((self.x >> q) & 1, (self.z >> q) & 1)]
                       for q in range(self.n))
        head = {0: "+", 1: "+i", 2: "-", 3: "-i"}[(self.phase - self.y_count) % 4]
        return head + word


class Tableau:
    """Stabilizer generators of the current trajectory state.

    Holds up to ``n`` generator rows.  ``col_x[q]`` / ``col_z[q]`` are row
    bitmasks recording which generators touch qubit q with an X / Z.
    """

    __slots__ = ("n", "xs", "zs", "phases", "col_x", "col_z")

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one qubit")
        self.n = n
        self.xs: list[int] = []
        self.zs: list[int] = []
        self.phases: list[int] = []
        self.col_x: list[int] = [0] * n
        self.col_z: list[int] = [0] * n

    # -- construction ------------------------------------------------------

    @classmethod
    def plus_state(cls, n: int) -> "Tableau":
        """All qubits in |+>: generators X_q."""
        t = cls(n)
        for q in range(n):
            t._append_raw(1 << q, 0, 0)
        return t

    @classmethod
    def zero_state(cls, n: int) -> "Tableau":
        t = cls(n)
        for q in range(n):
            t._append_raw(0, 1 << q, 0)
        return t

    @classmethod
    def from_generators(cls, n: int, generators: Sequence[PauliString],
                        validate: bool = True) -> "Tableau":
        t = cls(n)
        for g in generators:
            if g.n != n:
                raise ValueError("generator size mismatch")
            if not g.is_hermitian:
                raise ValueError("generators must be Hermitian")
            t._append_raw(g.x, g.z, g.phase)
        if validate:
            for i, gi in enumerate(generators):
                for gj in generators[i + 1:]:
                    if not gi.commutes_with(gj):
                        raise ValueError("generators do not commute")
            rows = [(t.xs[i] << n) | t.zs[i] for i in range(t.n_gen)]
            if gf2_rank(rows) != t.n_gen:
                raise ValueError("generators are not independent")
        return t

    @property
    def n_gen(self) -> int:
        return len(self.xs)

    def copy(self) -> "Tableau":
        t = Tableau.__new__(Tableau)
        t.n = self.n
        t.xs = self.xs.copy()
        t.zs = self.zs.copy()
        t.phases = self.phases.copy()
        t.col_x = self.col_x.copy()
        t.col_z = self.col_z.copy()
        return t

    def generators(self) -> list[PauliString]:
        return [PauliString(self.n, self.xs[i], self.zs[i], self.phases[i])
                for i in range(self.n_gen)]

    # -- internal row operations --------------------------------------------

    def _append_raw(self, x: int, z: int, phase: int) -> None:
        if self.n_gen >= self.n:
            raise ValueError("tableau already has n generators")
        bit = 1 << self.n_gen
        self.xs.append(x)
        self.zs.append(z)
        self.phases.append(phase)
        while x:
            low = x & -x
            self.col_x[low.bit_length() - 1] ^= bit
            x ^= low
        while z:
            low = z & -z
            self.col_z[low.bit_length() - 1] ^= bit
            z ^= low

    def _toggle_columns(self, x_diff: int, z_diff: int, row_mask: int) -> None:
        col_x = self.col_x
        while x_diff:
            low = x_diff & -x_diff
            col_x[low.bit_length() - 1] ^= row_mask
            x_diff ^= low
        col_z = self.col_z
        while z_diff:
            low = z_diff & -z_diff
            col_z[low.bit_length() - 1] ^= row_mask
            z_diff ^= low

    def _swap_rows(self, i: int, j: int) -> None:
        xs, zs, ph = self.xs, self.zs, self.phases
        self._toggle_columns(xs[i] ^ xs[j], zs[i] ^ zs[j], (1 << i) | (1 << j))
        xs[i], xs[j] = xs[j], xs[i]
        zs[i], zs[j] = zs[j], zs[i]
        ph[i], ph[j] = ph[j], ph[i]

    def _mult_row_into(self, src: int, row_mask: int) -> None:
        """g_i <- g_src * g_i for every row i in row_mask."""
        xs, zs, ph = self.xs, self.zs, self.phases
        x0, z0, p0 = xs[src], zs[src], ph[src]
        m = row_mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            ph[i] = (p0 + ph[i] + 2 * (z0 & xs[i]).bit_count()) & 3
            xs[i] ^= x0
            zs[i] ^= z0
        self._toggle_columns(x0, z0, row_mask)

    def _replace_row(self, i: int, x: int, z: int, phase: int) -> None:
        xs, zs = self.xs, self.zs
        self._toggle_columns(xs[i] ^ x, zs[i] ^ z, 1 << i)
        xs[i] = x
        zs[i] = z
        self.phases[i] = phase

    def anticommuting_mask(self, op: PauliString) -> int:
        """Bitmask over generator rows that anticommute with op."""
        mask = 0
        z = op.z
        col_x = self.col_x
        while z:
            low = z & -z
            mask ^= col_x[low.bit_length() - 1]
            z ^= low
        x = op.x
        col_z = self.col_z
        while x:
            low = x & -x
            mask ^= col_z[low.bit_length() - 1]
            x ^= low
        return mask

    def project(self, op: PauliString, rng=None) -> bool:
        """Apply a projective measurement of op, fast path for circuit runs.

        Returns True when the update was non-trivial (outcome random).  The
        forced-plus policy is rng=None; otherwise the outcome bit is drawn
        from rng only when the measurement is non-deterministic, so two runs
        with the same basis stream consume identical outcome-stream counts.
        Deterministic measurements leave the tableau unchanged and the
        (possibly expensive) outcome sign unresolved.
        """
        mask = self.anticommuting_mask(op)
        if mask == 0:
            return False
        m = 0 if rng is None else int(rng.integers(0, 2))
        self._project_anticommuting(mask, op, m)
        return True

    def _project_anticommuting(self, mask: int, op: PauliString, m: int) -> None:
        # Appendix-style update: swap the first anticommuting generator to the
        # front, fold it into the remaining anticommuting ones, then replace
        # the front row with (-1)^m op.
        k = (mask & -mask).bit_length() - 1
        if k != 0:
            bit0 = mask & 1
            self._swap_rows(0, k)
            mask = (mask & ~(1 | (1 << k))) | 1 | (bit0 << k)
        rest = mask & ~1
        if rest:
            self._mult_row_into(0, rest)
        self._replace_row(0, op.x, op.z, (op.phase + 2 * m) & 3)

    def restricted_to(self, qubits: Sequence[int]) -> "Tableau":
        """Tableau of a subsystem that is in a pure product with its complement.

        Pivots away every generator's support on the complement via
        phase-tracked row multiplications, then re-indexes the surviving rows
        onto `qubits` (whose order defines the new indexing).  Raises when
        the subsystem is left mixed.
        """
        t = self.copy()
        keep_mask = 0
        for q in qubits:
            keep_mask |= 1 << q
        active = (1 << t.n_gen) - 1
        for q in range(t.n):
            if (keep_mask >> q) & 1:
                continue
            for cols in (t.col_x, t.col_z):
                cand = cols[q] & active
                if cand:
                    piv_bit = cand & -cand
                    rest = cand ^ piv_bit
                    if rest:
                        t._mult_row_into(piv_bit.bit_length() - 1, rest)
                    active ^= piv_bit
        drop_mask = ((1 << t.n) - 1) ^ keep_mask
        out = Tableau(len(qubits))
        m = active
        while m:
            low = m & -m
            i = low.bit_length() - 1
            m ^= low
            x, z, p = t.xs[i], t.zs[i], t.phases[i]
            if (x & drop_mask) or (z & drop_mask):
                raise AssertionError("row still supported outside the subsystem")
            nx = nz = 0
            for j, q in enumerate(qubits):
                nx |= ((x >> q) & 1) << j
                nz |= ((z >> q) & 1) << j
            out._append_raw(nx, nz, p)
        if out.n_gen != len(qubits):
            raise ValueError("subsystem is not in a pure state with its complement")
        return out

    # -- canonical form -----------------------------------------------------

    def canonical(self) -> list[PauliString]:
        """Unique generating set: reduced row echelon over (x|z) with signs."""
        solver = GroupSolver(self)
        # full reduction: ascending pivot order clears every other pivot bit
        # (a pivot row carries no bits above its own pivot)
        reduced: list[tuple[int, int, int, int]] = []
        for _, (v, x, z, p) in sorted(solver.pivots.items()):
            for v2, x2, z2, p2 in reduced:
                if (v >> (v2.bit_length() - 1)) & 1:
                    p = _mul_phase(p, z, p2, x2)
                    v ^= v2
                    x ^= x2
                    z ^= z2
            reduced.append((v, x, z, p))
        out = [PauliString(self.n, x, z, p) for (v, x, z, p) in reduced]
        out.sort(key=lambda g: ((g.x << self.n) | g.z))
        return out

    def packed(self) -> np.ndarray:
        """Generator rows as packed uint64 words, X block then Z block."""
        n_words = (self.n + 63) // 64
        nbytes = n_words * 8
        out = np.empty((self.n_gen, 2 * n_words), dtype=np.uint64)
        for i in range(self.n_gen):
            out[i, :n_words] = np.frombuffer(
                self.xs[i].to_bytes(nbytes, "little"), dtype=np.uint64)
            out[i, n_words:] = np.frombuffer(
                self.zs[i].to_bytes(nbytes, "little"), dtype=np.uint64)
        return out


class GroupSolver:
    """Echelonized, phase-tracked view of a tableau for membership queries.

    Build once per state snapshot; each `contains` query is then a single
    reduction pass.
    """

    def __init__(self, t: Tableau):
        self.n = t.n
        self.pivots: dict[int, tuple[int, int, int, int]] = {}
        for i in range(t.n_gen):
            x, z, p = t.xs[i], t.zs[i], t.phases[i]
            v = (x << t.n) | z
            while v:
                msb = v.bit_length() - 1
                piv = self.pivots.get(msb)
                if piv is None:
                    self.pivots[msb] = (v, x, z, p)
                    break
                pv, px, pz, pp = piv
                p = _mul_phase(p, z, pp, px)
                v ^= pv
                x ^= px
                z ^= pz

    def contains(self, op: PauliString) -> Optional[int]:
        """+1 / -1 when ±op is in the group, None when absent."""
        if not op.is_hermitian:
            raise ValueError("op must be Hermitian")
        x, z, p = op.x, op.z, op.phase
        v = (x << self.n) | z
        while v:
            piv = self.pivots.get(v.bit_length() - 1)
            if piv is None:
                return None
            pv, px, pz, pp = piv
            p = _mul_phase(p, z, pp, px)
            v ^= pv
            x ^= px
            z ^= pz
        # op * (product of pivots) = i^p with p in {0, 2}
        return +1 if p == 0 else -1


def measure_pauli(t: Tableau, op: PauliString, rng=None) -> tuple[int, bool]:
    """Measure a Hermitian Pauli on the tableau.

    rng=None forces the +1 outcome wherever the outcome is free; otherwise the
    outcome bit comes from rng.  Returns (outcome, deterministic).
    """
    if op.n != t.n:
        raise ValueError("operator size does not match tableau")
    if not op.is_hermitian:
        raise ValueError("measured operator must be Hermitian")
    mask = t.anticommuting_mask(op)
    if mask:
        m = 0 if rng is None else int(rng.integers(0, 2))
        t._project_anticommuting(mask, op, m)
        return (+1 if m == 0 else -1), False
    sign = GroupSolver(t).contains(op)
    if sign is not None:
        return sign, True
    if t.n_gen >= t.n:
        raise AssertionError("full commuting tableau must contain ±op")
    m = 0 if rng is None else int(rng.integers(0, 2))
    t._append_raw(op.x, op.z, (op.phase + 2 * m) & 3)
    return (+1 if m == 0 else -1), False


def group_contains(t: Tableau, op: PauliString) -> Optional[int]:
    """+1 / -1 when ±op is a product of generators, None otherwise.

    For a full tableau the expectation of any Pauli is ±1 when it commutes
    with every generator and 0 otherwise, so `wilson_abs` can short-circuit on
    the anticommutation mask; this function resolves the sign as well.
    """
    if op.n != t.n:
        raise ValueError("operator size does not match tableau")
    if t.anticommuting_mask(op) != 0:
        return None
    return GroupSolver(t).contains(op)


def entanglement_entropy(t: Tableau, region) -> int:
    """Entropy in bits of a qubit region: rank of the restricted rows minus |region|.

    Requires a pure state (n independent generators).  `region` is anything
    with a `mask` attribute or an iterable of qubit indices.
    """
    if t.n_gen < t.n:
        raise ValueError("tableau is under-determined; entropy formula needs a pure state")
    mask = getattr(region, "mask", None)
    if mask is None:
        mask = 0
        for q in region:
            mask |= 1 << q
    size = mask.bit_count()
    if size == 0:
        return 0
    full = (1 << t.n) - 1
    comp = full & ~mask
    # pure state: S_A = S_complement; eliminate over the smaller side
    if comp.bit_count() < size:
        mask, size = comp, comp.bit_count()
        if size == 0:
            return 0
    n = t.n
    rows = [((t.xs[i] & mask) << n) | (t.zs[i] & mask) for i in range(t.n_gen)]
    return gf2_rank(rows) - size
