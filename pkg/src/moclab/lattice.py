"""Lieb lattice with rough boundary: qubit indexing, operator supports, regions.

Vertices sit at integer points (x, y) in {1..lx} x {1..ly}; edge qubits sit on
the bonds between adjacent vertices; every perimeter vertex additionally owns
one dangling rough-boundary edge per exposed side.  Total qubit count is
3*lx*ly + lx + ly.

Index layout (the contract is only that indices are a bijection onto
0..nq-1): row-major vertices, then horizontal bulk edges, then vertical bulk
edges, then boundary edges (south, north, west, east).

Regions are resolved with doubled coordinates: a vertex (x, y) lives at
(2x, 2y), an edge at the midpoint of its endpoints (so odd coordinates), and
a qubit belongs to a rectangle iff its doubled coordinate falls inside the
closed doubled box.  This pins down edge membership at region interfaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .stabilizer import PauliString

BULK, SIDE, CORNER = "bulk", "side", "corner"


@dataclass(frozen=True)
class Region:
    """A set of qubits carrying a label and a precomputed bitmask."""

    qubits: frozenset[int]
    label: str = "custom"
    mask: int = field(init=False, compare=False)

    def __post_init__(self):
        m = 0
        for q in self.qubits:
            m |= 1 << q
        object.__setattr__(self, "mask", m)

    def __len__(self) -> int:
        return len(self.qubits)

    def __contains__(self, q: int) -> bool:
        return q in self.qubits

    def union(self, *others: "Region", label: str = "custom") -> "Region":
        qs = set(self.qubits)
        for o in others:
            qs |= o.qubits
        return Region(frozenset(qs), label)


@dataclass(frozen=True)
class OperatorSupport:
    """X/Z support sets of a measured or diagnostic operator."""

    kind: str
    x_support: frozenset[int]
    z_support: frozenset[int]

    def as_pauli(self, nq: int) -> PauliString:
        return PauliString.from_supports(nq, self.x_support, self.z_support)


@dataclass(frozen=True)
class Plaquette:
    kind: str           # bulk / side / corner
    edges: tuple[int, ...]


class Lattice:
    """Immutable Lieb-lattice geometry with precomputed operator supports."""

    def __init__(self, lx: int, ly: int):
        if lx < 3 or ly < 3:
            raise ValueError("need lx >= 3 and ly >= 3")
        self.lx = lx
        self.ly = ly
        self.nq = 3 * lx * ly + lx + ly

        self._n_vert = lx * ly
        self._n_hedge = (lx - 1) * ly
        self._n_vedge = lx * (ly - 1)
        self._hedge0 = self._n_vert
        self._vedge0 = self._hedge0 + self._n_hedge
        self._bedge0 = self._vedge0 + self._n_vedge
        n_bedge = 2 * (lx + ly)
        assert self._bedge0 + n_bedge == self.nq

        self.vertices = list(range(self._n_vert))
        self.edges_bulk = list(range(self._hedge0, self._bedge0))
        self.edges_boundary = list(range(self._bedge0, self.nq))

        self._build_cells()
        self._build_operators()

    # -- indexing (1-based lattice coordinates) ------------------------------

    def vertex(self, x: int, y: int) -> int:
        if not (1 <= x <= self.lx and 1 <= y <= self.ly):
            raise ValueError(f"vertex ({x},{y}) outside lattice")
        return (y - 1) * self.lx + (x - 1)

    def hedge(self, x: int, y: int) -> int:
        """Edge between (x, y) and (x+1, y)."""
        if not (1 <= x <= self.lx - 1 and 1 <= y <= self.ly):
            raise ValueError(f"horizontal edge ({x},{y}) outside lattice")
        return self._hedge0 + (y - 1) * (self.lx - 1) + (x - 1)

    def vedge(self, x: int, y: int) -> int:
        """Edge between (x, y) and (x, y+1)."""
        if not (1 <= x <= self.lx and 1 <= y <= self.ly - 1):
            raise ValueError(f"vertical edge ({x},{y}) outside lattice")
        return self._vedge0 + (y - 1) * self.lx + (x - 1)

    def bedge(self, side: str, c: int) -> int:
        """Rough-boundary edge dangling off the perimeter vertex at coordinate c."""
        lx, ly = self.lx, self.ly
        if side == "S" and 1 <= c <= lx:
            return self._bedge0 + (c - 1)
        if side == "N" and 1 <= c <= lx:
            return self._bedge0 + lx + (c - 1)
        if side == "W" and 1 <= c <= ly:
            return self._bedge0 + 2 * lx + (c - 1)
        if side == "E" and 1 <= c <= ly:
            return self._bedge0 + 2 * lx + ly + (c - 1)
        raise ValueError(f"boundary edge {side}{c} outside lattice")

    def doubled(self, q: int) -> tuple[int, int]:
        """Doubled coordinate of any qubit."""
        lx, ly = self.lx, self.ly
        if q < self._hedge0:
            y, x = divmod(q, lx)
            return 2 * (x + 1), 2 * (y + 1)
        if q < self._vedge0:
            y, x = divmod(q - self._hedge0, lx - 1)
            return 2 * (x + 1) + 1, 2 * (y + 1)
        if q < self._bedge0:
            y, x = divmod(q - self._vedge0, lx)
            return 2 * (x + 1), 2 * (y + 1) + 1
        b = q - self._bedge0
        if b < lx:
            return 2 * (b + 1), 1
        b -= lx
        if b < lx:
            return 2 * (b + 1), 2 * ly + 1
        b -= lx
        if b < ly:
            return 1, 2 * (b + 1)
        b -= ly
        return 2 * lx + 1, 2 * (b + 1)

    def incident_edges(self, x: int, y: int) -> tuple[int, int, int, int]:
        """The four edges meeting the vertex (x, y), rough edges included."""
        left = self.hedge(x - 1, y) if x > 1 else self.bedge("W", y)
        right = self.hedge(x, y) if x < self.lx else self.bedge("E", y)
        down = self.vedge(x, y - 1) if y > 1 else self.bedge("S", x)
        up = self.vedge(x, y) if y < self.ly else self.bedge("N", x)
        return (left, right, down, up)

    # -- cells ---------------------------------------------------------------

    def _build_cells(self) -> None:
        lx, ly = self.lx, self.ly
        plaq: list[Plaquette] = []
        for y in range(1, ly):
            for x in range(1, lx):
                plaq.append(Plaquette(BULK, (self.hedge(x, y), self.hedge(x, y + 1),
                                             self.vedge(x, y), self.vedge(x + 1, y))))
        for x in range(1, lx):
            plaq.append(Plaquette(SIDE, (self.bedge("S", x), self.bedge("S", x + 1),
                                         self.hedge(x, 1))))
        for x in range(1, lx):
            plaq.append(Plaquette(SIDE, (self.bedge("N", x), self.bedge("N", x + 1),
                                         self.hedge(x, ly))))
        for y in range(1, ly):
            plaq.append(Plaquette(SIDE, (self.bedge("W", y), self.bedge("W", y + 1),
                                         self.vedge(1, y))))
        for y in range(1, ly):
            plaq.append(Plaquette(SIDE, (self.bedge("E", y), self.bedge("E", y + 1),
                                         self.vedge(lx, y))))
        plaq.append(Plaquette(CORNER, (self.bedge("S", 1), self.bedge("W", 1))))
        plaq.append(Plaquette(CORNER, (self.bedge("S", lx), self.bedge("E", 1))))
        plaq.append(Plaquette(CORNER, (self.bedge("N", 1), self.bedge("W", ly))))
        plaq.append(Plaquette(CORNER, (self.bedge("N", lx), self.bedge("E", ly))))
        self.plaquettes = plaq

        self.bulk_edge_endpoints: dict[int, tuple[int, int]] = {}
        for y in range(1, ly + 1):
            for x in range(1, lx):
                self.bulk_edge_endpoints[self.hedge(x, y)] = (
                    self.vertex(x, y), self.vertex(x + 1, y))
        for y in range(1, ly):
            for x in range(1, lx + 1):
                self.bulk_edge_endpoints[self.vedge(x, y)] = (
                    self.vertex(x, y), self.vertex(x, y + 1))

    # -- operator supports ---------------------------------------------------

    def _build_operators(self) -> None:
        nq = self.nq
        self.plaq_ops = [PauliString.from_supports(nq, z_support=p.edges)
                         for p in self.plaquettes]
        self.we_ops = []
        self.we_edges = []
        for e in self.edges_bulk:
            u, v = self.bulk_edge_endpoints[e]
            self.we_ops.append(PauliString.from_supports(nq, z_support=(e, u, v)))
            self.we_edges.append(e)
        self.le_ops = [PauliString.from_supports(nq, z_support=self.bulk_edge_endpoints[e])
                       for e in self.edges_bulk]
        all_edges = self.edges_bulk + self.edges_boundary
        self.xe_ops = [PauliString.from_supports(nq, x_support=(e,)) for e in all_edges]
        self.xe_edges = all_edges
        self.xv_ops = [PauliString.from_supports(nq, x_support=(v,)) for v in self.vertices]
        self.gauss_ops = []
        self.star_ops = []
        for y in range(1, self.ly + 1):
            for x in range(1, self.lx + 1):
                inc = self.incident_edges(x, y)
                self.gauss_ops.append(PauliString.from_supports(
                    nq, x_support=(self.vertex(x, y),) + inc))
                self.star_ops.append(PauliString.from_supports(nq, x_support=inc))
        self.boundary_symmetry = PauliString.from_supports(
            nq, x_support=self.edges_boundary)

    def support_of(self, op: PauliString, kind: str = "custom") -> OperatorSupport:
        xs = frozenset(q for q in range(self.nq) if (op.x >> q) & 1)
        zs = frozenset(q for q in range(self.nq) if (op.z >> q) & 1)
        return OperatorSupport(kind, xs, zs)

    # -- regions -------------------------------------------------------------

    def _box(self, x_lo: int, x_hi: int, y_lo: int, y_hi: int) -> set[int]:
        """Qubits whose doubled coordinates fall in the closed doubled box."""
        out = set()
        for q in range(self.nq):
            dx, dy = self.doubled(q)
            if x_lo <= dx <= x_hi and y_lo <= dy <= y_hi:
                out.add(q)
        return out

    def __repr__(self) -> str:
        return f"Lattice(lx={self.lx}, ly={self.ly}, nq={self.nq})"


def build_lieb_lattice(lx: int, ly: int) -> Lattice:
    """Construct the rough-boundary Lieb lattice and verify its invariants."""
    lat = Lattice(lx, ly)
    counts = {BULK: 0, SIDE: 0, CORNER: 0}
    incidence: dict[int, int] = {}
    for p in lat.plaquettes:
        counts[p.kind] += 1
        expected = {BULK: 4, SIDE: 3, CORNER: 2}[p.kind]
        assert len(p.edges) == expected
        for e in p.edges:
            incidence[e] = incidence.get(e, 0) + 1
    assert counts[CORNER] == 4
    assert all(v == 2 for v in incidence.values())
    assert lat.nq == 3 * lx * ly + lx + ly
    return lat


def tee_regions(lat: Lattice) -> tuple[Region, Region, Region]:
    """Tripartite regions for the topological-entropy combination.

    A is the upper slab with vertex corners (2, ly//2+1) .. (lx-1, ly-1); B is
    the lower-left box up to vertex column lx//2 including the vertical gauge
    edges directly below A over its own width; C fills the lower-right
    quadrant up to the same height.  The three regions are pairwise adjacent
    (A/B and A/C from below, B/C across the middle column) and meet at one
    triple point, the arrangement the seven-term combination needs; a
    full-width gauge row under A would instead screen C from A and shift the
    combination even in the fixed-point limits.
    """
    lx, ly = lat.lx, lat.ly
    xh, yh = lx // 2, ly // 2
    a = lat._box(4, 2 * (lx - 1), 2 * (yh + 1), 2 * (ly - 1))
    b = lat._box(4, 2 * xh, 4, 2 * yh + 1)
    c = lat._box(2 * xh + 1, 2 * (lx - 1), 4, 2 * yh + 1)
    if not a or not b or not c:
        raise ValueError(f"lattice ({lx},{ly}) too small for the tripartite regions")
    ra, rb, rc = Region(frozenset(a), "TEE_A"), Region(frozenset(b), "TEE_B"), \
        Region(frozenset(c), "TEE_C")
    assert not (a & b) and not (b & c) and not (a & c)
    return ra, rb, rc


def bmi_regions(lat: Lattice) -> tuple[Region, Region]:
    """Default boundary pair: vertices (2,1) and (lx-1,1) with their rough edges."""
    return bmi_regions_at(lat, lat.lx - 3)


def bmi_regions_at(lat: Lattice, distance: int) -> tuple[Region, Region]:
    """Boundary pair with B shifted to horizontal separation `distance`."""
    if lat.lx < 5:
        raise ValueError("need lx >= 5 for separated boundary regions")
    if distance < 1 or 2 + distance > lat.lx - 1:
        raise ValueError(f"distance {distance} does not fit on the boundary row")
    a = Region(frozenset({lat.vertex(2, 1), lat.bedge("S", 2)}), "BMI_A")
    xb = 2 + distance
    b = Region(frozenset({lat.vertex(xb, 1), lat.bedge("S", xb)}), "BMI_B")
    assert not (a.qubits & b.qubits)
    return a, b


def wilson_line(lat: Lattice, length: int) -> OperatorSupport:
    """Open string of Z's along the central row: `length` edges plus endpoints."""
    if not 1 <= length <= lat.lx - 2:
        raise ValueError(f"length must be within 1..{lat.lx - 2}")
    y0 = (lat.ly + 1) // 2
    x0 = (lat.lx - length + 1) // 2
    edges = [lat.hedge(x, y0) for x in range(x0, x0 + length)]
    ends = [lat.vertex(x0, y0), lat.vertex(x0 + length, y0)]
    return OperatorSupport("WilsonLine", frozenset(), frozenset(edges + ends))
