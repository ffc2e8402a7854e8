"""GF(2) linear algebra on bit-packed rows.

Two representations are used.  Python integers act as arbitrary-width
bit-vectors for rank/solve on whole generator rows; numpy uint64 word arrays
back the column-ordered elimination that the entropy diagnostics run in bulk.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of rows given as Python-int bit-vectors."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        r = int(row)
        while r:
            msb = r.bit_length() - 1
            p = pivots.get(msb)
            if p is None:
                pivots[msb] = r
                rank += 1
                break
            r ^= p
    return rank


def rows_from_bits(bits) -> list[int]:
    """Convert an (m, n) 0/1 array into int bit-vectors (column j -> bit j)."""
    arr = np.asarray(bits, dtype=np.uint8) % 2
    out = []
    for row in arr:
        v = 0
        for j in np.nonzero(row)[0]:
            v |= 1 << int(j)
        out.append(v)
    return out


def gf2_solve(rows: Sequence[int], target: int):
    """Combination of rows XOR-ing to target, as an index list, or None."""
    pivots: dict[int, tuple[int, int]] = {}
    for i, row in enumerate(rows):
        r = int(row)
        combo = 1 << i
        while r:
            msb = r.bit_length() - 1
            p = pivots.get(msb)
            if p is None:
                pivots[msb] = (r, combo)
                break
            r ^= p[0]
            combo ^= p[1]
    t = int(target)
    combo = 0
    while t:
        p = pivots.get(t.bit_length() - 1)
        if p is None:
            return None
        t ^= p[0]
        combo ^= p[1]
    return [i for i in range(len(rows)) if (combo >> i) & 1]


def pack_columns(column_bits: np.ndarray) -> np.ndarray:
    """Pack an (m, ncols) 0/1 array into (m, ceil(ncols/64)) uint64 words."""
    m, ncols = column_bits.shape
    packed8 = np.packbits(column_bits.astype(np.uint8), axis=1, bitorder="little")
    pad = (-packed8.shape[1]) % 8
    if pad:
        packed8 = np.pad(packed8, ((0, 0), (0, pad)))
    return packed8.view(np.uint64)


def cumulative_ranks(words: np.ndarray, ncols: int, boundaries: Sequence[int]) -> list[int]:
    """Ranks of the first-b-columns submatrices for each boundary b.

    Runs one left-to-right elimination; the pivot count after processing the
    first b columns equals rank of those columns.  `words` is consumed.
    """
    m = words.shape[0]
    rank = 0
    out = []
    bounds = iter(sorted(boundaries))
    next_b = next(bounds, None)
    for c in range(ncols):
        while next_b is not None and next_b == c:
            out.append(rank)
            next_b = next(bounds, None)
        if rank >= m:
            continue
        w, b = c >> 6, np.uint64(c & 63)
        col = (words[rank:, w] >> b) & np.uint64(1)
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            words[[rank, piv]] = words[[piv, rank]]
        rest = nz[1:] + rank
        if rest.size:
            words[rest] ^= words[rank]
        rank += 1
    while next_b is not None:
        out.append(rank)
        next_b = next(bounds, None)
    return out
