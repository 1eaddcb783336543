"""Linear algebra over the two-element field.

Sparse vectors are Python sets of integer indices. A vector's pivot is its
largest index, which matches the "low" convention of boundary matrix
reduction.
"""
from __future__ import annotations

from typing import Iterable, Sequence


def z2_rank(matrix: Sequence[Sequence[int]]) -> int:
    """Rank of a dense 0/1 matrix by Gaussian elimination over Z/2."""
    rows = []
    for row in matrix:
        bits = 0
        for k, x in enumerate(row):
            if int(x) % 2:
                bits |= 1 << k
        rows.append(bits)
    rank = 0
    pivots: dict[int, int] = {}
    for bits in rows:
        while bits:
            top = bits.bit_length() - 1
            if top in pivots:
                bits ^= pivots[top]
            else:
                pivots[top] = bits
                rank += 1
                break
    return rank


class Z2Basis:
    """Echelon basis of a subspace, keyed by pivot index."""

    __slots__ = ("pivots",)

    def __init__(self, pivots: dict[int, set] | None = None):
        self.pivots: dict[int, set] = pivots if pivots is not None else {}

    def __len__(self) -> int:
        return len(self.pivots)

    def copy(self) -> "Z2Basis":
        # vectors are never mutated in place once stored
        return Z2Basis(dict(self.pivots))

    def reduce(self, v: Iterable[int]) -> set:
        """Canonical representative of ``v`` modulo the span (no pivot bits)."""
        v = set(v)
        piv = self.pivots
        while True:
            hits = [k for k in v if k in piv]
            if not hits:
                return v
            v ^= piv[max(hits)]

    def add(self, v: Iterable[int]) -> bool:
        """Insert ``v``; returns True if it enlarged the span."""
        w = self.reduce(v)
        if not w:
            return False
        self.pivots[max(w)] = w
        return True

    def contains(self, v: Iterable[int]) -> bool:
        return not self.reduce(v)


def reduce_columns(columns: Sequence[tuple[int, set]], clear: set | None = None,
                   track: bool = False):
    """Standard column reduction with pivot = largest row index.

    ``columns`` is a list of ``(cell_id, boundary_set)`` in processing order;
    columns are only ever added to later ones. Columns whose ``cell_id`` is in
    ``clear`` are skipped (they are known to reduce to zero).

    Returns ``(basis, zero_cycles)``: the reduced nonzero columns as a
    :class:`Z2Basis` (spanning the image) and, when ``track`` is set, the
    cycle representatives ``V_j`` of columns that reduced to zero.
    """
    piv: dict[int, set] = {}
    pv: dict[int, set] = {}
    zeros: list[tuple[int, set]] = []
    for cid, col in columns:
        if clear is not None and cid in clear:
            continue
        col = set(col)
        v = {cid} if track else None
        while col:
            low = max(col)
            other = piv.get(low)
            if other is None:
                break
            col ^= other
            if track:
                v ^= pv[low]
        if col:
            low = max(col)
            piv[low] = col
            if track:
                pv[low] = v
        elif track:
            zeros.append((cid, v))
    return Z2Basis(piv), zeros


def nullspace_combinations(vectors: Sequence[set]) -> list[set]:
    """Index sets ``S`` with XOR of ``vectors[i]`` for ``i`` in ``S`` equal to zero.

    The returned sets form a basis of the space of such dependencies.
    """
    piv: dict[int, tuple[set, set]] = {}
    out = []
    for i, vec in enumerate(vectors):
        v = set(vec)
        combo = {i}
        while v:
            low = max(v)
            hit = piv.get(low)
            if hit is None:
                break
            v ^= hit[0]
            combo ^= hit[1]
        if v:
            piv[max(v)] = (v, combo)
        else:
            out.append(combo)
    return out
