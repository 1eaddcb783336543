"""Rank functions of kernel, cokernel, domain and range modules.

The input is a :class:`FilteredMap`: one cell complex carrying four birth
values per cell. At level ``a`` the domain pair is the quotient
``D = {dom <= a} - {dom_sub <= a}`` and the range pair is
``R = {rng <= a} - {rng_sub <= a}``. The chain map sends a cell of ``D`` to
itself if it lies in ``R`` and to zero otherwise.

Everything is computed over Z/2 with explicit cycle bases, one evaluation
level at a time, and ranks of the maps between levels are read off by
pushing representatives forward and reducing against boundary bases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .diagrams import DiagramPoint, PersistenceDiagram
from .z2 import Z2Basis, nullspace_combinations, reduce_columns

WHICH = ("kernel", "cokernel", "domain", "range")


@dataclass
class FilteredMap:
    dims: Sequence[int]
    faces: Sequence[Sequence[int]]  # codimension-one faces, as cell ids
    dom: Sequence[float]
    dom_sub: Sequence[float]
    rng: Sequence[float]
    rng_sub: Sequence[float]

    def __post_init__(self):
        n = len(self.dims)
        for name in ("faces", "dom", "dom_sub", "rng", "rng_sub"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has wrong length")

    @property
    def n_cells(self) -> int:
        return len(self.dims)

    def birth_values(self) -> np.ndarray:
        return np.concatenate([np.asarray(x, dtype=float) for x in
                               (self.dom, self.dom_sub, self.rng, self.rng_sub)])


@dataclass
class RankFunction:
    """``r[i, j]`` is the rank of the module map from level ``i`` to ``j``."""

    critical: np.ndarray   # c_0 = 0 < c_1 < ... < c_m
    values: np.ndarray     # evaluation values a_0 < ... < a_m
    r: np.ndarray
    cap: float = math.inf
    dim: int = 0
    which: str = "kernel"

    @property
    def n_levels(self) -> int:
        return len(self.values)


def _clusters(births, cap: float, tol: float):
    b = np.asarray(births, dtype=float)
    uniq = np.unique(b[np.isfinite(b) & (b < cap)])
    crit = [0.0]
    index = np.zeros(len(uniq), dtype=np.int64)
    prev = 0.0
    for k, x in enumerate(uniq):
        if x > tol and x - prev > tol:
            crit.append(float(x))
        elif len(crit) > 1:
            crit[-1] = float(x)
        index[k] = len(crit) - 1
        prev = x
    return np.asarray(crit), uniq, index


def critical_values(births, cap: float, tol: float) -> np.ndarray:
    """Sorted critical values below ``cap``, merged within ``tol``.

    Runs of values whose consecutive gaps are at most ``tol`` form one
    cluster, represented by its largest member; a run starting within ``tol``
    of zero is represented by zero. Zero is always the first critical value.
    """
    return _clusters(births, cap, tol)[0]


def evaluation_values(crit: np.ndarray, cap: float) -> np.ndarray:
    """Regular values between consecutive critical values, then the cap."""
    mids = list((crit[:-1] + crit[1:]) / 2)
    top = cap if math.isfinite(cap) else crit[-1] + 1.0
    return np.asarray(mids + [top])


def birth_levels(births, all_births, cap: float, tol: float) -> np.ndarray:
    """Level index at which each birth enters; the number of levels means never.

    ``all_births`` is the full value set the critical values were built from.
    """
    crit, uniq, index = _clusters(all_births, cap, tol)
    b = np.asarray(births, dtype=float)
    out = np.full(len(b), len(crit), dtype=np.int64)
    ok = np.isfinite(b) & (b < cap)
    pos = np.searchsorted(uniq, b[ok])
    if np.any(pos >= len(uniq)) or np.any(uniq[np.minimum(pos, len(uniq) - 1)] != b[ok]):
        raise ValueError("birth value missing from the clustered set")
    out[ok] = index[pos]
    return out


@dataclass
class LevelHomology:
    member: np.ndarray                    # bool mask of cells in the quotient
    boundaries: dict = field(default_factory=dict)  # dim -> Z2Basis of boundaries
    reps: dict = field(default_factory=dict)        # dim -> list of cycle sets


def _by_dim(dims, max_dim):
    dims = np.asarray(dims)
    return [np.nonzero(dims == k)[0].tolist() for k in range(max_dim + 2)]


def relative_homology(faces, bydim, member, max_dim: int) -> LevelHomology:
    """Boundary bases and homology representatives of a quotient complex."""
    out = LevelHomology(member)
    lows: set = set()
    above = Z2Basis()
    for k in range(max_dim + 1, 0, -1):
        cols = [(c, [f for f in faces[c] if member[f]]) for c in bydim[k] if member[c]]
        basis, zeros = reduce_columns(cols, clear=lows, track=k <= max_dim)
        if k <= max_dim:
            out.boundaries[k] = above
            out.reps[k] = [v for cid, v in zeros if cid not in lows]
        above = basis
        lows = set(basis.pivots)
    out.boundaries[0] = above
    out.reps[0] = [{c} for c in bydim[0] if member[c] and c not in lows]
    return out


def _mask(chain, member) -> set:
    return {c for c in chain if member[c]}


def check_chain_map(faces, dom_member, rng_member) -> list[int]:
    """Cells of the domain quotient on which the partial identity fails to commute."""
    bad = []
    for c in np.nonzero(dom_member & ~rng_member)[0]:
        if any(dom_member[f] and rng_member[f] for f in faces[c]):
            bad.append(int(c))
    return bad


def check_naturality(lv) -> list[int]:
    """Cells that enter the range quotient while already sitting in the domain one.

    ``lv`` holds the entry level of each cell in L, L0, K, K0. Such a cell is
    sent to zero at one level and to itself at a later one, so the maps
    between levels would not commute with the chain map.
    """
    l, l0, k, k0 = (np.asarray(x) for x in lv)
    return np.nonzero((l < k) & (k < np.minimum(l0, k0)))[0].tolist()


def check_boundary_squared(faces, member) -> list[int]:
    """Cells whose quotient boundary has nonzero boundary."""
    bad = []
    for c in np.nonzero(member)[0]:
        acc: set = set()
        for f in faces[c]:
            if member[f]:
                acc ^= {g for g in faces[f] if member[g]}
        if acc:
            bad.append(int(c))
    return bad


def module_rank_functions(fm: FilteredMap, max_dim: int, cap: float = math.inf,
                          tol: float = 0.0, which: Sequence[str] = WHICH,
                          check: bool = False, crit=None) -> dict:
    """Rank functions keyed by ``(which, dim)`` for dims ``0..max_dim``.

    ``crit`` fixes the level values explicitly; a cell then enters at the
    first level at or above its value, and never if it exceeds the last one.
    """
    for w in which:
        if w not in WHICH:
            raise ValueError(f"unknown module {w!r}")
    if crit is None:
        allb = fm.birth_values()
        crit = critical_values(allb, cap, tol)
        lv = [birth_levels(x, allb, cap, tol) for x in (fm.dom, fm.dom_sub, fm.rng, fm.rng_sub)]
    else:
        crit = np.asarray(crit, dtype=float)
        lv = [np.searchsorted(crit, np.asarray(x, dtype=float), side="left")
              for x in (fm.dom, fm.dom_sub, fm.rng, fm.rng_sub)]
    values = evaluation_values(crit, cap)
    nl = len(crit)
    bydim = _by_dim(fm.dims, max_dim)
    faces = fm.faces

    if check:
        bad = check_naturality(lv)
        if bad:
            raise AssertionError(f"map is not natural in alpha on cells {bad[:5]}")
    dom_h, rng_h, ker_reps = [], [], []
    for i in range(nl):
        dmem = (lv[0] <= i) & (lv[1] > i)
        rmem = (lv[2] <= i) & (lv[3] > i)
        if check:
            if check_boundary_squared(faces, dmem) or check_boundary_squared(faces, rmem):
                raise AssertionError(f"boundary of boundary nonzero at level {i}")
            bad = check_chain_map(faces, dmem, rmem)
            if bad:
                raise AssertionError(f"chain map fails to commute at level {i} on cells {bad[:5]}")
        dh = relative_homology(faces, bydim, dmem, max_dim)
        rh = relative_homology(faces, bydim, rmem, max_dim)
        kr = {}
        for d in range(max_dim + 1):
            residues = [rh.boundaries[d].reduce(_mask(h, rmem)) for h in dh.reps[d]]
            combos = nullspace_combinations(residues)
            chains = []
            for combo in combos:
                acc: set = set()
                for k in combo:
                    acc ^= dh.reps[d][k]
                chains.append(acc)
            kr[d] = (chains, residues)
        dom_h.append(dh)
        rng_h.append(rh)
        ker_reps.append(kr)

    out = {}
    for d in range(max_dim + 1):
        mats = {w: np.zeros((nl, nl), dtype=np.int64) for w in which}
        for j in range(nl):
            dh, rh = dom_h[j], rng_h[j]
            for w in which:
                if w == "kernel":
                    basis, sources, member = dh.boundaries[d].copy(), [k[d][0] for k in ker_reps], dh.member
                elif w == "domain":
                    basis, sources, member = dh.boundaries[d].copy(), [h.reps[d] for h in dom_h], dh.member
                elif w == "range":
                    basis, sources, member = rh.boundaries[d].copy(), [h.reps[d] for h in rng_h], rh.member
                else:
                    basis, member = rh.boundaries[d].copy(), rh.member
                    for h in dh.reps[d]:
                        basis.add(_mask(h, member))
                    sources = [h.reps[d] for h in rng_h]
                base = len(basis)
                for i in range(j + 1):
                    for chain in sources[i]:
                        basis.add(_mask(chain, member))
                    mats[w][i, j] = len(basis) - base
        for w in which:
            out[(w, d)] = RankFunction(crit, values, mats[w], cap, d, w)
    return out


def module_ranks(fm: FilteredMap, which: str, dim: int, cap: float = math.inf,
                 tol: float = 0.0) -> RankFunction:
    return module_rank_functions(fm, dim, cap, tol, which=(which,))[(which, dim)]


def diagram_from_ranks(rf: RankFunction, critical=None) -> PersistenceDiagram:
    """Read birth/death multiplicities off a rank function.

    A class first present at level ``i`` and gone at level ``j`` contributes
    the point ``(c_i, c_j)``; classes alive at the last level get an infinite
    (capped) death.
    """
    crit = rf.critical if critical is None else np.asarray(critical, dtype=float)
    r = rf.r
    m = r.shape[0]

    def rk(i, j):
        return 0 if i < 0 else int(r[i, j])

    entries = []
    for i in range(m):
        for j in range(i + 1, m):
            beta = rk(i, j - 1) - rk(i, j) - rk(i - 1, j - 1) + rk(i - 1, j)
            if beta < 0:
                raise ValueError(f"negative multiplicity {beta} at ({i}, {j})")
            if beta:
                entries.append(DiagramPoint(rf.dim, float(crit[i]), float(crit[j]), beta))
        beta = rk(i, m - 1) - rk(i - 1, m - 1)
        if beta < 0:
            raise ValueError(f"negative multiplicity {beta} at ({i}, inf)")
        if beta:
            entries.append(DiagramPoint(rf.dim, float(crit[i]), math.inf, beta))
    return PersistenceDiagram(entries, rf.cap)


def module_diagrams(fm: FilteredMap, max_dim: int, cap: float = math.inf,
                    tol: float = 0.0, which: Sequence[str] = WHICH,
                    check: bool = False) -> dict:
    """Diagrams keyed by module name, each covering dims ``0..max_dim``."""
    rfs = module_rank_functions(fm, max_dim, cap, tol, which, check)
    out = {}
    for w in which:
        entries = []
        for d in range(max_dim + 1):
            entries.extend(diagram_from_ranks(rfs[(w, d)]).entries)
        out[w] = PersistenceDiagram(entries, cap)
    return out


def kernel_cokernel_diagrams(cx, max_dim: int, check: bool = True):
    """``(Dgm(ker), Dgm(cok))`` of the map carried by ``cx``.

    ``cx`` is a :class:`FilteredMap` or anything exposing ``filtered_map()``,
    ``alpha_cap`` and ``tol``.
    """
    if isinstance(cx, FilteredMap):
        fm, cap, tol = cx, math.inf, 0.0
    else:
        fm, cap, tol = cx.filtered_map(), cx.alpha_cap, cx.tol
    dg = module_diagrams(fm, max_dim, cap, tol, ("kernel", "cokernel"), check)
    return dg["kernel"], dg["cokernel"]
