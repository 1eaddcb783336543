"""The four filtered complexes L >= L0 and K >= K0 around a pair of points.

All four live on one set of split-vertex simplices; each simplex carries the
value of alpha at which it enters each complex. Relative pairs are handled as
quotients (subcomplex simplices dropped), which makes the map from (L, L0) to
(K, K0) a partial identity on simplices.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry.nerve import (PairContext, SiteClassification, VoronoiData, birth_values,
                             classify_sites, perturbed_nerve, restricted_delaunay)
from .persistence.modules import FilteredMap, check_boundary_squared, critical_values
from .pointcloud import PointCloud

COLUMNS = ("L", "L0", "K", "K0")


def default_alpha_cap(eps: float) -> float:
    return 2 * eps * (1 + 1e-6)


@dataclass
class FilteredPairComplex:
    context: PairContext
    classification: SiteClassification
    simplices: list            # tuples of (site, tag), face-closed, sorted by size
    births: np.ndarray         # (n, 4): L, L0, K, K0
    alpha_cap: float
    tol: float
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {s: k for k, s in enumerate(self.simplices)}

    def __len__(self) -> int:
        return len(self.simplices)

    @property
    def critical_values(self) -> np.ndarray:
        return critical_values(self.births.ravel(), self.alpha_cap, self.tol)

    def faces(self, k: int) -> list[int]:
        s = self.simplices[k]
        if len(s) == 1:
            return []
        return [self.index[s[:j] + s[j + 1:]] for j in range(len(s))]

    def filtered_map(self) -> FilteredMap:
        dims = [len(s) - 1 for s in self.simplices]
        faces = [self.faces(k) for k in range(len(self))]
        b = self.births
        return FilteredMap(dims, faces, b[:, 0], b[:, 1], b[:, 2], b[:, 3])

    def snapshot(self, alpha: float):
        """``(L, L0, K, K0)`` as sets of simplices present at ``alpha``."""
        if not 0 <= alpha <= self.alpha_cap:
            raise ValueError(f"alpha {alpha} outside [0, {self.alpha_cap}]")
        return tuple({s for s, b in zip(self.simplices, self.births[:, c]) if b <= alpha}
                     for c in range(4))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("simplex,L,L0,K,K0\n")
        for s, b in zip(self.simplices, self.births):
            name = " ".join(f"{v}{'' if t == 'whole' else t}" for v, t in s)
            buf.write(name + "," + ",".join("inf" if math.isinf(x) else repr(float(x)) for x in b) + "\n")
        return buf.getvalue()


@dataclass
class RelativeComplex:
    simplices: list
    boundary: dict   # simplex -> list of faces kept in the quotient

    def check(self) -> bool:
        ids = {s: k for k, s in enumerate(self.simplices)}
        member = np.ones(len(self.simplices), dtype=bool)
        faces = [[ids[f] for f in self.boundary[s]] for s in self.simplices]
        return not check_boundary_squared(faces, member)


def relative_complex(ambient: set, sub: set) -> RelativeComplex:
    cells = sorted(ambient - sub, key=lambda s: (len(s), s))
    keep = set(cells)
    bd = {}
    for s in cells:
        bd[s] = [s[:j] + s[j + 1:] for j in range(len(s))] if len(s) > 1 else []
        bd[s] = [f for f in bd[s] if f in keep]
    return RelativeComplex(cells, bd)


def psi_map(snapshot) -> dict:
    """Per simplex of L: True if it is kept (lies in K), False if sent to zero."""
    L, L0, K, K0 = snapshot
    bad = [s for s in L0 & K if s not in K0]
    if bad:
        raise AssertionError(f"containment violated for {bad[:3]}")
    return {s: s in K for s in L}


def propagate(simplices, births: np.ndarray) -> np.ndarray:
    """Raise each value to the max over its faces so sublevel sets are complexes."""
    out = births.copy()
    index = {s: k for k, s in enumerate(simplices)}
    for k, s in enumerate(simplices):
        if len(s) > 1:
            for j in range(len(s)):
                out[k] = np.maximum(out[k], out[index[s[:j] + s[j + 1:]]])
    return out


def build_filtered_pair(U, ctx: PairContext, alpha_cap: float | None = None,
                        vor: VoronoiData | None = None) -> FilteredPairComplex:
    """Assemble the split-vertex complex and its four filtrations for one pair."""
    if ctx.disjoint:
        raise ValueError("pair is disjoint: |p - q| > 2r")
    if vor is None:
        pts = U.points if isinstance(U, PointCloud) else np.asarray(U, dtype=float)
        if pts.shape[1] != 2:
            raise ValueError("the nerve pipeline is planar; use the cubical oracle in 3D")
        vor = VoronoiData.build(pts)
    if alpha_cap is None:
        alpha_cap = default_alpha_cap(ctx.eps)
    cls = classify_sites(vor, ctx)
    lprime = restricted_delaunay(vor, ctx, cls)
    simplices = perturbed_nerve(lprime, cls, ctx.coincident)
    births = np.array([birth_values(s, ctx, vor, cls) for s in simplices], dtype=float).reshape(-1, 4)
    births = propagate(simplices, births)
    return FilteredPairComplex(ctx, cls, simplices, births, alpha_cap, ctx.tau)
