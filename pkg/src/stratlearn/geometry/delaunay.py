"""Incremental Delaunay triangulation in the plane (Bowyer-Watson).

Exact predicates plus a symbolic lift perturbation make the output unique
for cocircular input. Ghost triangles attached to a vertex at infinity keep
the convex hull inside the same data structure.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .predicates import incircle_perturbed, orient2d

GHOST = -1


@dataclass
class Triangulation:
    points: np.ndarray
    triangles: list[tuple[int, int, int]] = field(default_factory=list)
    edges: list[tuple[int, int]] = field(default_factory=list)

    @property
    def n_sites(self) -> int:
        return len(self.points)

    def simplices(self) -> list[tuple[int, ...]]:
        """Vertices, edges and triangles as sorted tuples."""
        out = [(i,) for i in range(self.n_sites)]
        out.extend(self.edges)
        out.extend(self.triangles)
        return out

    def neighbors(self) -> list[list[int]]:
        nb = [[] for _ in range(self.n_sites)]
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return [sorted(x) for x in nb]


def _collinear_path(pts) -> list[tuple[int, int]]:
    far = max(range(len(pts)), key=lambda k: float(np.dot(pts[k] - pts[0], pts[k] - pts[0])))
    d = pts[far] - pts[0]
    key = [(float(np.dot(p - pts[0], d)), k) for k, p in enumerate(pts)]
    order = [k for _, k in sorted(key)]
    return [tuple(sorted(e)) for e in zip(order, order[1:])]


class _BW:
    def __init__(self, pts):
        self.pts = [tuple(map(float, p)) for p in pts]
        self.tris: dict[int, tuple[int, int, int]] = {}
        self.edge: dict[tuple[int, int], int] = {}
        self.next_id = 0

    def add(self, t):
        tid = self.next_id
        self.next_id += 1
        self.tris[tid] = t
        a, b, c = t
        self.edge[(a, b)] = tid
        self.edge[(b, c)] = tid
        self.edge[(c, a)] = tid
        return tid

    def remove(self, tid):
        a, b, c = self.tris.pop(tid)
        for e in ((a, b), (b, c), (c, a)):
            if self.edge.get(e) == tid:
                del self.edge[e]

    def conflict(self, t, x) -> bool:
        a, b, c = t
        P = self.pts
        if c == GHOST:
            o = orient2d(P[a], P[b], P[x])
            if o > 0:
                return True
            if o < 0:
                return False
            # collinear with the hull edge: conflict only strictly inside the segment
            pa, pb, px = P[a], P[b], P[x]
            dot = (px[0] - pa[0]) * (pb[0] - pa[0]) + (px[1] - pa[1]) * (pb[1] - pa[1])
            return 0 < dot < (pb[0] - pa[0]) ** 2 + (pb[1] - pa[1]) ** 2
        return incircle_perturbed(P, a, b, c, x) > 0

    def insert(self, x):
        start = next((tid for tid, t in self.tris.items() if self.conflict(t, x)), None)
        if start is None:
            raise RuntimeError(f"no conflict found for point {x}")
        cavity = {start}
        queue = deque([start])
        while queue:
            a, b, c = self.tris[queue.popleft()]
            for u, v in ((a, b), (b, c), (c, a)):
                nb = self.edge.get((v, u))
                if nb is not None and nb not in cavity and self.conflict(self.tris[nb], x):
                    cavity.add(nb)
                    queue.append(nb)
        boundary = []
        for tid in cavity:
            a, b, c = self.tris[tid]
            for u, v in ((a, b), (b, c), (c, a)):
                if self.edge.get((v, u)) not in cavity:
                    boundary.append((u, v))
        for tid in cavity:
            self.remove(tid)
        for u, v in boundary:
            if u == GHOST:
                self.add((v, x, GHOST))
            elif v == GHOST:
                self.add((x, u, GHOST))
            else:
                self.add((u, v, x))


def delaunay(points) -> Triangulation:
    """Delaunay triangulation of distinct planar points.

    Collinear input yields the path through the points in line order.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("delaunay expects an (n, 2) array")
    n = len(pts)
    if n < 1:
        raise ValueError("delaunay needs at least one site")
    P = [tuple(map(float, p)) for p in pts]
    first = None
    for k in range(2, n):
        if orient2d(P[0], P[1], P[k]):
            first = k
            break
    if first is None:
        return Triangulation(pts, [], sorted(_collinear_path(pts)) if n > 1 else [])
    bw = _BW(pts)
    a, b, c = 0, 1, first
    if orient2d(P[a], P[b], P[c]) < 0:
        a, b = b, a
    bw.add((a, b, c))
    bw.add((b, a, GHOST))
    bw.add((c, b, GHOST))
    bw.add((a, c, GHOST))
    for x in range(2, n):
        if x != first:
            bw.insert(x)
    tris = sorted(tuple(sorted(t)) for t in bw.tris.values() if GHOST not in t)
    edges = set()
    for t in tris:
        edges.update(combinations(t, 2))
    return Triangulation(pts, tris, sorted(edges))


def is_delaunay(tri: Triangulation) -> bool:
    """Brute-force check of the perturbed empty-circle property."""
    P = [tuple(map(float, p)) for p in tri.points]
    for t in tri.triangles:
        a, b, c = t
        if orient2d(P[a], P[b], P[c]) < 0:
            a, b = b, a
        for x in range(len(P)):
            if x not in t and incircle_perturbed(P, a, b, c, x) > 0:
                return False
    return True
