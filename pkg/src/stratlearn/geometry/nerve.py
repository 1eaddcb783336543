"""Split-cell nerves around a pair of balls B_r(p), B_r(q).

Restricted Voronoi cells of sites whose cell crosses the p/q bisector are cut
in two along it, so every cell used below is convex. A vertex of the nerve
is ``(site, tag)`` with tag ``"whole"`` (cell used as is) or ``"p"``/``"q"``
(the half of a cut cell on that side of the bisector).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .convex import ConvexRegion, Linear, Quadratic
from .delaunay import Triangulation, delaunay

WHOLE, PSIDE, QSIDE = "whole", "p", "q"
CLASSIFY_TOL = 1e-7   # relative to r; looser than the birth tolerance on purpose


@dataclass(frozen=True)
class PairContext:
    p: tuple
    q: tuple
    r: float
    eps: float = 0.0

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("radius must be positive")
        if self.eps < 0:
            raise ValueError("epsilon must be non-negative")
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(np.subtract(self.p, self.q)))

    @property
    def disjoint(self) -> bool:
        return self.distance > 2 * self.r

    @property
    def coincident(self) -> bool:
        return self.p == self.q

    @property
    def tau(self) -> float:
        return 1e-9 * self.r

    @property
    def alpha_max(self) -> float:
        return 2 * self.eps + self.r

    def side_halfplane(self, side: str):
        """``(a, b)`` with ``a . x <= b`` describing the closed side of the bisector."""
        p, q = np.asarray(self.p), np.asarray(self.q)
        a = 2 * (q - p)
        b = float(q @ q - p @ p)
        return (a, b) if side == PSIDE else (-a, -b)


@dataclass
class VoronoiData:
    points: np.ndarray
    neighbors: list
    triangulation: Triangulation

    @classmethod
    def build(cls, points) -> "VoronoiData":
        pts = np.asarray(points, dtype=float)
        tri = delaunay(pts)
        return cls(pts, tri.neighbors(), tri)

    def halfplanes(self, i: int):
        u = self.points[i]
        for j in self.neighbors[i]:
            w = self.points[j]
            yield w - u, float(w @ w - u @ u) / 2


@dataclass
class SiteClassification:
    T_p: set = field(default_factory=set)
    T_q: set = field(default_factory=set)
    T_pq: list = field(default_factory=list)  # ascending site index

    @property
    def sites(self) -> set:
        return self.T_p | self.T_q | set(self.T_pq)

    def side_of(self, site: int) -> str | None:
        if site in self.T_p:
            return PSIDE
        if site in self.T_q:
            return QSIDE
        return None


def cell_region(vertices, ctx: PairContext, vor: VoronoiData, cls: SiteClassification | None = None,
                cap_q: bool = False) -> ConvexRegion:
    """Intersection of the (split) restricted cells of ``vertices``."""
    R = ConvexRegion()
    sites = sorted({s for s, _ in vertices})
    for s in sites:
        for a, b in vor.halfplanes(s):
            R.add_halfplane(a, b)
    sides = vertex_sides(vertices, cls)
    if not ctx.coincident:
        if sides == {PSIDE, QSIDE}:
            a, b = ctx.side_halfplane(PSIDE)
            R.set_line(a, b)
        elif sides:
            R.add_halfplane(*ctx.side_halfplane(next(iter(sides))))
    R.add_ball(ctx.p, ctx.r)
    if cap_q:
        R.add_ball(ctx.q, ctx.r)
    return R


def vertex_sides(vertices, cls: SiteClassification | None) -> set:
    sides = set()
    for s, tag in vertices:
        if tag in (PSIDE, QSIDE):
            sides.add(tag)
        elif cls is not None and cls.side_of(s) is not None:
            sides.add(cls.side_of(s))
    return sides


def _sqrt(v: float) -> float:
    return math.sqrt(max(0.0, v)) if math.isfinite(v) else math.inf


def birth_values(vertices, ctx: PairContext, vor: VoronoiData,
                 cls: SiteClassification | None = None, tol: float | None = None):
    """Entry values ``(a_L, a_L0, a_K, a_K0)`` of a split-vertex simplex.

    Inside a common cell the distance to the sample is the distance to any
    member site, so each value is a convex minimisation over the cell.
    """
    tol = ctx.tau if tol is None else tol
    site = min(s for s, _ in vertices)
    u = vor.points[site]
    p, q, r = np.asarray(ctx.p), np.asarray(ctx.q), ctx.r
    uu = float(u @ u)
    dist = Quadratic(tuple(u))
    # |x-u|^2 - |x-c|^2 + r^2, linear in x
    rel_p = Linear(tuple(2 * (p - u)), uu - float(p @ p) + r * r)
    rel_q = Linear(tuple(2 * (q - u)), uu - float(q @ q) + r * r)

    R = cell_region(vertices, ctx, vor, cls)
    a_L = _sqrt(R.minimize(dist, tol)[0])
    if math.isinf(a_L):
        return math.inf, math.inf, math.inf, math.inf
    a_L0 = _sqrt(R.minimize(rel_p, tol)[0])
    RK = cell_region(vertices, ctx, vor, cls, cap_q=True)
    a_K = _sqrt(RK.minimize(dist, tol)[0])
    if math.isinf(a_K):
        a_K0 = math.inf
    else:
        sides = vertex_sides(vertices, cls)
        # near p the lens is bounded by the sphere around q, and vice versa
        obj = rel_q if (PSIDE in sides and not ctx.coincident) else rel_p
        a_K0 = _sqrt(RK.minimize(obj, tol)[0])
    # squared objectives carry ~1e-16 r^2 of rounding, i.e. ~1e-8 r after the root
    a_L, a_L0, a_K, a_K0 = (0.0 if v <= CLASSIFY_TOL * r else v for v in (a_L, a_L0, a_K, a_K0))
    a_L0 = max(a_L0, a_L)
    a_K = max(a_K, a_L)
    a_K0 = max(a_K0, a_K)
    return a_L, a_L0, a_K, a_K0


def classify_sites(vor: VoronoiData, ctx: PairContext, alpha_max: float | None = None) -> SiteClassification:
    """Split the sites whose restricted cell meets B_r(p) by bisector contact."""
    if ctx.disjoint:
        raise ValueError("pair is disjoint: |p - q| > 2r")
    alpha_max = ctx.alpha_max if alpha_max is None else alpha_max
    tol = CLASSIFY_TOL * ctx.r
    p = np.asarray(ctx.p)
    near = np.nonzero(np.linalg.norm(vor.points - p, axis=1) <= ctx.r + alpha_max + tol)[0]
    cls = SiteClassification()
    for i in near.tolist():
        u = vor.points[i]
        R = ConvexRegion()
        for a, b in vor.halfplanes(i):
            R.add_halfplane(a, b)
        R.add_ball(p, ctx.r)
        R.add_ball(u, alpha_max)
        val, x = R.minimize(Quadratic(tuple(u)), ctx.tau)
        if x is None:
            continue
        if ctx.coincident:
            cls.T_p.add(i)
            continue
        line = R.copy()
        line.set_line(*ctx.side_halfplane(PSIDE))
        if line.minimize(Quadratic(tuple(u)), tol)[1] is not None:
            cls.T_pq.append(i)
        elif np.linalg.norm(x - p) <= np.linalg.norm(x - np.asarray(ctx.q)):
            cls.T_p.add(i)
        else:
            cls.T_q.add(i)
    cls.T_pq.sort()
    return cls


def restricted_delaunay(vor: VoronoiData, ctx: PairContext, cls: SiteClassification,
                        alpha_max: float | None = None) -> list[tuple[int, ...]]:
    """Delaunay simplices whose common cell meets B_r(p) within distance alpha_max."""
    alpha_max = ctx.alpha_max if alpha_max is None else alpha_max
    sites = cls.sites
    out = []
    for s in vor.triangulation.simplices():
        if not set(s) <= sites:
            continue
        R = cell_region([(v, WHOLE) for v in s], ctx, vor)
        val, _ = R.minimize(Quadratic(tuple(vor.points[s[0]])), ctx.tau)
        if _sqrt(val) <= alpha_max + ctx.tau:
            out.append(tuple(s))
    return out


def _closure(simplices):
    out = set()
    for s in simplices:
        for k in range(1, len(s) + 1):
            out.update(combinations(s, k))
    return out


def perturbed_nerve(lprime, cls: SiteClassification, coincident: bool = False) -> list[tuple]:
    """Split-vertex complex built from restricted Delaunay simplices, face-closed.

    Raises AssertionError if a simplex mixes T_p and T_q sites.
    """
    order = {s: k for k, s in enumerate(cls.T_pq)}
    tops = []
    for sigma in lprime:
        if coincident:
            tops.append(tuple((v, WHOLE) for v in sorted(sigma)))
            continue
        P = sorted(v for v in sigma if v in cls.T_p)
        Q = sorted(v for v in sigma if v in cls.T_q)
        B = sorted((v for v in sigma if v in order), key=order.get)
        if len(P) + len(Q) + len(B) != len(sigma):
            raise ValueError(f"simplex {sigma} has unclassified sites")
        if P and Q:
            extra = " and bisector" if B else ""
            raise AssertionError(f"simplex {sigma} mixes T_p, T_q{extra} sites")
        if not B:
            tops.append(tuple((v, WHOLE) for v in sigma))
        elif not P and not Q:
            # staircase between the p-halves and the q-halves
            for k in range(len(B)):
                tops.append(tuple([(v, PSIDE) for v in B[k:]] + [(v, QSIDE) for v in B[:k + 1]]))
        elif P:
            tops.append(tuple([(v, WHOLE) for v in P] + [(v, PSIDE) for v in B]))
        else:
            tops.append(tuple([(v, WHOLE) for v in Q] + [(v, QSIDE) for v in B]))
    tag_rank = {WHOLE: 0, PSIDE: 1, QSIDE: 2}
    cells = _closure(tuple(sorted(t, key=lambda v: (v[0], tag_rank[v[1]]))) for t in tops)
    return sorted(cells, key=lambda s: (len(s), [(v[0], tag_rank[v[1]]) for v in s]))


def dump_off(simplices, points, path) -> None:
    """Plain text dump: vertex lines then simplex lines."""
    verts = sorted({v for s in simplices for v in s}, key=lambda v: (v[0], v[1]))
    index = {v: k for k, v in enumerate(verts)}
    with open(path, "w") as fh:
        fh.write(f"SPLITOFF {len(verts)} {len(simplices)}\n")
        for s, tag in verts:
            fh.write(" ".join(f"{c:.17g}" for c in points[s]) + f" {s} {tag}\n")
        for sigma in simplices:
            fh.write(f"{len(sigma)} " + " ".join(str(index[v]) for v in sigma) + "\n")
