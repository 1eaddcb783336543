"""Sample-size bound for the local inference test, and the quantities it needs.

Volumes follow the M2 sampling measure: a draw picks one declared piece
uniformly and then a uniform point on it, so the mass of a set is the mean
over pieces of its relative volume in each piece.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .pointcloud import Piece, PointCloudError, SpaceSpec, dense_reference

MAX_CENTERS = 200_000
QUAD_NODES = 512


def _ball_piece_volume(piece: Piece, centers: np.ndarray, R: float) -> np.ndarray:
    """``vol_k(B_R(c) ∩ piece)`` for every centre, k = piece dimension."""
    o = np.asarray(piece.origin, dtype=float)
    V = np.asarray(piece.vectors, dtype=float)
    x = centers - o
    if piece.dim == 1:
        v = V[0]
        L = float(np.linalg.norm(v))
        u = v / L
        s = x @ u
        perp2 = np.maximum(np.einsum("ij,ij->i", x, x) - s * s, 0.0)
        half = np.sqrt(np.maximum(R * R - perp2, 0.0))
        lo = np.maximum(s - half, 0.0)
        hi = np.minimum(s + half, L)
        return np.where(perp2 <= R * R, np.maximum(hi - lo, 0.0), 0.0)
    if piece.dim != 2:
        raise PointCloudError("pieces of dimension above two are not supported")
    # chord length along v2 for each slice t1, integrated with the midpoint rule
    t1 = (np.arange(QUAD_NODES) + 0.5) / QUAD_NODES
    v1, v2 = V
    area = piece.volume()
    out = np.zeros(len(centers))
    n2 = float(v2 @ v2)
    for start in range(0, len(centers), 2048):
        c = x[start:start + 2048]
        # points o + t1 v1 + t2 v2; |a + t2 v2|^2 <= R^2 with a = t1 v1 - c
        a = t1[None, :, None] * v1 - c[:, None, :]
        b = a @ v2
        cc = np.einsum("ijk,ijk->ij", a, a) - R * R
        disc = b * b - n2 * cc
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = np.clip((-b - root) / n2, 0.0, 1.0)
        hi = np.clip((-b + root) / n2, 0.0, 1.0)
        frac = np.where(disc > 0, hi - lo, 0.0)
        out[start:start + 2048] = area * frac.mean(axis=1)
    return out


def ball_mass(spec: SpaceSpec, centers, radius: float) -> np.ndarray:
    """M2 probability of ``B_radius(c)`` for each centre."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    pieces = spec.pieces()
    total = np.zeros(len(centers))
    for piece in pieces:
        total += _ball_piece_volume(piece, centers, radius) / piece.volume()
    return total / len(pieces)


def volume_fraction(spec: SpaceSpec, rho: float, resolution: float | None = None) -> float:
    """Smallest M2 mass of a ball of radius rho/24 centred on the space.

    Centres run over a grid on every piece at ``rho/240`` unless given; the
    step is coarsened if that would exceed MAX_CENTERS centres.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    step = resolution or rho / 240
    while True:
        n = sum(math.prod(max(1, math.ceil(np.linalg.norm(v) / step - 1e-9)) + 1 for v in p.vectors)
                for p in spec.pieces())
        if n <= MAX_CENTERS:
            break
        step *= 1.5
    centers = dense_reference(spec, step)
    return float(np.min(ball_mass(spec, centers, rho / 24)))


def min_sample_size(v: float, xi: float) -> int:
    if not 0 < v <= 1:
        raise ValueError("v must lie in (0, 1]")
    if not 0 < xi < 1:
        raise ValueError("xi must lie in (0, 1)")
    n = (math.log(1 / v) + math.log(1 / xi)) / v
    return max(1, math.ceil(n - 1e-12))


@dataclass
class SamplingBoundReport:
    rho: float
    v: float
    xi: float
    n_min: int

    def to_text(self) -> str:
        return f"rho: {self.rho!r}\nv: {self.v!r}\nxi: {self.xi!r}\nn_min: {self.n_min}\n"


def sampling_bound(spec: SpaceSpec, rho: float, xi: float, resolution: float | None = None) -> SamplingBoundReport:
    v = volume_fraction(spec, rho, resolution)
    return SamplingBoundReport(rho, v, xi, min_sample_size(v, xi))


def _greedy_cover(points: np.ndarray, eps: float) -> int:
    """Greedy set cover of ``points`` by eps-balls centred at ``points``."""
    nbrs = cKDTree(points).query_ball_point(points, eps * (1 + 1e-9))
    gain = np.array([len(nb) for nb in nbrs])
    covered = np.zeros(len(points), dtype=bool)
    count = 0
    while not covered.all():
        c = int(np.argmax(gain))
        count += 1
        for u in nbrs[c]:
            if not covered[u]:
                covered[u] = True
                gain[nbrs[u]] -= 1      # the ball relation is symmetric
    return count


def _greedy_packing(points: np.ndarray, eps: float) -> int:
    """Maximal set of points pairwise more than 2 eps apart, in input order."""
    tree = cKDTree(points)
    blocked = np.zeros(len(points), dtype=bool)
    count = 0
    for i in range(len(points)):
        if blocked[i]:
            continue
        count += 1
        blocked[tree.query_ball_point(points[i], 2 * eps)] = True
    return count


def covering_packing_estimates(spec: SpaceSpec, eps: float, step: float | None = None):
    """``(C_upper, P_lower)`` at radius ``eps`` on a dense sample of the space."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    pts = dense_reference(spec, step or eps / 10)
    pts = pts[np.lexsort(pts.T[::-1])]
    return _greedy_cover(pts, eps), _greedy_packing(pts, eps)
