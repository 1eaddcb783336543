"""Pairwise local-equivalence screen and the clustering built on it.

Two sample points are joined when the intersection maps of their balls, in
both directions, have no kernel or cokernel class born by eps that survives
to 2 eps. Planar clouds go through the split-vertex nerve; 3D clouds (or any
cloud with ``mode="cubical"``) go through the grid oracle.
"""
from __future__ import annotations

import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .complexes import build_filtered_pair
from .cubical_oracle import cubical_window_diagrams, default_step, rasterize_pair
from .geometry.nerve import PairContext, VoronoiData
from .persistence.diagrams import PersistenceDiagram, window_query
from .persistence.modules import kernel_cokernel_diagrams
from .pointcloud import PointCloud

log = logging.getLogger(__name__)

MODES = ("nerve2d", "cubical")


def default_mode(dim: int) -> str:
    return "nerve2d" if dim == 2 else "cubical"


@dataclass
class DirectedResult:
    p: int
    q: int
    kernel: PersistenceDiagram
    cokernel: PersistenceDiagram
    kernel_window: PersistenceDiagram
    cokernel_window: PersistenceDiagram

    @property
    def empty(self) -> bool:
        return len(self.kernel_window) == 0 and len(self.cokernel_window) == 0


@dataclass
class PairResult:
    p: int
    q: int
    weight: int
    reason: str                         # "far", "same" or "tested"
    directions: list = field(default_factory=list)


def _points(U) -> np.ndarray:
    return U.points if isinstance(U, PointCloud) else np.asarray(U, dtype=float)


def directed_diagrams(U, ctx: PairContext, mode: str, vor: VoronoiData | None = None,
                      alpha_cap: float | None = None, h: float | None = None):
    """``(Dgm(ker), Dgm(cok))`` for the ordered pair in ``ctx``, dims 0..ambient-1."""
    pts = _points(U)
    dim = pts.shape[1]
    if mode == "nerve2d":
        if dim != 2:
            raise ValueError("nerve2d mode needs planar points; use cubical")
        cx = build_filtered_pair(pts, ctx, alpha_cap, vor)
        return kernel_cokernel_diagrams(cx, dim - 1, check=False)
    if mode == "cubical":
        grid = rasterize_pair(pts, ctx, h or default_step(ctx.r, dim), dim)
        dg = cubical_window_diagrams(grid, ctx, dim - 1)
        return dg["kernel"], dg["cokernel"]
    raise ValueError(f"unknown mode {mode!r}")


def pair_test(U, i: int, j: int, r: float, eps: float, mode: str | None = None,
              vor: VoronoiData | None = None, alpha_cap: float | None = None,
              h: float | None = None) -> PairResult:
    """Both directed window tests for the pair ``(i, j)``; errors propagate."""
    pts = _points(U)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    mode = mode or default_mode(pts.shape[1])
    p, q = pts[i], pts[j]
    if np.linalg.norm(p - q) > 2 * r:
        return PairResult(i, j, 0, "far")
    if i == j or np.array_equal(p, q):
        return PairResult(i, j, 1, "same")
    if mode == "nerve2d" and vor is None:
        vor = VoronoiData.build(pts)
    tol = 1e-12 * r
    dirs = []
    for a, b in ((i, j), (j, i)):
        ctx = PairContext(pts[a], pts[b], r, eps)
        ker, cok = directed_diagrams(pts, ctx, mode, vor, alpha_cap, h)
        dirs.append(DirectedResult(a, b, ker, cok, window_query(ker, eps, 2 * eps, tol),
                                   window_query(cok, eps, 2 * eps, tol)))
    return PairResult(i, j, int(all(d.empty for d in dirs)), "tested", dirs)


def pair_weight(U, i: int, j: int, r: float, eps: float, mode: str | None = None,
                vor: VoronoiData | None = None, alpha_cap: float | None = None,
                h: float | None = None) -> int:
    """0 or 1; a pipeline failure is logged and counts as 0."""
    try:
        return pair_test(U, i, j, r, eps, mode, vor, alpha_cap, h).weight
    except (AssertionError, ValueError, ArithmeticError) as exc:
        log.warning("pair (%d, %d) failed: %s", i, j, exc)
        return 0


@dataclass
class SpectralData:
    lambda1: float
    fiedler: np.ndarray
    split: np.ndarray          # bool per point, True on the nonnegative side


@dataclass
class StrataClustering:
    W: np.ndarray
    labels: np.ndarray
    spectral: SpectralData | None = None
    failures: list = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def sizes(self) -> list[int]:
        return np.bincount(self.labels).tolist() if len(self.labels) else []

    def labels_csv(self) -> str:
        buf = io.StringIO()
        buf.write("point_index,label\n")
        for k, lab in enumerate(self.labels):
            buf.write(f"{k},{lab}\n")
        return buf.getvalue()

    def weights_csv(self) -> str:
        """Upper-triangle triplets ``i,j,w`` of the nonzero off-diagonal weights."""
        buf = io.StringIO()
        buf.write("i,j,w\n")
        i, j = np.nonzero(np.triu(self.W, 1))
        for a, b in zip(i.tolist(), j.tolist()):
            buf.write(f"{a},{b},{int(self.W[a, b])}\n")
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"points: {len(self.labels)}", f"clusters: {self.n_clusters}",
                 "sizes: " + " ".join(map(str, self.sizes())), f"failed_pairs: {len(self.failures)}"]
        if self.spectral is not None:
            lines.append(f"lambda1: {self.spectral.lambda1:.12g}")
            lines.append(f"fiedler_split: {int(self.spectral.split.sum())} {int((~self.spectral.split).sum())}")
        return "\n".join(lines) + "\n"


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def component_labels(W: np.ndarray) -> np.ndarray:
    """Labels numbered by the smallest point index of each component."""
    n = len(W)
    uf = UnionFind(n)
    for a, b in zip(*np.nonzero(np.triu(W, 1))):
        uf.union(int(a), int(b))
    roots = [uf.find(k) for k in range(n)]
    renum = {}
    for root in roots:
        renum.setdefault(root, len(renum))
    return np.array([renum[root] for root in roots], dtype=int)


def spectral_partition(W) -> SpectralData:
    """Second-smallest eigenpair of ``L = D - W`` and the sign split of its vector."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("W must be square")
    if not np.allclose(W, W.T) or np.any(W < 0):
        raise ValueError("W must be symmetric and nonnegative")
    n = len(W)
    if n < 2:
        return SpectralData(0.0, np.zeros(n), np.ones(n, dtype=bool))
    L = np.diag(W.sum(axis=1)) - W      # self-loops cancel on the diagonal
    # push the constant vector to the top of the spectrum so that, when 0 is a
    # repeated eigenvalue, the vector we pick is still orthogonal to it
    shift = 2 * float(np.abs(L).sum(axis=1).max()) + 1.0
    vals, vecs = np.linalg.eigh(L + shift / n * np.ones((n, n)))
    lam = float(vals[0])
    if abs(lam) <= 1e-10 * max(1.0, shift):
        lam = 0.0
    v = vecs[:, 0]
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    if len(nz) and v[nz[0]] < 0:
        v = -v
    return SpectralData(lam, v, v >= -1e-12)


def candidate_pairs(points: np.ndarray, r: float, pairs=None) -> list[tuple[int, int]]:
    """Index pairs ``i < j`` within ``2r``, optionally restricted to ``pairs``."""
    if pairs is None:
        from scipy.spatial import cKDTree
        return sorted(tuple(sorted(pq)) for pq in cKDTree(points).query_pairs(2 * r))
    out = set()
    for i, j in pairs:
        if not (0 <= i < len(points) and 0 <= j < len(points)):
            raise IndexError(f"pair ({i}, {j}) out of range")
        if i != j:
            out.add((min(i, j), max(i, j)))
    return sorted(out)


def _worker(args):
    pts, i, j, r, eps, mode, alpha_cap, h = args
    try:
        return i, j, pair_test(pts, i, j, r, eps, mode, None, alpha_cap, h).weight, None
    except (AssertionError, ValueError, ArithmeticError) as exc:
        return i, j, 0, str(exc)


def strata_clusters(U, r: float, eps: float, mode: str | None = None, pairs=None,
                    alpha_cap: float | None = None, h: float | None = None,
                    jobs: int = 1, spectral: bool = False) -> StrataClustering:
    pts = _points(U)
    n = len(pts)
    if n == 0:
        raise ValueError("empty point cloud")
    mode = mode or default_mode(pts.shape[1])
    W = np.eye(n, dtype=int)
    todo = candidate_pairs(pts, r, pairs)
    failures = []
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_worker, [(pts, i, j, r, eps, mode, alpha_cap, h) for i, j in todo],
                                  chunksize=max(1, len(todo) // (4 * jobs))))
    else:
        vor = VoronoiData.build(pts) if mode == "nerve2d" and n >= 3 else None
        results = []
        for i, j in todo:
            try:
                results.append((i, j, pair_test(pts, i, j, r, eps, mode, vor, alpha_cap, h).weight, None))
            except (AssertionError, ValueError, ArithmeticError) as exc:
                results.append((i, j, 0, str(exc)))
    for i, j, w, err in results:
        if err is not None:
            log.warning("pair (%d, %d) failed: %s", i, j, err)
            failures.append((i, j, err))
        W[i, j] = W[j, i] = w
    labels = component_labels(W)
    sp = spectral_partition(W) if spectral else None
    return StrataClustering(W, labels, sp, failures)

