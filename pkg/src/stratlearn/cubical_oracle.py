"""Grid-based oracle for the intersection maps and their (co)kernel diagrams.

Space is cut into cubes of side ``h``. A top cube enters at the distance
from its centre to the source (zero if the cube touches the source); lower
cells enter with their earliest incident top cube. Ball boundaries are
replaced by collars of cubes straddling the sphere, and the map into the lens
pair is realised by excision: the range pair is (L, L0 + N) with N the cubes
outside the lens or in its collar. The map is then the identity on cells,
so the generic rank engine applies unchanged.
"""
from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .geometry.nerve import PairContext
from .persistence.diagrams import DiagramPoint, PersistenceDiagram
from .persistence.modules import FilteredMap, diagram_from_ranks, module_rank_functions
from .pointcloud import PointCloud, SpaceSpec


@dataclass
class CubicalGrid:
    lo: np.ndarray          # lower corner of the box
    h: float
    shape: tuple            # number of top cubes per axis
    field: np.ndarray       # entry value of each top cube, indexed like ``shape``

    @property
    def dim(self) -> int:
        return len(self.shape)

    def centers(self) -> np.ndarray:
        axes = [self.lo[k] + (np.arange(n) + 0.5) * self.h for k, n in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1)

    def save(self, path) -> None:
        """Raw little-endian dump: dim, shape, h, lower corner, then the field."""
        with open(path, "wb") as fh:
            fh.write(struct.pack("<i", self.dim))
            fh.write(struct.pack(f"<{self.dim}q", *self.shape))
            fh.write(struct.pack("<d", self.h))
            fh.write(struct.pack(f"<{self.dim}d", *self.lo))
            fh.write(np.ascontiguousarray(self.field, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path) -> "CubicalGrid":
        data = Path(path).read_bytes()
        (dim,) = struct.unpack_from("<i", data, 0)
        off = 4
        shape = struct.unpack_from(f"<{dim}q", data, off)
        off += 8 * dim
        (h,) = struct.unpack_from("<d", data, off)
        off += 8
        lo = np.array(struct.unpack_from(f"<{dim}d", data, off))
        off += 8 * dim
        field = np.frombuffer(data, dtype="<f8", offset=off).reshape(shape).copy()
        return cls(lo, h, tuple(shape), field)


def default_step(r: float, dim: int) -> float:
    return r / 64 if dim == 2 else r / 32


def pair_box(ctx: PairContext, h: float, dim: int):
    """Box around B_r(p) with room for the collar and a two-cell margin."""
    w = h * math.sqrt(dim)
    p = np.asarray(ctx.p, dtype=float)
    ext = ctx.r + w + 2 * h
    n = int(math.ceil(2 * ext / h))
    lo = p - n * h / 2
    return lo, (n,) * dim


def rasterize(source, lo, h: float, shape) -> CubicalGrid:
    """Distance field of a point cloud or a synthetic space at cube centres."""
    if not h > 0:
        raise ValueError("cell size must be positive")
    lo = np.asarray(lo, dtype=float)
    grid = CubicalGrid(lo, h, tuple(int(n) for n in shape), np.zeros(shape))
    c = grid.centers().reshape(-1, grid.dim)
    if isinstance(source, SpaceSpec):
        if source.dim != grid.dim:
            raise ValueError("dimension mismatch")
        d = source.distance(c)
        d = np.where(d <= h / 2, 0.0, d)
    else:
        pts = source.points if isinstance(source, PointCloud) else np.asarray(source, dtype=float)
        if pts.shape[1] != grid.dim:
            raise ValueError("dimension mismatch")
        d, _ = cKDTree(pts).query(c)
        # cubes whose closed box holds a sample point are present from the start
        hit = np.zeros(grid.shape, dtype=bool)
        base = np.floor((pts - lo) / h).astype(int)
        for shift in np.ndindex(*(3,) * grid.dim):
            idx = base + np.asarray(shift) - 1
            ok = np.all((idx >= 0) & (idx < np.asarray(shape)), axis=1)
            ctr = lo + (idx + 0.5) * h
            ok &= np.max(np.abs(pts - ctr), axis=1) <= h / 2 * (1 + 1e-12)
            hit[tuple(idx[ok].T)] = True
        d = np.where(hit.ravel(), 0.0, d)
    grid.field = d.reshape(grid.shape)
    return grid


def rasterize_pair(source, ctx: PairContext, h: float | None = None, dim: int | None = None) -> CubicalGrid:
    dim = dim or (source.dim if hasattr(source, "dim") else np.asarray(source).shape[1])
    h = h or default_step(ctx.r, dim)
    lo, shape = pair_box(ctx, h, dim)
    return rasterize(source, lo, h, shape)


def _spread_min(top: np.ndarray) -> np.ndarray:
    """Values on the doubled lattice: each cell takes the min over incident top cubes."""
    shape = tuple(2 * n + 1 for n in top.shape)
    full = np.full(shape, np.inf)
    full[tuple(slice(1, None, 2) for _ in shape)] = top
    for ax in range(len(shape)):
        f = np.moveaxis(full, ax, 0)
        even = f[0::2]
        left = np.full_like(even, np.inf)
        right = np.full_like(even, np.inf)
        left[1:] = f[1::2]
        right[:-1] = f[1::2]
        f[0::2] = np.minimum(left, right)
    return full


def collar_masks(grid: CubicalGrid, ctx: PairContext):
    """Top-cube masks ``A, A0, N`` of the ball pair and of the excised lens complement."""
    c = grid.centers()
    w = grid.h * math.sqrt(grid.dim)
    dp = np.linalg.norm(c - np.asarray(ctx.p), axis=-1)
    dq = np.linalg.norm(c - np.asarray(ctx.q), axis=-1)
    A = dp <= ctx.r + w / 2
    A0 = A & (dp >= ctx.r - w / 2)
    S = A & (dq <= ctx.r + w / 2)
    S0 = S & ((dp >= ctx.r - w / 2) | (dq >= ctx.r - w / 2))
    N = (A & ~S) | S0
    lo, hi = grid.lo, grid.lo + np.asarray(grid.shape) * grid.h
    p = np.asarray(ctx.p)
    if np.any(p - ctx.r - w / 2 < lo + 2 * grid.h - 1e-12) or np.any(p + ctx.r + w / 2 > hi - 2 * grid.h + 1e-12):
        raise ValueError("grid box does not contain the ball with a two-cell margin")
    return A, A0, N


def snap_to_levels(values: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Round each value up to the first level at or above it; beyond the last is inf."""
    k = np.searchsorted(levels, values, side="left")
    out = np.full(values.shape, np.inf)
    ok = k < len(levels)
    out[ok] = levels[k[ok]]
    return out


def cubical_filtered_map(grid: CubicalGrid, ctx: PairContext, levels: np.ndarray):
    """FilteredMap over the cells that ever enter, with values snapped to ``levels``."""
    A, A0, N = collar_masks(grid, ctx)
    f = grid.field
    inf = np.inf
    dom = _spread_min(np.where(A, f, inf))
    dom_sub = _spread_min(np.where(A0, f, inf))
    rng_sub = np.minimum(dom_sub, _spread_min(np.where(N, f, inf)))
    levels = np.asarray(levels, dtype=float)
    dom_s = snap_to_levels(dom.ravel(), levels)
    live = np.nonzero(np.isfinite(dom_s))[0]
    lattice = dom.shape
    coords = np.stack(np.unravel_index(live, lattice), axis=1)
    odd = coords % 2 == 1
    dims = odd.sum(axis=1)
    order = np.lexsort((live, dims))
    live, coords, odd, dims = live[order], coords[order], odd[order], dims[order]
    pos = np.full(int(np.prod(lattice)), -1, dtype=np.int64)
    pos[live] = np.arange(len(live))
    strides = np.array([int(np.prod(lattice[k + 1:])) for k in range(len(lattice))])
    faces = []
    for cid, o in zip(live, odd):
        fs = []
        for ax in np.nonzero(o)[0]:
            fs.append(int(pos[cid - strides[ax]]))
            fs.append(int(pos[cid + strides[ax]]))
        faces.append(fs)
    sub = snap_to_levels(dom_sub.ravel()[live], levels)
    rsub = snap_to_levels(rng_sub.ravel()[live], levels)
    dsnap = dom_s[live]
    fm = FilteredMap(dims.tolist(), faces, dsnap, sub, dsnap, rsub)
    return fm


def uniform_levels(top: float, step: float) -> np.ndarray:
    n = int(math.ceil(top / step - 1e-9))
    return np.arange(n + 1) * step


def _shift(diagram: PersistenceDiagram, step: float) -> PersistenceDiagram:
    """Report values at the middle of their level interval."""
    def mid(v):
        return v if (v == 0 or math.isinf(v)) else v - step / 2
    return PersistenceDiagram([DiagramPoint(e.dim, mid(e.birth), mid(e.death), e.multiplicity)
                               for e in diagram.entries], diagram.cap)


def cubical_module_diagrams(grid: CubicalGrid, ctx: PairContext, alpha_cap: float,
                            step: float | None = None, max_dim: int | None = None,
                            which=("kernel", "cokernel"), levels=None) -> dict:
    """Diagrams of the requested modules on uniform levels up to ``alpha_cap``."""
    max_dim = grid.dim if max_dim is None else max_dim
    step = step or grid.h / 2
    if levels is None:
        levels = uniform_levels(alpha_cap, step)
    fm = cubical_filtered_map(grid, ctx, levels)
    rfs = module_rank_functions(fm, max_dim, cap=alpha_cap, which=which, crit=levels)
    out = {}
    for w in which:
        entries = []
        for d in range(max_dim + 1):
            entries.extend(diagram_from_ranks(rfs[(w, d)]).entries)
        out[w] = _shift(PersistenceDiagram(entries, alpha_cap), step)
    return out


def cubical_kercok_diagrams(grid: CubicalGrid, ctx: PairContext, alpha_cap: float,
                            step: float | None = None, max_dim: int | None = None):
    if ctx.disjoint:
        raise ValueError("pair is disjoint: |p - q| > 2r")
    dg = cubical_module_diagrams(grid, ctx, alpha_cap, step, max_dim)
    return dg["kernel"], dg["cokernel"]


def cubical_level_ranks(grid: CubicalGrid, ctx: PairContext, levels, max_dim: int | None = None,
                        which=("kernel", "cokernel")) -> dict:
    """Rank matrices of the modules at a few explicit levels (no diagram)."""
    max_dim = grid.dim if max_dim is None else max_dim
    levels = np.asarray(sorted(levels), dtype=float)
    fm = cubical_filtered_map(grid, ctx, levels)
    rfs = module_rank_functions(fm, max_dim, cap=float(levels[-1]), which=which, crit=levels)
    return {key: rf.r for key, rf in rfs.items()}


def window_levels(eps: float) -> np.ndarray:
    """``0, eps`` and a level just below ``2 eps``; survivors of the last one die at or after 2 eps."""
    return np.array([0.0, eps, 2 * eps * (1 - 1e-9)])


def cubical_window_diagrams(grid: CubicalGrid, ctx: PairContext, max_dim: int | None = None,
                            which=("kernel", "cokernel")) -> dict:
    """Coarse diagrams on the three window levels, enough to decide the (eps, 2 eps) test.

    Births are reported at the level they are first seen; a class alive at the
    last level is essential (death ``inf``).
    """
    if ctx.disjoint:
        raise ValueError("pair is disjoint: |p - q| > 2r")
    if not ctx.eps > 0:
        raise ValueError("the window test needs epsilon > 0")
    max_dim = grid.dim - 1 if max_dim is None else max_dim
    levels = window_levels(ctx.eps)
    fm = cubical_filtered_map(grid, ctx, levels)
    rfs = module_rank_functions(fm, max_dim, cap=float(levels[-1]), which=which, crit=levels)
    out = {}
    for w in which:
        entries = []
        for d in range(max_dim + 1):
            entries.extend(diagram_from_ranks(rfs[(w, d)]).entries)
        out[w] = PersistenceDiagram(entries, float(levels[-1]))
    return out


@dataclass
class FeatureSizeReport:
    sigma_p: float       # first critical value of the ball pair module
    sigma_pq: float      # first critical value of the lens pair module
    rho: float
    error_bar: float
    capped: bool = False


def _first_change(grid, ctx, which, lo, hi, scan_step, tol, max_dim):
    """Smallest level in (lo, hi] where the module is not constant, by scan then bisection."""
    def changes(a, b):
        r = cubical_level_ranks(grid, ctx, [a, b], max_dim, which=(which,))
        for d in range(max_dim + 1):
            m = r[(which, d)]
            if not (m[0, 1] == m[0, 0] == m[1, 1]):
                return True
        return False

    a = lo
    while a < hi:
        b = min(a + scan_step, hi)
        if changes(a, b):
            while b - a > tol:
                mid = (a + b) / 2
                if changes(a, mid):
                    b = mid
                else:
                    a = mid
            return b
        a = b
    return math.inf


def feature_size_report(grid: CubicalGrid, ctx: PairContext, alpha_top: float | None = None,
                        scan_step: float | None = None, max_dim: int | None = None) -> FeatureSizeReport:
    """First positive critical values of the two relative modules of the space."""
    max_dim = grid.dim if max_dim is None else max_dim
    alpha_top = 2 * ctx.r if alpha_top is None else alpha_top
    scan_step = scan_step or 8 * grid.h
    # the first level sits just above zero so cubes touching the space are in
    start = grid.h * 1e-6
    s_p = _first_change(grid, ctx, "domain", start, alpha_top, scan_step, grid.h / 4, max_dim)
    s_pq = _first_change(grid, ctx, "range", start, alpha_top, scan_step, grid.h / 4, max_dim)
    rho = min(s_p, s_pq)
    err = grid.h * math.sqrt(grid.dim)
    if math.isinf(rho):
        warnings.warn("no critical value below the scan range; rho is capped")
    return FeatureSizeReport(s_p, s_pq, rho if math.isfinite(rho) else alpha_top, err,
                             capped=not math.isfinite(rho))
