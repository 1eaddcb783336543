"""Point clouds, synthetic stratified spaces and the two sampling models."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

DUPLICATE_TOL = 1e-12
MAX_ATTEMPTS = 10 ** 6


class PointCloudError(ValueError):
    pass


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray
    label: str | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise PointCloudError(f"points must be (n, 2) or (n, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise PointCloudError("points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def tree(self) -> cKDTree:
        return cKDTree(self.points)


def check_duplicates(points: np.ndarray, tol: float = DUPLICATE_TOL) -> list[tuple[int, int]]:
    pairs = cKDTree(points).query_pairs(tol)
    return sorted(pairs)


def load_points(path, fmt: str = "csv", label: str | None = None) -> PointCloud:
    """Read one point per row; rows keep their order."""
    if fmt not in ("csv", "whitespace"):
        raise PointCloudError(f"unknown format {fmt!r}")
    text = Path(path).read_text()
    rows, arity = [], None
    lines = text.splitlines()
    reader = csv.reader(lines) if fmt == "csv" else (ln.split() for ln in lines)
    for lineno, fields in enumerate(reader, start=1):
        fields = [f.strip() for f in fields if f.strip()]
        if not fields or fields[0].startswith("#"):
            continue
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise PointCloudError(f"line {lineno}: cannot parse {fields!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise PointCloudError(f"line {lineno}: non-finite coordinate")
        if arity is None:
            if len(vals) not in (2, 3):
                raise PointCloudError(f"line {lineno}: expected 2 or 3 coordinates, got {len(vals)}")
            arity = len(vals)
        elif len(vals) != arity:
            raise PointCloudError(f"line {lineno}: dimension mismatch ({len(vals)} vs {arity})")
        rows.append(vals)
    if not rows:
        raise PointCloudError("no points in file")
    pts = np.asarray(rows)
    dups = check_duplicates(pts)
    if dups:
        i, j = dups[0]
        raise PointCloudError(f"duplicate points at rows {i + 1} and {j + 1}")
    return PointCloud(pts, label)


def save_points(cloud: PointCloud, path) -> None:
    np.savetxt(path, cloud.points, delimiter=",", fmt="%.17g")


@dataclass(frozen=True)
class Piece:
    """Affine patch ``origin + sum t_k v_k`` with every ``t_k`` in [0, 1]."""

    origin: tuple
    vectors: tuple  # one vector: segment; two: parallelogram

    @property
    def dim(self) -> int:
        return len(self.vectors)

    @property
    def ambient(self) -> int:
        return len(self.origin)

    def volume(self) -> float:
        V = np.asarray(self.vectors, dtype=float)
        return float(np.sqrt(abs(np.linalg.det(V @ V.T))))

    def at(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(self.origin, dtype=float) + np.asarray(t) @ np.asarray(self.vectors, dtype=float)

    def grid(self, step: float) -> np.ndarray:
        counts = [max(1, math.ceil(np.linalg.norm(v) / step - 1e-9)) for v in self.vectors]
        axes = [np.arange(c + 1) / c for c in counts]
        ts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, self.dim)
        return self.at(ts)

    def uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.at(rng.random((n, self.dim)))

    def distance(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        o = np.asarray(self.origin, dtype=float)
        V = np.asarray(self.vectors, dtype=float)
        if self.dim == 1:
            v = V[0]
            t = np.clip((x - o) @ v / (v @ v), 0.0, 1.0)
            return np.linalg.norm(x - (o + t[:, None] * v), axis=1)
        # parallelogram: interior projection, else nearest boundary edge
        G = V @ V.T
        t = np.linalg.solve(G, V @ (x - o).T).T
        inside = np.all((t >= 0) & (t <= 1), axis=1)
        proj = o + t @ V
        best = np.where(inside, np.linalg.norm(x - proj, axis=1), np.inf)
        edges = [Piece(tuple(o), (tuple(V[0]),)), Piece(tuple(o), (tuple(V[1]),)),
                 Piece(tuple(o + V[1]), (tuple(V[0]),)), Piece(tuple(o + V[0]), (tuple(V[1]),))]
        for e in edges:
            best = np.minimum(best, e.distance(x))
        return best


SPACE_KINDS = ("cross2d", "plane_line3d", "two_planes3d", "segment", "custom_union")


@dataclass
class SpaceSpec:
    kind: str
    params: dict = field(default_factory=dict)
    grid_spacing: float = 0.1

    def __post_init__(self):
        if self.kind not in SPACE_KINDS:
            raise PointCloudError(f"unsupported space kind {self.kind!r}")
        if not self.grid_spacing > 0:
            raise PointCloudError("grid_spacing must be positive")
        for k, v in self.params.items():
            if k != "pieces" and isinstance(v, (int, float)) and k in ("a", "b", "length") and v <= 0:
                raise PointCloudError(f"extent {k} must be positive")

    @property
    def dim(self) -> int:
        return self.pieces()[0].ambient

    def pieces(self) -> list[Piece]:
        """Closures of the maximal strata, as affine patches."""
        p = self.params
        if self.kind == "cross2d":
            a = p.get("a", 1.0)
            return [Piece((-a, 0.0), ((2 * a, 0.0),)), Piece((0.0, -a), ((0.0, 2 * a),))]
        if self.kind == "segment":
            s, e = p.get("start", 0.0), p.get("end", 1.0)
            if not e > s:
                raise PointCloudError("segment needs end > start")
            return [Piece((s, 0.0), ((e - s, 0.0),))]
        if self.kind == "plane_line3d":
            a, b = p.get("a", 1.0), p.get("b", p.get("a", 1.0))
            return [Piece((-a, -a, 0.0), ((2 * a, 0, 0), (0, 2 * a, 0))),
                    Piece((0.0, 0.0, -b), ((0, 0, 2 * b),))]
        if self.kind == "two_planes3d":
            a = p.get("a", 1.0)
            return [Piece((-a, -a, 0.0), ((2 * a, 0, 0), (0, 2 * a, 0))),
                    Piece((0.0, -a, -a), ((0, 2 * a, 0), (0, 0, 2 * a)))]
        pieces = []
        for spec in p.get("pieces", []):
            piece = spec if isinstance(spec, Piece) else Piece(tuple(spec["origin"]),
                                                              tuple(map(tuple, spec["vectors"])))
            if piece.volume() <= 0:
                raise PointCloudError("custom piece has zero extent")
            pieces.append(piece)
        if not pieces:
            raise PointCloudError("custom_union needs at least one piece")
        if len({q.ambient for q in pieces}) != 1:
            raise PointCloudError("custom pieces disagree on ambient dimension")
        return pieces

    def total_volume_by_dim(self) -> dict[int, float]:
        out: dict[int, float] = {}
        for piece in self.pieces():
            out[piece.dim] = out.get(piece.dim, 0.0) + piece.volume()
        return out

    def distance(self, x) -> np.ndarray:
        return np.min([piece.distance(x) for piece in self.pieces()], axis=0)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        corners = []
        for piece in self.pieces():
            V = np.asarray(piece.vectors, dtype=float)
            for bits in np.ndindex(*(2,) * piece.dim):
                corners.append(np.asarray(piece.origin) + np.asarray(bits) @ V)
        corners = np.asarray(corners)
        return corners.min(axis=0), corners.max(axis=0)


def _dedupe(points: np.ndarray) -> np.ndarray:
    keep = np.ones(len(points), dtype=bool)
    for i, j in cKDTree(points).query_pairs(DUPLICATE_TOL):
        keep[max(i, j)] = False
    return points[keep]


def _lattice_on_piece(piece: Piece, s: float) -> np.ndarray:
    """Integer multiples of ``s`` that lie on an axis-aligned piece."""
    lo = np.asarray(piece.origin, dtype=float)
    hi = lo + np.sum(np.asarray(piece.vectors, dtype=float), axis=0)
    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    axes = [np.arange(math.ceil(l / s - 1e-9), math.floor(h / s + 1e-9) + 1) * s
            for l, h in zip(lo, hi)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(lo))


def _axis_aligned(piece: Piece) -> bool:
    return all(np.count_nonzero(np.asarray(v)) == 1 for v in piece.vectors)


def generate_synthetic(spec: SpaceSpec, label: str | None = None) -> PointCloud:
    """Deterministic grid sample with every point exactly on the space."""
    s = spec.grid_spacing
    chunks = []
    for piece in spec.pieces():
        chunks.append(_lattice_on_piece(piece, s) if _axis_aligned(piece) else piece.grid(s))
    pts = _dedupe(np.concatenate(chunks))
    order = np.lexsort(pts.T[::-1])
    return PointCloud(pts[order], label or spec.kind)


def dense_reference(spec: SpaceSpec, step: float) -> np.ndarray:
    return np.concatenate([piece.grid(step) for piece in spec.pieces()])


def directed_hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """sup over a of the distance to the nearest point of b."""
    d, _ = cKDTree(b).query(a)
    return float(np.max(d))


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    if len(a) == 0 or len(b) == 0:
        raise PointCloudError("Hausdorff distance of an empty cloud")
    if a.dim != b.dim:
        raise PointCloudError("clouds differ in dimension")
    return max(directed_hausdorff(a.points, b.points), directed_hausdorff(b.points, a.points))


def covering_radius(cloud: PointCloud, spec: SpaceSpec, step: float | None = None) -> float:
    """Largest distance from the space to the cloud, via a dense reference sample.

    The cloud lies on the space, so this is its Hausdorff distance to it up to
    the reference step.
    """
    step = step or spec.grid_spacing / 20
    return directed_hausdorff(dense_reference(spec, step), cloud.points)


@dataclass
class SamplingModel:
    model: str = "M2"
    delta: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("M1", "M2"):
            raise PointCloudError(f"unknown sampling model {self.model!r}")
        if self.model == "M1" and not (self.delta is not None and self.delta > 0):
            raise PointCloudError("M1 needs a positive thickening delta")


class SamplingError(RuntimeError):
    pass


def sample(spec: SpaceSpec, model: SamplingModel, n: int,
           rng: np.random.Generator | None = None) -> PointCloud:
    """``n`` iid draws from the model; reproducible for a fixed seed."""
    if n < 1:
        raise PointCloudError("n must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(model.seed)
    pieces = spec.pieces()
    if model.model == "M2":
        which = rng.integers(len(pieces), size=n)
        pts = np.empty((n, spec.dim))
        for k, piece in enumerate(pieces):
            idx = np.nonzero(which == k)[0]
            pts[idx] = piece.uniform(rng, len(idx))
        return PointCloud(pts, f"{spec.kind}-M2")
    lo, hi = spec.bounding_box()
    lo, hi = lo - model.delta, hi + model.delta
    out, since_accept = [], 0
    while len(out) < n:
        batch = rng.uniform(lo, hi, size=(max(1024, 4 * (n - len(out))), spec.dim))
        ok = spec.distance(batch) <= model.delta
        for x, good in zip(batch, ok):
            since_accept += 1
            if good:
                out.append(x)
                since_accept = 0
                if len(out) == n:
                    break
            elif since_accept >= MAX_ATTEMPTS:
                raise SamplingError(f"no acceptance in {MAX_ATTEMPTS} attempts")
    return PointCloud(np.asarray(out), f"{spec.kind}-M1")
