"""Persistence diagrams, window queries and the bottleneck distance."""
from __future__ import annotations

import io
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching


@dataclass(frozen=True)
class DiagramPoint:
    dim: int
    birth: float
    death: float  # math.inf when the class outlives the cap
    multiplicity: int = 1

    @property
    def capped(self) -> bool:
        return math.isinf(self.death)


@dataclass
class PersistenceDiagram:
    """Multiset of (dim, birth, death) points; diagonal points are implicit."""

    entries: list[DiagramPoint] = field(default_factory=list)
    cap: float = math.inf

    def __post_init__(self):
        merged: Counter = Counter()
        for e in self.entries:
            if e.multiplicity <= 0:
                raise ValueError("multiplicity must be positive")
            if e.death < e.birth:
                raise ValueError(f"death {e.death} < birth {e.birth}")
            merged[(e.dim, e.birth, e.death)] += e.multiplicity
        self.entries = [DiagramPoint(d, b, x, m) for (d, b, x), m in sorted(merged.items())]

    def __len__(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def __iter__(self):
        return iter(self.entries)

    def dims(self) -> set[int]:
        return {e.dim for e in self.entries}

    def restrict(self, dim: int) -> "PersistenceDiagram":
        return PersistenceDiagram([e for e in self.entries if e.dim == dim], self.cap)

    def points(self, dim: int | None = None) -> np.ndarray:
        """Expanded (birth, death) array, one row per copy."""
        rows = []
        for e in self.entries:
            if dim is None or e.dim == dim:
                rows.extend([(e.birth, e.death)] * e.multiplicity)
        return np.array(rows, dtype=float).reshape(-1, 2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# cap={self.cap!r}\n")
        for e in self.entries:
            death = "inf" if e.capped else repr(e.death)
            buf.write(f"{e.dim},{e.birth!r},{death},{e.multiplicity}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PersistenceDiagram":
        cap = math.inf
        entries = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line[1:].strip().startswith("cap="):
                    cap = float(line.split("=", 1)[1])
                continue
            d, b, x, m = line.split(",")
            entries.append(DiagramPoint(int(d), float(b), float(x), int(m)))
        return cls(entries, cap)

    def save(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def load(cls, path) -> "PersistenceDiagram":
        return cls.from_csv(Path(path).read_text())


def window_query(diagram: PersistenceDiagram, a: float, b: float,
                 tol: float = 0.0) -> PersistenceDiagram:
    """Points born no later than ``a`` that die no earlier than ``b``."""
    if not a < b:
        raise ValueError(f"window needs a < b, got a={a}, b={b}")
    keep = [e for e in diagram.entries if e.birth <= a + tol and e.death >= b - tol]
    return PersistenceDiagram(keep, diagram.cap)


def _finite(points: np.ndarray, cap: float) -> np.ndarray:
    pts = points.copy()
    if len(pts):
        pts[np.isinf(pts[:, 1]), 1] = cap
    return pts


def _matchable(a: np.ndarray, b: np.ndarray, delta: float) -> bool:
    """Is there a diagonal-augmented perfect matching with cost <= delta?"""
    n, m = len(a), len(b)
    size = n + m
    if size == 0:
        return True
    slack = 1e-12 * max(1.0, delta)
    # left: a points then diagonal copies for b; right: b points then diagonal copies for a
    rows, cols = [], []
    if n and m:
        cost = np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]),
                          np.abs(a[:, None, 1] - b[None, :, 1]))
        ii, jj = np.nonzero(cost <= delta + slack)
        rows.extend(ii.tolist())
        cols.extend(jj.tolist())
    for i in range(n):
        if (a[i, 1] - a[i, 0]) / 2 <= delta + slack:
            rows.append(i)
            cols.append(m + i)
    for j in range(m):
        if (b[j, 1] - b[j, 0]) / 2 <= delta + slack:
            rows.append(n + j)
            cols.append(j)
    for j in range(m):
        for i in range(n):
            rows.append(n + j)
            cols.append(m + i)
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(size, size))
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool(np.all(match >= 0))


def bottleneck_points(a: np.ndarray, b: np.ndarray) -> float:
    """Bottleneck distance between two finite (k, 2) point arrays."""
    a = np.asarray(a, dtype=float).reshape(-1, 2)
    b = np.asarray(b, dtype=float).reshape(-1, 2)
    cands = [0.0]
    if len(a) and len(b):
        cands.extend(np.maximum(np.abs(a[:, None, 0] - b[None, :, 0]),
                                np.abs(a[:, None, 1] - b[None, :, 1])).ravel())
    cands.extend((a[:, 1] - a[:, 0]) / 2)
    cands.extend((b[:, 1] - b[:, 0]) / 2)
    cands = np.unique(np.asarray(cands))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _matchable(a, b, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo])


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram,
                        cap: float | None = None) -> float:
    """Max over homological dimensions of the per-dimension bottleneck distance.

    Capped (infinite) deaths are replaced by ``cap``, by default the larger of
    the two diagrams' caps.
    """
    if cap is None:
        caps = [c for c in (d1.cap, d2.cap) if math.isfinite(c)]
        cap = max(caps) if caps else None
    best = 0.0
    for dim in d1.dims() | d2.dims():
        a, b = d1.points(dim), d2.points(dim)
        if cap is None and (np.isinf(a).any() or np.isinf(b).any()):
            raise ValueError("infinite deaths need a finite cap")
        if cap is not None:
            a, b = _finite(a, cap), _finite(b, cap)
        best = max(best, bottleneck_points(a, b))
    return best


def render_svg(diagram: PersistenceDiagram, epsilon: float | None = None,
               size: int = 320) -> str:
    """Minimal SVG scatter of a diagram, with the (eps, 2 eps) window shaded."""
    pts = diagram.points()
    top = diagram.cap if math.isfinite(diagram.cap) else 1.0
    if len(pts):
        finite = pts[np.isfinite(pts[:, 1])]
        if len(finite):
            top = max(top, float(finite.max()))
    top = top * 1.1 or 1.0
    pad = 24
    span = size - 2 * pad

    def sx(x):
        return pad + span * x / top

    def sy(y):
        return size - pad - span * y / top

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
           f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(top)}" y2="{sy(top)}" stroke="gray"/>']
    if epsilon is not None:
        # window: born <= eps, dies >= 2 eps
        out.append(f'<rect x="{sx(0)}" y="{sy(top)}" width="{sx(epsilon) - sx(0)}" '
                   f'height="{sy(2 * epsilon) - sy(top)}" fill="orange" fill-opacity="0.3"/>')
    colors = ["black", "blue", "red", "green"]
    for e in diagram.entries:
        y = top / 1.1 if e.capped else e.death
        out.append(f'<circle cx="{sx(e.birth):.2f}" cy="{sy(y):.2f}" r="3" '
                   f'fill="{colors[e.dim % 4]}"><title>dim {e.dim} x{e.multiplicity}</title></circle>')
    out.append("</svg>")
    return "\n".join(out)
