"""Planar convex regions cut out by halfplanes, disks and one optional line.

Minimisation is exact up to floating point: in the plane the optimum of a
convex quadratic or linear objective sits at a point where at most two
constraints are active, so it suffices to enumerate the stationary point of
each active set (free minimiser, projections onto lines, extreme points of
circles, pairwise intersections) and keep the best feasible one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Quadratic:
    """``|x - u|^2``"""

    u: tuple

    def __call__(self, x: np.ndarray) -> np.ndarray:
        d = np.asarray(x) - np.asarray(self.u)
        return np.einsum("...i,...i->...", d, d)


@dataclass(frozen=True)
class Linear:
    """``g . x + c``"""

    g: tuple
    c: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ np.asarray(self.g) + self.c


@dataclass
class ConvexRegion:
    normals: list = field(default_factory=list)   # unit a with a . x <= b
    offsets: list = field(default_factory=list)
    balls: list = field(default_factory=list)     # (center, radius)
    line: tuple | None = None                     # (a, b) with a . x == b

    def copy(self) -> "ConvexRegion":
        return ConvexRegion(list(self.normals), list(self.offsets), list(self.balls), self.line)

    def add_halfplane(self, a, b) -> None:
        a = np.asarray(a, dtype=float)
        n = float(np.hypot(*a))
        if n == 0.0:
            if b < 0:
                raise ValueError("infeasible constant constraint")
            return
        self.normals.append(a / n)
        self.offsets.append(float(b) / n)

    def add_ball(self, center, radius) -> None:
        self.balls.append((np.asarray(center, dtype=float), float(radius)))

    def set_line(self, a, b) -> None:
        a = np.asarray(a, dtype=float)
        n = float(np.hypot(*a))
        self.line = (a / n, float(b) / n)

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        """Vectorised membership test for points ``x`` of shape (..., 2)."""
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        if self.normals:
            A = np.asarray(self.normals)
            ok &= np.all(x @ A.T - np.asarray(self.offsets) <= tol, axis=-1)
        for c, R in self.balls:
            ok &= np.linalg.norm(x - c, axis=-1) <= R + tol
        if self.line is not None:
            a, b = self.line
            ok &= np.abs(x @ a - b) <= tol
        return ok

    def _lines(self):
        lines = [(np.asarray(a), b) for a, b in zip(self.normals, self.offsets)]
        if self.line is not None:
            lines.append(self.line)
        return lines

    def candidates(self, target: np.ndarray | None, direction: np.ndarray | None,
                   tol: float) -> np.ndarray:
        """Stationary points of every active set of size at most two."""
        lines = self._lines()
        balls = self.balls
        out = []
        if target is not None:
            out.append(target)
            for a, b in lines:
                out.append(target - (a @ target - b) * a)
            for c, R in balls:
                d = target - c
                n = np.hypot(*d)
                if n > 0:
                    out.extend([c + R * d / n, c - R * d / n])
                else:
                    out.extend([c + R * e for e in (np.array([1.0, 0]), np.array([0, 1.0]))])
        if direction is not None:
            n = np.hypot(*direction)
            for c, R in balls:
                out.append(c - R * direction / n)
        if len(lines) > 1:
            A = np.array([a for a, _ in lines])
            B = np.array([b for _, b in lines])
            i, j = np.triu_indices(len(lines), 1)
            det = A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]
            keep = np.abs(det) > 1e-14
            i, j, det = i[keep], j[keep], det[keep]
            x = (B[i] * A[j, 1] - B[j] * A[i, 1]) / det
            y = (A[i, 0] * B[j] - A[j, 0] * B[i]) / det
            out.extend(np.stack([x, y], axis=1))
        for a, b in lines:
            for c, R in balls:
                h = b - a @ c
                if abs(h) > R + tol:
                    continue
                foot = c + h * a
                half = math.sqrt(max(0.0, R * R - h * h))
                t = np.array([-a[1], a[0]])
                out.extend([foot + half * t, foot - half * t])
        for k in range(len(balls)):
            for m in range(k + 1, len(balls)):
                (c1, r1), (c2, r2) = balls[k], balls[m]
                d = float(np.hypot(*(c2 - c1)))
                if d == 0.0 or d > r1 + r2 + tol or d < abs(r1 - r2) - tol:
                    continue
                s = (d * d + r1 * r1 - r2 * r2) / (2 * d)
                half = math.sqrt(max(0.0, r1 * r1 - s * s))
                e = (c2 - c1) / d
                t = np.array([-e[1], e[0]])
                base = c1 + s * e
                out.extend([base + half * t, base - half * t])
        if not out:
            return np.zeros((0, 2))
        return np.asarray(out, dtype=float).reshape(-1, 2)

    def minimize(self, objective, tol: float = 1e-12):
        """``(value, argmin)`` of a quadratic or linear objective; ``(inf, None)`` if empty."""
        if isinstance(objective, Quadratic):
            target, direction = np.asarray(objective.u, dtype=float), None
        elif isinstance(objective, Linear):
            g = np.asarray(objective.g, dtype=float)
            if np.hypot(*g) <= 1e-300:
                # constant objective: any feasible point will do
                anchor = self.balls[0][0] if self.balls else np.zeros(2)
                target, direction = anchor, None
            else:
                target, direction = None, g
        else:
            raise TypeError(f"unsupported objective {objective!r}")
        cand = self.candidates(target, direction, tol)
        if len(cand) == 0:
            return math.inf, None
        feas = self.contains(cand, tol)
        if not np.any(feas):
            return math.inf, None
        cand = cand[feas]
        vals = objective(cand)
        k = int(np.argmin(vals))
        return float(vals[k]), cand[k]

    def is_empty(self, tol: float = 1e-12) -> bool:
        anchor = self.balls[0][0] if self.balls else np.zeros(2)
        return math.isinf(self.minimize(Quadratic(tuple(anchor)), tol)[0])
