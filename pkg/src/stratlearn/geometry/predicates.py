"""Orientation and in-circle tests with a float filter and exact fallback."""
from __future__ import annotations

from fractions import Fraction

_EPS = 2.0 ** -53
_ORIENT_BOUND = (3.0 + 16.0 * _EPS) * _EPS
_INCIRCLE_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def _sign(x) -> int:
    return int(x > 0) - int(x < 0)


def orient2d(a, b, c) -> int:
    """+1 if a, b, c turn counter-clockwise, -1 if clockwise, 0 if collinear."""
    l = (a[0] - c[0]) * (b[1] - c[1])
    r = (a[1] - c[1]) * (b[0] - c[0])
    det = l - r
    if abs(det) > _ORIENT_BOUND * (abs(l) + abs(r)):
        return _sign(det)
    A = [Fraction(v) for v in (a[0], a[1], b[0], b[1], c[0], c[1])]
    return _sign((A[0] - A[4]) * (A[3] - A[5]) - (A[1] - A[5]) * (A[2] - A[4]))


def _incircle_exact(a, b, c, d) -> int:
    rows = []
    for p in (a, b, c):
        x = Fraction(p[0]) - Fraction(d[0])
        y = Fraction(p[1]) - Fraction(d[1])
        rows.append((x, y, x * x + y * y))
    (ax, ay, az), (bx, by, bz), (cx, cy, cz) = rows
    det = (az * (bx * cy - by * cx) - bz * (ax * cy - ay * cx) + cz * (ax * by - ay * bx))
    return _sign(det)


def incircle(a, b, c, d) -> int:
    """+1 if d is strictly inside the circle through CCW a, b, c; 0 if on it."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    t1, t2 = bdx * cdy, cdx * bdy
    t3, t4 = cdx * ady, adx * cdy
    t5, t6 = adx * bdy, bdx * ady
    det = alift * (t1 - t2) + blift * (t3 - t4) + clift * (t5 - t6)
    perm = (alift * (abs(t1) + abs(t2)) + blift * (abs(t3) + abs(t4))
            + clift * (abs(t5) + abs(t6)))
    if abs(det) > _INCIRCLE_BOUND * perm:
        return _sign(det)
    return _incircle_exact(a, b, c, d)


def incircle_perturbed(pts, ia: int, ib: int, ic: int, id_: int) -> int:
    """In-circle sign under a symbolic lift perturbation; never zero.

    Each lifted height ``|x_k|^2`` is raised by ``eps ** (k + 1)`` with ``k``
    the global point index, so ties are broken by the cofactor of the
    smallest index whose cofactor is nonzero. ``ia, ib, ic`` must be CCW.
    """
    s = incircle(pts[ia], pts[ib], pts[ic], pts[id_])
    if s:
        return s
    # det of rows (x, y, x^2+y^2, 1) for (a, b, c, d) has the sign of incircle;
    # its derivative in z_k is (-1)^k times orient of the other three rows
    idx = [ia, ib, ic, id_]
    for k in sorted(range(4), key=lambda t: idx[t]):
        others = [pts[idx[t]] for t in range(4) if t != k]
        cof = orient2d(*others) * (-1) ** k
        if cof:
            return cof
    raise ValueError("in-circle query on a degenerate triangle")
