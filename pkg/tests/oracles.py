"""Slow, independent reference computations used only by the tests."""
import itertools
import math
import random

import numpy as np


# dense Z/2 linear algebra on uint8 matrices

def rank2(M) -> int:
    A = np.array(M, dtype=np.uint8) % 2
    if A.size == 0:
        return 0
    rank = 0
    rows, cols = A.shape
    for c in range(cols):
        hit = np.nonzero(A[rank:, c])[0]
        if len(hit) == 0:
            continue
        k = rank + hit[0]
        A[[rank, k]] = A[[k, rank]]
        below = np.nonzero(A[:, c])[0]
        below = below[below != rank]
        A[below] ^= A[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def nullspace2(M) -> np.ndarray:
    """Basis of {x : M x = 0} over Z/2, as columns."""
    A = np.array(M, dtype=np.uint8) % 2
    rows, cols = A.shape
    piv = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(A[r:, c])[0]
        if len(hit) == 0:
            continue
        k = r + hit[0]
        A[[r, k]] = A[[k, r]]
        others = np.nonzero(A[:, c])[0]
        others = others[others != r]
        A[others] ^= A[r]
        piv.append(c)
        r += 1
    free = [c for c in range(cols) if c not in piv]
    basis = np.zeros((cols, len(free)), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[f, k] = 1
        for row, pc in enumerate(piv):
            basis[pc, k] = A[row, f]
    return basis


def _hstack(*blocks, rows):
    blocks = [b for b in blocks if b.shape[1]]
    return np.hstack(blocks) if blocks else np.zeros((rows, 0), dtype=np.uint8)


def dense_module_ranks(fm, levels, max_dim):
    """``r[(which, d)][i, j]`` by dense matrices, straight from the definitions.

    A cell is in the domain quotient at level a when dom <= a < dom_sub, in the
    range quotient when rng <= a < rng_sub; the map keeps cells lying in both.
    """
    n = fm.n_cells
    dims = np.asarray(fm.dims)
    D = np.zeros((n, n), dtype=np.uint8)
    for c, fs in enumerate(fm.faces):
        for f in fs:
            D[f, c] ^= 1
    vals = [np.asarray(x, dtype=float) for x in (fm.dom, fm.dom_sub, fm.rng, fm.rng_sub)]
    dm = [(vals[0] <= a) & (vals[1] > a) for a in levels]
    rm = [(vals[2] <= a) & (vals[3] > a) for a in levels]

    def bd(member, d):
        # boundary C_d -> C_{d-1} of the quotient: rows/cols restricted to member cells
        rows = np.nonzero(member & (dims == d - 1))[0]
        cols = np.nonzero(member & (dims == d))[0]
        return D[np.ix_(rows, cols)], rows, cols

    def cycles(member, d):
        M, _, cols = bd(member, d)
        Z = nullspace2(M) if len(cols) else np.zeros((0, 0), dtype=np.uint8)
        full = np.zeros((n, Z.shape[1]), dtype=np.uint8)
        full[cols] = Z
        return full

    def bounds(member, d):
        M, rows, _ = bd(member, d + 1)
        full = np.zeros((n, M.shape[1]), dtype=np.uint8)
        full[rows] = M
        return full

    def mask(X, member):
        Y = X.copy()
        Y[~member] = 0
        return Y

    L = len(levels)
    out = {}
    for d in range(max_dim + 1):
        Zd = [cycles(m, d) for m in dm]
        Bd = [bounds(m, d) for m in dm]
        Zr = [cycles(m, d) for m in rm]
        Br = [bounds(m, d) for m in rm]
        K = []
        for i in range(L):
            # z in Z(D_i) with psi z + boundary in R_i = 0
            rowsR = np.nonzero(rm[i] & (dims == d))[0]
            if Zd[i].shape[1] == 0:
                K.append(np.zeros((n, 0), dtype=np.uint8))
                continue
            psiZ = mask(Zd[i], rm[i])[rowsR]
            Bm = Br[i][rowsR]
            N = nullspace2(_hstack(psiZ, Bm, rows=len(rowsR))) if len(rowsR) else np.eye(Zd[i].shape[1] + Bm.shape[1], dtype=np.uint8)
            K.append((Zd[i].astype(int) @ N[:Zd[i].shape[1]].astype(int) % 2).astype(np.uint8))
        mats = {w: np.zeros((L, L), dtype=int) for w in ("kernel", "cokernel", "domain", "range")}
        for i in range(L):
            for j in range(i, L):
                base = rank2(Bd[j])
                mats["kernel"][i, j] = rank2(_hstack(mask(K[i], dm[j]), Bd[j], rows=n)) - base
                mats["domain"][i, j] = rank2(_hstack(mask(Zd[i], dm[j]), Bd[j], rows=n)) - base
                baseR = rank2(Br[j])
                mats["range"][i, j] = rank2(_hstack(mask(Zr[i], rm[j]), Br[j], rows=n)) - baseR
                im = _hstack(Br[j], mask(Zd[j], rm[j]), rows=n)
                mats["cokernel"][i, j] = rank2(_hstack(mask(Zr[i], rm[j]), im, rows=n)) - rank2(im)
        for w, m in mats.items():
            out[(w, d)] = m
    return out


# random filtered complexes

def random_complex(rng: random.Random, n: int = 40, values=(0, 1, 2, 3, 4)):
    """Face-closed random simplicial complex with a face-monotone integer filtration."""
    nv = rng.randint(3, 7)
    cells = [(v,) for v in range(nv)]
    pool = [c for k in (2, 3, 4) for c in itertools.combinations(range(nv), k)]
    rng.shuffle(pool)
    for c in pool:
        if len(cells) >= n:
            break
        cells.append(c)
    S = set(cells)
    for c in list(S):
        for k in range(1, len(c)):
            S.update(itertools.combinations(c, k))
    cells = sorted(S, key=lambda c: (len(c), c))
    idx = {c: i for i, c in enumerate(cells)}
    faces = [[idx[c[:k] + c[k + 1:]] for k in range(len(c))] if len(c) > 1 else [] for c in cells]
    dims = [len(c) - 1 for c in cells]
    return dims, faces, monotone(rng, faces, values)


def monotone(rng, faces, values):
    b = [float(rng.choice(values)) for _ in faces]
    for i, fs in enumerate(faces):
        b[i] = max([b[i]] + [b[f] for f in fs])
    return b


# brute-force bottleneck

def brute_bottleneck(a, b) -> float:
    """Min over all bijections of the diagonal-augmented diagrams (tiny inputs only)."""
    a = [tuple(p) for p in a]
    b = [tuple(p) for p in b]
    diag_a = [((x + y) / 2, (x + y) / 2) for x, y in a]
    diag_b = [((x + y) / 2, (x + y) / 2) for x, y in b]
    left = a + diag_b
    right = b + diag_a
    n, m = len(a), len(b)
    best = math.inf
    for perm in itertools.permutations(range(len(right))):
        cost = 0.0
        for i, j in enumerate(perm):
            li_diag, rj_diag = i >= n, j >= m
            if li_diag and rj_diag:
                c = 0.0
            elif li_diag:
                c = (right[j][1] - right[j][0]) / 2
            elif rj_diag:
                c = (left[i][1] - left[i][0]) / 2
            else:
                c = max(abs(left[i][0] - right[j][0]), abs(left[i][1] - right[j][1]))
            cost = max(cost, c)
            if cost >= best:
                break
        best = min(best, cost)
    return best if (n or m) else 0.0


def random_diagram(rng, k, lo=0.0, hi=1.0):
    pts = []
    for _ in range(k):
        x, y = sorted(rng.uniform(lo, hi) for _ in range(2))
        pts.append((x, y))
    return pts
