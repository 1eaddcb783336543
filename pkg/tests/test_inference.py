import numpy as np
import pytest

from stratlearn.inference import (UnionFind, candidate_pairs, component_labels, pair_test,
                                  pair_weight, spectral_partition, strata_clusters)


def _index(U, *x):
    return int(np.argmin(np.linalg.norm(U.points - np.asarray(x), axis=1)))


def test_far_and_same_pairs(cross_grid):
    _, U, eps = cross_grid
    i, j = _index(U, -1.5, 0), _index(U, 1.5, 0)
    assert pair_test(U, i, j, 0.4, eps).reason == "far"
    assert pair_weight(U, i, j, 0.4, eps) == 0
    res = pair_test(U, i, i, 0.4, eps)
    assert res.reason == "same" and res.weight == 1


@pytest.mark.parametrize("mode", ["nerve2d", "cubical"])
def test_cross_verdicts(cross_grid, mode):
    _, U, eps = cross_grid
    same = pair_test(U, _index(U, 0.7, 0), _index(U, 1.0, 0), 0.4, eps, mode)
    assert same.weight == 1 and all(d.empty for d in same.directions)
    diff = pair_test(U, _index(U, 0, 0), _index(U, 0.6, 0), 0.4, eps, mode)
    assert diff.weight == 0
    assert any(len(d.kernel_window) for d in diff.directions)


def test_nonpositive_eps_rejected(cross_grid):
    _, U, _ = cross_grid
    with pytest.raises(ValueError):
        pair_test(U, 0, 1, 0.4, 0.0)


def test_union_find_and_labels():
    uf = UnionFind(4)
    uf.union(3, 1)
    uf.union(1, 2)
    assert uf.find(3) == uf.find(2) == 1 and uf.find(0) == 0
    W = np.eye(6, dtype=int)
    W[1, 2] = W[2, 1] = W[2, 3] = W[3, 2] = 1
    assert component_labels(W).tolist() == [0, 1, 1, 1, 2, 3]


def test_labels_are_permutation_invariant():
    rng = np.random.default_rng(0)
    n = 12
    A = np.triu(rng.random((n, n)) < 0.15, 1)
    W = (A | A.T | np.eye(n, dtype=bool)).astype(int)
    lab = component_labels(W)
    perm = rng.permutation(n)
    lab2 = component_labels(W[np.ix_(perm, perm)])
    # same partition, possibly renamed
    for a in range(n):
        for b in range(n):
            assert (lab[perm[a]] == lab[perm[b]]) == (lab2[a] == lab2[b])


@pytest.mark.parametrize("edges, n, lam", [
    ([(0, 1), (1, 2)], 3, 1.0),                # path P3
    ([(0, 1), (1, 2), (0, 2)], 3, 3.0),        # triangle K3
    ([(0, 1), (2, 3)], 4, 0.0),                # two components
])
def test_fiedler_values(edges, n, lam):
    W = np.eye(n)
    for a, b in edges:
        W[a, b] = W[b, a] = 1
    assert spectral_partition(W).lambda1 == pytest.approx(lam, abs=1e-12)


def test_fiedler_split_separates_clean_components():
    W = np.eye(6)
    for a, b in [(0, 1), (1, 2), (3, 4), (4, 5)]:
        W[a, b] = W[b, a] = 1
    s = spectral_partition(W).split
    assert len(set(s[:3])) == 1 and len(set(s[3:])) == 1 and s[0] != s[3]


def test_spectral_rejects_asymmetric():
    with pytest.raises(ValueError):
        spectral_partition(np.array([[1, 1], [0, 1]]))


def test_candidate_pairs():
    pts = np.array([[0, 0], [0.5, 0], [2, 0]])
    assert candidate_pairs(pts, 0.3) == [(0, 1)]
    assert candidate_pairs(pts, 0.3, [(1, 0), (2, 2)]) == [(0, 1)]
    with pytest.raises(IndexError):
        candidate_pairs(pts, 0.3, [(0, 5)])


def test_clustering_outputs(cross_grid):
    _, U, eps = cross_grid
    arm = [_index(U, x, 0) for x in (0.7, 0.8, 0.9, 1.0)]
    pairs = [(arm[k], arm[k + 1]) for k in range(3)]
    res = strata_clusters(U, 0.4, eps, pairs=pairs, spectral=True)
    lab = res.labels
    assert len({lab[k] for k in arm}) == 1
    assert res.n_clusters == len(U) - 3 and sum(res.sizes()) == len(U)
    assert res.labels_csv().splitlines()[0] == "point_index,label"
    w = res.weights_csv().splitlines()
    assert w[0] == "i,j,w" and len(w) == 4
    assert "clusters:" in res.summary() and "lambda1: 0" in res.summary()


def test_cross_arm_partition_matches_oracle(cross_grid):
    # every candidate pair touching the +x arm; the cubical oracle fixes the expected weights
    _, U, eps = cross_grid
    P = U.points
    arm = set(np.nonzero((P[:, 1] == 0) & (P[:, 0] >= 0))[0].tolist())
    pairs = [pq for pq in candidate_pairs(P, 0.4) if arm & set(pq)]
    nerve = strata_clusters(U, 0.4, eps, "nerve2d", pairs)
    oracle = strata_clusters(U, 0.4, eps, "cubical", pairs)
    assert np.array_equal(nerve.W, oracle.W)
    lab = nerve.labels
    tips = {lab[_index(U, x, 0)] for x in (1.2, 1.3, 1.4, 1.5)}
    assert len(tips) == 1 and lab[_index(U, 0, 0)] not in tips
