import math

import numpy as np
import pytest

from stratlearn.pointcloud import SpaceSpec
from stratlearn.sampling_bounds import (ball_mass, covering_packing_estimates, min_sample_size,
                                        sampling_bound, volume_fraction)

CROSS = SpaceSpec("cross2d", {"a": 1.0})


def _mass_by_counting(spec, centre, R, step=1e-3):
    # fraction of a fine grid on each piece inside the ball, averaged over pieces
    fr = []
    for piece in spec.pieces():
        g = piece.grid(step)
        fr.append(np.mean(np.linalg.norm(g - centre, axis=1) <= R))
    return float(np.mean(fr))


@pytest.mark.parametrize("spec, centre, R", [
    (CROSS, (0.0, 0.0), 0.3),
    (CROSS, (0.95, 0.0), 0.2),
    (SpaceSpec("plane_line3d", {"a": 1.0}), (0.0, 0.0, 0.0), 0.4),
    (SpaceSpec("two_planes3d", {"a": 1.0}), (0.0, 0.9, 0.0), 0.3),
])
def test_ball_mass_matches_counting(spec, centre, R):
    got = ball_mass(spec, np.array([centre]), R)[0]
    step = 2e-3 if spec.dim == 2 else 1e-2
    assert got == pytest.approx(_mass_by_counting(spec, centre, R, step), rel=0.03)


def test_segment_fraction():
    # a ball of radius rho/24 at an end covers rho/24 of a unit segment
    v = volume_fraction(SpaceSpec("segment"), 2.4)
    assert v == pytest.approx(0.1, rel=1e-2) and v <= 0.1


def test_cross_fraction_and_bound():
    spec = SpaceSpec("cross2d", {"a": 1.0})
    rep = sampling_bound(spec, 0.3, 0.05)
    # worst centre is an arm tip: half of rho/24 over an arm of length 2, from one of two arms
    assert rep.v == pytest.approx(0.3 / 24 / 2 / 2)
    assert rep.n_min == min_sample_size(rep.v, 0.05) == 2805
    assert rep.to_text().splitlines() == ["rho: 0.3", f"v: {rep.v!r}", "xi: 0.05", "n_min: 2805"]


def test_min_sample_size_examples():
    assert min_sample_size(0.01, 0.05) == 761
    assert min_sample_size(1.0, 1 / math.e) == 1
    with pytest.raises(ValueError):
        min_sample_size(0.0, 0.1)
    with pytest.raises(ValueError):
        min_sample_size(0.1, 1.0)


def test_n_min_is_monotone():
    ns = [min_sample_size(v, 0.05) for v in (0.2, 0.1, 0.05, 0.01)]
    assert ns == sorted(ns)
    ns = [min_sample_size(0.05, xi) for xi in (0.5, 0.1, 0.01)]
    assert ns == sorted(ns)
    vs = [volume_fraction(CROSS, rho) for rho in (0.2, 0.4, 0.8)]
    assert vs == sorted(vs)


def test_covering_packing_on_segment():
    seg = SpaceSpec("segment")
    assert covering_packing_estimates(seg, 0.5) == (1, 1)
    assert covering_packing_estimates(seg, 0.1) == (5, 5)


def test_covering_packing_sandwich():
    rng = np.random.default_rng(0)
    for _ in range(5):
        pieces = [{"origin": tuple(rng.uniform(-1, 1, 2)), "vectors": [tuple(rng.uniform(-1, 1, 2))]}
                  for _ in range(rng.integers(1, 4))]
        spec = SpaceSpec("custom_union", {"pieces": pieces})
        eps = float(rng.uniform(0.1, 0.3))
        c1, p1 = covering_packing_estimates(spec, eps)
        c2, p2 = covering_packing_estimates(spec, 2 * eps)
        assert p2 <= c2 and p1 <= c1
        assert p2 <= p1 and c2 <= c1


def test_volume_fraction_validation():
    with pytest.raises(ValueError):
        volume_fraction(CROSS, 0.0)
