import math

import numpy as np
import pytest

from oracles import dense_module_ranks
from stratlearn.cubical_oracle import (CubicalGrid, _spread_min, cubical_filtered_map,
                                       cubical_level_ranks, cubical_window_diagrams,
                                       feature_size_report, rasterize, rasterize_pair,
                                       snap_to_levels, window_levels)
from stratlearn.geometry.nerve import PairContext
from stratlearn.persistence import module_rank_functions
from stratlearn.pointcloud import SpaceSpec


def test_point_on_corner_fills_four_cubes():
    g = rasterize(np.array([[0.0, 0.0]]), [-1, -1], 0.5, (4, 4))
    assert np.count_nonzero(g.field == 0) == 4
    assert g.field[0, 0] == pytest.approx(math.hypot(0.75, 0.75))


def test_spec_raster_matches_distance():
    spec = SpaceSpec("cross2d", {"a": 1.0})
    g = rasterize(spec, [-1.2, -1.2], 0.1, (24, 24))
    c = g.centers().reshape(-1, 2)
    d = spec.distance(c)
    assert np.allclose(g.field.ravel(), np.where(d <= 0.05, 0, d))


def test_spread_min_takes_incident_minimum():
    top = np.array([[3.0, 1.0], [2.0, 5.0]])
    full = _spread_min(top)
    assert full.shape == (5, 5)
    assert full[2, 2] == 1.0                # centre vertex touches all four
    assert full[0, 0] == 3.0 and full[1, 2] == 1.0 and full[4, 1] == 2.0


def test_snap_to_levels():
    lv = np.array([0.0, 0.5, 1.0])
    assert snap_to_levels(np.array([0.0, 0.2, 0.5, 1.0, 1.5]), lv).tolist() == [0, 0.5, 0.5, 1.0, math.inf]


def test_binary_round_trip(tmp_path):
    g = rasterize(np.array([[0.1, 0.2, 0.3]]), [-1, -1, -1], 0.25, (8, 8, 8))
    g.save(tmp_path / "g.bin")
    h = CubicalGrid.load(tmp_path / "g.bin")
    assert h.shape == g.shape and h.h == g.h
    assert np.array_equal(h.lo, g.lo) and np.array_equal(h.field, g.field)


def test_cubical_map_matches_dense_oracle():
    rng = np.random.default_rng(1)
    levels = np.array([0.0, 0.1, 0.2, 0.3])
    for trial in range(6):
        pts = rng.uniform(-1, 1, (12, 2))
        ctx = PairContext(pts[0], pts[1], 0.8, 0.1)
        g = rasterize_pair(pts, ctx, h=0.2)
        fm = cubical_filtered_map(g, ctx, levels)
        eng = module_rank_functions(fm, 1, crit=levels, check=True)
        ref = dense_module_ranks(fm, levels, 1)
        for key, m in ref.items():
            assert np.array_equal(np.triu(eng[key].r), np.triu(m)), (trial, key)


def test_cross_centre_to_arm_kernel_has_two_loops():
    # from the centre the ball pair of a cross has four arms; the lens around a
    # point on one arm keeps one of them, so two relative 1-classes die
    spec = SpaceSpec("cross2d", {"a": 1.5})
    ctx = PairContext((0, 0), (1.4, 0), 1.0, 0.05)
    r = cubical_level_ranks(rasterize_pair(spec, ctx), ctx, [0.0, 0.05], max_dim=1)
    assert r[("kernel", 1)][0, 0] == 2 and r[("kernel", 1)][0, 1] == 2
    assert not r[("cokernel", 1)].any() and not r[("kernel", 0)].any()


def test_coincident_pair_has_empty_windows():
    spec = SpaceSpec("cross2d", {"a": 1.5})
    ctx = PairContext((0.5, 0), (0.5, 0), 0.4, 0.05)
    dg = cubical_window_diagrams(rasterize_pair(spec, ctx), ctx)
    assert len(dg["kernel"]) == 0 and len(dg["cokernel"]) == 0


def test_window_input_validation():
    spec = SpaceSpec("cross2d", {"a": 1.5})
    ctx = PairContext((0, 0), (0.5, 0), 0.4, 0.0)
    g = rasterize_pair(spec, ctx)
    with pytest.raises(ValueError):
        cubical_window_diagrams(g, ctx)
    with pytest.raises(ValueError):
        cubical_window_diagrams(g, PairContext((0, 0), (1.0, 0), 0.4, 0.05))
    assert window_levels(1.0)[-1] < 2.0


def test_feature_size_of_a_segment_end():
    # a segment ending inside B_r(p): the ball pair changes when the end's
    # sphere meets the boundary, at r - |p - end|
    spec = SpaceSpec("segment", {"start": -10.0, "end": 0.6})
    ctx = PairContext((0, 0), (-0.5, 0), 1.0)
    g = rasterize_pair(spec, ctx, h=1 / 32)
    rep = feature_size_report(g, ctx)
    assert abs(rep.sigma_p - 0.4) <= rep.error_bar


def test_crossing_ball_pair_has_rank_three():
    # four arm ends on the sphere: H1(B, dB) of the cross has rank three
    spec = SpaceSpec("cross2d", {"a": 1.5})
    ctx = PairContext((0, 0), (1.4, 0), 1.0, 0.05)
    r = cubical_level_ranks(rasterize_pair(spec, ctx), ctx, [0.0, 0.05], max_dim=1, which=("domain",))
    assert r[("domain", 1)][0, 0] == 3


def test_refining_the_grid_halves_the_field_error():
    spec = SpaceSpec("cross2d", {"a": 1.0})
    x = np.random.default_rng(0).uniform(-0.9, 0.9, (200, 2))
    errs = []
    for h in (0.04, 0.02):
        g = rasterize(spec, [-1.2, -1.2], h, (int(2.4 / h),) * 2)
        cell = np.floor((x - g.lo) / h).astype(int)
        errs.append(np.max(np.abs(g.field[tuple(cell.T)] - spec.distance(x))))
        assert errs[-1] <= h * math.sqrt(2) / 2 + 1e-12
    assert errs[1] <= 0.6 * errs[0]


def test_refining_rho_stays_within_error_bar():
    spec = SpaceSpec("segment", {"start": -10.0, "end": 0.6})
    ctx = PairContext((0, 0), (-0.5, 0), 1.0)
    coarse = feature_size_report(rasterize_pair(spec, ctx, h=1 / 16), ctx)
    fine = feature_size_report(rasterize_pair(spec, ctx, h=1 / 32), ctx)
    assert abs(fine.rho - coarse.rho) <= coarse.error_bar
