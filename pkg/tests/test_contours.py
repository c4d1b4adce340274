import json

import numpy as np
import pytest

from contextfield import (
    GridSpec,
    ScalarFieldGrid,
    extract_contours,
    marching_squares,
    topographic_levels,
)
from contextfield.contours import contours_from_json, contours_to_json
from contextfield.errors import DegenerateRange


def grid_from(values, bbox=(0.0, 0.0, 1.0, 1.0)):
    values = np.asarray(values, dtype=float)
    h, w = values.shape
    return ScalarFieldGrid(values, GridSpec(*bbox, w, h))


def bilinear(grid, x, y):
    # Oracle: independent bilinear interpolation on the grid.
    g = grid.spec
    fx = (x - g.xmin) / (g.xmax - g.xmin) * (g.width - 1)
    fy = (y - g.ymin) / (g.ymax - g.ymin) * (g.height - 1)
    ix = min(int(np.floor(fx)), g.width - 2)
    iy = min(int(np.floor(fy)), g.height - 2)
    tx, ty = fx - ix, fy - iy
    v = grid.values
    return (
        v[iy, ix] * (1 - tx) * (1 - ty)
        + v[iy, ix + 1] * tx * (1 - ty)
        + v[iy + 1, ix] * (1 - tx) * ty
        + v[iy + 1, ix + 1] * tx * ty
    )


def radial_bump(size=33, bbox=(-1.0, -1.0, 1.0, 1.0)):
    xs = np.linspace(bbox[0], bbox[2], size)
    ys = np.linspace(bbox[1], bbox[3], size)
    gx, gy = np.meshgrid(xs, ys)
    return grid_from(np.exp(-4.0 * (gx ** 2 + gy ** 2)), bbox)


def flood_fill_components(values, level):
    # Oracle: 4-connected components of the super-level set.
    above = values > level
    seen = np.zeros_like(above, dtype=bool)
    h, w = above.shape
    count = 0
    for sy in range(h):
        for sx in range(w):
            if not above[sy, sx] or seen[sy, sx]:
                continue
            count += 1
            stack = [(sy, sx)]
            seen[sy, sx] = True
            while stack:
                y, x = stack.pop()
                for ny, nx in ((y-1, x), (y+1, x), (y, x-1), (y, x+1)):
                    if 0 <= ny < h and 0 <= nx < w and above[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        stack.append((ny, nx))
    return count


def refine4(grid):
    # Bilinear refinement onto a 4x denser grid.
    g = grid.spec
    w2, h2 = 4 * (g.width - 1) + 1, 4 * (g.height - 1) + 1
    xs = np.linspace(g.xmin, g.xmax, w2)
    ys = np.linspace(g.ymin, g.ymax, h2)
    out = np.empty((h2, w2))
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            out[iy, ix] = bilinear(grid, x, y)
    return out


def test_constant_grid_empty():
    g = grid_from(np.full((4, 4), 2.0))
    assert marching_squares(g, 0.5) == []
    assert marching_squares(g, 2.0) == []


def test_two_by_two_open_segment():
    g = grid_from([[0.0, 0.0], [1.0, 1.0]])
    pls = marching_squares(g, 0.5)
    assert len(pls) == 1
    pl = pls[0]
    assert not pl.closed
    assert len(pl.points) == 2
    # crossings at parameter 0.5 on both vertical edges
    ys = sorted(p[1] for p in pl.points)
    assert ys == pytest.approx([0.5, 0.5])
    assert sorted(p[0] for p in pl.points) == pytest.approx([0.0, 1.0])


def test_radial_bump_single_closed_loop():
    g = radial_bump()
    pls = marching_squares(g, 0.5)
    assert len(pls) == 1
    assert pls[0].closed


def test_loop_count_matches_flood_fill():
    g = radial_bump()
    for level in (0.2, 0.5, 0.8):
        pls = marching_squares(g, level)
        closed = [p for p in pls if p.closed]
        assert len(pls) == len(closed)
        components = flood_fill_components(refine4(g), level)
        assert len(closed) == components


def test_two_bumps_two_loops():
    xs = np.linspace(-2, 2, 65)
    ys = np.linspace(-1, 1, 33)
    gx, gy = np.meshgrid(xs, ys)
    v = np.exp(-8 * ((gx - 1) ** 2 + gy ** 2)) + np.exp(
        -8 * ((gx + 1) ** 2 + gy ** 2)
    )
    g = grid_from(v, (-2.0, -1.0, 2.0, 1.0))
    pls = marching_squares(g, 0.5)
    assert len(pls) == 2
    assert all(p.closed for p in pls)
    assert flood_fill_components(refine4(g), 0.5) == 2


def test_vertices_re_interpolate_to_level():
    g = radial_bump()
    zrange = g.zmax - g.zmin
    for level in (0.15, 0.4, 0.75):
        for pl in marching_squares(g, level):
            for x, y in pl.points:
                assert abs(bilinear(g, x, y) - level) <= 1e-9 * zrange


def test_vertices_inside_bbox():
    g = radial_bump()
    s = g.spec
    for pl in marching_squares(g, 0.3):
        assert np.all(pl.points[:, 0] >= s.xmin)
        assert np.all(pl.points[:, 0] <= s.xmax)
        assert np.all(pl.points[:, 1] >= s.ymin)
        assert np.all(pl.points[:, 1] <= s.ymax)


def test_consecutive_vertices_distinct():
    g = radial_bump()
    for pl in marching_squares(g, 0.6):
        pts = pl.points
        assert np.all(np.any(pts != np.roll(pts, -1, axis=0), axis=1))


def test_linear_ramp_equally_spaced_contours():
    xs = np.linspace(0, 1, 21)
    v = np.tile(xs, (5, 1))  # value = x
    g = grid_from(v)
    levels = topographic_levels(g, 4)
    positions = []
    for lv in levels:
        pls = marching_squares(g, lv)
        assert len(pls) == 1
        positions.append(np.mean(pls[0].points[:, 0]))
    gaps = np.diff(positions)
    assert np.max(np.abs(gaps - gaps[0])) <= 1e-9


def test_saddle_disambiguation_deterministic():
    # Checkerboard cell: two opposite corners above.
    g = grid_from([[1.0, 0.0], [0.0, 1.0]])
    a = marching_squares(g, 0.5)
    b = marching_squares(g, 0.5)
    assert len(a) == 2
    for pa, pb in zip(a, b):
        assert np.array_equal(pa.points, pb.points)


def test_exact_level_nodes_handled():
    g = grid_from([[0.0, 1.0], [1.0, 2.0]])
    pls = marching_squares(g, 1.0)  # two nodes sit exactly on the level
    assert all(len(pl.points) >= 2 for pl in pls)


def test_chaining_completeness():
    # Every vertex is shared by two segments or lies on the boundary.
    g = radial_bump(size=17)
    s = g.spec
    for pl in marching_squares(g, 0.35):
        if pl.closed:
            continue
        for x, y in (pl.points[0], pl.points[-1]):
            on_edge = (
                x in (s.xmin, s.xmax) or y in (s.ymin, s.ymax)
            )
            assert on_edge


def test_topographic_levels_midpoint():
    g = grid_from([[0.0, 1.0], [1.0, 2.0]])
    assert topographic_levels(g, 1) == [1.0]


def test_topographic_levels_equal_spacing():
    g = grid_from([[0.0, 50.0], [50.0, 100.0]])
    assert topographic_levels(g, 4) == [20.0, 40.0, 60.0, 80.0]


def test_topographic_levels_strictly_interior():
    g = grid_from([[0.0, 1.0], [2.0, 3.0]])
    for count in (1, 2, 5, 9):
        for lv in topographic_levels(g, count):
            assert g.zmin < lv < g.zmax


def test_topographic_levels_degenerate():
    g = grid_from(np.full((3, 3), 1.0))
    with pytest.raises(DegenerateRange):
        topographic_levels(g, 3)


def test_extract_contours_empty_levels():
    cs = extract_contours(radial_bump(), [])
    assert cs.levels == ()


def test_extract_contours_out_of_range_levels():
    g = radial_bump()
    cs = extract_contours(g, [-5.0, 50.0])
    assert cs.levels == (-5.0, 50.0)
    assert cs.polylines == ((), ())


def test_extract_contours_unsorted_rejected():
    with pytest.raises(ValueError):
        extract_contours(radial_bump(), [0.5, 0.2])


def test_level_band_region(cars_dataset):
    # Points between consecutive contours re-evaluate inside the band.
    g = radial_bump()
    lo, hi = 0.3, 0.6
    cs = extract_contours(g, [lo, hi])
    rng = np.random.default_rng(0)
    hits = 0
    for _ in range(500):
        x, y = rng.uniform(-1, 1, 2)
        v = bilinear(g, x, y)
        r2 = x * x + y * y
        r_lo = -np.log(lo) / 4.0
        r_hi = -np.log(hi) / 4.0
        if r_hi < r2 < r_lo:  # between the two circles
            hits += 1
            assert lo - 0.05 <= v <= hi + 0.05
    assert hits > 10


def test_json_round_trip():
    g = radial_bump()
    cs = extract_contours(g, topographic_levels(g, 3))
    text = contours_to_json(cs)
    back = contours_from_json(text)
    assert back.levels == cs.levels
    for pls_a, pls_b in zip(cs.polylines, back.polylines):
        assert len(pls_a) == len(pls_b)
        for a, b in zip(pls_a, pls_b):
            assert a.closed == b.closed
            assert np.array_equal(a.points, b.points)
    # serialization is deterministic
    assert contours_to_json(back) == text


def test_json_structure():
    g = radial_bump()
    cs = extract_contours(g, [0.5])
    payload = json.loads(contours_to_json(cs))
    assert isinstance(payload, list)
    assert set(payload[0]) == {"level", "polylines", "closed"}
