import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from holonomy_lab.geometry import (
    DegenerateError, PolyPath, PunctureSet, circle_loop, close_loop, degeneracy, half_turn_count,
    half_turn_count_direct, min_spacing, min_spacing_brute, uniform_disk, winding_area_estimate,
    winding_number, winding_number_angle,
)
from holonomy_lab.model import sample_brownian


def brownian_loop(seed, n=1000):
    return close_loop(sample_brownian(n, np.random.default_rng(seed)))


def test_close_loop_adds_one_edge():
    tri = PolyPath([[0, 0], [1, 0], [0, 1]])
    loop = close_loop(tri)
    assert loop.closed and loop.n_edges == 3
    assert np.array_equal(loop.vertices[-1], loop.vertices[0])
    assert loop.times[-1] == 1.0
    with pytest.raises(ValueError):
        close_loop(loop)
    assert close_loop(PolyPath([[0, 0], [1, 0]])).n_edges == 2
    assert close_loop(sample_brownian(10 ** 5, np.random.default_rng(0))).n_edges == 10 ** 5 + 1


def test_path_validation():
    with pytest.raises(ValueError):
        PolyPath([[0, 0]])
    with pytest.raises(ValueError):
        PolyPath([[0, 0], [1, 1]], times=[0.0, 0.0])
    with pytest.raises(ValueError):
        PolyPath([[0, 0], [1, 1]], closed=True)


def test_circle_windings():
    c = circle_loop(radius=2.0, n=64)
    assert winding_number(c, (1, 0)) == 1
    assert winding_number(c, (3, 0)) == 0
    cw2 = circle_loop(radius=2.0, n=64, turns=-2)
    assert winding_number(cw2, (1, 0)) == -2


def test_point_on_loop_is_rejected():
    c = circle_loop(radius=1.0, n=4)
    with pytest.raises(DegenerateError):
        winding_number(c, (1, 0))
    with pytest.raises(DegenerateError):
        winding_number_angle(c, (1, 0))


def test_half_turn_examples():
    # stays on the origin side of the line x = 1
    assert half_turn_count(PolyPath([[0, 0], [0.5, 1], [0.2, -3]]), (1, 0)) == 1
    assert half_turn_count(PolyPath([[0, 0], [2, 2], [2, -2], [0, -2]]), (1, 0)) == 3
    # CCW circle around (2, 0) of radius 1 starting on the upper half-line
    path = circle_loop(center=(2.0, 0.0), radius=1.0, n=64, start_angle=np.pi / 2)
    assert half_turn_count(path, (2, 0)) == 4
    assert half_turn_count_direct(path, (2, 0)) == 4
    with pytest.raises(DegenerateError):
        half_turn_count(path, (0, 0))


def test_winding_reparametrization_and_reversal():
    loop = brownian_loop(1)
    pts = uniform_disk(np.random.default_rng(2), 300, 1.5)
    w = loop.index.winding_numbers(pts)
    assert np.array_equal(loop.reversed().index.winding_numbers(pts), -w)
    v = loop.vertices[:-1]
    rolled = PolyPath(np.vstack([np.roll(v, 17, axis=0), np.roll(v, 17, axis=0)[:1]]), closed=True)
    assert np.array_equal(rolled.index.winding_numbers(pts), w)
    uneven = PolyPath(loop.vertices, np.concatenate([[0], np.sort(np.random.default_rng(3).random(loop.n_edges - 1)), [1]]),
                      closed=True)
    assert np.array_equal(uneven.index.winding_numbers(pts), w)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_tree_winding_matches_angle_sum(seed):
    loop = brownian_loop(seed, 200)
    pts = uniform_disk(np.random.default_rng(seed + 1), 30, 1.0)
    tree = loop.index.winding_numbers(pts)
    assert tree.tolist() == [winding_number_angle(loop, p) for p in pts]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_half_turn_tree_matches_direct_and_bounds_winding(seed):
    path = sample_brownian(200, np.random.default_rng(seed))
    loop = close_loop(path)
    pts = uniform_disk(np.random.default_rng(seed + 1), 30, 1.0)
    h = path.index.half_turn_counts(pts)
    assert h.tolist() == [half_turn_count_direct(path, p) for p in pts]
    w = loop.index.winding_numbers(pts)
    assert np.all(np.abs(2 * w) <= h + 2)
    assert np.all(np.abs(2 * w) <= loop.index.half_turn_counts(pts) + 2)


def test_half_turn_monotone_in_time():
    path = sample_brownian(500, np.random.default_rng(5))
    pts = uniform_disk(np.random.default_rng(6), 50, 1.0)
    prev = np.ones(len(pts), dtype=int)
    for t in (0.25, 0.5, 0.75, 1.0):
        cur = path.restrict(0.0, t).index.half_turn_counts(pts)
        assert np.all(cur >= prev)
        prev = cur


def test_min_spacing_examples():
    assert min_spacing([[1, 0], [0, 2]]) == pytest.approx(1.0)
    assert min_spacing([[3, 0], [3, 0.5]]) == pytest.approx(0.5)
    pts = uniform_disk(np.random.default_rng(0), 10 ** 4, 1.0)
    assert min_spacing(pts, brute=False) == min_spacing_brute(pts)


def test_puncture_set_order_and_degeneracy():
    ps = PunctureSet([[0, 3], [1, 0], [0.5, 1.5]])
    assert ps.ids.tolist() == [1, 2, 3]
    assert np.allclose(ps.norms, np.sort(ps.norms))
    assert ps.without(2).ids.tolist() == [1, 3]
    with pytest.raises(DegenerateError):
        PunctureSet([[1, 1], [2, 2]])
    with pytest.raises(DegenerateError):
        PunctureSet([[1, 1], [-2, -2]])
    with pytest.raises(DegenerateError):
        PunctureSet([[1, 0], [0, 1]])
    with pytest.raises(DegenerateError):
        PunctureSet([[0, 0]])
    assert degeneracy([[1, 0], [0, 2]]) is None


def test_area_estimate_on_circle():
    c = circle_loop(radius=1.0, n=256)
    rng = np.random.default_rng(0)
    est = winding_area_estimate(c, 0, 20_000, 2.0, rng)
    polygon_area = 128 * np.sin(2 * np.pi / 256)
    assert abs(est.value - polygon_area) < 4 * est.stderr
    assert winding_area_estimate(c, 1, 5_000, 2.0, rng).value == 0.0
