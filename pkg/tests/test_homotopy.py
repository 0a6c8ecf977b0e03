import numpy as np
import pytest

from holonomy_lab import freegroup as fg
from holonomy_lab.geometry import DegenerateError, PolyPath, PunctureSet, circle_loop, close_loop, uniform_disk
from holonomy_lab.homotopy import (
    CutIndex, calibration_loop, crossing_sequence, word_of_loop, word_of_subloop,
)
from holonomy_lab.model import sample_brownian


def random_case(seed, n=1000, m=100, radius=2.0):
    rng = np.random.default_rng(seed)
    path = sample_brownian(n, rng)
    ps = PunctureSet(uniform_disk(rng, m, radius))
    return path, ps


def test_calibration_loop_reads_one_letter():
    ps = PunctureSet([[0.3, 0.4], [1.0, -0.2], [-0.7, 1.1]])
    for x, p in zip(ps.ids, ps.points):
        ev = crossing_sequence(calibration_loop(p, radius=0.05), ps)
        assert ev.ids.tolist() == [x]
        assert ev.signs.tolist() == [1]
        assert str(word_of_loop(calibration_loop(p, radius=0.05), ps)) == f"x{x}"


def test_small_paths_see_no_rays():
    ps = PunctureSet([[1.0, 0.3], [-0.5, 1.5]])
    loop = circle_loop(radius=0.4, n=50)
    assert len(crossing_sequence(loop, ps)) == 0


def test_enclosing_circle_gives_each_letter_once():
    ps = PunctureSet(uniform_disk(np.random.default_rng(1), 20, 1.0))
    loop = circle_loop(radius=1.5, n=97, start_angle=0.0123)
    g = word_of_loop(loop, ps)
    assert all(fg.abelian_exponent(g, int(x)) == 1 for x in ps.ids)


def test_figure_eight():
    ps = PunctureSet([[1.0, 0.1], [-2.0, 0.3]])
    a = calibration_loop(ps.points[0], radius=0.2)
    b = calibration_loop(ps.points[1], radius=0.2).reversed()
    v = np.vstack([a.vertices[:-1], b.vertices])
    assert str(word_of_loop(PolyPath(v, closed=True), ps)) == "x1 x2^-1"


def test_open_path_rejected_and_degenerate_vertex():
    ps = PunctureSet([[1.0, 0.0]])
    with pytest.raises(ValueError):
        word_of_loop(PolyPath([[0, 0], [1, 1]]), ps)
    with pytest.raises(DegenerateError):
        word_of_loop(PolyPath([[0, 0], [0, 1], [2, 0], [0, 0]], closed=True), ps)


@pytest.mark.parametrize("seed", range(20))
def test_accelerated_matches_brute_force(seed):
    path, ps = random_case(seed)
    loop = close_loop(path)
    idx = CutIndex(ps)
    fast = idx.crossings(loop)
    slow = idx.crossings_brute(loop)
    assert np.array_equal(fast.ids, slow.ids)
    assert np.array_equal(fast.signs, slow.signs)
    assert np.allclose(fast.times, slow.times, rtol=0, atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_abelianization_is_winding(seed):
    path, ps = random_case(seed)
    loop = close_loop(path)
    g = word_of_loop(loop, ps)
    w = loop.index.winding_numbers(ps.points)
    assert [fg.abelian_exponent(g, int(x)) for x in ps.ids] == w.tolist()


@pytest.mark.parametrize("seed", range(10))
def test_deleting_a_puncture_deletes_its_letter(seed):
    path, ps = random_case(seed, m=40)
    loop = close_loop(path)
    g = word_of_loop(loop, ps)
    for x in (1, 7, 23, 40):
        assert word_of_loop(loop, ps.without(x)) == fg.delete_letter(g, x)
    # removing every puncture above x realizes the projection
    keep = PunctureSet(ps.points[:10], ps.ids[:10])
    assert word_of_loop(loop, keep) == fg.project_leq(g, 10)


@pytest.mark.parametrize("seed", range(10))
def test_subloop_cocycle(seed):
    path, ps = random_case(seed, m=60)
    ev = crossing_sequence(path, ps)
    s, u, t = np.sort(np.random.default_rng(seed).random(3))
    left = word_of_subloop(path, s, u, ps, ev)
    right = word_of_subloop(path, u, t, ps, ev)
    assert left * right == word_of_subloop(path, s, t, ps, ev)


def test_full_subloop_of_closed_loop_is_its_word():
    path, ps = random_case(3)
    loop = close_loop(path)
    assert word_of_subloop(loop, 0.0, 1.0, ps) == word_of_loop(loop, ps)
    t = 0.5
    tiny = word_of_subloop(loop, t - 1e-9, t, ps)
    assert len(tiny) == 0
