import numpy as np
import pytest

from holonomy_lab import liegroup as lg

NONABELIAN = [lg.SU2, lg.SO3]


def rand_elems(kind, rng, size, scale=1.0):
    return lg.exp_g(kind, scale * rng.standard_normal((size, kind.d)))


@pytest.mark.parametrize("kind", [lg.Torus(1), lg.Torus(2), lg.SU2, lg.SO3])
def test_exp_of_zero_is_identity(kind):
    assert np.allclose(lg.exp_g(kind, np.zeros(kind.d)), lg.identity(kind))
    assert lg.distance_to_identity(kind, lg.identity(kind)) == 0


def test_torus_exp_log():
    T = lg.Torus(1)
    assert lg.exp_g(T, [0.7])[0] == pytest.approx(0.7)
    assert lg.log_g(T, lg.exp_g(T, [-2.5]))[0] == pytest.approx(-2.5)
    assert lg.group_distance(T, [0.1], [0.4]) == pytest.approx(0.3)
    assert lg.wrap_angle(np.pi + 0.1) == pytest.approx(-np.pi + 0.1)
    assert lg.wrap_angle(-np.pi) == pytest.approx(np.pi)


@pytest.mark.parametrize("kind", NONABELIAN)
def test_exp_log_roundtrip(kind):
    rng = np.random.default_rng(0)
    Z = lg.sphere_sample(kind, 0.3, rng, 1000)
    assert np.max(np.abs(lg.log_g(kind, lg.exp_g(kind, Z)) - Z)) < 1e-12


def test_distance_conventions():
    Z = np.array([0.0, 0.0, 0.4])
    assert lg.distance_to_identity(lg.SU2, lg.exp_g(lg.SU2, Z)) == pytest.approx(0.4)
    assert lg.distance_to_identity(lg.SO3, lg.exp_g(lg.SO3, Z)) == pytest.approx(0.4)
    # SU2 is a double cover: exp at norm pi is -1, at distance pi from the identity
    assert lg.distance_to_identity(lg.SU2, lg.exp_g(lg.SU2, [np.pi, 0, 0])) == pytest.approx(np.pi)
    # SO3 identifies q and -q
    assert lg.distance_to_identity(lg.SO3, lg.exp_g(lg.SO3, [2 * np.pi - 0.1, 0, 0])) == pytest.approx(0.1)


@pytest.mark.parametrize("kind", NONABELIAN)
def test_bi_invariance(kind):
    rng = np.random.default_rng(1)
    g, h, k = (rand_elems(kind, rng, 1000) for _ in range(3))
    d = lg.group_distance(kind, g, h)
    assert np.max(np.abs(lg.group_distance(kind, lg.mul(kind, k, g), lg.mul(kind, k, h)) - d)) < 1e-10
    assert np.max(np.abs(lg.group_distance(kind, lg.mul(kind, g, k), lg.mul(kind, h, k)) - d)) < 1e-10
    assert np.all(lg.group_distance(kind, g, g) < 1e-7)


@pytest.mark.parametrize("kind", NONABELIAN)
def test_adjoint_matches_conjugated_exponential(kind):
    rng = np.random.default_rng(2)
    g = rand_elems(kind, rng, 500)
    Z = lg.sphere_sample(kind, 0.5, rng, 500)
    ad = lg.adjoint(kind, g, Z)
    direct = lg.log_g(kind, lg.conj(kind, g, lg.exp_g(kind, Z)))
    assert np.max(np.abs(ad - direct)) < 1e-12
    assert np.allclose(np.linalg.norm(ad, axis=1), 0.5, atol=1e-12)
    assert np.allclose(lg.adjoint(kind, lg.identity(kind), Z), Z)


def test_torus_adjoint_is_trivial():
    T = lg.Torus(2)
    assert np.allclose(lg.adjoint(T, [0.3, -1.0], [0.5, 0.2]), [0.5, 0.2])


def test_sphere_sample_moments():
    rng = np.random.default_rng(3)
    s = lg.sphere_sample(lg.Torus(1), 0.01, rng, 10_000)
    assert set(np.unique(s)) == {-0.01, 0.01}
    assert abs(np.mean(s > 0) - 0.5) < 3 * 0.005
    v = lg.sphere_sample(lg.SU2, 0.2, rng, 10_000)
    assert np.allclose(np.linalg.norm(v, axis=1), 0.2, atol=1e-15)
    assert np.all(np.abs(v.mean(axis=0) / 0.2) < 3 * np.sqrt(1 / 3 / 10_000))
    with pytest.raises(ValueError):
        lg.sphere_sample(lg.SU2, 0.0, rng, 3)


def test_develop_single_segment_and_torus():
    Z = np.array([[0, 0, 0], [0.2, -0.1, 0.4]])
    assert np.allclose(lg.develop(lg.SU2, Z)[-1], lg.exp_g(lg.SU2, Z[1]))
    nodes = np.cumsum(np.random.default_rng(4).standard_normal((20, 1)), axis=0)
    nodes = np.vstack([[0.0], nodes])
    assert lg.develop(lg.Torus(1), nodes)[-1, 0] == pytest.approx(float(lg.wrap_angle(nodes[-1, 0])))


def test_develop_refinement_is_second_order():
    t = lambda n: np.linspace(0, 1, n + 1)[:, None]
    curve = lambda s: np.hstack([np.sin(3 * s), s ** 2, np.cos(2 * s) - 1])
    ends = [lg.develop(lg.SU2, curve(t(n)))[-1] for n in (50, 100, 200)]
    e1 = lg.group_distance(lg.SU2, ends[0], ends[2])
    e2 = lg.group_distance(lg.SU2, ends[1], ends[2])
    assert 2.5 < e1 / e2 < 5.5


def test_develop_is_conjugation_equivariant():
    rng = np.random.default_rng(5)
    nodes = np.vstack([np.zeros(3), np.cumsum(0.1 * rng.standard_normal((30, 3)), axis=0)])
    g = rand_elems(lg.SU2, rng, 1)[0]
    left = lg.develop(lg.SU2, lg.adjoint(lg.SU2, g, nodes))[-1]
    right = lg.conj(lg.SU2, g, lg.develop(lg.SU2, nodes)[-1])
    assert lg.group_distance(lg.SU2, left, right) < 1e-7


def test_product_gap_examples():
    X = np.outer(np.linspace(0.1, 0.5, 5), [1.0, 2.0, -1.0])
    assert lg.prod_vs_sum_gap(lg.SU2, X) < 1e-7
    assert lg.prod_vs_sum_gap(lg.Torus(2), np.random.default_rng(0).standard_normal((6, 2))) < 1e-12
    for kind in NONABELIAN:
        X, Y = 1e-3 * np.array([1.0, 0.2, -0.4]), 1e-3 * np.array([-0.3, 0.8, 0.5])
        gap = lg.prod_vs_sum_gap(kind, np.array([X, Y]))
        expected = 0.5 * np.linalg.norm(lg.bracket(kind, X, Y))
        assert gap == pytest.approx(expected, rel=1e-2)


def test_power_and_bracket():
    Z = np.array([0.1, 0.2, -0.3])
    g = lg.exp_g(lg.SU2, Z)
    assert np.allclose(lg.power(lg.SU2, Z, 3), lg.mul(lg.SU2, g, lg.mul(lg.SU2, g, g)))
    assert np.allclose(lg.bracket(lg.SU2, Z, Z), 0)


def test_tree_product():
    rng = np.random.default_rng(6)
    X = lg.sphere_sample(lg.SU2, 0.05, rng, 100)
    one = lg.tree_product(lg.SU2, X, branching=200)
    assert len(one.gaps) == 1
    assert one.gaps[0] == pytest.approx(lg.prod_vs_sum_gap(lg.SU2, X), abs=1e-12)
    deep = lg.tree_product(lg.SU2, X, branching=3)
    direct = lg.ordered_product(lg.SU2, lg.exp_g(lg.SU2, X))
    assert lg.group_distance(lg.SU2, deep.element, direct) < 1e-7
    assert lg.tree_product(lg.Torus(1), rng.standard_normal((30, 1)), 2).total_gap < 1e-12
    with pytest.raises(ValueError):
        lg.tree_product(lg.SU2, X, 1)


def test_log_rejects_cut_locus():
    with pytest.raises(lg.BranchError):
        lg.log_g(lg.SU2, np.array([-1.0, 0.0, 0.0, 0.0]))


def test_parse_kind():
    assert lg.parse_kind("SU(2)") is lg.SU2
    assert lg.parse_kind("torus3") == lg.Torus(3)
    assert str(lg.SO3) == "so3"
    with pytest.raises(ValueError):
        lg.parse_kind("u1")
