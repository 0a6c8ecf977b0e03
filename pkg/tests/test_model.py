import json

import numpy as np
import pytest

from holonomy_lab import freegroup as fg
from holonomy_lab import liegroup as lg
from holonomy_lab.geometry import PunctureSet, circle_loop, close_loop
from holonomy_lab.homotopy import word_of_loop
from holonomy_lab.model import (
    Charges, Experiment, ModelConfig, classify, diffeo_check, evaluate, halfturn_tail_check,
    holonomy_eval, run_experiment, sample_brownian, sample_punctures, simpler_product, stream,
    word_statistics,
)


def charges_for(kind, points, seed=0, K=10.0):
    ps = PunctureSet(points)
    Z = lg.sphere_sample(kind, 1.0 / K, np.random.default_rng(seed), len(ps))
    return Charges(ps, Z, lg.exp_g(kind, Z), kind)


def test_streams_are_reproducible_and_distinct():
    a = stream(3, 1, 2).random(4)
    assert np.array_equal(a, stream(3, 1, 2).random(4))
    assert not np.array_equal(a, stream(3, 2, 1).random(4))
    assert not np.array_equal(a, stream(4, 1, 2).random(4))


def test_puncture_sampling():
    cfg = ModelConfig(kind=lg.SU2, K=30.0, R=1.5)
    counts = []
    for i in range(40):
        ch, _ = sample_punctures(cfg, stream(0, i))
        counts.append(len(ch))
        assert np.allclose(np.linalg.norm(ch.Z, axis=1), 1 / 30.0)
        assert np.all(np.linalg.norm(ch.ps.points, axis=1) <= 1.5)
        assert np.all(np.diff(ch.ps.norms) >= 0)
    mean = 30.0 * np.pi * 1.5 ** 2
    assert abs(np.mean(counts) - mean) < 4 * np.sqrt(mean / 40)


def test_brownian_scaling():
    rng = np.random.default_rng(1)
    path = sample_brownian(100, rng)
    assert np.array_equal(path.vertices[0], [0.0, 0.0])
    assert path.times[0] == 0.0 and path.times[-1] == 1.0
    ends = np.array([sample_brownian(100, rng).vertices[-1] for _ in range(4000)])
    assert np.mean(np.sum(ends ** 2, axis=1)) == pytest.approx(2.0, abs=0.15)


def test_holonomy_is_a_morphism():
    kind = lg.SU2
    ch = charges_for(kind, np.random.default_rng(2).uniform(-1, 1, (8, 2)))
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = fg.Word(rng.choice([-1, 1], 12) * rng.integers(1, 9, 12))
        v = fg.Word(rng.choice([-1, 1], 7) * rng.integers(1, 9, 7))
        lhs = holonomy_eval(u * v, ch)
        rhs = lg.mul(kind, holonomy_eval(u, ch), holonomy_eval(v, ch))
        assert lg.group_distance(kind, lhs, rhs) < 1e-10
        back = lg.mul(kind, holonomy_eval(u, ch), holonomy_eval(fg.invert(u), ch))
        assert lg.distance_to_identity(kind, back) < 1e-7
    assert np.allclose(holonomy_eval(fg.Word([]), ch), lg.identity(kind))
    with pytest.raises(KeyError):
        holonomy_eval(fg.Word([9]), ch)


def test_torus_holonomy_factorizes_through_windings():
    T = lg.Torus(1)
    rng = np.random.default_rng(4)
    loop = close_loop(sample_brownian(500, rng))
    ch = charges_for(T, rng.uniform(-1, 1, (50, 2)))
    word = word_of_loop(loop, ch.ps)
    theta = loop.index.winding_numbers(ch.ps.points)
    hol = holonomy_eval(word, ch)
    assert lg.group_distance(T, hol, simpler_product(ch, theta)) < 1e-12
    shuffled = rng.permutation(len(ch))
    assert lg.group_distance(T, simpler_product(ch, theta, shuffled), hol) < 1e-12


def test_simpler_product_trivial_cases():
    ch = charges_for(lg.SU2, [[0.5, 0.1], [0.2, 0.9]])
    assert np.allclose(simpler_product(ch, np.zeros(2, dtype=int)), lg.identity(lg.SU2))
    single = simpler_product(ch, np.array([0, 3]))
    assert lg.group_distance(lg.SU2, single, lg.power(lg.SU2, ch.Z[1], 3)) < 1e-12


def test_classify_thresholds():
    K, eps = 1000.0, 0.04
    hi, lo = K ** (2 / 3), K ** (0.5 - eps)
    beta1 = np.array([hi + 1, -(hi + 1), hi, lo + 1, lo, lo, 0])
    S2 = np.array([0, 0, 0, 0, lo, lo - 1, 0])
    assert classify(beta1, S2, K, eps).tolist() == [0, 0, 1, 1, 2, 3, 3]


def test_word_statistics_empty_and_many_turns():
    ps = PunctureSet([[0.1, 0.05], [3.0, 0.2]])
    far = circle_loop(center=(10.0, 0.0), radius=0.5, n=16)
    t = word_statistics(word_of_loop(far, ps), ps, far, K=1000.0)
    assert t.theta.tolist() == [0, 0] and t.beta1.tolist() == [0, 0]
    assert t.klass.tolist() == [3, 3]
    K = 30.0
    loop = circle_loop(radius=1.0, n=40, turns=30)
    t = word_statistics(word_of_loop(loop, ps), ps, loop, K=K)
    assert t.theta.tolist() == [30, 0]
    assert t.beta1[0] == 30 and t.alpha_l1[0] == 30
    assert t.klass[0] == 0
    rows = list(t.rows())
    assert rows[0]["class"] == "P0" and rows[0]["theta"] == 30


def test_word_statistics_bounds():
    cfg = ModelConfig(kind=lg.SU2, K=100.0, R=2.0, n_steps=2000, statistics=True)
    rng = stream(5)
    path = sample_brownian(cfg.n_steps, rng)
    loop = close_loop(path)
    ch, _ = sample_punctures(cfg, rng)
    _, _, _, t = evaluate(cfg, path, loop, ch)
    assert np.all(np.abs(t.beta1) <= t.alpha_l1)
    assert np.all(t.alpha_l1 <= t.theta_half)
    assert np.all(2 * np.abs(t.theta) <= t.theta_half + 2)
    assert sum(t.class_counts().values()) == len(ch)


def test_experiment_is_deterministic():
    cfg = ModelConfig(kind=lg.SU2, K=20.0, R=2.0, n_steps=500, replicas=4, seed=11)
    a = run_experiment(cfg).to_dict()
    b = run_experiment(cfg).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    other = run_experiment(ModelConfig(**{**cfg.__dict__, "seed": 12}))
    assert not np.allclose(other.holonomies(), run_experiment(cfg).holonomies())


def test_quenched_shares_the_path_and_annealed_does_not():
    q = Experiment(ModelConfig(K=10.0, n_steps=200, mode="quenched"))
    a = Experiment(ModelConfig(K=10.0, n_steps=200, mode="annealed"))
    assert q.path_for(0)[0] is q.path_for(5)[0]
    assert not np.array_equal(a.path_for(0)[0].vertices, a.path_for(1)[0].vertices)
    assert np.array_equal(a.path_for(1)[0].vertices, a.path_for(1)[0].vertices)


def test_torus_fast_path_agrees_with_word_evaluation():
    base = dict(kind=lg.Torus(1), K=20.0, R=2.0, n_steps=500, replicas=3, seed=2)
    fast = run_experiment(ModelConfig(**base))
    slow = run_experiment(ModelConfig(**base, statistics=True))
    assert np.allclose(lg.wrap_angle(fast.holonomies() - slow.holonomies()), 0, atol=1e-12)
    assert all(r.word_length == -1 for r in fast.replicas)
    assert all(r.word_length >= 0 for r in slow.replicas)


def test_report_fields():
    cfg = ModelConfig(kind=lg.SO3, K=10.0, R=3.0, n_steps=300, replicas=2)
    rep = run_experiment(cfg)
    d = rep.to_dict()
    assert d["group"] == "so3" and len(d["replicas"]) == 2
    for r in d["replicas"]:
        assert len(r["holonomy"]) == 4 and len(r["class_coord"]) == 1
    s = rep.summary()
    assert 0 <= s["E_R_frequency"] <= 1


def test_config_roundtrip_and_validation():
    cfg = ModelConfig(kind=lg.SO3, K=50.0, R=2.0, mode="annealed", seed=9)
    assert ModelConfig.from_json(json.dumps(cfg.to_dict())) == cfg
    with pytest.raises(ValueError):
        ModelConfig.from_dict({"K": 1.0, "bogus": 2})
    with pytest.raises(ValueError):
        ModelConfig(K=-1.0)
    with pytest.raises(ValueError):
        ModelConfig(mode="sometimes")
    assert ModelConfig(kind="su2").kind is lg.SU2


def test_diffeo_identity_map_and_window():
    cfg = ModelConfig(kind=lg.SU2, K=20.0, R=2.0, seed=3)
    loop = circle_loop(radius=0.6, n=40)
    rep = diffeo_check(cfg, 0.0, loop, draws=50)
    assert rep.p_value == 1.0 and rep.passed
    with pytest.raises(ValueError):
        diffeo_check(cfg, 0.0, loop, draws=5, matrix=np.eye(2) * 4)


def test_halfturn_coupling_never_violated():
    rep = halfturn_tail_check(ModelConfig(n_steps=2000, seed=4), paths=5, points_per_path=300)
    assert rep.coupling_violations == 0
    assert rep.draws > 1000
    assert all(0 <= p <= 1 for p in rep.p_half)
