"""Charged Poisson punctures, Brownian loops and their holonomies."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from . import freegroup as fg
from . import liegroup as lg
from .geometry import (DegenerateError, PolyPath, PunctureSet, close_loop, degeneracy, min_spacing,
                       uniform_disk)
from .homotopy import CutIndex, word_of_loop
from .harness.stats import TestReport, class_coordinate, ks_distance

log = logging.getLogger(__name__)

# stream tags for the counter-based generators
_PATH_QUENCHED = 0
_PATH_ANNEALED = 1
_PUNCTURES = 2
_DIFFEO = 3
_TAIL = 4

CLASS_NAMES = ("P0", "P1", "P2", "P3")


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


@dataclass
class ModelConfig:
    kind: lg.GroupKind = field(default_factory=lambda: lg.Torus(1))
    K: float = 100.0
    R: float = 4.0
    n_steps: int = 10_000
    replicas: int = 100
    seed: int = 0
    epsilon: float = 0.04
    mode: str = "quenched"
    statistics: bool = False
    discard_outside: bool = False

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = lg.parse_kind(self.kind)
        if self.K <= 0 or self.R <= 0:
            raise ValueError("K and R must be positive")
        if self.n_steps < 1 or self.replicas < 1:
            raise ValueError("n_steps and replicas must be >= 1")
        if self.mode not in ("quenched", "annealed"):
            raise ValueError("mode must be 'quenched' or 'annealed'")
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("kind")
        return {"group": str(self.kind), **d}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        data = dict(data)
        known = {"group", "K", "R", "n_steps", "replicas", "seed", "epsilon", "mode", "statistics",
                 "discard_outside"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        kind = lg.parse_kind(data.pop("group", "torus1"))
        return cls(kind=kind, **data)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        return cls.from_dict(json.loads(text))


@dataclass
class Charges:
    """Norm-ordered punctures with algebra charges Z (|Z| = 1/K) and group charges exp(Z)."""

    ps: PunctureSet
    Z: np.ndarray
    g: np.ndarray
    kind: lg.GroupKind

    def __len__(self) -> int:
        return len(self.ps)


def sample_punctures(cfg: ModelConfig, rng: np.random.Generator) -> tuple[Charges, int]:
    """Poisson(K pi R^2) uniform points in B(0, R) with i.i.d. sphere charges.

    Degenerate configurations are redrawn; returns the charges and the number of redraws.
    """
    redraws = 0
    while True:
        n = int(rng.poisson(cfg.K * np.pi * cfg.R ** 2))
        pts = uniform_disk(rng, n, cfg.R)
        Z = lg.sphere_sample(cfg.kind, 1.0 / cfg.K, rng, n)
        if degeneracy(pts) is None:
            break
        redraws += 1
    order = np.argsort(np.hypot(pts[:, 0], pts[:, 1]), kind="stable")
    ps = PunctureSet(pts[order])
    Z = Z[order]
    return Charges(ps, Z, lg.exp_g(cfg.kind, Z), cfg.kind), redraws


def sample_brownian(n: int, rng: np.random.Generator) -> PolyPath:
    """n-step Gaussian walk with covariance I/n per step, started at the origin."""
    if n < 1:
        raise ValueError("n must be >= 1")
    steps = rng.standard_normal((n, 2)) / np.sqrt(n)
    v = np.vstack([np.zeros((1, 2)), np.cumsum(steps, axis=0)])
    return PolyPath(v, np.arange(n + 1) / n)


def holonomy_eval(word: fg.Word, charges: Charges) -> np.ndarray:
    """Ordered product of the charges (inverted for inverse letters) along the word."""
    codes = word.letters
    kind = charges.kind
    if codes.size == 0:
        return lg.identity(kind)
    ids = np.abs(codes)
    if ids.max() > len(charges):
        raise KeyError(f"no charge for letter x{int(ids.max())}")
    pos = ids - 1  # ids are norm ranks 1..m
    sign = np.sign(codes).astype(float)
    if kind.abelian:
        return lg.wrap_angle((sign[:, None] * charges.Z[pos]).sum(axis=0))
    q = charges.g[pos].copy()
    q[sign < 0, 1:] *= -1.0
    return lg.ordered_product(kind, q)


def simpler_product(charges: Charges, windings: np.ndarray, order: Sequence[int] | None = None) -> np.ndarray:
    """prod_x exp(Z_x)^theta(x) in the given order of positions (default: norm order)."""
    kind = charges.kind
    w = np.asarray(windings)
    idx = np.arange(len(charges)) if order is None else np.asarray(order)
    idx = idx[w[idx] != 0]
    if kind.abelian:
        return lg.wrap_angle((w[idx, None] * charges.Z[idx]).sum(axis=0))
    return lg.ordered_product(kind, lg.power(kind, charges.Z[idx], w[idx]))


# --------------------------------------------------------------------------
# word statistics


@dataclass
class StatsTable:
    """Per-puncture statistics, one entry per puncture in norm order."""

    ids: np.ndarray
    points: np.ndarray
    theta: np.ndarray
    theta_half: np.ndarray
    alpha_l1: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray
    S2: np.ndarray
    S5: np.ndarray
    klass: np.ndarray
    alphas: list = field(repr=False, default_factory=list)

    def rows(self):
        for i in range(len(self.ids)):
            yield {
                "puncture_id": int(self.ids[i]), "x": float(self.points[i, 0]), "y": float(self.points[i, 1]),
                "theta": int(self.theta[i]), "theta_half": int(self.theta_half[i]),
                "beta1": int(self.beta1[i]), "beta2": int(self.beta2[i]),
                "S2": int(self.S2[i]), "S5": int(self.S5[i]), "class": CLASS_NAMES[self.klass[i]],
            }

    def class_counts(self) -> dict[str, int]:
        return {name: int(np.sum(self.klass == c)) for c, name in enumerate(CLASS_NAMES)}


def classify(beta1, S2, K: float, epsilon: float) -> np.ndarray:
    """Thresholds on |beta1| and S^{(2)}: P0 above K^(2/3), P1 above K^(1/2-eps), then P2/P3 by S2."""
    b = np.abs(np.asarray(beta1, dtype=float))
    s2 = np.asarray(S2, dtype=float)
    hi = K ** (2 / 3)
    lo = K ** (0.5 - epsilon)
    out = np.full(b.shape, 3, dtype=np.int64)
    out[(b <= lo) & (s2 >= lo)] = 2
    out[(b > lo) & (b <= hi)] = 1
    out[b > hi] = 0
    return out


def word_statistics(word: fg.Word, ps: PunctureSet, path: PolyPath, K: float,
                    epsilon: float = 0.04, loop: PolyPath | None = None) -> StatsTable:
    """Windings, half-turn counts and exponent statistics of every puncture.

    ``path`` is the open path (half-turn counts are taken along it); the
    winding numbers are those of its closed loop.
    """
    if loop is None:
        loop = path if path.closed else close_loop(path)
    m = len(ps)
    theta = loop.index.winding_numbers(ps.points) if m else np.zeros(0, dtype=np.int64)
    theta_half = path.index.half_turn_counts(ps.points) if m else np.zeros(0, dtype=np.int64)
    vals, off = fg.projection_profile(word, ps.max_id)
    beta1 = np.zeros(m, dtype=np.int64)
    beta2 = np.zeros(m, dtype=np.int64)
    l1 = np.zeros(m, dtype=np.int64)
    S2 = np.zeros(m, dtype=np.int64)
    S5 = np.zeros(m, dtype=np.int64)
    alphas = []
    for i, x in enumerate(ps.ids):
        a = vals[off[x]:off[x + 1]]
        alphas.append(a)
        if a.size == 0:
            continue
        b = fg.sorted_betas(a.tolist())
        beta1[i] = b[0]
        beta2[i] = b[1] if len(b) > 1 else 0
        l1[i] = int(np.abs(a).sum())
        S2[i] = fg.tail_sum(b, 2)
        S5[i] = fg.tail_sum(b, 5)
    return StatsTable(ps.ids.copy(), ps.points.copy(), theta, theta_half, l1, beta1, beta2, S2, S5,
                      classify(beta1, S2, K, epsilon), alphas)


# --------------------------------------------------------------------------
# experiment


@dataclass
class ReplicaResult:
    replica: int
    holonomy: np.ndarray
    simpler: np.ndarray
    n_punctures: int
    delta: float
    E_R: bool
    F_R: bool
    redraws: int
    word_length: int
    table: StatsTable | None = None


@dataclass
class SimReport:
    config: ModelConfig
    replicas: list[ReplicaResult]

    def holonomies(self) -> np.ndarray:
        return np.array([r.holonomy for r in self.replicas])

    def simpler(self) -> np.ndarray:
        return np.array([r.simpler for r in self.replicas])

    def class_coords(self) -> np.ndarray:
        return class_coordinate(self.config.kind, self.holonomies())

    def simpler_class_coords(self) -> np.ndarray:
        return class_coordinate(self.config.kind, self.simpler())

    def summary(self) -> dict:
        n = len(self.replicas)
        return {
            "replicas": n,
            "E_R_frequency": sum(r.E_R for r in self.replicas) / n,
            "F_R_frequency": sum(r.F_R for r in self.replicas) / n,
            "redraws": int(sum(r.redraws for r in self.replicas)),
            "mean_punctures": float(np.mean([r.n_punctures for r in self.replicas])),
        }

    def to_dict(self) -> dict:
        kind = self.config.kind
        cc = self.class_coords()
        sc = self.simpler_class_coords()
        reps = []
        for i, r in enumerate(self.replicas):
            reps.append({
                "replica": r.replica,
                "holonomy": [float(v) for v in r.holonomy],
                "simpler_product": [float(v) for v in r.simpler],
                "class_coord": [float(v) for v in cc[i]],
                "simpler_class_coord": [float(v) for v in sc[i]],
                "n_punctures": r.n_punctures,
                "delta": float(r.delta) if np.isfinite(r.delta) else None,
                "E_R": bool(r.E_R),
                "F_R": bool(r.F_R),
                "redraws": r.redraws,
                "word_length": r.word_length,
                "class_counts": r.table.class_counts() if r.table is not None else None,
            })
        return {"config": self.config.to_dict(), "group": str(kind), "mode": self.config.mode,
                "summary": self.summary(), "replicas": reps}


class Experiment:
    """Reusable per-configuration state (the frozen path in quenched mode)."""

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg
        self._path = None
        if cfg.mode == "quenched":
            self._path = sample_brownian(cfg.n_steps, stream(cfg.seed, _PATH_QUENCHED))
            self._loop = close_loop(self._path)

    def path_for(self, replica: int) -> tuple[PolyPath, PolyPath]:
        if self._path is not None:
            return self._path, self._loop
        path = sample_brownian(self.cfg.n_steps, stream(self.cfg.seed, _PATH_ANNEALED, replica))
        return path, close_loop(path)

    def run_replica(self, replica: int) -> ReplicaResult:
        cfg = self.cfg
        path, loop = self.path_for(replica)
        attempt = 0
        redraws = 0
        while True:
            rng = stream(cfg.seed, _PUNCTURES, replica, attempt)
            charges, extra = sample_punctures(cfg, rng)
            redraws += extra
            try:
                result = evaluate(cfg, path, loop, charges)
                break
            except DegenerateError as exc:
                log.info("replica %d attempt %d degenerate: %s", replica, attempt, exc)
                attempt += 1
                redraws += 1
        hol, simp, wlen, table = result
        pts = charges.ps.points
        delta = min_spacing(pts) if len(pts) else np.inf
        K = cfg.K
        logK = np.log(K) if K > 1 else np.nan
        E_R = bool(len(pts) <= 4 * cfg.R * K * logK and delta >= 1.0 / (K * logK)) if K > 1 else False
        F_R = bool(path.max_norm() <= cfg.R)
        return ReplicaResult(replica, hol, simp, len(pts), delta, E_R, F_R, redraws, wlen, table)

    def run(self, replicas: Sequence[int] | None = None) -> SimReport:
        if replicas is None:
            replicas = range(self.cfg.replicas)
        results = [self.run_replica(r) for r in replicas]
        if self.cfg.discard_outside:
            results = [r for r in results if r.F_R]
        return SimReport(self.cfg, results)


def evaluate(cfg: ModelConfig, path: PolyPath, loop: PolyPath, charges: Charges):
    """Holonomy, simpler product, word length and optional statistics for one draw."""
    kind = cfg.kind
    ps = charges.ps
    if len(ps) == 0:
        e = lg.identity(kind)
        return e, e, 0, None
    theta = loop.index.winding_numbers(ps.points)
    simp = simpler_product(charges, theta)
    if kind.abelian and not cfg.statistics:
        # abelian holonomy only sees the exponent sums, which are the winding numbers
        return simp, simp, -1, None
    index = CutIndex(ps, max_radius=loop.max_norm() + 1e-9)
    word = fg.Word(index.crossings(loop).codes())
    hol = holonomy_eval(word, charges)
    table = word_statistics(word, ps, path, cfg.K, cfg.epsilon, loop) if cfg.statistics else None
    return hol, simp, len(word), table


def run_experiment(cfg: ModelConfig, workers: int = 1) -> SimReport:
    """Run all replicas; deterministic in (config, seed) whatever the worker count."""
    exp = Experiment(cfg)
    if workers <= 1:
        return exp.run()
    from concurrent.futures import ProcessPoolExecutor
    chunks = np.array_split(np.arange(cfg.replicas), workers)
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_run_chunk, [(cfg, c.tolist()) for c in chunks]))
    results = sorted((r for p in parts for r in p.replicas), key=lambda r: r.replica)
    return SimReport(cfg, results)


def _run_chunk(args):
    cfg, reps = args
    return Experiment(cfg).run(reps)


# --------------------------------------------------------------------------
# invariance diagnostics


def shear(c: float) -> np.ndarray:
    return np.array([[1.0, c], [0.0, 1.0]])


def loop_holonomy_classes(cfg: ModelConfig, loop: PolyPath, draws: int, key: tuple) -> np.ndarray:
    """Class coordinates of the holonomy of a fixed loop over fresh puncture draws."""
    out = []
    for i in range(draws):
        attempt = 0
        while True:
            charges, _ = sample_punctures(cfg, stream(cfg.seed, *key, i, attempt))
            try:
                hol, _, _, _ = evaluate(cfg, loop, loop, charges)
                break
            except DegenerateError:
                attempt += 1
        out.append(hol)
    return class_coordinate(cfg.kind, np.array(out))


def diffeo_check(cfg: ModelConfig, c: float, loop: PolyPath, draws: int,
                 matrix=None, alpha: float = 0.01) -> TestReport:
    """Two-sample comparison of holonomy laws of a loop and its image under a linear map.

    The map defaults to the shear (x, y) -> (x + c y, y).  When the map is the
    identity both arms share their puncture draws.
    """
    m = shear(c) if matrix is None else np.asarray(matrix, dtype=float)
    image = loop.transformed(m)
    if max(loop.max_norm(), image.max_norm()) > cfg.R:
        raise ValueError("the window B(0, R) must contain both loops")
    a = loop_holonomy_classes(cfg, loop, draws, (_DIFFEO, 0))
    if np.array_equal(m, np.eye(2)):
        b = a
    else:
        b = loop_holonomy_classes(cfg, image, draws, (_DIFFEO, 1))
    level = alpha / a.shape[1]
    worst_p, worst_stat = 1.0, 0.0
    for k in range(a.shape[1]):
        stat, p = ks_distance(np.round(a[:, k], 12), np.round(b[:, k], 12))
        if p < worst_p:
            worst_p, worst_stat = p, stat
    det = float(np.linalg.det(m))
    return TestReport(name="diffeo two-sample KS", value=worst_stat, threshold=level, sizes=(draws, draws),
                      p_value=worst_p, passed=bool(worst_p >= level),
                      detail={"matrix": m.tolist(), "determinant": det})


@dataclass
class TailReport:
    grid: list
    p_half: list
    p_theta: list
    ratios: list
    sup_ratio: float
    coupling_violations: int
    draws: int


def halfturn_tail_check(cfg: ModelConfig, paths: int = 100, points_per_path: int = 1000,
                        region_radius: float = 1.0, grid: Sequence[int] = (4, 9, 16, 25, 36, 49)) -> TailReport:
    """Empirical tails of theta_half against those of theta at sqrt(N).

    Also counts violations of theta_half >= 2|theta| - 2, which must be zero.
    """
    th_all = []
    half_all = []
    for j in range(paths):
        rng = stream(cfg.seed, _TAIL, j)
        path = sample_brownian(cfg.n_steps, rng)
        loop = close_loop(path)
        pts = uniform_disk(rng, points_per_path, region_radius)
        th, bad1 = loop.index.winding_numbers(pts, strict=False)
        pts_ok = pts[~bad1]
        half, bad2 = path.index.half_turn_counts(pts_ok, strict=False)
        th_all.append(th[~bad1][~bad2])
        half_all.append(half[~bad2])
    th = np.concatenate(th_all)
    half = np.concatenate(half_all)
    violations = int(np.sum(half < 2 * np.abs(th) - 2))
    p_half, p_theta, ratios = [], [], []
    for N in grid:
        ph = float(np.mean(half >= N))
        pt = float(np.mean(th >= np.sqrt(N)))
        p_half.append(ph)
        p_theta.append(pt)
        ratios.append(ph / pt if pt > 0 else np.inf)
    finite = [r for r in ratios if np.isfinite(r)]
    return TailReport(list(grid), p_half, p_theta, ratios, max(finite) if finite else np.inf,
                      violations, int(th.size))
