"""Artin braid group acting on tuples of group elements."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import liegroup as lg
from .harness.stats import TestReport, class_coordinate, ks_distance


@dataclass(frozen=True)
class BraidWord:
    """Generators as signed 1-based indices: ``+i`` is b_i and ``-i`` its inverse."""

    strands: int
    generators: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(int(g) for g in self.generators))
        for g in self.generators:
            if g == 0 or abs(g) >= self.strands:
                raise ValueError(f"generator {g} out of range for {self.strands} strands")

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        if other.strands != self.strands:
            raise ValueError("strand counts differ")
        return BraidWord(self.strands, self.generators + other.generators)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.strands, tuple(-g for g in reversed(self.generators)))

    def freely_reduced(self) -> "BraidWord":
        out: list[int] = []
        for g in self.generators:
            if out and out[-1] == -g:
                out.pop()
            else:
                out.append(g)
        return BraidWord(self.strands, tuple(out))

    def to_json(self) -> list[int]:
        return list(self.generators)

    @classmethod
    def from_json(cls, strands: int, data: Sequence[int]) -> "BraidWord":
        return cls(strands, tuple(data))


def _act_generator(kind: lg.GroupKind, g: int, elems: list) -> list:
    i = abs(g) - 1
    a, b = elems[i], elems[i + 1]
    out = list(elems)
    if g > 0:
        out[i] = b
        out[i + 1] = lg.mul(kind, lg.mul(kind, lg.inv(kind, b), a), b)
    else:
        out[i] = lg.conj(kind, a, b)
        out[i + 1] = a
    return out


def act(kind: lg.GroupKind, b: BraidWord, g: Sequence) -> list:
    """Left action: the rightmost generator acts first.

    ``g`` is a sequence of group elements (or of arrays of elements sharing a
    leading sample axis).
    """
    if len(g) != b.strands:
        raise ValueError("tuple length does not match the number of strands")
    out = [np.asarray(x, dtype=float) for x in g]
    for gen in reversed(b.generators):
        out = _act_generator(kind, gen, out)
    return out


def perm_of(b: BraidWord) -> np.ndarray:
    """Permutation image: 0-based array p with p[i] the slot where input slot i ends up.

    With this convention perm_of(b * c) = perm_of(b)[perm_of(c)].
    """
    p = np.arange(b.strands)
    for gen in reversed(b.generators):
        i = abs(gen) - 1
        t = np.arange(b.strands)
        t[i], t[i + 1] = i + 1, i
        p = t[p]
    return p


def random_braid(rng: np.random.Generator, strands: int, length: int) -> BraidWord:
    idx = rng.integers(1, strands, size=length)
    sgn = rng.choice([-1, 1], size=length)
    return BraidWord(strands, tuple((idx * sgn).tolist()))


SlotSampler = Callable[[np.random.Generator, int], np.ndarray]


def _observables(kind: lg.GroupKind, elems: list) -> dict[str, np.ndarray]:
    """Class coordinates of slots and adjacent products, rounded so that atoms compare equal."""
    obs = {}
    n = len(elems)
    for j in range(n):
        c = class_coordinate(kind, elems[j])
        for k in range(c.shape[-1]):
            obs[f"slot{j + 1}[{k}]"] = np.round(c[:, k], 9)
    for j in range(n - 1):
        c = class_coordinate(kind, lg.mul(kind, elems[j], elems[j + 1]))
        for k in range(c.shape[-1]):
            obs[f"slot{j + 1}*slot{j + 2}[{k}]"] = np.round(c[:, k], 9)
    return obs


@dataclass
class InvarianceResult:
    braid: BraidWord
    reports: list[TestReport]
    alpha: float

    @property
    def min_p(self) -> float:
        return min(r.p_value for r in self.reports)

    @property
    def rejected(self) -> bool:
        return any(not r.passed for r in self.reports)


def invariance_test(kind: lg.GroupKind, slots: Sequence[SlotSampler], b: BraidWord, samples: int,
                    rng: np.random.Generator, alpha: float = 0.01) -> InvarianceResult:
    """Compare act(b, X) with the permuted tuple, slot by slot and on adjacent products.

    Each observable gets a two-sample KS test at level alpha / (number of
    observables).  The reference tuple is drawn independently, except when the
    braid is freely trivial: then the action is the identity and both sides
    are the same sample.
    """
    if len(slots) != b.strands:
        raise ValueError("one sampler per strand is required")
    X = [s(rng, samples) for s in slots]
    Y = act(kind, b, X)
    if not b.freely_reduced().generators:
        ref = X
    else:
        Xr = [s(rng, samples) for s in slots]
        p = perm_of(b)
        ref = [None] * b.strands
        for i in range(b.strands):
            ref[p[i]] = Xr[i]
    oy = _observables(kind, Y)
    orf = _observables(kind, ref)
    level = alpha / len(oy)
    reports = []
    for name in oy:
        stat, pval = ks_distance(oy[name], orf[name])
        reports.append(TestReport(name=f"ks:{name}", value=stat, threshold=level, sizes=(samples, samples),
                                  p_value=pval, passed=bool(pval >= level)))
    return InvarianceResult(b, reports, alpha)


def sphere_slot(kind: lg.GroupKind, low: float, high: float | None = None) -> SlotSampler:
    """exp of a uniform direction times a radius uniform in [low, high] (conjugation invariant).

    A fixed radius (``high=None``) is the law exp(mu_K) with K = 1/low.
    """
    def sample(rng, size):
        r = low if high is None else rng.uniform(low, high, size)
        return lg.exp_g(kind, np.asarray(r)[..., None] * lg.sphere_sample(kind, 1.0, rng, size))
    return sample


def axis_slot(kind: lg.GroupKind, axis, low: float, high: float) -> SlotSampler:
    """Rotations about a fixed axis with uniform magnitude: not conjugation invariant."""
    axis = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
    return lambda rng, size: lg.exp_g(kind, rng.uniform(low, high, size)[:, None] * axis)
