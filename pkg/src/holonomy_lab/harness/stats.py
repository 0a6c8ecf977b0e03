"""Conjugation-invariant observables and Kolmogorov-Smirnov comparisons."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .. import liegroup as lg


@dataclass
class TestReport:
    """One statistic compared with a threshold.

    ``passed`` is computed by the producer; for p-value based checks the
    threshold is the significance level, otherwise an upper or lower bound on
    ``value`` as described by ``name``.
    """

    __test__ = False  # not a pytest class

    name: str
    value: float
    threshold: float
    sizes: tuple = ()
    p_value: float | None = None
    passed: bool = True
    detail: dict | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sizes"] = list(self.sizes)
        d["value"] = float(self.value)
        d["threshold"] = float(self.threshold)
        d["passed"] = bool(self.passed)
        if self.p_value is not None:
            d["p_value"] = float(self.p_value)
        return d


def class_coordinate(kind: lg.GroupKind, g) -> np.ndarray:
    """Torus: angles in (-pi, pi]; SU2/SO3: distance to the identity.  Always a trailing vector axis."""
    g = np.asarray(g, dtype=float)
    if kind.abelian:
        return lg.wrap_angle(g)
    return lg.distance_to_identity(kind, g)[..., None]


def ks_distance(samples, reference: Callable | np.ndarray) -> tuple[float, float]:
    """One-sample KS against a CDF callable, or two-sample KS against a second sample."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    if callable(reference):
        r = stats.kstest(x, reference)
    else:
        y = np.asarray(reference, dtype=float).ravel()
        if np.array_equal(np.sort(x), np.sort(y)):
            return 0.0, 1.0
        r = stats.ks_2samp(x, y)
    return float(r.statistic), float(r.pvalue)


def bonferroni(alpha: float, m: int) -> float:
    return alpha / max(m, 1)
