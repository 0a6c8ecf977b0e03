"""Isotropic 1-stable laws on R^d, radial transport from the Cauchy law, and nu*."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import PchipInterpolator

from . import liegroup as lg


@dataclass(frozen=True)
class StableParams:
    d: int
    sigma: float

    def __post_init__(self):
        if self.d < 1 or self.sigma <= 0:
            raise ValueError("need d >= 1 and sigma > 0")


def sigma_for_group(d: int) -> float:
    """Scale of the limiting law for a d-dimensional group."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return float(np.exp(special.gammaln(d / 2) - special.gammaln((d + 1) / 2)) / (2 * np.sqrt(np.pi)))


def transport_sigma(d: int) -> float:
    """Scale matched to the standard Cauchy law by the radial transport (twice sigma_for_group)."""
    return 2.0 * sigma_for_group(d)


def _log_c1(d: int) -> float:
    return (d + 1) / 2 * np.log(np.pi) - special.gammaln((d + 1) / 2)


def nu_sigma_density(params: StableParams, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    d, s = params.d, params.sigma
    r2 = (Z ** 2).sum(axis=-1) / s ** 2
    return np.exp(-_log_c1(d) - d * np.log(s) - (d + 1) / 2 * np.log1p(r2))


def radial_cdf(params: StableParams, r) -> np.ndarray:
    """P(|Z| <= r) for Z ~ nu^sigma, through the regularized incomplete beta function."""
    r = np.asarray(r, dtype=float)
    t = r ** 2 / (params.sigma ** 2 + r ** 2)
    return special.betainc(params.d / 2, 0.5, t)


def radial_tail_quad(params: StableParams, r: float) -> float:
    """P(|Z| >= r) by quadrature of the radial density.

    With u = tan(pi/2 - w) the tail integral of u^(d-1) (1+u^2)^(-(d+1)/2)
    over u >= r/sigma becomes the integral of cos^(d-1) w over [0, atan(sigma/r)].
    """
    d = params.d
    coef = 2 * np.exp(special.gammaln((d + 1) / 2) - special.gammaln(d / 2)) / np.sqrt(np.pi)
    upper = np.arctan2(params.sigma, r)
    val, _ = integrate.quad(lambda w: np.cos(w) ** (d - 1), 0.0, upper, epsabs=0.0, epsrel=1e-13)
    return float(coef * val)


def radial_cdf_quad(params: StableParams, r: float) -> float:
    """P(|Z| <= r) by the same quadrature, over the complementary interval."""
    d = params.d
    coef = 2 * np.exp(special.gammaln((d + 1) / 2) - special.gammaln(d / 2)) / np.sqrt(np.pi)
    upper = np.arctan2(r, params.sigma)
    val, _ = integrate.quad(lambda v: np.sin(v) ** (d - 1), 0.0, upper, epsabs=0.0, epsrel=1e-13)
    return float(coef * val)


def nu_sigma_sample(params: StableParams, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """sigma * G / |W| with G standard Gaussian in R^d and W an independent scalar Gaussian."""
    shape = () if size is None else (size,)
    G = rng.standard_normal(shape + (params.d,))
    W = np.abs(rng.standard_normal(shape))
    while np.any(W < 1e-300):
        bad = W < 1e-300
        W[bad] = np.abs(rng.standard_normal(int(np.sum(bad))))
    return params.sigma * G / np.asarray(W)[..., None]


def psi_transport(d: int, x: float) -> float:
    """psi(x): the radius whose Cauchy two-sided tail equals the nu^sigma radial tail at x."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return 0.0
    params = StableParams(d, transport_sigma(d))
    tail = radial_tail_quad(params, x)
    if tail > 0.5:
        # small x: match the central masses instead, which keeps relative precision
        cdf = radial_cdf_quad(params, x)
        f = lambda y: (2 / np.pi) * np.arctan(y) - cdf
    else:
        # pi/2 - arctan(y) written as arctan2(1, y) to keep precision for large y
        f = lambda y: (2 / np.pi) * np.arctan2(1.0, y) - tail
    hi = 2 * x + 10.0
    return float(optimize.brentq(f, 0.0, hi, xtol=1e-300, rtol=1e-14, maxiter=500))


def phi_transport(d: int, y: float) -> float:
    """Inverse of psi_transport."""
    if y < 0:
        raise ValueError("y must be >= 0")
    if y == 0:
        return 0.0
    f = lambda x: psi_transport(d, x) - y
    hi = 2 * y + 10.0
    while f(hi) < 0:
        hi *= 2
    return float(optimize.brentq(f, 0.0, hi, xtol=1e-12, rtol=1e-14, maxiter=500))


class RadialTransport:
    """psi tabulated on a log-spaced grid and interpolated in log-log coordinates.

    Near 0 psi behaves like a power of x and near infinity like x plus a
    constant; both ends are extrapolated accordingly.
    """

    def __init__(self, d: int, x_min: float = 1e-6, x_max: float = 1e6, points: int = 1600):
        self.d = d
        xs = np.geomspace(x_min, x_max, points)
        ys = np.array([psi_transport(d, float(x)) for x in xs])
        if np.any(np.diff(ys) <= 0):
            raise RuntimeError("psi is not strictly increasing on the grid")
        self.x = xs
        self.y = ys
        lx, ly = np.log(xs), np.log(ys)
        self._psi = PchipInterpolator(lx, ly)
        self._phi = PchipInterpolator(ly, lx)
        self._slope = (ly[1] - ly[0]) / (lx[1] - lx[0])

    def psi(self, x):
        x = np.asarray(x, dtype=float)
        lx = np.log(np.clip(x, self.x[0], self.x[-1]))
        out = np.exp(self._psi(lx))
        low = x < self.x[0]
        out = np.where(low, self.y[0] * (np.maximum(x, 0) / self.x[0]) ** self._slope, out)
        return np.where(x > self.x[-1], x + (self.y[-1] - self.x[-1]), out)

    def phi(self, y):
        y = np.asarray(y, dtype=float)
        ly = np.log(np.clip(y, self.y[0], self.y[-1]))
        out = np.exp(self._phi(ly))
        low = y < self.y[0]
        out = np.where(low, self.x[0] * (np.maximum(y, 0) / self.y[0]) ** (1 / self._slope), out)
        return np.where(y > self.y[-1], y - (self.y[-1] - self.x[-1]), out)

    def pushforward_sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """sgn(S) phi(|S|) U with S standard Cauchy and U uniform on the unit sphere."""
        S = rng.standard_cauchy(size)
        U = rng.standard_normal((size, self.d))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        return (np.sign(S) * self.phi(np.abs(S)))[:, None] * U


@lru_cache(maxsize=8)
def radial_transport(d: int) -> RadialTransport:
    return RadialTransport(d)


def stable_path(params: StableParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Nodes Gamma(j/n), j = 0..n, of the interpolated 1-stable path with increments X_i/n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    X = nu_sigma_sample(params, rng, n)
    return np.vstack([np.zeros((1, params.d)), np.cumsum(X / n, axis=0)])


def nu_star_sample(kind: lg.GroupKind, n: int, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """Endpoints y(1) of developments of 1-stable paths with sigma = sigma_for_group(d)."""
    params = StableParams(kind.d, sigma_for_group(kind.d))
    inc = nu_sigma_sample(params, rng, size * n).reshape(size, n, kind.d) / n
    return lg.develop_endpoints(kind, inc)


def wrapped_cauchy_cdf(theta, scale: float) -> np.ndarray:
    """CDF on (-pi, pi] of a Cauchy(scale) variable wrapped onto the circle."""
    theta = np.asarray(theta, dtype=float)
    rho = np.exp(-scale)
    # the wrapped Cauchy with density (1 - rho^2) / (2 pi (1 + rho^2 - 2 rho cos t))
    half = np.arctan((1 + rho) / (1 - rho) * np.tan(theta / 2)) / np.pi
    return 0.5 + half
