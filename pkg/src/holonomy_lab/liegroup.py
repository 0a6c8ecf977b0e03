"""Compact groups Torus(d), SU(2) and SO(3) with bi-invariant metrics.

Torus elements are angle vectors wrapped to (-pi, pi]; SU(2) and SO(3)
elements are unit quaternions ``(w, x, y, z)``, SO(3) ones up to sign.
Algebra vectors are coordinates in an orthonormal basis, normalized so that
``d(exp(Z), 1) = |Z|`` while ``|Z| < pi``:

* SU(2): ``exp(Z) = (cos|Z|, sin|Z| Z/|Z|)``, so |Z| is half the rotation angle;
* SO(3): ``exp(Z)`` is the rotation by angle |Z| about Z.

All functions broadcast over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np


class BranchError(ValueError):
    """Logarithm requested at (or beyond) the cut locus."""


@dataclass(frozen=True)
class GroupKind:
    tag: str
    d: int

    def __post_init__(self):
        if self.tag not in ("torus", "su2", "so3"):
            raise ValueError(f"unknown group {self.tag!r}")
        if self.d < 1 or (self.tag != "torus" and self.d != 3):
            raise ValueError("bad dimension")

    @property
    def abelian(self) -> bool:
        return self.tag == "torus"

    @property
    def rep_size(self) -> int:
        return self.d if self.tag == "torus" else 4

    def __str__(self) -> str:
        return f"torus{self.d}" if self.tag == "torus" else self.tag


def Torus(d: int = 1) -> GroupKind:
    return GroupKind("torus", d)


SU2 = GroupKind("su2", 3)
SO3 = GroupKind("so3", 3)


def parse_kind(text: str) -> GroupKind:
    t = text.strip().lower().replace("(", "").replace(")", "")
    if t in ("su2", "su(2)"):
        return SU2
    if t in ("so3", "so(3)"):
        return SO3
    if t.startswith("torus"):
        rest = t[5:].lstrip(":")
        return Torus(int(rest) if rest else 1)
    raise ValueError(f"unknown group {text!r}")


def wrap_angle(a):
    """Wrap to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + np.pi, 2 * np.pi) - np.pi
    return np.where(w == -np.pi, np.pi, w)


# --------------------------------------------------------------------------
# quaternion helpers


def qmul(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pw, px, py, pz = np.moveaxis(p, -1, 0)
    qw, qx, qy, qz = np.moveaxis(q, -1, 0)
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=-1)


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qnormalize(q):
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def rotate(q, v):
    """Rotate 3-vectors v by the rotation of unit quaternion q."""
    v = np.asarray(v, dtype=float)
    vq = np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)
    return qmul(qmul(q, vq), qconj(q))[..., 1:]


@numba.njit(cache=True)
def _qprod_seq(qs):
    """Left-to-right product of a sequence of quaternions, renormalized periodically."""
    w, x, y, z = 1.0, 0.0, 0.0, 0.0
    for i in range(qs.shape[0]):
        bw, bx, by, bz = qs[i, 0], qs[i, 1], qs[i, 2], qs[i, 3]
        w, x, y, z = (w * bw - x * bx - y * by - z * bz,
                      w * bx + x * bw + y * bz - z * by,
                      w * by - x * bz + y * bw + z * bx,
                      w * bz + x * by - y * bx + z * bw)
        if i % 64 == 63:
            nrm = np.sqrt(w * w + x * x + y * y + z * z)
            w /= nrm
            x /= nrm
            y /= nrm
            z /= nrm
    nrm = np.sqrt(w * w + x * x + y * y + z * z)
    out = np.empty(4)
    out[0] = w / nrm
    out[1] = x / nrm
    out[2] = y / nrm
    out[3] = z / nrm
    return out


@numba.njit(cache=True)
def _qcumprod(qs):
    out = np.empty((qs.shape[0] + 1, 4))
    out[0, 0] = 1.0
    out[0, 1:] = 0.0
    w, x, y, z = 1.0, 0.0, 0.0, 0.0
    for i in range(qs.shape[0]):
        bw, bx, by, bz = qs[i, 0], qs[i, 1], qs[i, 2], qs[i, 3]
        w, x, y, z = (w * bw - x * bx - y * by - z * bz,
                      w * bx + x * bw + y * bz - z * by,
                      w * by - x * bz + y * bw + z * bx,
                      w * bz + x * by - y * bx + z * bw)
        nrm = np.sqrt(w * w + x * x + y * y + z * z)
        w /= nrm
        x /= nrm
        y /= nrm
        z /= nrm
        out[i + 1, 0] = w
        out[i + 1, 1] = x
        out[i + 1, 2] = y
        out[i + 1, 3] = z
    return out


# --------------------------------------------------------------------------
# group operations


def identity(kind: GroupKind, shape: tuple = ()) -> np.ndarray:
    if kind.abelian:
        return np.zeros(shape + (kind.d,))
    e = np.zeros(shape + (4,))
    e[..., 0] = 1.0
    return e


def _half_angle_factor(kind: GroupKind) -> float:
    return 1.0 if kind.tag == "su2" else 0.5


def exp_g(kind: GroupKind, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if Z.shape[-1] != kind.d:
        raise ValueError("algebra vector has the wrong dimension")
    if kind.abelian:
        return wrap_angle(Z)
    a = np.linalg.norm(Z, axis=-1) * _half_angle_factor(kind)
    # sin(a)/|Z| written through sinc for accuracy near 0
    s = np.sinc(a / np.pi) * _half_angle_factor(kind)
    return np.concatenate([np.cos(a)[..., None], s[..., None] * Z], axis=-1)


def _quat_angle(kind: GroupKind, g):
    """Geodesic distance of quaternion g to the identity."""
    v = np.linalg.norm(g[..., 1:], axis=-1)
    if kind.tag == "su2":
        return np.arctan2(v, g[..., 0])
    return 2.0 * np.arctan2(v, np.abs(g[..., 0]))


def log_g(kind: GroupKind, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if kind.abelian:
        if np.any(np.linalg.norm(wrap_angle(g), axis=-1) >= np.pi):
            raise BranchError("logarithm outside the principal domain")
        return wrap_angle(g)
    if kind.tag == "so3":
        g = np.where(g[..., :1] < 0, -g, g)
    ang = _quat_angle(kind, g)
    if np.any(ang >= np.pi - 1e-15):
        raise BranchError("logarithm at the cut locus")
    v = g[..., 1:]
    vn = np.linalg.norm(v, axis=-1)
    # angle / |v| with the small-angle limit 1/half-factor
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(vn > 1e-300, ang / np.where(vn > 0, vn, 1.0),
                         1.0 / _half_angle_factor(kind))
    return ratio[..., None] * v


def mul(kind: GroupKind, g, h) -> np.ndarray:
    if kind.abelian:
        return wrap_angle(np.asarray(g) + np.asarray(h))
    return qmul(g, h)


def inv(kind: GroupKind, g) -> np.ndarray:
    if kind.abelian:
        return wrap_angle(-np.asarray(g))
    return qconj(g)


def distance_to_identity(kind: GroupKind, g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if kind.abelian:
        return np.linalg.norm(wrap_angle(g), axis=-1)
    return _quat_angle(kind, g)


def group_distance(kind: GroupKind, g, h) -> np.ndarray:
    return distance_to_identity(kind, mul(kind, inv(kind, g), h))


def adjoint(kind: GroupKind, g, Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=float)
    if kind.abelian:
        return np.broadcast_to(Z, np.broadcast_shapes(Z.shape, np.shape(g)[:-1] + Z.shape[-1:])).copy()
    return rotate(g, Z)


def conj(kind: GroupKind, g, h) -> np.ndarray:
    """g h g^-1."""
    return mul(kind, mul(kind, g, h), inv(kind, g))


def bracket(kind: GroupKind, X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if kind.abelian:
        return np.zeros(np.broadcast_shapes(X.shape, Y.shape))
    c = np.cross(X, Y)
    return 2.0 * c if kind.tag == "su2" else c


def power(kind: GroupKind, Z, k) -> np.ndarray:
    """exp(Z)^k = exp(k Z) for integer k."""
    Z = np.asarray(Z, dtype=float)
    return exp_g(kind, np.asarray(k, dtype=float)[..., None] * Z)


def sphere_sample(kind: GroupKind, radius: float, rng: np.random.Generator, size: int | None = None):
    """Uniform samples on the sphere of the given radius in the algebra."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    shape = () if size is None else (size,)
    if kind.d == 1:
        return radius * rng.choice([-1.0, 1.0], size=shape + (1,))
    G = rng.standard_normal(shape + (kind.d,))
    return radius * G / np.linalg.norm(G, axis=-1, keepdims=True)


def ordered_product(kind: GroupKind, elems) -> np.ndarray:
    """Left-to-right product of an array of group elements."""
    elems = np.asarray(elems, dtype=float)
    if kind.abelian:
        return wrap_angle(elems.sum(axis=0)) if elems.shape[0] else identity(kind)
    return _qprod_seq(np.ascontiguousarray(elems.reshape(-1, 4)))


def develop(kind: GroupKind, nodes) -> np.ndarray:
    """Development of a piecewise-linear algebra path given by its nodes.

    Returns the group path at the nodes: ``y(t_i) = prod_{j<=i} exp(Gamma(t_j) - Gamma(t_{j-1}))``.
    """
    nodes = np.asarray(nodes, dtype=float)
    inc = np.diff(nodes, axis=0)
    if kind.abelian:
        return wrap_angle(np.vstack([np.zeros((1, kind.d)), np.cumsum(inc, axis=0)]))
    return _qcumprod(np.ascontiguousarray(exp_g(kind, inc)))


def develop_endpoints(kind: GroupKind, increments) -> np.ndarray:
    """Endpoints of developments for a batch of increment sequences of shape (batch, n, d)."""
    inc = np.asarray(increments, dtype=float)
    if kind.abelian:
        return wrap_angle(inc.sum(axis=1))
    g = identity(kind, (inc.shape[0],))
    for j in range(inc.shape[1]):
        g = qmul(g, exp_g(kind, inc[:, j]))
        if j % 64 == 63:
            g = qnormalize(g)
    return qnormalize(g)


def prod_vs_sum_gap(kind: GroupKind, X) -> float:
    X = np.asarray(X, dtype=float).reshape(-1, kind.d)
    g = ordered_product(kind, exp_g(kind, X))
    return float(group_distance(kind, g, exp_g(kind, X.sum(axis=0))))


@dataclass(frozen=True)
class TreeProduct:
    element: np.ndarray
    levels: list
    gaps: list

    @property
    def total_gap(self) -> float:
        return float(sum(self.gaps))


def tree_product(kind: GroupKind, X, branching: int) -> TreeProduct:
    """Level-by-level evaluation of prod exp(X_i) along a regular rooted tree.

    Level k multiplies, in order, the exponentials of the sums of the leaves
    below each vertex at depth k; level 0 is exp(sum X) and the last level is
    the plain product.  Gaps are the distances between consecutive levels.
    """
    if branching < 2:
        raise ValueError("branching must be >= 2")
    X = np.asarray(X, dtype=float).reshape(-1, kind.d)
    n = X.shape[0]
    depth = 1
    while branching ** depth < n:
        depth += 1
    padded = np.zeros((branching ** depth, kind.d))
    padded[:n] = X
    levels = []
    for k in range(depth + 1):
        block = branching ** (depth - k)
        sums = padded.reshape(-1, block, kind.d).sum(axis=1)
        levels.append(ordered_product(kind, exp_g(kind, sums)))
    gaps = [float(group_distance(kind, levels[k], levels[k + 1])) for k in range(depth)]
    return TreeProduct(levels[-1], levels, gaps)
