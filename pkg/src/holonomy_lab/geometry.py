"""Planar polyline primitives: loops, winding numbers, half-turn counts, spacing.

Winding and half-turn queries go through a binary tree over the edges of the
path (in time order), each node storing the bounding box of its sub-path.  A
winding query uses the horizontal ray to the right of the point: a sub-path
whose box lies strictly to the right of the point contributes
``above(end) - above(start)``, a box to the left or not meeting the ray's row
contributes nothing, so only boxes that contain the point are opened.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numba
import numpy as np

TOL = 1e-12


class DegenerateError(ValueError):
    """A query point sits (within tolerance) on a path edge or half-line endpoint."""


class PolyPath:
    """Timestamped piecewise-linear planar path."""

    def __init__(self, vertices, times=None, closed: bool = False):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=float).reshape(-1, 2))
        if v.shape[0] < 2:
            raise ValueError("a path needs at least two vertices")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        if times is None:
            times = np.linspace(0.0, 1.0, v.shape[0])
        t = np.ascontiguousarray(np.asarray(times, dtype=float))
        if t.shape != (v.shape[0],):
            raise ValueError("times and vertices must have the same length")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must start at 0 and increase strictly")
        if closed and not np.array_equal(v[0], v[-1]):
            raise ValueError("closed path must end at its first vertex")
        v.flags.writeable = False
        t.flags.writeable = False
        self.vertices = v
        self.times = t
        self.closed = bool(closed)

    def __len__(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_edges(self) -> int:
        return self.vertices.shape[0] - 1

    @cached_property
    def index(self) -> "PathIndex":
        return PathIndex(self)

    def reversed(self) -> "PolyPath":
        return PolyPath(self.vertices[::-1], 1.0 - self.times[::-1], closed=self.closed)

    def transformed(self, matrix) -> "PolyPath":
        m = np.asarray(matrix, dtype=float)
        return PolyPath(self.vertices @ m.T, self.times, closed=self.closed)

    def point_at(self, s: float) -> np.ndarray:
        x = np.interp(s, self.times, self.vertices[:, 0])
        y = np.interp(s, self.times, self.vertices[:, 1])
        return np.array([x, y])

    def restrict(self, s: float, t: float) -> "PolyPath":
        """Sub-path on [s, t], with times kept in absolute units shifted to start at 0."""
        inner = (self.times > s) & (self.times < t)
        v = np.vstack([self.point_at(s), self.vertices[inner], self.point_at(t)])
        tt = np.concatenate([[s], self.times[inner], [t]]) - s
        return PolyPath(v, tt)

    def max_norm(self) -> float:
        return float(np.sqrt((self.vertices ** 2).sum(axis=1)).max())


def close_loop(path: PolyPath) -> PolyPath:
    """Append the straight segment back to the first vertex; times rescaled to [0, 1]."""
    if path.closed:
        raise ValueError("path is already closed")
    v = np.vstack([path.vertices, path.vertices[:1]])
    # the closing chord gets one extra time slot of the same mesh as the last step
    dt = path.times[-1] - path.times[-2]
    t = np.concatenate([path.times, [path.times[-1] + dt]])
    return PolyPath(v, t / t[-1], closed=True)


def circle_loop(center=(0.0, 0.0), radius: float = 1.0, n: int = 64, turns: float = 1.0,
                start_angle: float = 0.0) -> PolyPath:
    """Regular polygon approximation of a circle traversed ``turns`` times (negative = CW)."""
    m = int(round(abs(turns) * n))
    ang = start_angle + np.sign(turns) * 2 * np.pi * np.arange(m + 1) / n
    v = np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)])
    closed = float(turns).is_integer()
    if closed:
        v[-1] = v[0]
    return PolyPath(v, closed=closed)


# --------------------------------------------------------------------------
# tree index


@numba.njit(cache=True)
def _build_tree(vx, vy):
    n_edges = vx.shape[0] - 1
    size = 1
    while size < n_edges:
        size *= 2
    xmin = np.full(2 * size, np.inf)
    xmax = np.full(2 * size, -np.inf)
    ymin = np.full(2 * size, np.inf)
    ymax = np.full(2 * size, -np.inf)
    lo = np.zeros(2 * size, dtype=np.int64)
    hi = np.zeros(2 * size, dtype=np.int64)
    for e in range(size):
        node = size + e
        if e < n_edges:
            xmin[node] = min(vx[e], vx[e + 1])
            xmax[node] = max(vx[e], vx[e + 1])
            ymin[node] = min(vy[e], vy[e + 1])
            ymax[node] = max(vy[e], vy[e + 1])
            lo[node] = e
            hi[node] = e + 1
        else:
            lo[node] = n_edges
            hi[node] = n_edges
    for node in range(size - 1, 0, -1):
        a = 2 * node
        b = a + 1
        xmin[node] = min(xmin[a], xmin[b])
        xmax[node] = max(xmax[a], xmax[b])
        ymin[node] = min(ymin[a], ymin[b])
        ymax[node] = max(ymax[a], ymax[b])
        lo[node] = lo[a]
        hi[node] = hi[b] if hi[b] > lo[b] else hi[a]
    return size, xmin, xmax, ymin, ymax, lo, hi


@numba.njit(cache=True)
def _seg_dist2(ax, ay, bx, by, px, py):
    dx = bx - ax
    dy = by - ay
    L = dx * dx + dy * dy
    t = 0.0
    if L > 0:
        t = ((px - ax) * dx + (py - ay) * dy) / L
        if t < 0:
            t = 0.0
        elif t > 1:
            t = 1.0
    qx = ax + t * dx - px
    qy = ay + t * dy - py
    return qx * qx + qy * qy


@numba.njit(cache=True)
def _winding_many(vx, vy, size, xmin, xmax, ymin, ymax, lo, hi, px_arr, py_arr, tol):
    m = px_arr.shape[0]
    out = np.zeros(m, dtype=np.int64)
    bad = np.zeros(m, dtype=np.bool_)
    stack = np.empty(256, dtype=np.int64)
    tol2 = tol * tol
    for q in range(m):
        px = px_arr[q]
        py = py_arr[q]
        w = 0
        top = 0
        stack[top] = 1
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if xmin[node] > xmax[node]:
                continue
            if (px < xmin[node] - tol or px > xmax[node] + tol
                    or py < ymin[node] - tol or py > ymax[node] + tol):
                if xmin[node] > px:
                    s = lo[node]
                    e = hi[node]
                    w += (1 if vy[e] > py else 0) - (1 if vy[s] > py else 0)
                continue
            if node >= size:
                k = node - size
                ax = vx[k]
                ay = vy[k]
                bx = vx[k + 1]
                by = vy[k + 1]
                if _seg_dist2(ax, ay, bx, by, px, py) <= tol2:
                    bad[q] = True
                    break
                isl = (bx - ax) * (py - ay) - (px - ax) * (by - ay)
                if ay <= py:
                    if by > py and isl > 0:
                        w += 1
                else:
                    if by <= py and isl < 0:
                        w -= 1
            else:
                stack[top] = 2 * node
                stack[top + 1] = 2 * node + 1
                top += 2
        out[q] = w
    return out, bad


@numba.njit(cache=True)
def _halfturn_many(vx, vy, size, xmin, xmax, ymin, ymax, lo, hi, px_arr, py_arr, tol):
    """Half-turn counts; status 0 ok, 1 degenerate (path through p or along the line)."""
    m = px_arr.shape[0]
    out = np.zeros(m, dtype=np.int64)
    bad = np.zeros(m, dtype=np.bool_)
    stack = np.empty(256, dtype=np.int64)
    tol2 = tol * tol
    for q in range(m):
        px = px_arr[q]
        py = py_arr[q]
        r = np.sqrt(px * px + py * py)
        ux = px / r
        uy = py / r
        wx = -uy
        wy = ux
        target = 1  # 1: waiting for d1 (side w > 0); -1: waiting for d2
        count = 0
        top = 0
        stack[top] = 1
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if xmin[node] > xmax[node]:
                continue
            # range of z.u - r over the box
            a1 = xmin[node] * ux
            a2 = xmax[node] * ux
            b1 = ymin[node] * uy
            b2 = ymax[node] * uy
            smin = min(a1, a2) + min(b1, b2) - r
            smax = max(a1, a2) + max(b1, b2) - r
            if smin > tol or smax < -tol:
                continue
            if node >= size:
                k = node - size
                ax = vx[k]
                ay = vy[k]
                bx = vx[k + 1]
                by = vy[k + 1]
                if _seg_dist2(ax, ay, bx, by, px, py) <= tol2:
                    bad[q] = True
                    break
                sa = ax * ux + ay * uy - r
                sb = bx * ux + by * uy - r
                if (sa > 0 and sb > 0) or (sa < 0 and sb < 0):
                    continue
                if sa == sb:
                    bad[q] = True
                    break
                t = sa / (sa - sb)
                zx = ax + t * (bx - ax)
                zy = ay + t * (by - ay)
                h = (zx - px) * wx + (zy - py) * wy
                if abs(h) <= tol:
                    bad[q] = True
                    break
                side = 1 if h > 0 else -1
                if side == target:
                    count += 1
                    target = -target
            else:
                # right child first so that the left (earlier) one is popped first
                stack[top] = 2 * node + 1
                stack[top + 1] = 2 * node
                top += 2
        out[q] = count + 1
    return out, bad


class PathIndex:
    """Bounding-box tree over the edges of a path, in time order."""

    def __init__(self, path: PolyPath):
        self.path = path
        self.vx = np.ascontiguousarray(path.vertices[:, 0])
        self.vy = np.ascontiguousarray(path.vertices[:, 1])
        self.tree = _build_tree(self.vx, self.vy)

    def winding_numbers(self, points, tol: float = TOL, strict: bool = True):
        """Winding numbers of the closed path around each point.

        With ``strict=False`` returns ``(values, degenerate_mask)`` instead of raising.
        """
        if not self.path.closed:
            raise ValueError("winding numbers need a closed loop")
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        w, bad = _winding_many(self.vx, self.vy, *self.tree,
                               np.ascontiguousarray(p[:, 0]), np.ascontiguousarray(p[:, 1]), tol)
        if strict:
            if bad.any():
                raise DegenerateError(f"point {p[np.argmax(bad)]} lies on the loop")
            return w
        return w, bad

    def half_turn_counts(self, points, tol: float = TOL, strict: bool = True):
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        if np.any(np.hypot(p[:, 0], p[:, 1]) <= tol):
            raise DegenerateError("half-turn count is undefined at the origin")
        c, bad = _halfturn_many(self.vx, self.vy, *self.tree,
                                np.ascontiguousarray(p[:, 0]), np.ascontiguousarray(p[:, 1]), tol)
        if strict:
            if bad.any():
                raise DegenerateError(f"path passes through or along the half-lines at {p[np.argmax(bad)]}")
            return c
        return c, bad


def winding_number(loop: PolyPath, p) -> int:
    return int(loop.index.winding_numbers(np.asarray(p, dtype=float))[0])


def winding_number_angle(loop: PolyPath, p, tol: float = TOL) -> int:
    """Winding number by summing the signed angle subtended by each edge."""
    if not loop.closed:
        raise ValueError("winding numbers need a closed loop")
    v = loop.vertices - np.asarray(p, dtype=float)
    a, b = v[:-1], v[1:]
    d = b - a
    L = (d ** 2).sum(axis=1)
    t = np.clip(-(a * d).sum(axis=1) / np.where(L > 0, L, 1.0), 0.0, 1.0)
    if np.any(((a + t[:, None] * d) ** 2).sum(axis=1) <= tol * tol):
        raise DegenerateError("point lies on the loop")
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = (a * b).sum(axis=1)
    return int(np.rint(np.arctan2(cross, dot).sum() / (2 * np.pi)))


def half_turn_count(path: PolyPath, p) -> int:
    return int(path.index.half_turn_counts(np.asarray(p, dtype=float))[0])


def half_turn_count_direct(path: PolyPath, p, tol: float = TOL) -> int:
    """Unaccelerated half-turn count: scan the edges in time order."""
    p = np.asarray(p, dtype=float)
    r = float(np.hypot(*p))
    if r <= tol:
        raise DegenerateError("half-turn count is undefined at the origin")
    u = p / r
    w = np.array([-u[1], u[0]])
    v = path.vertices
    s = v @ u - r
    target, count = 1, 0
    for k in range(len(v) - 1):
        sa, sb = s[k], s[k + 1]
        if (sa > 0 and sb > 0) or (sa < 0 and sb < 0):
            continue
        if sa == sb:
            raise DegenerateError("edge runs along the line")
        z = v[k] + sa / (sa - sb) * (v[k + 1] - v[k])
        h = float((z - p) @ w)
        if abs(h) <= tol:
            raise DegenerateError("path passes through the point")
        side = 1 if h > 0 else -1
        if side == target:
            count += 1
            target = -target
    return count + 1


# --------------------------------------------------------------------------
# spacing


@numba.njit(cache=True)
def _min_spacing_sweep(xs, ys):
    order = np.argsort(xs)
    sx = xs[order]
    sy = ys[order]
    n = sx.shape[0]
    best = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            dx = sx[j] - sx[i]
            if dx * dx >= best:
                break
            dy = sy[j] - sy[i]
            d2 = dx * dx + dy * dy
            if d2 < best:
                best = d2
    return np.sqrt(best)


def min_spacing(points, brute: bool | None = None) -> float:
    """Minimal pairwise distance among the points and the origin."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    if p.shape[0] == 0:
        raise ValueError("need at least one point")
    q = np.vstack([np.zeros((1, 2)), p])
    if brute is None:
        brute = q.shape[0] <= 64
    if brute:
        return min_spacing_brute(p)
    return float(_min_spacing_sweep(np.ascontiguousarray(q[:, 0]), np.ascontiguousarray(q[:, 1])))


def min_spacing_brute(points) -> float:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    q = np.vstack([np.zeros((1, 2)), p])
    best = np.inf
    for i in range(q.shape[0] - 1):
        d = np.sqrt(((q[i + 1:] - q[i]) ** 2).sum(axis=1)).min()
        best = min(best, float(d))
    return best


# --------------------------------------------------------------------------
# winding areas


def uniform_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    a = 2 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(a), r * np.sin(a)])


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    stderr: float
    samples: int


def winding_area_estimate(loop: PolyPath, k: int, samples: int, region_radius: float,
                          rng: np.random.Generator) -> AreaEstimate:
    """Monte Carlo estimate of the area where |winding| > k, within the given disk."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = uniform_disk(rng, samples, region_radius)
    w, bad = loop.index.winding_numbers(pts, strict=False)
    while bad.any():
        pts[bad] = uniform_disk(rng, int(bad.sum()), region_radius)
        w2, bad2 = loop.index.winding_numbers(pts[bad], strict=False)
        w[bad] = w2
        bad[bad] = bad2
    hit = (np.abs(w) > k).astype(float)
    area = np.pi * region_radius ** 2
    return AreaEstimate(area * hit.mean(), area * hit.std(ddof=1) / np.sqrt(samples) if samples > 1 else np.inf,
                        samples)


# --------------------------------------------------------------------------
# punctures


class PunctureSet:
    """Punctures ordered by Euclidean norm; ids are increasing with the norm.

    By default ids are the ranks 1..m, which makes the free-group alphabet
    order coincide with the integer order of the ids.
    """

    def __init__(self, points, ids=None, tol: float = TOL):
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        norms = np.hypot(p[:, 0], p[:, 1])
        order = np.argsort(norms, kind="stable")
        p = p[order]
        norms = norms[order]
        if ids is None:
            ids = np.arange(1, p.shape[0] + 1)
        else:
            ids = np.asarray(ids, dtype=np.int64)[order]
            if np.any(np.diff(ids) <= 0):
                raise ValueError("ids must increase with the norm")
            if ids.size and ids[0] < 1:
                raise ValueError("ids must be positive")
        problem = degeneracy(p, tol)
        if problem:
            raise DegenerateError(problem)
        p.flags.writeable = False
        self.points = np.ascontiguousarray(p)
        self.norms = norms
        self.ids = np.asarray(ids, dtype=np.int64)

    def __len__(self) -> int:
        return self.points.shape[0]

    def without(self, x: int) -> "PunctureSet":
        keep = self.ids != x
        return PunctureSet(self.points[keep], self.ids[keep])

    def position(self, x: int) -> int:
        i = int(np.searchsorted(self.ids, x))
        if i >= len(self.ids) or self.ids[i] != x:
            raise KeyError(x)
        return i

    @property
    def max_id(self) -> int:
        return int(self.ids[-1]) if len(self.ids) else 0


def degeneracy(points, tol: float = TOL) -> str | None:
    """Describe why a point configuration is degenerate, or None if it is fine."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    if p.shape[0] == 0:
        return None
    norms = np.sort(np.hypot(p[:, 0], p[:, 1]))
    if norms[0] <= tol:
        return "puncture at the origin"
    if p.shape[0] > 1:
        if np.any(np.diff(norms) <= tol):
            return "two punctures with equal norms"
        # lines through the origin: directions modulo pi
        ang = np.sort(np.mod(np.arctan2(p[:, 1], p[:, 0]), np.pi))
        gaps = np.diff(np.concatenate([ang, [ang[0] + np.pi]]))
        # angular gap times the norm bounds the distance of a point to the other's ray
        if np.any(gaps * norms[-1] <= tol):
            return "two punctures collinear with the origin"
    return None
