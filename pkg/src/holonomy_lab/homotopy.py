"""Homotopy words of planar polylines in the punctured plane.

Each puncture x carries the cut ray ``{r * x/|x| : r >= |x|}`` pointing away
from the origin.  The complement of the rays is star-shaped about the origin,
so a loop based at 0 is read as the sequence of its signed ray crossings: a
counter-clockwise crossing of the ray of x contributes the letter x, a
clockwise one x^-1.  The generator read this way is the loop going straight
toward x, around it once counter-clockwise and straight back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .freegroup import Word
from .geometry import TOL, DegenerateError, PolyPath, PunctureSet

_ANGLE_PAD = 1e-9

# kernel status codes
_OK = 0
_VERTEX_ON_RAY = 1
_THROUGH_PUNCTURE = 2
_THROUGH_ORIGIN = 3


@numba.njit(cache=True)
def _test_pair(ax, ay, bx, by, dx, dy, r, tol):
    """Crossing of edge a->b with the ray of direction d starting at radius r.

    Returns (status, sign, t).  sign 0 means no crossing.
    """
    ca = dx * ay - dy * ax
    cb = dx * by - dy * bx
    if abs(ca) <= tol and ax * dx + ay * dy > r - tol:
        return _VERTEX_ON_RAY, 0, 0.0
    if abs(cb) <= tol and bx * dx + by * dy > r - tol:
        return _VERTEX_ON_RAY, 0, 0.0
    if (ca < 0 and cb > 0) or (ca > 0 and cb < 0):
        t = ca / (ca - cb)
        zx = ax + t * (bx - ax)
        zy = ay + t * (by - ay)
        rho = zx * dx + zy * dy
        if rho <= 0:
            return _OK, 0, 0.0
        if abs(rho - r) <= tol:
            return _THROUGH_PUNCTURE, 0, 0.0
        if rho > r:
            return _OK, (1 if cb > ca else -1), t
    return _OK, 0, 0.0


@numba.njit(cache=True)
def _crossings(vx, vy, times, ang, dxs, dys, rr, rid, tol, out_t, out_id, out_s):
    """Fill time-ordered crossing events; returns (count, status, edge)."""
    n_edges = vx.shape[0] - 1
    m = ang.shape[0]
    count = 0
    cap = out_t.shape[0]
    buf_t = np.empty(m, dtype=np.float64)
    buf_i = np.empty(m, dtype=np.int64)
    buf_s = np.empty(m, dtype=np.int64)
    if m == 0:
        return 0, _OK, -1
    for k in range(n_edges):
        ax = vx[k]
        ay = vy[k]
        bx = vx[k + 1]
        by = vy[k + 1]
        na = np.sqrt(ax * ax + ay * ay)
        nb = np.sqrt(bx * bx + by * by)
        reach = max(na, nb)
        if na <= tol or nb <= tol:
            # radial edge from the basepoint: it can only meet a ray by lying on it,
            # which the vertex test on the other endpoint detects
            if na <= tol and nb <= tol:
                continue
            ex = bx if na <= tol else ax
            ey = by if na <= tol else ay
            th = np.arctan2(ey, ex)
            lo = th - _ANGLE_PAD
            hi = th + _ANGLE_PAD
        else:
            cr = ax * by - ay * bx
            dt = ax * bx + ay * by
            if abs(cr) <= tol * max(na, nb) and dt < 0:
                return count, _THROUGH_ORIGIN, k
            tha = np.arctan2(ay, ax)
            delta = np.arctan2(cr, dt)
            lo = min(tha, tha + delta) - _ANGLE_PAD
            hi = max(tha, tha + delta) + _ANGLE_PAD
        nbuf = 0
        # the interval may wrap around +-pi; scan it as up to two ranges
        for part in range(2):
            if part == 0:
                a_lo = lo
                a_hi = hi
                if a_lo < -np.pi:
                    a_lo = -np.pi
                if a_hi > np.pi:
                    a_hi = np.pi
            else:
                if lo < -np.pi:
                    a_lo = lo + 2 * np.pi
                    a_hi = np.pi
                elif hi > np.pi:
                    a_lo = -np.pi
                    a_hi = hi - 2 * np.pi
                else:
                    break
            j0 = np.searchsorted(ang, a_lo)
            j1 = np.searchsorted(ang, a_hi, side="right")
            for j in range(j0, j1):
                if rr[j] > reach + tol:
                    continue
                st, sg, t = _test_pair(ax, ay, bx, by, dxs[j], dys[j], rr[j], tol)
                if st != _OK:
                    return count, st, k
                if sg != 0:
                    # insertion sort by the edge parameter
                    p = nbuf
                    while p > 0 and buf_t[p - 1] > t:
                        buf_t[p] = buf_t[p - 1]
                        buf_i[p] = buf_i[p - 1]
                        buf_s[p] = buf_s[p - 1]
                        p -= 1
                    buf_t[p] = t
                    buf_i[p] = rid[j]
                    buf_s[p] = sg
                    nbuf += 1
        for p in range(nbuf):
            if count < cap:
                out_t[count] = times[k] + buf_t[p] * (times[k + 1] - times[k])
                out_id[count] = buf_i[p]
                out_s[count] = buf_s[p]
            count += 1
    return count, _OK, -1


@numba.njit(cache=True)
def _crossings_brute(vx, vy, times, dxs, dys, rr, rid, tol):
    n_edges = vx.shape[0] - 1
    m = rr.shape[0]
    ts = []
    ids = []
    ss = []
    for k in range(n_edges):
        et = []
        ei = []
        es = []
        for j in range(m):
            st, sg, t = _test_pair(vx[k], vy[k], vx[k + 1], vy[k + 1], dxs[j], dys[j], rr[j], tol)
            if st != _OK:
                return np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), st
            if sg != 0:
                et.append(t)
                ei.append(rid[j])
                es.append(sg)
        order = np.argsort(np.array(et)) if len(et) else np.zeros(0, dtype=np.int64)
        for q in order:
            ts.append(times[k] + et[q] * (times[k + 1] - times[k]))
            ids.append(ei[q])
            ss.append(es[q])
    out_t = np.zeros(len(ts))
    out_i = np.zeros(len(ts), dtype=np.int64)
    out_s = np.zeros(len(ts), dtype=np.int64)
    for q in range(len(ts)):
        out_t[q] = ts[q]
        out_i[q] = ids[q]
        out_s[q] = ss[q]
    return out_t, out_i, out_s, _OK


_MESSAGES = {
    _VERTEX_ON_RAY: "a path vertex lies on a cut ray",
    _THROUGH_PUNCTURE: "the path passes through a puncture",
    _THROUGH_ORIGIN: "an edge passes through the origin",
}


@dataclass(frozen=True)
class CrossingEvents:
    """Time-ordered crossings: parallel arrays of times, puncture ids and signs."""

    times: np.ndarray
    ids: np.ndarray
    signs: np.ndarray

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def codes(self) -> np.ndarray:
        return self.ids * self.signs


class CutIndex:
    """Cut rays of a puncture set sorted by polar angle."""

    def __init__(self, ps: PunctureSet, max_radius: float = np.inf):
        keep = ps.norms < max_radius
        pts = ps.points[keep]
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        order = np.argsort(ang)
        self.angles = np.ascontiguousarray(ang[order])
        r = ps.norms[keep][order]
        self.radii = np.ascontiguousarray(r)
        self.dx = np.ascontiguousarray(pts[order, 0] / r) if r.size else np.zeros(0)
        self.dy = np.ascontiguousarray(pts[order, 1] / r) if r.size else np.zeros(0)
        self.ids = np.ascontiguousarray(ps.ids[keep][order])
        self._cap = 1024

    def crossings(self, path: PolyPath, tol: float = TOL) -> CrossingEvents:
        vx = np.ascontiguousarray(path.vertices[:, 0])
        vy = np.ascontiguousarray(path.vertices[:, 1])
        while True:
            out_t = np.empty(self._cap)
            out_i = np.empty(self._cap, dtype=np.int64)
            out_s = np.empty(self._cap, dtype=np.int64)
            count, status, edge = _crossings(vx, vy, path.times, self.angles, self.dx, self.dy,
                                             self.radii, self.ids, tol, out_t, out_i, out_s)
            if status != _OK:
                raise DegenerateError(f"{_MESSAGES[status]} (edge {edge})")
            if count <= self._cap:
                return CrossingEvents(out_t[:count], out_i[:count], out_s[:count])
            self._cap = int(count * 1.25) + 16

    def crossings_brute(self, path: PolyPath, tol: float = TOL) -> CrossingEvents:
        t, i, s, status = _crossings_brute(np.ascontiguousarray(path.vertices[:, 0]),
                                           np.ascontiguousarray(path.vertices[:, 1]),
                                           path.times, self.dx, self.dy, self.radii, self.ids, tol)
        if status != _OK:
            raise DegenerateError(_MESSAGES[status])
        return CrossingEvents(t, i, s)


def crossing_sequence(path: PolyPath, ps: PunctureSet, brute: bool = False) -> CrossingEvents:
    """All transversal crossings of the path with the cut rays, in time order."""
    index = CutIndex(ps, max_radius=path.max_norm() + 1.0)
    return index.crossings_brute(path) if brute else index.crossings(path)


def word_of_loop(loop: PolyPath, ps: PunctureSet, index: CutIndex | None = None) -> Word:
    """Reduced word of a closed loop based at the origin."""
    if not loop.closed:
        raise ValueError("word_of_loop needs a closed loop")
    if index is None:
        index = CutIndex(ps, max_radius=loop.max_norm() + 1.0)
    return Word(index.crossings(loop).codes())


def _check_chord_end(z: np.ndarray, ps: PunctureSet, tol: float = TOL) -> None:
    """A chord [0, z] meets a ray (or puncture) only if z lies on that ray."""
    if not len(ps):
        return
    d = ps.points / ps.norms[:, None]
    perp = np.abs(d[:, 0] * z[1] - d[:, 1] * z[0])
    along = d @ z
    if np.any((perp <= tol) & (along > ps.norms - tol)):
        raise DegenerateError("chord endpoint lies on a cut ray")


def word_of_subloop(path: PolyPath, s: float, t: float, ps: PunctureSet,
                    events: CrossingEvents | None = None) -> Word:
    """Word of the loop [0, path(s)] . path|[s,t] . [path(t), 0].

    The chords through the origin never meet a cut ray, so the word is read
    from the crossings of the path with times in (s, t).
    """
    if not 0 <= s < t <= 1:
        raise ValueError("need 0 <= s < t <= 1")
    _check_chord_end(path.point_at(s), ps)
    _check_chord_end(path.point_at(t), ps)
    if events is None:
        events = crossing_sequence(path, ps)
    sel = (events.times > s) & (events.times < t)
    return Word(events.codes()[sel])


def calibration_loop(x, radius: float = 0.1, n: int = 33) -> PolyPath:
    """Straight to near x, once around x counter-clockwise, straight back.

    ``n`` should be odd so that no polygon vertex falls on the cut ray of x.
    """
    x = np.asarray(x, dtype=float)
    u = x / np.hypot(*x)
    start = x - radius * u
    a0 = np.arctan2(-u[1], -u[0])
    ang = a0 + 2 * np.pi * np.arange(n + 1) / n
    circ = np.column_stack([x[0] + radius * np.cos(ang), x[1] + radius * np.sin(ang)])
    circ[-1] = start
    v = np.vstack([[0.0, 0.0], circ, [0.0, 0.0]])
    v[1] = start
    return PolyPath(v, closed=True)
