"""Free-group words over a totally ordered alphabet of positive integer ids.

A letter is stored as a signed integer: ``+k`` is the generator ``x_k`` and
``-k`` its inverse.  The alphabet order is the integer order of the ids, so
``project_leq(g, x)`` keeps the letters whose id is at most ``x``.  Words are
always kept freely reduced.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np


@numba.njit(cache=True)
def _reduce_codes(codes):
    out = np.empty(codes.shape[0], dtype=np.int64)
    top = 0
    for i in range(codes.shape[0]):
        c = codes[i]
        if top > 0 and out[top - 1] == -c:
            top -= 1
        else:
            out[top] = c
            top += 1
    return out[:top].copy()


@numba.njit(cache=True)
def _run_lengths(codes):
    n = codes.shape[0]
    ids = np.empty(n, dtype=np.int64)
    exps = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        c = codes[i]
        a = abs(c)
        s = 1 if c > 0 else -1
        if m > 0 and ids[m - 1] == a:
            exps[m - 1] += s
        else:
            ids[m] = a
            exps[m] = s
            m += 1
    return ids[:m].copy(), exps[:m].copy()


@numba.njit(cache=True)
def _projection_profile(codes, max_id):
    """Exponent sequences of every letter x in the projection onto letters <= x.

    Letters are deleted from the largest id downward on a doubly linked list;
    each deletion cancels the pairs that become adjacent, so the list always
    holds the reduced projection.  Total work is linear in the word length.
    """
    n = codes.shape[0]
    prev = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    alive = np.ones(n, dtype=np.bool_)
    for i in range(n):
        prev[i] = i - 1
        nxt[i] = i + 1 if i + 1 < n else -1
    counts = np.zeros(max_id + 2, dtype=np.int64)
    for i in range(n):
        counts[abs(codes[i]) + 1] += 1
    starts = np.cumsum(counts)
    fill = starts.copy()
    occ = np.empty(n, dtype=np.int64)
    for i in range(n):
        a = abs(codes[i])
        occ[fill[a]] = i
        fill[a] += 1
    # output: run exponents for each id, in word order
    out_vals = np.empty(n, dtype=np.int64)
    out_off = np.zeros(max_id + 2, dtype=np.int64)
    run_start = np.empty(max_id + 1, dtype=np.int64)
    run_count = np.zeros(max_id + 1, dtype=np.int64)
    pos = 0
    for x in range(max_id, 0, -1):
        run_start[x] = pos
        last = -1
        for k in range(starts[x], starts[x + 1]):
            p = occ[k]
            if not alive[p]:
                continue
            s = 1 if codes[p] > 0 else -1
            if last != -1 and nxt[last] == p:
                out_vals[pos - 1] += s
            else:
                out_vals[pos] = s
                pos += 1
            last = p
        run_count[x] = pos - run_start[x]
        for k in range(starts[x], starts[x + 1]):
            p = occ[k]
            if not alive[p]:
                continue
            alive[p] = False
            a = prev[p]
            b = nxt[p]
            if a != -1:
                nxt[a] = b
            if b != -1:
                prev[b] = a
            while a != -1 and b != -1 and codes[a] == -codes[b]:
                alive[a] = False
                alive[b] = False
                a2 = prev[a]
                b2 = nxt[b]
                if a2 != -1:
                    nxt[a2] = b2
                if b2 != -1:
                    prev[b2] = a2
                a = a2
                b = b2
    # repack in increasing id order
    vals = np.empty(pos, dtype=np.int64)
    q = 0
    for x in range(1, max_id + 1):
        out_off[x] = q
        for k in range(run_count[x]):
            vals[q] = out_vals[run_start[x] + k]
            q += 1
    out_off[max_id + 1] = q
    return vals, out_off


def _as_codes(letters) -> np.ndarray:
    arr = np.asarray(letters, dtype=np.int64).reshape(-1)
    if arr.size and np.any(arr == 0):
        raise ValueError("letter code 0 is not a valid generator")
    return arr


class Word:
    """A freely reduced word; ``letters`` is a read-only int64 array of signed ids."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[int] | np.ndarray = (), *, reduced: bool = False):
        codes = _as_codes(list(letters) if not isinstance(letters, np.ndarray) else letters)
        if not reduced:
            codes = _reduce_codes(codes)
        codes = np.ascontiguousarray(codes)
        codes.flags.writeable = False
        self.letters = codes

    @classmethod
    def letter(cls, x: int, exponent: int = 1) -> "Word":
        s = 1 if exponent > 0 else -1
        return cls(np.full(abs(exponent), s * x, dtype=np.int64), reduced=True)

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Parse tokens like ``x3``, ``x4^-1`` or ``x2^{5}`` separated by whitespace."""
        codes: list[int] = []
        for tok in text.split():
            m = re.fullmatch(r"x(\d+)(?:\^\{?(-?\d+)\}?)?", tok)
            if m is None:
                raise ValueError(f"bad word token {tok!r}")
            x = int(m.group(1))
            e = int(m.group(2)) if m.group(2) is not None else 1
            if x <= 0:
                raise ValueError("generator ids must be positive")
            codes.extend([x if e > 0 else -x] * abs(e))
        return cls(codes)

    def __len__(self) -> int:
        return int(self.letters.shape[0])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Word) and np.array_equal(self.letters, other.letters)

    def __hash__(self) -> int:
        return hash(self.letters.tobytes())

    def __mul__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __repr__(self) -> str:
        return f"Word({format_word(self)!r})"

    def __str__(self) -> str:
        return format_word(self)

    def ids(self) -> np.ndarray:
        return np.unique(np.abs(self.letters))


def format_word(g: Word) -> str:
    return " ".join(f"x{c}" if c > 0 else f"x{-c}^-1" for c in g.letters.tolist())


def concat(a: Word, b: Word) -> Word:
    return Word(np.concatenate([a.letters, b.letters]))


def invert(a: Word) -> Word:
    return Word(-a.letters[::-1], reduced=True)


def reduce(letters: Sequence[int] | np.ndarray | Word) -> Word:
    if isinstance(letters, Word):
        letters = letters.letters
    return Word(np.asarray(letters, dtype=np.int64))


def product(words: Iterable[Word]) -> Word:
    parts = [w.letters for w in words]
    if not parts:
        return Word()
    return Word(np.concatenate(parts))


@dataclass(frozen=True)
class RunForm:
    """Maximal runs ``(id, exponent)`` of a reduced word."""

    runs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.runs)

    def expand(self) -> Word:
        codes: list[int] = []
        for x, e in self.runs:
            codes.extend([x if e > 0 else -x] * abs(e))
        return Word(codes)

    def __str__(self) -> str:
        return " ".join(f"x{x}^{e}" for x, e in self.runs)

    @classmethod
    def parse(cls, text: str) -> "RunForm":
        return run_form(Word.parse(text))


def run_form(g: Word) -> RunForm:
    ids, exps = _run_lengths(g.letters)
    return RunForm(tuple(zip(ids.tolist(), exps.tolist())))


def project_leq(g: Word, x: int, strict: bool = False) -> Word:
    """Delete letters with id > x (or >= x when ``strict``) and reduce."""
    a = np.abs(g.letters)
    keep = a < x if strict else a <= x
    return Word(g.letters[keep])


def delete_letter(g: Word, x: int) -> Word:
    """Delete every occurrence of the single generator ``x`` and reduce."""
    return Word(g.letters[np.abs(g.letters) != x])


def semidirect_component(g: Word, x: int) -> Word:
    """The factor ``(pi^{<x} g)^{-1} pi^{<=x} g``; these multiply back to g in increasing x."""
    return concat(invert(project_leq(g, x, strict=True)), project_leq(g, x))


def semidirect_components(g: Word) -> dict[int, Word]:
    return {int(x): semidirect_component(g, int(x)) for x in g.ids()}


def alpha(g: Word, x: int) -> tuple[int, ...]:
    """Exponents of the runs of letter x in g, in word order."""
    ids, exps = _run_lengths(g.letters)
    return tuple(exps[ids == x].tolist())


def abelian_exponent(g: Word, x: int) -> int:
    return int(np.sign(g.letters[np.abs(g.letters) == x]).sum())


def sorted_betas(a: Sequence[int]) -> list[int]:
    """Decreasing absolute value; among equal absolute values the larger signed value first."""
    return sorted(a, key=lambda v: (-abs(v), -v))


def tail_sum(beta: Sequence[int], i: int) -> int:
    """S^{(i)}: sum of |beta_k| for k >= i (1-based)."""
    if i < 1:
        raise ValueError("i must be >= 1")
    return int(sum(abs(b) for b in beta[i - 1:]))


def exponent_stats(g: Word, x: int, i: int) -> tuple[tuple[int, ...], list[int], int]:
    a = alpha(g, x)
    b = sorted_betas(a)
    return a, b, tail_sum(b, i)


def refines(u: Sequence[int], v: Sequence[int]) -> bool:
    """Whether u is obtained from v by merging adjacent entries (zero sums dropped)."""
    u = [int(t) for t in u if t != 0]
    v = [int(t) for t in v]
    nu, nv = len(u), len(v)
    prefix = np.concatenate([[0], np.cumsum(v)]) if nv else np.zeros(1, dtype=np.int64)
    # reach[i][j]: v[:j] can be cut into blocks whose nonzero sums are u[:i]
    reach = np.zeros((nu + 1, nv + 1), dtype=bool)
    reach[0, 0] = True
    for j in range(nv):
        for i in range(nu + 1):
            if not reach[i, j]:
                continue
            for k in range(j + 1, nv + 1):
                s = prefix[k] - prefix[j]
                if s == 0:
                    reach[i, k] = True
                elif i < nu and s == u[i]:
                    reach[i + 1, k] = True
    return bool(reach[nu, nv])


def projection_profile(g: Word, max_id: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """For each id x, the exponent sequence alpha_x(pi^{<=x} g) in ragged form.

    Returns ``(values, offsets)``: the sequence for x is ``values[offsets[x]:offsets[x+1]]``.
    """
    if max_id is None:
        max_id = int(np.abs(g.letters).max()) if len(g) else 0
    return _projection_profile(g.letters, int(max_id))


def word_norm2(g: Word) -> float:
    return float(np.sqrt(np.sum(projection_l1(g).astype(float) ** 2)))


def projection_l1(g: Word, max_id: int | None = None) -> np.ndarray:
    """S^{(1)}(x, pi^{<=x} g) for x = 0..max_id (entry 0 unused)."""
    vals, off = projection_profile(g, max_id)
    seg = np.repeat(np.arange(off.shape[0] - 1), np.diff(off))
    return np.bincount(seg, weights=np.abs(vals), minlength=off.shape[0] - 1).astype(np.int64)


def block_split(u: Sequence[float], i: int) -> list[int]:
    """Cut u into i consecutive blocks each summing to at least floor(S^{(i)}/i).

    Greedy: close each of the first i-1 blocks as soon as it reaches the
    target; the remainder is then forced to reach it as well.
    """
    if i < 1 or len(u) == 0:
        raise ValueError("need i >= 1 and nonempty u")
    vals = [float(t) for t in u]
    if len(vals) < i:
        raise AssertionError("fewer entries than blocks")
    tail = sorted(vals, reverse=True)[i - 1:]
    target = float(np.floor(sum(tail) / i))
    cuts = [0]
    acc = 0.0
    for k, t in enumerate(vals):
        if len(cuts) == i:
            break
        acc += t
        if acc >= target and len(vals) - (k + 1) >= i - len(cuts):
            cuts.append(k + 1)
            acc = 0.0
    cuts.append(len(vals))
    if len(cuts) != i + 1:
        raise AssertionError("block split infeasible")
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a or sum(vals[a:b]) < target:
            raise AssertionError("block split infeasible")
    return cuts
