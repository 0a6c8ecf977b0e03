"""Slow, independent reference implementations used by the acceptance suite and tests.

Nothing here calls the compiled kernels: words are plain lists of signed ints.
"""

from __future__ import annotations


def free_reduce(letters) -> list[int]:
    out: list[int] = []
    for a in letters:
        if out and out[-1] == -a:
            out.pop()
        else:
            out.append(int(a))
    return out


def runs(letters) -> list[tuple[int, int]]:
    """(id, signed exponent) of maximal blocks of a reduced word."""
    out: list[list[int]] = []
    for a in free_reduce(letters):
        if out and out[-1][0] == abs(a):
            out[-1][1] += 1 if a > 0 else -1
        else:
            out.append([abs(a), 1 if a > 0 else -1])
    return [(i, e) for i, e in out]


def conjugate_product_component(letters, x: int) -> list[int]:
    """Factor of ``x`` written as a product of conjugates of its blocks.

    For each block x^a at position i, conjugate x^a by the word obtained from
    the blocks after i by keeping only letters smaller than x.
    """
    rs = runs(letters)
    # walk right to left, keeping the reduced projection of the suffix as a
    # reversed stack so that prepending a letter is a push or a pop
    suffix_rev: list[int] = []
    pieces: list[list[int]] = []
    for b, e in reversed(rs):
        if b == x:
            tail = suffix_rev[::-1]
            inv_tail = [-a for a in suffix_rev]
            pieces.append(inv_tail + [x if e > 0 else -x] * abs(e) + tail)
        elif b < x:
            a = b if e > 0 else -b
            for _ in range(abs(e)):
                if suffix_rev and suffix_rev[-1] == -a:
                    suffix_rev.pop()
                else:
                    suffix_rev.append(a)
    out: list[int] = []
    for piece in reversed(pieces):
        out.extend(piece)
    return free_reduce(out)


def exponents_of(letters, x: int) -> list[int]:
    return [e for b, e in runs(letters) if b == x]


def project(letters, x: int) -> list[int]:
    return free_reduce([a for a in letters if abs(a) <= x])
