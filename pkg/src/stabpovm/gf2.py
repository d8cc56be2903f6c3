"""GF(2) linear algebra on bit vectors packed into Python ints.

A vector is an int; bit ``j`` is coordinate ``j``. Row-reduced bases keep
one pivot per row (the row's highest set bit), sorted by decreasing pivot,
with every pivot column cleared in all other rows.
"""

from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Tuple


def popcount(v: int) -> int:
    return v.bit_count()


def parity(v: int) -> int:
    return v.bit_count() & 1


def rref(rows: Iterable[int]) -> Tuple[List[int], List[int]]:
    """Fully reduced row echelon form. Returns ``(basis, pivots)``."""
    basis: List[int] = []
    pivots: List[int] = []
    for v in rows:
        v = reduce(v, basis, pivots)
        if v:
            _insert(v, basis, pivots)
    return basis, pivots


def _insert(v: int, basis: List[int], pivots: List[int]) -> None:
    p = v.bit_length() - 1
    for i, b in enumerate(basis):
        if (b >> p) & 1:
            basis[i] = b ^ v
    k = 0
    while k < len(pivots) and pivots[k] > p:
        k += 1
    basis.insert(k, v)
    pivots.insert(k, p)


def reduce(v: int, basis: Sequence[int], pivots: Sequence[int]) -> int:
    """Reduce ``v`` against a reduced basis; zero iff ``v`` is in the span."""
    for b, p in zip(basis, pivots):
        if (v >> p) & 1:
            v ^= b
    return v


def rank(rows: Iterable[int]) -> int:
    return len(rref(rows)[0])


def in_span(v: int, rows: Iterable[int]) -> bool:
    basis, pivots = rref(rows)
    return reduce(v, basis, pivots) == 0


def solve(v: int, rows: Sequence[int]) -> Optional[int]:
    """Mask ``c`` with XOR of ``rows[i]`` over set bits of ``c`` equal to ``v``.

    Returns None when ``v`` is outside the row span. When the rows are
    dependent an arbitrary solution is returned.
    """
    basis: List[int] = []
    combos: List[int] = []
    pivots: List[int] = []
    for i, r in enumerate(rows):
        c = 1 << i
        for b, cb, p in zip(basis, combos, pivots):
            if (r >> p) & 1:
                r ^= b
                c ^= cb
        if r:
            basis.append(r)
            combos.append(c)
            pivots.append(r.bit_length() - 1)
    c = 0
    for b, cb, p in zip(basis, combos, pivots):
        if (v >> p) & 1:
            v ^= b
            c ^= cb
    return c if v == 0 else None


def relations(rows: Sequence[int]) -> List[int]:
    """Basis of masks ``c`` for which the XOR of the selected rows vanishes."""
    basis: List[int] = []
    combos: List[int] = []
    pivots: List[int] = []
    out: List[int] = []
    for i, r in enumerate(rows):
        c = 1 << i
        for b, cb, p in zip(basis, combos, pivots):
            if (r >> p) & 1:
                r ^= b
                c ^= cb
        if r:
            basis.append(r)
            combos.append(c)
            pivots.append(r.bit_length() - 1)
        else:
            out.append(c)
    return out


def nullspace(rows: Sequence[int], ncols: int) -> List[int]:
    """Basis of ``{v : parity(row & v) == 0 for every row}`` in GF(2)^ncols."""
    basis, pivots = rref(rows)
    pivot_set = set(pivots)
    out = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = 1 << f
        for b, p in zip(basis, pivots):
            if (b >> f) & 1:
                v |= 1 << p
        out.append(v)
    return out


def intersect(a: Sequence[int], b: Sequence[int], nbits: int) -> List[int]:
    """Basis of span(a) ∩ span(b) (Zassenhaus)."""
    rows = [(v << nbits) | v for v in a] + [v << nbits for v in b]
    basis, _ = rref(rows)
    mask = (1 << nbits) - 1
    return [r & mask for r in basis if r >> nbits == 0]


def complement(sub: Sequence[int], vectors: Sequence[int]) -> List[int]:
    """Pick elements of ``vectors`` extending span(sub) to span(sub + vectors)."""
    basis, pivots = rref(sub)
    picked = []
    for v in vectors:
        r = reduce(v, basis, pivots)
        if r:
            _insert(r, basis, pivots)
            picked.append(v)
    return picked


def transpose(rows: Sequence[int], ncols: int) -> List[int]:
    cols = []
    for j in range(ncols):
        c = 0
        for i, r in enumerate(rows):
            if (r >> j) & 1:
                c |= 1 << i
        cols.append(c)
    return cols
