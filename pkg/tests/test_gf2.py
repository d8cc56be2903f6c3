from functools import reduce as fold

from hypothesis import given, strategies as st

from stabpovm import gf2

from conftest import gf2_rank_numpy

rows_st = st.lists(st.integers(0, 255), max_size=10)


def _xor(vals):
    return fold(lambda a, b: a ^ b, vals, 0)


@given(rows_st)
def test_rank_matches_dense_elimination(rows):
    assert gf2.rank(rows) == gf2_rank_numpy(rows, 8)


@given(rows_st)
def test_rref_is_reduced(rows):
    basis, pivots = gf2.rref(rows)
    assert pivots == sorted(pivots, reverse=True)
    for b, p in zip(basis, pivots):
        assert b.bit_length() - 1 == p
        assert sum((o >> p) & 1 for o in basis) == 1
    for r in rows:
        assert gf2.reduce(r, basis, pivots) == 0


@given(rows_st, st.integers(0, 255))
def test_solve_reconstructs(rows, v):
    c = gf2.solve(v, rows)
    if c is None:
        assert not gf2.in_span(v, rows)
    else:
        assert _xor(r for i, r in enumerate(rows) if (c >> i) & 1) == v


@given(rows_st)
def test_relations_vanish_and_count(rows):
    rel = gf2.relations(rows)
    assert len(rel) == len(rows) - gf2.rank(rows)
    for c in rel:
        assert c and _xor(r for i, r in enumerate(rows) if (c >> i) & 1) == 0


@given(rows_st)
def test_nullspace_orthogonal(rows):
    ns = gf2.nullspace(rows, 8)
    assert len(ns) == 8 - gf2.rank(rows)
    assert gf2.rank(ns) == len(ns)
    assert all(gf2.parity(r & v) == 0 for r in rows for v in ns)


@given(rows_st, rows_st)
def test_intersect_dimension(a, b):
    both = gf2.intersect(a, b, 8)
    assert len(both) == gf2.rank(a) + gf2.rank(b) - gf2.rank(a + b)
    assert all(gf2.in_span(v, a) and gf2.in_span(v, b) for v in both)


@given(rows_st, rows_st)
def test_complement_extends(sub, vecs):
    picked = gf2.complement(sub, vecs)
    assert gf2.rank(sub + picked) == gf2.rank(sub + vecs) == gf2.rank(sub) + len(picked)


@given(st.lists(st.integers(0, 63), max_size=6))
def test_transpose_involution(rows):
    assert gf2.transpose(gf2.transpose(rows, 6), len(rows)) == rows


def test_small_examples():
    assert gf2.rank([0b011, 0b110, 0b101]) == 2
    assert gf2.nullspace([0b11], 2) == [0b11]
    assert gf2.solve(0b100, [0b001, 0b010]) is None
