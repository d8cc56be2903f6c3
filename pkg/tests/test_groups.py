from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpovm.dense import pauli_matrix, stabilizer_state
from stabpovm.groups import (ContradictionError, GroupError, NotAStabilizerError, canonicalize, centralizer,
                             centralizer_within, coset_table, entanglement_decomposition, group, intersect,
                             is_subgroup, local_subgroup, parse_group_text, project, stabilizer_overlap,
                             zfree_centralizer_count, zfree_centralizer_count_bruteforce)
from stabpovm.pauli import P, ProjectivePauli, commutes, restrict

from conftest import random_abelian, random_stabilizer

seeds = st.integers(0, 10 ** 6)


def _proj_set(g):
    return {e.projective() for e in g.elements()}


@given(st.integers(1, 4), seeds)
def test_stabilizer_state_is_fixed(n, seed):
    s = random_stabilizer(n, seed)
    psi = stabilizer_state(s)
    for g in s.generators:
        assert np.allclose(pauli_matrix(g) @ psi, psi)


@given(st.integers(1, 3), seeds, seeds)
def test_overlap_matches_dense(n, s1, s2):
    a, b = random_stabilizer(n, s1), random_stabilizer(n, s2)
    dense = abs(np.vdot(stabilizer_state(a), stabilizer_state(b))) ** 2
    assert np.isclose(float(stabilizer_overlap(a, b)), dense)


@given(st.integers(2, 5), seeds, st.data())
def test_entanglement_relations(n, seed, data):
    s = random_stabilizer(n, seed)
    n_a = data.draw(st.integers(0, n))
    dec = entanglement_decomposition(s, n_a)
    assert dec.S_A.dim + dec.S_B.dim + 2 * dec.p == n
    assert n_a - dec.S_A.dim == dec.p == (n - n_a) - dec.S_B.dim
    # p is the entanglement entropy of the cut
    psi = stabilizer_state(s).reshape(1 << n_a, 1 << (n - n_a))
    assert np.linalg.matrix_rank(psi, tol=1e-8) == 2 ** dec.p
    # nonlocal pairs: anticommute on A within a pair, commute across pairs
    pairs = dec.nonlocal_pairs
    for i, ((ua, _), (va, _)) in enumerate(pairs):
        assert not commutes(ua, va)
        for j, ((wa, _), (xa, _)) in enumerate(pairs):
            if i != j:
                assert commutes(ua, wa) and commutes(ua, xa) and commutes(va, wa) and commutes(va, xa)


@given(st.integers(1, 4), seeds)
def test_centralizer_bruteforce(t, seed):
    h = random_abelian(t, seed)
    c = centralizer(h)
    brute = {ProjectivePauli(t, x, z) for x in range(1 << t) for z in range(1 << t)
             if all(commutes(ProjectivePauli(t, x, z), g) for g in h.generators)}
    assert _proj_set(c) == brute
    assert c.dim == 2 * t - h.dim


@given(st.integers(1, 5), seeds)
def test_zfree_count_bruteforce(t, seed):
    h = random_abelian(t, seed)
    assert zfree_centralizer_count(h) == zfree_centralizer_count_bruteforce(h)


def test_zfree_count_examples():
    assert zfree_centralizer_count(group("ZZ", "XX")) == zfree_centralizer_count_bruteforce(group("ZZ", "XX"))
    assert zfree_centralizer_count(group("IIII", n=4)) == 81
    assert zfree_centralizer_count(group("IIZZ")) == 45
    assert zfree_centralizer_count(group("IZZX")) == 42


@given(st.integers(2, 4), seeds, st.data())
def test_local_and_project(n, seed, data):
    s = random_stabilizer(n, seed)
    reg = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=1)))
    loc = local_subgroup(s, reg)
    outside = [q for q in range(n) if q not in reg]
    expect = {g.projective() for g in s.elements()
              if restrict(g.projective(), outside).is_identity()} if outside else _proj_set(s)
    assert _proj_set(loc) == expect
    assert _proj_set(project(s, reg)) == {restrict(g.projective(), reg) for g in s.elements()}


@given(st.integers(2, 4), seeds, seeds)
def test_intersection_and_centralizer_within(n, s1, s2):
    a, b = random_stabilizer(n, s1).projective(), random_stabilizer(n, s2).projective()
    assert _proj_set(intersect(a, b)) == _proj_set(a) & _proj_set(b)
    cw = centralizer_within(a, b)
    assert _proj_set(cw) == {g for g in _proj_set(a) if all(commutes(g, h) for h in b.generators)}


@given(st.integers(2, 4), seeds)
def test_coset_table_partitions(n, seed):
    s = random_stabilizer(n, seed)
    h = local_subgroup(s, [0])
    tab = coset_table(s, h)
    assert len(tab) == 2 ** (s.dim - h.dim)
    seen = [m.projective() for c in tab.cosets for m in c.members]
    assert len(seen) == len(set(seen)) == s.order


@given(st.integers(1, 5), seeds)
def test_canonical_form_is_basis_independent(n, seed):
    s = random_stabilizer(n, seed)
    rng = np.random.default_rng(seed)
    shuffled = [s.element(int(rng.integers(1, 1 << n))) for _ in range(3 * n)] + list(s.generators)
    again = canonicalize(shuffled, signed=True, n=n)
    assert again.generators == s.generators


def test_signed_errors():
    with pytest.raises(ContradictionError):
        group("ZZ", "-ZZ", signed=True)
    with pytest.raises(NotAStabilizerError):
        group("XI", "ZI", signed=True)
    with pytest.raises(NotAStabilizerError):
        group("XX", "ZZ", "YY", signed=True)
    assert group("XX", "ZZ", "YY", signed=False).dim == 2


def test_group_text_format():
    rep = parse_group_text("# bell\nXX\nZZ\n-YY\n")
    assert rep.group.dim == 2 and rep.n_dropped == 1
    with pytest.raises(GroupError, match="line 2"):
        parse_group_text("XX\nZQ\n")
    assert is_subgroup(group("ZZ"), rep.group)
    assert stabilizer_overlap(rep.group, group("ZI", "IZ", signed=True)) == Fraction(1, 2)
