import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpovm.dense import pauli_matrix
from stabpovm.pauli import (DimensionError, P, PauliParseError, PauliString, ProjectivePauli, commutes,
                            format_pauli, is_z_free, multiply, parse_pauli, restrict, symplectic, tensor,
                            vec_symplectic, weight_counts)

from conftest import pauli_strings

pairs3 = st.tuples(pauli_strings(n=3), pauli_strings(n=3))


@given(pairs3)
def test_multiply_matches_dense(ab):
    a, b = ab
    assert np.allclose(pauli_matrix(multiply(a, b)), pauli_matrix(a) @ pauli_matrix(b))


@given(pairs3)
def test_commutation_matches_dense(ab):
    a, b = ab
    ma, mb = pauli_matrix(a), pauli_matrix(b)
    assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)
    assert symplectic(a, b) == vec_symplectic(a.vector, b.vector, 3)


@given(st.tuples(pauli_strings(n=2), pauli_strings(n=2), pauli_strings(n=2)))
def test_multiply_associative(abc):
    a, b, c = abc
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


def test_group_order_bruteforce():
    for n in (1, 2):
        elems = {(x, z, ph) for x in range(1 << n) for z in range(1 << n) for ph in range(4)}
        assert len(elems) == 4 * 4 ** n
        mats = [pauli_matrix(PauliString(n, x, z, ph)) for x, z, ph in elems]
        assert len({tuple(np.round(m, 8).ravel()) for m in mats}) == 4 * 4 ** n


@given(pauli_strings())
def test_hermitian_iff_matrix_hermitian(p):
    m = pauli_matrix(p)
    assert p.is_hermitian() == np.allclose(m, m.conj().T)


@given(pauli_strings())
def test_text_round_trip(p):
    assert parse_pauli(format_pauli(p)) == p


@given(pauli_strings())
def test_weight_counts_sum(p):
    assert sum(weight_counts(p)) == p.n


def test_parse_letters_and_signs():
    assert P("-XYZ").sign == -1
    assert P("XYZ").letters() == "XYZ"
    assert np.allclose(pauli_matrix(P("Y")), [[0, -1j], [1j, 0]])
    with pytest.raises(PauliParseError, match="position 1"):
        parse_pauli("XQ")


def test_restrict_examples():
    assert restrict(P("XXIX"), [1, 2, 3]) == P("XIX")
    assert restrict(P("-IXY"), [1, 2]) == P("-XY")
    assert restrict(P("-ZXY"), [1, 2]) == P("XY")
    with pytest.raises(DimensionError):
        restrict(P("XX"), [2])


def test_tensor_and_z_free():
    assert tensor(P("X"), P("-Z")) == P("-XZ")
    assert is_z_free(P("XYI")) and not is_z_free(P("XZ"))
    assert weight_counts(P("IXYZ")) == (1, 1, 1, 1)
    assert weight_counts(PauliString.identity(4)) == (4, 0, 0, 0)


def test_projective_lift_is_hermitian():
    for x in range(4):
        for z in range(4):
            assert ProjectivePauli(2, x, z).lift().is_hermitian()


def test_dimension_errors():
    with pytest.raises(DimensionError):
        multiply(P("X"), P("XX"))
    with pytest.raises(DimensionError):
        PauliString(1, 2, 0)
