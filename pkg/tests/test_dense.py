import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpovm.circuits import random_doped_circuit
from stabpovm.dense import (DenseCapError, DenseDimensionError, NearThresholdWarning, effective_povm,
                            frame_operator, haar_state, matrix_from_json, matrix_to_json, pauli_basis,
                            pauli_coefficients, pauli_expectation, pauli_matrix, povm_checks, span_rank,
                            stabilizer_basis, t_state)
from stabpovm.pauli import P

from conftest import pauli_strings, random_stabilizer

seeds = st.integers(0, 10 ** 6)


@given(st.integers(1, 2), st.integers(0, 2), st.integers(0, 3), seeds)
def test_povm_complete_and_positive(n, m, t, seed):
    c = random_doped_circuit(n, m, t, seed, "serial", layer_length=6)
    psi = haar_state(m, np.random.default_rng(seed))
    comp, lam = povm_checks(effective_povm(c, psi))
    assert comp < 1e-10 and lam > -1e-10


@given(st.integers(1, 3), seeds)
def test_stabilizer_basis_orthonormal(n, seed):
    s = random_stabilizer(n, seed)
    b = np.stack(stabilizer_basis(s), axis=1)
    assert np.allclose(b.conj().T @ b, np.eye(1 << n))


@given(st.integers(1, 10), st.integers(1, 16), seeds)
def test_span_rank_matches_svd(r, count, seed):
    rng = np.random.default_rng(seed)
    base = [rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(r)]
    ops = [sum(rng.normal() * b for b in base) for _ in range(count)]
    flat = np.stack([o.reshape(-1) for o in ops])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearThresholdWarning)
        assert span_rank(ops) == np.linalg.matrix_rank(flat, tol=1e-8)


def test_pauli_basis_and_coefficients():
    names = [s for s, _ in pauli_basis(2)]
    assert names[:5] == ["II", "IX", "IY", "IZ", "XI"]
    for s, m in pauli_basis(2):
        assert np.allclose(m, pauli_matrix(P(s)))
    rng = np.random.default_rng(0)
    op = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rebuilt = sum(c * m / 2 for c, (_, m) in zip(pauli_coefficients(op), pauli_basis(2)))
    assert np.allclose(rebuilt, op)


def test_frame_operator_computational_basis():
    ops = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    assert np.allclose(frame_operator(ops), np.diag([1.0, 0.0, 0.0, 1.0]))


def test_t_state_expectations():
    psi = t_state(1)
    assert np.isclose(pauli_expectation(psi, P("X")).real, 2 ** -0.5)
    assert np.isclose(pauli_expectation(psi, P("Y")).real, 2 ** -0.5)
    assert np.isclose(pauli_expectation(psi, P("Z")).real, 0.0)


def test_json_round_trip():
    m = np.array([[1 + 2j, 0], [3, -1j]])
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)


def test_cap_and_dimension_errors():
    c = random_doped_circuit(2, 1, 0, 0)
    with pytest.raises(DenseCapError):
        effective_povm(c, np.array([1, 0]), cap=2)
    with pytest.raises(DenseDimensionError):
        effective_povm(c, np.array([1, 0, 0, 0]))


@given(pauli_strings(max_n=5), seeds)
def test_index_form_of_pauli_action(p, seed):
    from stabpovm.dense import _pauli_action

    v = haar_state(p.n, np.random.default_rng(seed))
    src, coef = _pauli_action(p)
    assert np.allclose(coef * v[src], pauli_matrix(p) @ v)
