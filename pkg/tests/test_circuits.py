import numpy as np
import pytest
from hypothesis import given, strategies as st

from stabpovm.circuits import (CircuitError, CircuitParseError, DopedCircuit, NonCliffordError, Tableau, conjugate,
                               evolve_pauli, evolve_paulis, two_t_gadget_circuit, format_circuit_text, gadgetize,
                               gate, heisenberg_evolve, inverse_gates, parse_circuit_text, random_clifford,
                               random_doped_circuit, ungadgetize, universal_2n_circuit)
from stabpovm.dense import circuit_unitary, effective_povm, effective_povm_gadget, pauli_matrix, zero_state
from stabpovm.groups import group
from stabpovm.pauli import P, PauliString

from conftest import pauli_strings

seeds = st.integers(0, 10 ** 6)


@given(pauli_strings(n=3), st.sampled_from(["H", "S", "SDG", "CNOT"]), st.data())
def test_single_gate_conjugation_matches_dense(p, kind, data):
    qs = data.draw(st.lists(st.integers(0, 2), min_size=2, max_size=2, unique=True))
    g = gate(kind, *qs[:2 if kind == "CNOT" else 1])
    u = circuit_unitary([g], 3)
    assert np.allclose(pauli_matrix(conjugate(g, p)), u @ pauli_matrix(p) @ u.conj().T)


@given(st.integers(1, 3), seeds, pauli_strings(n=3))
def test_circuit_evolution_matches_dense(n, seed, p):
    gates = random_clifford(3, seed, length=12)
    u = circuit_unitary(gates, 3)
    assert np.allclose(pauli_matrix(evolve_pauli(gates, p)), u @ pauli_matrix(p) @ u.conj().T)
    assert np.allclose(pauli_matrix(evolve_pauli(gates, p, adjoint=True)), u.conj().T @ pauli_matrix(p) @ u)


@given(st.integers(1, 6), seeds)
def test_tableau_matches_reference(n, seed):
    gates = random_clifford(n, seed)
    rng = np.random.default_rng(seed)
    ps = [PauliString(n, int(rng.integers(1 << n)), int(rng.integers(1 << n)), int(rng.integers(4)))
          for _ in range(5)]
    for adjoint in (False, True):
        assert evolve_paulis(gates, ps, adjoint) == [evolve_pauli(gates, p, adjoint) for p in ps]


@given(st.integers(1, 4), seeds)
def test_inverse_undoes(n, seed):
    gates = random_clifford(n, seed)
    u = circuit_unitary(gates + inverse_gates(gates), n)
    assert np.allclose(u, np.eye(1 << n))


@given(st.integers(1, 4), seeds)
def test_evolution_preserves_commutation(n, seed):
    gates = random_clifford(n, seed)
    s = group(*[PauliString.single(n, q, "Z") for q in range(n)], signed=True)
    assert heisenberg_evolve(gates, s).is_maximal()


def test_t_gate_rejected_by_clifford_paths():
    with pytest.raises(NonCliffordError):
        conjugate(gate("T", 0), P("X"))


@given(st.integers(1, 2), st.integers(0, 2), st.integers(0, 3), seeds, st.sampled_from(["serial", "parallel"]))
def test_gadgetize_round_trip(n, m, t, seed, layout):
    c = random_doped_circuit(n, m, t, seed, layout, layer_length=4)
    gc = gadgetize(c)
    assert gc.t == t and gc.total_qubits == n + m + t
    assert sum(g.kind == "CNOT" and g.qubits[1] >= n + m for g in gc.clifford_gates) == t
    assert ungadgetize(gc) == c


@given(st.integers(0, 2), seeds)
def test_gadget_povm_equals_doped_povm(t, seed):
    c = random_doped_circuit(1, 1, t, seed, "serial", layer_length=5)
    a = effective_povm(c, zero_state(1))
    b = effective_povm_gadget(gadgetize(c), zero_state(1))
    assert all(np.allclose(x, y) for x, y in zip(a, b))


def test_constructions():
    c = universal_2n_circuit(3)
    assert (c.n_data, c.n_ancilla, c.t, c.n_qubits) == (3, 3, 6, 6)
    assert two_t_gadget_circuit().t == 2
    assert len(random_clifford(2, 0)) == 3 * 4 + 5
    assert random_clifford(3, 11) == random_clifford(3, 11)


def test_text_round_trip_and_errors():
    c = random_doped_circuit(2, 1, 2, 3, "parallel", layer_length=3)
    assert parse_circuit_text(format_circuit_text(c)) == c
    assert parse_circuit_text("# x\nqubits 1 1\ncx 0 1  # entangle\nT 1\n").gates[0].kind == "CNOT"
    with pytest.raises(CircuitParseError, match="line 3"):
        parse_circuit_text("qubits 1 1\nH 0\nCNOT 0 5\n")
    with pytest.raises(CircuitParseError, match="line 2"):
        parse_circuit_text("qubits 2 0\nFOO 1\n")
    with pytest.raises(CircuitParseError, match="header"):
        parse_circuit_text("H 0\n")


def test_doped_circuit_validation():
    with pytest.raises(CircuitError):
        DopedCircuit(1, 0, (gate("H", 3),))
