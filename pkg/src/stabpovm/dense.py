"""Brute-force state-vector reference for small qubit counts.

Qubit 0 is the most significant tensor factor (``kron(q0, q1, ...)``),
matching the left-to-right letter order of Pauli strings. Nothing here
uses stabilizer shortcuts; it exists to cross-check the group-theoretic
code.
"""

from __future__ import annotations

import warnings
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .circuits import DopedCircuit, Gate, GadgetizedCircuit
from .groups import PauliSubgroup
from .pauli import PauliString

DEFAULT_DENSE_CAP = 14
RANK_TOL = 1e-9

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SQ = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
}
PAULI_1Q = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}


class DenseCapError(ValueError):
    pass


class DenseDimensionError(ValueError):
    pass


class NearThresholdWarning(UserWarning):
    pass


def check_cap(n_qubits: int, cap: int = DEFAULT_DENSE_CAP) -> None:
    if n_qubits > cap:
        raise DenseCapError(f"{n_qubits} qubits exceeds the dense cap of {cap}")


# ---------------------------------------------------------------------------
# states and operators


def basis_state(bits: Sequence[int]) -> np.ndarray:
    v = np.zeros(1 << len(bits), dtype=complex)
    v[int("".join(map(str, bits)) or "0", 2)] = 1
    return v


def zero_state(n: int) -> np.ndarray:
    return basis_state([0] * n)


def plus_state() -> np.ndarray:
    return np.array([1, 1], dtype=complex) / np.sqrt(2)


def t_state(t: int = 1) -> np.ndarray:
    one = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
    out = np.ones(1, dtype=complex)
    for _ in range(t):
        out = np.kron(out, one)
    return out


def kron_all(vs: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(1, dtype=complex) if vs and vs[0].ndim == 1 else np.ones((1, 1), dtype=complex)
    for v in vs:
        out = np.kron(out, v)
    return out


def haar_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return v / np.linalg.norm(v)


def pauli_matrix(p: PauliString) -> np.ndarray:
    mats = []
    for q in range(p.n):
        a, b = (p.x >> q) & 1, (p.z >> q) & 1
        mats.append((_X if a else _I2) @ (_Z if b else _I2))
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return (1j ** p.phase) * out


def pauli_expectation(psi: np.ndarray, g: PauliString) -> complex:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 2:
        if psi.shape != (1 << g.n, 1 << g.n):
            raise DenseDimensionError("density matrix does not match the string length")
        return complex(np.trace(psi @ pauli_matrix(g)))
    if psi.shape != (1 << g.n,):
        raise DenseDimensionError("state does not match the string length")
    return complex(np.vdot(psi, apply_pauli(psi, g)))


def apply_pauli(psi: np.ndarray, g: PauliString) -> np.ndarray:
    out = psi.reshape([2] * g.n).copy()
    for q in range(g.n):
        if (g.z >> q) & 1:
            out = _apply_1q(out, _Z, q)
        if (g.x >> q) & 1:
            out = _apply_1q(out, _X, q)
    return (1j ** g.phase) * out.reshape(-1)


# ---------------------------------------------------------------------------
# simulation


def _apply_1q(t: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)


def _apply_cnot(t: np.ndarray, c: int, tq: int) -> np.ndarray:
    out = t.copy()
    idx = [slice(None)] * t.ndim
    idx[c] = 1
    sub = out[tuple(idx)]
    ax = tq if tq < c else tq - 1
    out[tuple(idx)] = np.flip(sub, axis=ax)
    return out


def apply_gates(psi: np.ndarray, gates: Sequence[Gate], n_qubits: int,
                adjoint: bool = False) -> np.ndarray:
    """Apply a gate list (execution order) or its inverse to a vector."""
    if psi.shape[0] != 1 << n_qubits:
        raise DenseDimensionError(f"vector of length {psi.shape[0]} for {n_qubits} qubits")
    extra = psi.shape[1:]
    t = psi.reshape([2] * n_qubits + list(extra))
    seq = list(reversed(gates)) if adjoint else gates
    for g in seq:
        if g.kind == "CNOT":
            t = _apply_cnot(t, *g.qubits)
        else:
            u = _SQ[g.kind]
            t = _apply_1q(t, u.conj().T if adjoint else u, g.qubits[0])
    return t.reshape(psi.shape)


def simulate(circuit: Union[DopedCircuit, Sequence[Gate]], psi: np.ndarray,
             n_qubits: Optional[int] = None) -> np.ndarray:
    if isinstance(circuit, DopedCircuit):
        n_qubits, gates = circuit.n_qubits, circuit.gates
    else:
        gates = circuit
        if n_qubits is None:
            raise DenseDimensionError("qubit count required for a bare gate list")
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (1 << n_qubits,):
        raise DenseDimensionError(f"state of length {psi.shape[0]} for {n_qubits} qubits")
    return apply_gates(psi, gates, n_qubits)


def circuit_unitary(gates: Sequence[Gate], n_qubits: int) -> np.ndarray:
    return apply_gates(np.eye(1 << n_qubits, dtype=complex), gates, n_qubits)


def _pauli_action(g: PauliString) -> Tuple[np.ndarray, np.ndarray]:
    """``(src, coef)`` with ``(g v)[i] = coef[i] * v[src[i]]``."""
    n = g.n
    # qubit q is index bit n-1-q
    xi = int(format(g.x, f"0{n}b")[::-1], 2) if n else 0
    zi = int(format(g.z, f"0{n}b")[::-1], 2) if n else 0
    idx = np.arange(1 << n)
    src = idx ^ xi
    sign = 1 - 2 * (np.bitwise_count(src & zi).astype(np.int64) & 1)
    return src, (1j ** g.phase) * sign


def stabilizer_basis(group: PauliSubgroup) -> List[np.ndarray]:
    """Joint eigenbasis of a maximal signed group; index bit k flips generator k.

    One eigenvector is found by projecting a basis vector; the others are
    reached with Paulis anticommuting with exactly one generator. Every
    vector is checked against the generators before it is returned.
    """
    if not (group.signed and group.is_maximal()):
        raise ValueError("need a maximal signed stabilizer group")
    n = group.n
    gens = list(group.generators)
    acts = [_pauli_action(g) for g in gens]
    dim = 1 << n
    v0 = None
    for j in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[j] = 1.0
        for src, coef in acts:
            v = (v + coef * v[src]) / 2
        if np.linalg.norm(v) > 1e-6:
            v0 = v / np.linalg.norm(v)
            break
    states = v0[:, None]
    for d in _destabilizers(gens, n):
        src, coef = _pauli_action(d)
        states = np.concatenate([states, coef[:, None] * states[src]], axis=1)
    want = 1 - 2 * ((np.arange(dim)[None, :] >> np.arange(len(gens))[:, None]) & 1)
    for k, (src, coef) in enumerate(acts):
        if not np.allclose(coef[:, None] * states[src], want[k] * states, atol=1e-9):
            raise ArithmeticError("stabilizer basis construction failed")
    return [states[:, b] for b in range(dim)]


def _destabilizers(gens: Sequence[PauliString], n: int) -> List[PauliString]:
    """``d_k`` anticommuting with ``gens[k]`` and commuting with the rest."""
    mask = (1 << n) - 1
    # <d, g> = parity(d & swap(g)) on packed x | z << n vectors
    rows = [((g.vector >> n) & mask) | ((g.vector & mask) << n) for g in gens]
    ops = [1 << k for k in range(len(rows))]
    piv_cols = []
    r = 0
    for col in range(2 * n):
        sel = next((i for i in range(r, len(rows)) if (rows[i] >> col) & 1), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        ops[r], ops[sel] = ops[sel], ops[r]
        for i in range(len(rows)):
            if i != r and (rows[i] >> col) & 1:
                rows[i] ^= rows[r]
                ops[i] ^= ops[r]
        piv_cols.append(col)
        r += 1
    out = []
    for k in range(len(gens)):
        d = 0
        for i, col in enumerate(piv_cols):
            if (ops[i] >> k) & 1:
                d |= 1 << col
        out.append(PauliString.from_vector(n, d).projective().lift())
    return out


def stabilizer_state(group: PauliSubgroup) -> np.ndarray:
    return stabilizer_basis(group)[0]


# ---------------------------------------------------------------------------
# effective POVMs


def _reduce_to_data(phi: np.ndarray, n: int, m: int, rho: np.ndarray) -> np.ndarray:
    """``Tr_R[|phi><phi| (I x rho)]`` for pure or mixed ``rho``."""
    mat = phi.reshape(1 << n, 1 << m)
    if rho.ndim == 1:
        v = mat @ rho.conj()
        return np.outer(v, v.conj())
    return mat @ rho.T @ mat.conj().T


def effective_povm(circuit: DopedCircuit, psi: np.ndarray,
                   measurement: Optional[Union[PauliSubgroup, Sequence[np.ndarray]]] = None,
                   cap: int = DEFAULT_DENSE_CAP) -> List[np.ndarray]:
    """``mu_b = Tr_R[U^dag P_b U (I x rho)]`` for every outcome ``b``.

    ``measurement`` is a maximal signed group, an explicit list of basis
    vectors, or None for the computational basis. ``psi`` is an ancilla
    state vector or density matrix.
    """
    n, m = circuit.n_data, circuit.n_ancilla
    nq = n + m
    check_cap(nq, cap)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape[0] != 1 << m:
        raise DenseDimensionError(f"ancilla of dimension {psi.shape[0]} for m={m}")
    if measurement is None:
        basis = np.eye(1 << nq, dtype=complex)
    elif isinstance(measurement, PauliSubgroup):
        if measurement.n != nq:
            raise DenseDimensionError("measurement group on the wrong number of qubits")
        basis = np.stack(stabilizer_basis(measurement), axis=1)
    else:
        basis = np.stack(list(measurement), axis=1)
        if basis.shape != (1 << nq, 1 << nq):
            raise DenseDimensionError("need 2^(n+m) measurement vectors")
    back = apply_gates(basis, circuit.gates, nq, adjoint=True)
    if psi.ndim == 1:
        v = np.einsum("drb,r->bd", back.reshape(1 << n, 1 << m, -1), psi.conj())
        return list(v[:, :, None] * v[:, None, :].conj())
    return [_reduce_to_data(back[:, b], n, m, psi) for b in range(1 << nq)]


def effective_povm_gadget(gc: GadgetizedCircuit, psi: np.ndarray,
                          measurement: Optional[PauliSubgroup] = None,
                          cap: int = DEFAULT_DENSE_CAP) -> List[np.ndarray]:
    """Same POVM through the gadget picture: ``|T>`` inputs, ``|0>`` post-selection.

    Each gadget contributes a factor ``sqrt(2)`` so the result matches the
    doped circuit exactly.
    """
    n, m, t = gc.n_data, gc.n_ancilla, gc.t
    nq = n + m
    total = nq + t
    check_cap(total, cap)
    if measurement is None:
        basis = np.eye(1 << nq, dtype=complex)
    else:
        basis = np.stack(stabilizer_basis(measurement), axis=1)
    zeros = zero_state(t)
    lifted = np.stack([np.kron(basis[:, b], zeros) for b in range(1 << nq)], axis=1)
    back = apply_gates(lifted, gc.clifford_gates, total, adjoint=True)
    anc = np.kron(np.asarray(psi, dtype=complex), t_state(t)) if np.ndim(psi) == 1 else \
        np.kron(psi, np.outer(t_state(t), t_state(t).conj()))
    scale = 2.0 ** t
    return [scale * _reduce_to_data(back[:, b], n, m + t, anc) for b in range(1 << nq)]


def povm_checks(ops: Sequence[np.ndarray], tol: float = 1e-10) -> Tuple[float, float]:
    """``(max |sum - I|, most negative eigenvalue)``; also checks hermiticity."""
    d = ops[0].shape[0]
    total = sum(ops)
    comp = float(np.max(np.abs(total - np.eye(d))))
    lam = 0.0
    for op in ops:
        if np.max(np.abs(op - op.conj().T)) > tol:
            raise ValueError("POVM element is not Hermitian")
        lam = min(lam, float(np.min(np.linalg.eigvalsh(op))))
    return comp, lam


# ---------------------------------------------------------------------------
# span rank and frame operator


def _vectorize(ops: Sequence[np.ndarray]) -> np.ndarray:
    flat = np.stack([np.asarray(o, dtype=complex).reshape(-1) for o in ops])
    return np.concatenate([flat.real, flat.imag], axis=1)


def span_rank_details(ops: Sequence[np.ndarray], tol: float = RANK_TOL) -> Tuple[int, bool]:
    """Rank of the real-vectorized operators and a near-threshold flag."""
    if len(ops) == 0:
        return 0, False
    a = _vectorize(ops)
    scale = float(np.max(np.linalg.norm(a, axis=1)))
    if scale == 0.0:
        return 0, False
    thr = tol * scale
    a = a.copy()
    r = 0
    near = False
    rows, cols = a.shape
    min_pivot = np.inf
    while r < min(rows, cols):
        sub = np.abs(a[r:, :])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        piv = sub[i, j]
        if piv <= thr:
            if piv > thr / 10:
                near = True
            break
        min_pivot = min(min_pivot, piv)
        i += r
        a[[r, i]] = a[[i, r]]
        a[r + 1:] -= np.outer(a[r + 1:, j] / a[r, j], a[r])
        a[r + 1:, j] = 0.0
        r += 1
    if min_pivot < 10 * thr:
        near = True
    return r, near


def span_rank(ops: Sequence[np.ndarray], tol: float = RANK_TOL) -> int:
    r, near = span_rank_details(ops, tol)
    if near:
        warnings.warn("span rank pivot within 10x of the threshold", NearThresholdWarning)
    return r


def pauli_basis(n: int) -> List[Tuple[str, np.ndarray]]:
    """All ``4^n`` Pauli matrices in lexicographic order over I, X, Y, Z."""
    out = [("", np.ones((1, 1), dtype=complex))]
    for _ in range(n):
        out = [(s + c, np.kron(m, PAULI_1Q[c])) for s, m in out for c in "IXYZ"]
    return out


def pauli_coefficients(op: np.ndarray) -> np.ndarray:
    """Coefficients of ``op`` against normalized Paulis ``P / sqrt(2^n)``."""
    d = op.shape[0]
    n = d.bit_length() - 1
    return np.array([np.trace(p.conj().T @ op) for _, p in pauli_basis(n)]) / np.sqrt(d)


def frame_operator(ops: Sequence[np.ndarray]) -> np.ndarray:
    """``F = sum_b |mu_b>><<mu_b|`` in the normalized Pauli basis."""
    if len(ops) == 0:
        raise ValueError("empty operator family")
    coeffs = np.stack([pauli_coefficients(o) for o in ops])
    return coeffs.T @ coeffs.conj()


# ---------------------------------------------------------------------------
# JSON matrix dump


def matrix_to_json(mat: np.ndarray) -> dict:
    """Row-major ``[re, im]`` pairs."""
    mat = np.asarray(mat, dtype=complex)
    return {"shape": list(mat.shape),
            "data": [[float(v.real), float(v.imag)] for v in mat.reshape(-1)]}


def matrix_from_json(obj: dict) -> np.ndarray:
    vals = np.array([complex(re, im) for re, im in obj["data"]])
    return vals.reshape(obj["shape"])
