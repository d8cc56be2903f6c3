"""Clifford+T circuits: Pauli conjugation, T gadgets and random layouts.

Gate lists are in execution order. Conjugating ``P`` by a gate ``G`` means
``G P G^dagger``; evolving by a circuit ``U`` forward gives ``U P U^dagger``
and the adjoint direction gives ``U^dagger P U``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .groups import PauliSubgroup, canonicalize
from .pauli import PauliString

GATE_ARITY = {"H": 1, "S": 1, "SDG": 1, "T": 1, "CNOT": 2}


class CircuitError(ValueError):
    pass


class NonCliffordError(CircuitError):
    pass


class CircuitParseError(CircuitError):
    pass


class Gate(NamedTuple):
    kind: str
    qubits: Tuple[int, ...]

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


def gate(kind: str, *qubits: int) -> Gate:
    kind = kind.upper()
    if kind in ("CX",):
        kind = "CNOT"
    if kind not in GATE_ARITY:
        raise CircuitError(f"unknown gate {kind!r}")
    if len(qubits) != GATE_ARITY[kind]:
        raise CircuitError(f"{kind} takes {GATE_ARITY[kind]} qubit(s), got {len(qubits)}")
    if kind == "CNOT" and qubits[0] == qubits[1]:
        raise CircuitError("CNOT control and target must differ")
    return Gate(kind, tuple(int(q) for q in qubits))


def H(q: int) -> Gate:
    return Gate("H", (q,))


def S(q: int) -> Gate:
    return Gate("S", (q,))


def T(q: int) -> Gate:
    return Gate("T", (q,))


def CNOT(c: int, t: int) -> Gate:
    return gate("CNOT", c, t)


def inverse_gates(gates: Sequence[Gate]) -> List[Gate]:
    """Gate list of the inverse circuit (Clifford gates only)."""
    out = []
    for g in reversed(gates):
        if g.kind == "T":
            raise NonCliffordError("T has no Clifford inverse")
        if g.kind == "S":
            out.append(Gate("SDG", g.qubits))
        elif g.kind == "SDG":
            out.append(Gate("S", g.qubits))
        else:
            out.append(g)
    return out


@dataclass(frozen=True)
class DopedCircuit:
    n_data: int
    n_ancilla: int
    gates: Tuple[Gate, ...]

    def __post_init__(self):
        nq = self.n_data + self.n_ancilla
        for g in set(self.gates):
            if min(g.qubits) < 0 or max(g.qubits) >= nq:
                raise CircuitError(f"gate {g} outside {nq} qubits")

    @property
    def n_qubits(self) -> int:
        return self.n_data + self.n_ancilla

    @property
    def t(self) -> int:
        return sum(g.kind == "T" for g in self.gates)

    def is_clifford(self) -> bool:
        return self.t == 0


@dataclass(frozen=True)
class GadgetizedCircuit:
    n_data: int
    n_ancilla: int
    clifford_gates: Tuple[Gate, ...]
    gadget_register: Tuple[int, ...]
    fixed_syndromes: Tuple[Tuple[int, int], ...]

    @property
    def t(self) -> int:
        return len(self.gadget_register)

    @property
    def total_qubits(self) -> int:
        return self.n_data + self.n_ancilla + self.t


# ---------------------------------------------------------------------------
# single-string conjugation (reference path)


def conjugate(g: Gate, p: PauliString) -> PauliString:
    """``G p G^dagger`` with exact phase."""
    x, z, ph = p.x, p.z, p.phase
    if g.kind == "H":
        q = g.qubits[0]
        a, b = (x >> q) & 1, (z >> q) & 1
        ph += 2 * (a & b)
        x = (x & ~(1 << q)) | (b << q)
        z = (z & ~(1 << q)) | (a << q)
    elif g.kind in ("S", "SDG"):
        q = g.qubits[0]
        a = (x >> q) & 1
        ph += a if g.kind == "S" else 3 * a
        z ^= a << q
    elif g.kind == "CNOT":
        c, t = g.qubits
        x ^= ((x >> c) & 1) << t
        z ^= ((z >> t) & 1) << c
    elif g.kind == "T":
        raise NonCliffordError("T is not a Clifford gate")
    else:
        raise CircuitError(f"unknown gate {g.kind}")
    return PauliString(p.n, x, z, ph)


def evolve_pauli(gates: Sequence[Gate], p: PauliString, adjoint: bool = False) -> PauliString:
    seq = inverse_gates(gates) if adjoint else gates
    for g in seq:
        p = conjugate(g, p)
    return p


# ---------------------------------------------------------------------------
# column-packed tableau (fast path)


class Tableau:
    """Rows of Pauli strings stored column-wise as bit masks over rows."""

    __slots__ = ("n", "rows", "xc", "zc", "lo", "hi")

    def __init__(self, paulis: Sequence[PauliString]):
        if not paulis:
            raise CircuitError("empty tableau")
        self.n = paulis[0].n
        self.rows = len(paulis)
        self.xc = [0] * self.n
        self.zc = [0] * self.n
        self.lo = self.hi = 0
        for r, p in enumerate(paulis):
            bit = 1 << r
            for q in range(self.n):
                if (p.x >> q) & 1:
                    self.xc[q] |= bit
                if (p.z >> q) & 1:
                    self.zc[q] |= bit
            if p.phase & 1:
                self.lo |= bit
            if p.phase & 2:
                self.hi |= bit

    def _add(self, a: int) -> None:
        carry = self.lo & a
        self.lo ^= a
        self.hi ^= carry

    def h(self, q: int) -> None:
        a, b = self.xc[q], self.zc[q]
        self.hi ^= a & b
        self.xc[q], self.zc[q] = b, a

    def s(self, q: int) -> None:
        a = self.xc[q]
        self._add(a)
        self.zc[q] ^= a

    def sdg(self, q: int) -> None:
        a = self.xc[q]
        self._add(a)
        self.hi ^= a
        self.zc[q] ^= a

    def cx(self, c: int, t: int) -> None:
        self.xc[t] ^= self.xc[c]
        self.zc[c] ^= self.zc[t]

    def apply(self, gates: Sequence[Gate], adjoint: bool = False,
              gadget_base: Optional[int] = None, n_t: int = 0) -> "Tableau":
        """Conjugate every row by the circuit (or its inverse).

        With ``gadget_base`` set, the k-th T gate of the list (``n_t`` in
        total) acts as ``CNOT(q -> gadget_base + k)``.
        """
        xc, zc = self.xc, self.zc
        lo, hi = self.lo, self.hi
        seq = reversed(gates) if adjoint else gates
        k = n_t - 1 if adjoint else 0
        step = -1 if adjoint else 1
        for kind, qs in seq:
            if kind == "CNOT":
                c, t = qs
                xc[t] ^= xc[c]
                zc[c] ^= zc[t]
            elif kind == "T" and gadget_base is not None:
                c, t = qs[0], gadget_base + k
                k += step
                xc[t] ^= xc[c]
                zc[c] ^= zc[t]
            elif kind == "H":
                q = qs[0]
                a, b = xc[q], zc[q]
                hi ^= a & b
                xc[q], zc[q] = b, a
            elif kind == "S" or kind == "SDG":
                q = qs[0]
                a = xc[q]
                # S adds 1 to the phase where x is set, S^dagger adds 3
                if (kind == "SDG") != adjoint:
                    hi ^= a
                carry = lo & a
                lo ^= a
                hi ^= carry
                zc[q] ^= a
            else:
                raise NonCliffordError(f"{kind} is not a Clifford gate")
        self.lo, self.hi = lo, hi
        return self

    def paulis(self) -> List[PauliString]:
        out = []
        for r in range(self.rows):
            x = z = 0
            for q in range(self.n):
                x |= ((self.xc[q] >> r) & 1) << q
                z |= ((self.zc[q] >> r) & 1) << q
            ph = ((self.lo >> r) & 1) | (((self.hi >> r) & 1) << 1)
            out.append(PauliString(self.n, x, z, ph))
        return out


def evolve_paulis(gates: Sequence[Gate], paulis: Sequence[PauliString],
                  adjoint: bool = False) -> List[PauliString]:
    """Evolve a list of strings, preserving order."""
    if not paulis:
        return []
    return Tableau(paulis).apply(gates, adjoint).paulis()


def heisenberg_evolve(gates: Sequence[Gate], group: PauliSubgroup,
                      adjoint: bool = False) -> PauliSubgroup:
    """Conjugate every generator of ``group`` through the circuit."""
    if group.dim == 0:
        if any(g.kind == "T" for g in gates):
            raise NonCliffordError("T is not a Clifford gate")
        return group
    gens = evolve_paulis(gates, list(group.generators), adjoint)
    return canonicalize(gens, signed=group.signed, n=group.n)


# ---------------------------------------------------------------------------
# T gadgets


def gadgetize(c: DopedCircuit) -> GadgetizedCircuit:
    """Replace the k-th T gate (on qubit q) by ``CNOT(q -> n+m+k)``.

    The gadget qubit starts in ``|T>`` and is post-selected on ``|0>``, which
    is recorded as a fixed ``+1`` syndrome of the k-th gadget ``Z``.
    """
    base = c.n_qubits
    gates = []
    k = 0
    for g in c.gates:
        if g.kind == "T":
            gates.append(Gate("CNOT", (g.qubits[0], base + k)))
            k += 1
        else:
            gates.append(g)
    reg = tuple(range(base, base + k))
    return GadgetizedCircuit(c.n_data, c.n_ancilla, tuple(gates), reg,
                             tuple((q, 1) for q in reg))


def ungadgetize(gc: GadgetizedCircuit) -> DopedCircuit:
    base = gc.n_data + gc.n_ancilla
    gates = []
    for g in gc.clifford_gates:
        if g.kind == "CNOT" and g.qubits[1] >= base:
            gates.append(Gate("T", (g.qubits[0],)))
        else:
            gates.append(g)
    return DopedCircuit(gc.n_data, gc.n_ancilla, tuple(gates))


# ---------------------------------------------------------------------------
# constructions


def universal_2n_circuit(n: int) -> DopedCircuit:
    """Per data qubit i with ancilla n+i:
    CNOT(i, n+i), H T H on the ancilla, CNOT(n+i, i), then T and H on i."""
    if n < 1:
        raise CircuitError("n must be positive")
    gates: List[Gate] = []
    for i in range(n):
        a = n + i
        gates += [CNOT(i, a), H(a), T(a), H(a), CNOT(a, i), T(i), H(i)]
    return DopedCircuit(n, n, tuple(gates))


def two_t_gadget_circuit() -> DopedCircuit:
    """The two-qubit, two-T circuit of the worked gadget example."""
    return DopedCircuit(1, 1, (CNOT(0, 1), H(1), T(1), H(1), CNOT(1, 0), T(0), H(0)))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def default_clifford_length(n: int) -> int:
    return 3 * n * n + 5


_GATE_CACHE: dict = {}


def _gate_table(n: int):
    tab = _GATE_CACHE.get(n)
    if tab is None:
        hs = [Gate("H", (q,)) for q in range(n)]
        ss = [Gate("S", (q,)) for q in range(n)]
        cx = [[Gate("CNOT", (q, (q + o) % n)) if o else None for o in range(n)] for q in range(n)]
        tab = _GATE_CACHE[n] = (hs, ss, cx)
    return tab


def random_clifford(n: int, seed=None, length: Optional[int] = None) -> List[Gate]:
    """Uniformly chosen H/S/CNOT gates, ``3n^2 + 5`` of them by default.

    Only approximately uniform over the Clifford group.
    """
    if n < 1:
        raise CircuitError("n must be positive")
    rng = _rng(seed)
    length = default_clifford_length(n) if length is None else length
    nk = 3 if n > 1 else 2
    kinds = rng.integers(0, nk, size=length)
    a = rng.integers(0, n, size=length)
    off = rng.integers(1, max(n, 2), size=length)
    hs, ss, cx = _gate_table(n)
    return [hs[q] if k == 0 else ss[q] if k == 1 else cx[q][o]
            for k, q, o in zip(kinds.tolist(), a.tolist(), off.tolist())]


def random_doped_circuit(n: int, m: int, t: int, seed=None, layout: str = "serial",
                         layer_length: Optional[int] = None) -> DopedCircuit:
    """Random Clifford layers interleaved with T gates.

    ``serial``: t T gates on qubit 0, each between two random Clifford layers.
    ``parallel``: T gates in layers acting on distinct random qubits, at most
    ``n+m`` per layer, separated by random Clifford layers.
    """
    rng = _rng(seed)
    nq = n + m
    gates: List[Gate] = list(random_clifford(nq, rng, layer_length))
    if layout == "serial":
        for _ in range(t):
            gates.append(T(0))
            gates += random_clifford(nq, rng, layer_length)
    elif layout == "parallel":
        left = t
        while left > 0:
            k = min(left, nq)
            for q in sorted(rng.choice(nq, size=k, replace=False).tolist()):
                gates.append(T(q))
            left -= k
            gates += random_clifford(nq, rng, layer_length)
    else:
        raise CircuitError(f"unknown layout {layout!r}")
    return DopedCircuit(n, m, tuple(gates))


# ---------------------------------------------------------------------------
# text format


def parse_circuit_text(text: str) -> DopedCircuit:
    """``qubits n m`` header then one gate per line; ``#`` starts a comment."""
    header = None
    gates: List[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if parts[0].lower() != "qubits" or len(parts) not in (2, 3):
                raise CircuitParseError(f"line {lineno}: expected header 'qubits n m'")
            try:
                header = tuple(int(v) for v in parts[1:]) + ((0,) if len(parts) == 2 else ())
            except ValueError:
                raise CircuitParseError(f"line {lineno}: bad register sizes") from None
            if header[0] < 1 or header[1] < 0:
                raise CircuitParseError(f"line {lineno}: register sizes must be n>=1, m>=0")
            continue
        try:
            g = gate(parts[0], *(int(v) for v in parts[1:]))
        except (CircuitError, ValueError) as exc:
            raise CircuitParseError(f"line {lineno}: {exc}") from None
        if any(not 0 <= q < sum(header) for q in g.qubits):
            raise CircuitParseError(f"line {lineno}: qubit index out of range")
        gates.append(g)
    if header is None:
        raise CircuitParseError("missing 'qubits n m' header")
    return DopedCircuit(header[0], header[1], tuple(gates))


def load_circuit(path) -> DopedCircuit:
    with open(path) as fh:
        return parse_circuit_text(fh.read())


def format_circuit_text(c: DopedCircuit) -> str:
    lines = [f"qubits {c.n_data} {c.n_ancilla}"]
    lines += [str(g) for g in c.gates]
    return "\n".join(lines) + "\n"
