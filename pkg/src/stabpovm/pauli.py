"""Phase-tracked Pauli strings in symplectic form.

A :class:`PauliString` on ``n`` qubits stores ``i**phase * X^x Z^z`` with
``x`` and ``z`` packed into ints (bit ``k`` is qubit ``k``, the ``k``-th
letter of the text form). The text form writes letters ``I X Y Z`` with an
optional leading ``+``, ``-``, ``i`` or ``-i``; since ``Y = i X Z`` the
stored phase differs from the printed one by the number of ``Y`` letters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

LETTERS = "IXZY"  # indexed by x + 2*z
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_PREFIX = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_PREFIX_OUT = {0: "", 1: "i", 2: "-", 3: "-i"}
_TEXT_RE = re.compile(r"^([+-]?i?)([IXYZ]+)$")


class PauliError(ValueError):
    pass


class DimensionError(PauliError):
    pass


class PauliParseError(PauliError):
    pass


def _mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class ProjectivePauli:
    """A Pauli string modulo phase."""

    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError("negative qubit count")
        if self.x >> self.n or self.z >> self.n or self.x < 0 or self.z < 0:
            raise DimensionError(f"bits exceed {self.n} qubits")

    @property
    def n_qubits(self) -> int:
        return self.n

    @property
    def x_bits(self) -> Tuple[int, ...]:
        return tuple((self.x >> k) & 1 for k in range(self.n))

    @property
    def z_bits(self) -> Tuple[int, ...]:
        return tuple((self.z >> k) & 1 for k in range(self.n))

    def lift(self) -> "PauliString":
        """Hermitian lift with a ``+`` sign."""
        return PauliString(self.n, self.x, self.z, (self.x & self.z).bit_count())

    def __mul__(self, other: "ProjectivePauli") -> "ProjectivePauli":
        _check_len(self, other)
        return ProjectivePauli(self.n, self.x ^ other.x, self.z ^ other.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def letters(self) -> str:
        return "".join(LETTERS[((self.x >> k) & 1) | (((self.z >> k) & 1) << 1)]
                       for k in range(self.n))

    def __str__(self) -> str:
        return self.letters()

    def __repr__(self) -> str:
        return f"ProjectivePauli({self.letters()!r})"

    @property
    def vector(self) -> int:
        return self.x | (self.z << self.n)


@dataclass(frozen=True)
class PauliString:
    """``i**phase * prod_k X_k^{x_k} Z_k^{z_k}``."""

    n: int
    x: int
    z: int
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError("negative qubit count")
        if self.x >> self.n or self.z >> self.n or self.x < 0 or self.z < 0:
            raise DimensionError(f"bits exceed {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_vector(cls, n: int, v: int, phase: int = 0) -> "PauliString":
        return cls(n, v & _mask(n), v >> n, phase)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        x, z = _LETTER_BITS[letter]
        return ProjectivePauli(n, x << qubit, z << qubit).lift()

    @property
    def n_qubits(self) -> int:
        return self.n

    @property
    def phase_exp(self) -> int:
        return self.phase

    @property
    def x_bits(self) -> Tuple[int, ...]:
        return tuple((self.x >> k) & 1 for k in range(self.n))

    @property
    def z_bits(self) -> Tuple[int, ...]:
        return tuple((self.z >> k) & 1 for k in range(self.n))

    @property
    def vector(self) -> int:
        """Symplectic bit vector ``x | z << n``."""
        return self.x | (self.z << self.n)

    @property
    def n_y(self) -> int:
        return (self.x & self.z).bit_count()

    def is_hermitian(self) -> bool:
        return (self.phase + self.n_y) % 2 == 0

    @property
    def text_phase(self) -> int:
        """Exponent of ``i`` in front of the letter form."""
        return (self.phase - self.n_y) % 4

    @property
    def sign(self) -> int:
        """``+1``/``-1`` for Hermitian strings."""
        tp = self.text_phase
        if tp % 2:
            raise PauliError(f"{self} is not Hermitian")
        return 1 if tp == 0 else -1

    def projective(self) -> ProjectivePauli:
        return ProjectivePauli(self.n, self.x, self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.n_y + (0 if sign > 0 else 2))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __neg__(self) -> "PauliString":
        return PauliString(self.n, self.x, self.z, self.phase + 2)

    def letters(self) -> str:
        return self.projective().letters()

    def __str__(self) -> str:
        return format_pauli(self)

    def __repr__(self) -> str:
        return f"PauliString({format_pauli(self)!r})"


AnyPauli = Union[PauliString, ProjectivePauli]


def _check_len(a: AnyPauli, b: AnyPauli) -> None:
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with exact phase."""
    _check_len(a, b)
    # Z^{z_a} X^{x_b} = (-1)^{|z_a & x_b|} X^{x_b} Z^{z_a}
    phase = a.phase + b.phase + 2 * (a.z & b.x).bit_count()
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z, phase)


def product(paulis: Iterable[PauliString], n: int) -> PauliString:
    out = PauliString.identity(n)
    for p in paulis:
        out = multiply(out, p)
    return out


def symplectic(a: AnyPauli, b: AnyPauli) -> int:
    """0 if ``a`` and ``b`` commute, 1 if they anticommute."""
    _check_len(a, b)
    return ((a.x & b.z) ^ (a.z & b.x)).bit_count() & 1


def commutes(a: AnyPauli, b: AnyPauli) -> bool:
    return symplectic(a, b) == 0


def vec_symplectic(u: int, v: int, n: int) -> int:
    """Symplectic form on packed ``x | z << n`` vectors."""
    m = _mask(n)
    return (((u & m) & (v >> n)) ^ ((u >> n) & (v & m))).bit_count() & 1


def restrict(g: AnyPauli, register: Sequence[int]) -> AnyPauli:
    """Tensor factor of ``g`` on ``register`` (in the given order).

    A :class:`PauliString` keeps its phase only if ``g`` is the identity
    outside ``register``; otherwise the Hermitian ``+`` lift is returned.
    """
    idx = list(register)
    for q in idx:
        if not 0 <= q < g.n:
            raise DimensionError(f"qubit {q} out of range for {g.n} qubits")
    if len(set(idx)) != len(idx):
        raise DimensionError("repeated qubit in register")
    x = z = 0
    for k, q in enumerate(idx):
        x |= ((g.x >> q) & 1) << k
        z |= ((g.z >> q) & 1) << k
    if isinstance(g, ProjectivePauli):
        return ProjectivePauli(len(idx), x, z)
    rest = _mask(g.n)
    for q in idx:
        rest &= ~(1 << q)
    if (g.x | g.z) & rest:
        return ProjectivePauli(len(idx), x, z).lift()
    return PauliString(len(idx), x, z, g.phase)


def tensor(*parts: AnyPauli) -> PauliString:
    """Concatenate factors (first argument on the lowest qubits)."""
    n = x = z = phase = 0
    for p in parts:
        x |= p.x << n
        z |= p.z << n
        n += p.n
        if isinstance(p, PauliString):
            phase += p.phase
        else:
            phase += (p.x & p.z).bit_count()
    return PauliString(n, x, z, phase)


def weight_counts(g: AnyPauli) -> Tuple[int, int, int, int]:
    """``(n_I, n_X, n_Y, n_Z)``."""
    full = _mask(g.n)
    n_y = (g.x & g.z).bit_count()
    n_x = (g.x & ~g.z & full).bit_count()
    n_z = (g.z & ~g.x & full).bit_count()
    return g.n - n_x - n_y - n_z, n_x, n_y, n_z


def is_z_free(g: AnyPauli) -> bool:
    return (g.z & ~g.x) == 0


def parse_pauli(text: str) -> PauliString:
    s = text.strip()
    m = _TEXT_RE.match(s)
    if not m:
        for pos, ch in enumerate(s):
            if ch not in "IXYZ+-i":
                raise PauliParseError(f"bad character {ch!r} at position {pos} in {text!r}")
        raise PauliParseError(f"malformed Pauli string {text!r}")
    prefix, body = m.groups()
    x = z = 0
    for k, ch in enumerate(body):
        bx, bz = _LETTER_BITS[ch]
        x |= bx << k
        z |= bz << k
    return PauliString(len(body), x, z, _PREFIX[prefix] + (x & z).bit_count())


def parse_projective(text: str) -> ProjectivePauli:
    return parse_pauli(text).projective()


def format_pauli(p: AnyPauli) -> str:
    if isinstance(p, ProjectivePauli):
        return p.letters()
    return _PREFIX_OUT[p.text_phase] + p.letters()


def P(text: str) -> PauliString:
    """Shorthand for :func:`parse_pauli`."""
    return parse_pauli(text)
