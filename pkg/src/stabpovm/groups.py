"""Subgroups of the Pauli group in row-reduced symplectic form.

A :class:`PauliSubgroup` keeps a fully reduced basis of its symplectic
vectors (``x | z << n``, pivot = highest set bit). Signed groups keep the
exact operator for every basis row, so membership queries can report the
sign a group element carries; unsigned groups work modulo phase and store
Hermitian ``+`` lifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import gf2
from .pauli import (
    LETTERS,
    AnyPauli,
    DimensionError,
    PauliString,
    ProjectivePauli,
    format_pauli,
    multiply,
    parse_pauli,
    restrict,
    symplectic,
    weight_counts,
)

ENUM_LIMIT = 1 << 22


class GroupError(ValueError):
    pass


class NotAbelianError(GroupError):
    pass


class NotAStabilizerError(GroupError):
    pass


class ContradictionError(NotAStabilizerError):
    pass


class StructureError(GroupError):
    pass


class NeedsSignsError(GroupError):
    pass


class EnumerationLimitError(GroupError):
    pass


PauliLike = Union[PauliString, ProjectivePauli, str]


def _as_pauli(g: PauliLike) -> PauliString:
    if isinstance(g, str):
        return parse_pauli(g)
    if isinstance(g, ProjectivePauli):
        return g.lift()
    return g


def _lift_vec(n: int, v: int) -> PauliString:
    return ProjectivePauli(n, v & ((1 << n) - 1), v >> n).lift()


@dataclass(frozen=True)
class PauliSubgroup:
    """Subgroup given by a reduced, independent generating set."""

    n: int
    generators: Tuple[PauliString, ...]
    signed: bool = False
    abelian: bool = True
    pivots: Tuple[int, ...] = field(default=(), compare=False)

    @property
    def n_qubits(self) -> int:
        return self.n

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def order(self) -> int:
        return 1 << self.dim

    @property
    def vectors(self) -> Tuple[int, ...]:
        return tuple(g.vector for g in self.generators)

    @property
    def reduced_basis(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return self.vectors, self.pivots

    def is_maximal(self) -> bool:
        return self.abelian and self.dim == self.n

    def __len__(self) -> int:
        return self.order

    def __str__(self) -> str:
        body = ", ".join(format_pauli(g) if self.signed else g.letters() for g in self.generators)
        return f"<{body}>"

    def _check(self, g: AnyPauli) -> None:
        if g.n != self.n:
            raise DimensionError(f"group on {self.n} qubits, element on {g.n}")

    def coefficients(self, g: PauliLike) -> Optional[int]:
        """Mask of basis rows whose product matches ``g`` up to phase."""
        g = _as_pauli(g)
        self._check(g)
        v = g.vector
        c = 0
        for k, (b, p) in enumerate(zip(self.vectors, self.pivots)):
            if (v >> p) & 1:
                v ^= b
                c |= 1 << k
        return c if v == 0 else None

    def contains(self, g: PauliLike) -> bool:
        """Membership modulo phase."""
        return self.coefficients(g) is not None

    def __contains__(self, g: PauliLike) -> bool:
        return self.contains(g)

    def element(self, mask: int) -> PauliString:
        out = PauliString.identity(self.n)
        k = 0
        while mask:
            if mask & 1:
                out = multiply(out, self.generators[k])
            mask >>= 1
            k += 1
        return out

    def member(self, g: PauliLike) -> Optional[PauliString]:
        """The group element with the letters of ``g`` (None if absent)."""
        c = self.coefficients(g)
        return None if c is None else self.element(c)

    def member_sign(self, g: PauliLike) -> Optional[int]:
        """Sign carried by the element with ``g``'s letters in a signed group."""
        if not self.signed:
            raise NeedsSignsError("member_sign needs a signed group")
        e = self.member(g)
        return None if e is None else e.sign

    def contains_signed(self, g: PauliLike) -> bool:
        g = _as_pauli(g)
        e = self.member(g)
        return e is not None and e.phase == g.phase

    def elements(self) -> Iterator[PauliString]:
        _guard(self.dim)
        # Gray-code walk: one multiplication per element
        cur = PauliString.identity(self.n)
        yield cur
        for i in range(1, self.order):
            k = (i & -i).bit_length() - 1
            cur = multiply(cur, self.generators[k])
            yield cur

    def element_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(x, z, phase)`` arrays of all elements; index bit ``k`` = basis row ``k``."""
        return element_arrays(self.n, self.generators)

    def projective(self) -> "PauliSubgroup":
        if not self.signed:
            return self
        return PauliSubgroup(self.n, tuple(_lift_vec(self.n, v) for v in self.vectors),
                             False, self.abelian, self.pivots)


def _guard(dim: int) -> None:
    if dim > 22:
        raise EnumerationLimitError(f"group of order 2^{dim} exceeds enumeration cap 2^22")


def element_arrays(n: int, gens: Sequence[PauliString]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    _guard(len(gens))
    if n > 63:
        raise EnumerationLimitError("array enumeration supports at most 63 qubits")
    x = np.zeros(1, dtype=np.uint64)
    z = np.zeros(1, dtype=np.uint64)
    ph = np.zeros(1, dtype=np.int64)
    for g in gens:
        gx, gz = np.uint64(g.x), np.uint64(g.z)
        # (old) * g : phase gains 2 * |z_old & x_g|
        extra = 2 * np.bitwise_count(z & gx).astype(np.int64)
        x = np.concatenate([x, x ^ gx])
        z = np.concatenate([z, z ^ gz])
        ph = np.concatenate([ph, (ph + g.phase + extra) & 3])
    return x, z, ph


def canonicalize(gens: Iterable[PauliLike], signed: bool = False, n: Optional[int] = None) -> PauliSubgroup:
    """Independent reduced generating set for the group generated by ``gens``.

    In signed mode every input must be Hermitian, the inputs must commute,
    and no product of inputs may equal ``-I``.
    """
    items = [_as_pauli(g) for g in gens]
    if n is None:
        if not items:
            raise GroupError("cannot infer qubit count of an empty generating set")
        n = items[0].n
    for g in items:
        if g.n != n:
            raise DimensionError(f"generator {format_pauli(g)} is not on {n} qubits")
    if not signed:
        items = [g.projective().lift() for g in items]
    elif any(not g.is_hermitian() for g in items):
        raise NotAStabilizerError("stabilizer generators must be Hermitian")

    abelian = all(symplectic(a, b) == 0 for i, a in enumerate(items) for b in items[:i])
    if signed and not abelian:
        raise NotAStabilizerError("stabilizer generators must commute")

    basis: List[PauliString] = []
    pivots: List[int] = []
    seen: Dict[int, PauliString] = {}
    for g in items:
        r = g
        for b, p in zip(basis, pivots):
            if (r.vector >> p) & 1:
                r = multiply(r, b)
        if r.is_identity():
            if signed and r.phase != 0:
                prev = seen.get(g.vector)
                if prev is not None and prev.phase != g.phase:
                    raise ContradictionError(
                        f"{format_pauli(g)} contradicts earlier {format_pauli(prev)}")
                raise NotAStabilizerError(
                    f"adding {format_pauli(g)} puts {format_pauli(r)} in the group")
            continue
        seen.setdefault(g.vector, g)
        p = r.vector.bit_length() - 1
        for i, b in enumerate(basis):
            if (b.vector >> p) & 1:
                basis[i] = multiply(b, r)
        k = 0
        while k < len(pivots) and pivots[k] > p:
            k += 1
        basis.insert(k, r)
        pivots.insert(k, p)
    if not signed:
        basis = [_lift_vec(n, b.vector) for b in basis]
    return PauliSubgroup(n, tuple(basis), signed, abelian, tuple(pivots))


def group(*gens: PauliLike, signed: bool = False, n: Optional[int] = None) -> PauliSubgroup:
    """Convenience wrapper: ``group("ZZI", "XXX")``."""
    return canonicalize(gens, signed=signed, n=n)


def trivial(n: int, signed: bool = False) -> PauliSubgroup:
    return PauliSubgroup(n, (), signed, True, ())


def from_vectors(n: int, vectors: Iterable[int]) -> PauliSubgroup:
    return canonicalize([_lift_vec(n, v) for v in vectors], signed=False, n=n)


def _same_n(a: PauliSubgroup, b: PauliSubgroup) -> None:
    if a.n != b.n:
        raise DimensionError(f"groups on {a.n} and {b.n} qubits")


def _sub_from_masks(a: PauliSubgroup, masks: Iterable[int]) -> PauliSubgroup:
    return canonicalize([a.element(c) for c in masks], signed=a.signed, n=a.n)


def intersect(a: PauliSubgroup, b: PauliSubgroup) -> PauliSubgroup:
    """``a ∩ b`` (modulo phase); elements carry ``a``'s signs."""
    _same_n(a, b)
    common = gf2.intersect(a.vectors, b.vectors, 2 * a.n)
    return _sub_from_masks(a, [a.coefficients(_lift_vec(a.n, v)) for v in common])


def centralizer_within(a: PauliSubgroup, b: PauliSubgroup) -> PauliSubgroup:
    """Elements of ``a`` commuting with every element of ``b``."""
    _same_n(a, b)
    rows = []
    for h in b.generators:
        mask = 0
        for k, g in enumerate(a.generators):
            if symplectic(g, h):
                mask |= 1 << k
        rows.append(mask)
    return _sub_from_masks(a, gf2.nullspace(rows, a.dim))


def product_group(a: PauliSubgroup, b: PauliSubgroup) -> PauliSubgroup:
    _same_n(a, b)
    signed = a.signed and b.signed
    return canonicalize(list(a.generators) + list(b.generators), signed=signed, n=a.n)


def is_subgroup(h: PauliSubgroup, g: PauliSubgroup) -> bool:
    return h.n == g.n and all(g.contains(x) for x in h.generators)


def local_subgroup(s: PauliSubgroup, register: Sequence[int]) -> PauliSubgroup:
    """Elements of ``s`` acting as identity outside ``register`` (full length)."""
    keep = set(register)
    rows = []
    for q in range(s.n):
        if q in keep:
            continue
        for bit in (q, q + s.n):
            mask = 0
            for k, v in enumerate(s.vectors):
                if (v >> bit) & 1:
                    mask |= 1 << k
            rows.append(mask)
    return _sub_from_masks(s, gf2.nullspace(rows, s.dim))


def project(s: PauliSubgroup, register: Sequence[int]) -> PauliSubgroup:
    """Unsigned group ``{restrict(g, register) : g in s}``."""
    reg = list(register)
    return canonicalize([restrict(g.projective(), reg) for g in s.generators],
                        signed=False, n=len(reg))


def embed(g: AnyPauli, n: int, register: Sequence[int]) -> PauliString:
    """Place ``g`` on ``register`` of an ``n``-qubit string (identity elsewhere)."""
    x = z = 0
    for k, q in enumerate(register):
        x |= ((g.x >> k) & 1) << q
        z |= ((g.z >> k) & 1) << q
    phase = g.phase if isinstance(g, PauliString) else (g.x & g.z).bit_count()
    return PauliString(n, x, z, phase)


def centralizer(h: PauliSubgroup) -> PauliSubgroup:
    """Full centralizer ``C(h)`` in the projective Pauli group."""
    n = h.n
    # v commutes with u iff <swap(u), v> = 0 with swap exchanging x/z halves
    m = (1 << n) - 1
    rows = [((u >> n) & m) | ((u & m) << n) for u in h.vectors]
    return from_vectors(n, gf2.nullspace(rows, 2 * n))


def letter_key(g: AnyPauli) -> Tuple[int, ...]:
    """Sort key for lexicographic order with I < X < Y < Z, qubit 0 first."""
    order = {"I": 0, "X": 1, "Y": 2, "Z": 3}
    return tuple(order[c] for c in g.letters())


# ---------------------------------------------------------------------------
# generator alignment


@dataclass(frozen=True)
class AlignedGenerators:
    h_list: Tuple[PauliString, ...]
    g_list: Tuple[PauliString, ...]
    g_tilde_list: Tuple[PauliString, ...]
    h_tilde_list: Tuple[PauliString, ...]

    @property
    def ell(self) -> int:
        return len(self.h_list)

    def anticommutation_matrix(self) -> List[List[int]]:
        return [[symplectic(ht, gt) for gt in self.g_tilde_list] for ht in self.h_tilde_list]


def _extend(base: Sequence[PauliString], pool: Sequence[PauliString]) -> List[PauliString]:
    basis, pivots = gf2.rref(g.vector for g in base)
    out = []
    for g in pool:
        r = gf2.reduce(g.vector, basis, pivots)
        if r:
            gf2._insert(r, basis, pivots)
            out.append(g)
    return out


def align_generators(s: PauliSubgroup, z: PauliSubgroup) -> AlignedGenerators:
    """Basis of ``s`` and ``z`` with a diagonal anticommutation pattern.

    ``h`` spans ``s ∩ z``; ``g`` extends it to ``s ∩ C(z)``; ``g~`` extends
    to all of ``s``; ``h~`` extends ``h`` to ``z``. On return ``h~_j`` and
    ``g~_k`` anticommute exactly when ``j == k``.
    """
    _same_n(s, z)
    if not s.is_maximal():
        raise StructureError(f"first group must be maximal abelian (dim {s.dim}, n {s.n})")
    if not z.abelian:
        raise StructureError("second group must be abelian")
    inter = intersect(s, z)
    h = list(inter.generators)
    sc = centralizer_within(s, z)
    g = _extend(h, sc.generators)
    gt = _extend(list(sc.generators), s.generators)
    ht = _extend(h, [z.member(x) for x in z.generators])
    if len(gt) != len(ht):
        raise StructureError("unbalanced extension; are the inputs maximal?")
    for k in range(len(ht)):
        for j in range(k):
            if symplectic(ht[k], gt[j]):
                ht[k] = multiply(ht[k], ht[j])
        pick = next((i for i in range(k, len(gt)) if symplectic(ht[k], gt[i])), None)
        if pick is None:
            raise StructureError("no anticommuting partner; inputs violate maximality")
        gt[k], gt[pick] = gt[pick], gt[k]
        for i in range(k + 1, len(gt)):
            if symplectic(ht[k], gt[i]):
                gt[i] = multiply(gt[i], gt[k])
    return AlignedGenerators(tuple(h), tuple(g), tuple(gt), tuple(ht))


# ---------------------------------------------------------------------------
# bipartite entanglement structure


@dataclass(frozen=True)
class EntanglementDecomposition:
    n_a: int
    n_b: int
    p: int
    S_A: PauliSubgroup
    S_B: PauliSubgroup
    nonlocal_elements: Tuple[Tuple[PauliString, PauliString], ...]

    @property
    def nonlocal_pairs(self):
        """``((g_A, g_B), (gbar_A, gbar_B))`` per pair."""
        a = list(range(self.n_a))
        b = list(range(self.n_a, self.n_a + self.n_b))
        return tuple(((restrict(u, a), restrict(u, b)), (restrict(v, a), restrict(v, b)))
                     for u, v in self.nonlocal_elements)


def entanglement_decomposition(s: PauliSubgroup, n_a: int) -> EntanglementDecomposition:
    """Split ``s`` across qubits ``[0, n_a)`` | ``[n_a, n)``."""
    if not s.is_maximal():
        raise StructureError("entanglement decomposition needs a maximal abelian group")
    n = s.n
    if not 0 <= n_a <= n:
        raise DimensionError(f"cut {n_a} outside 0..{n}")
    a_reg = list(range(n_a))
    b_reg = list(range(n_a, n))
    s_a = local_subgroup(s, a_reg)
    s_b = local_subgroup(s, b_reg)
    loc_basis, loc_piv = gf2.rref(list(s_a.vectors) + list(s_b.vectors))
    quotient = []
    basis, piv = list(loc_basis), list(loc_piv)
    for g in s.generators:
        r = gf2.reduce(g.vector, basis, piv)
        if r:
            gf2._insert(r, basis, piv)
            # canonical representative modulo the local subgroups
            rep = gf2.reduce(g.vector, loc_basis, loc_piv)
            quotient.append(s.member(_lift_vec(n, rep)))

    def form(u: PauliString, v: PauliString) -> int:
        return symplectic(restrict(u.projective(), a_reg), restrict(v.projective(), a_reg))

    pairs = []
    rest = list(quotient)
    while rest:
        u = rest.pop(0)
        j = next((i for i, v in enumerate(rest) if form(u, v)), None)
        if j is None:
            raise StructureError("degenerate quotient form; group is not maximal")
        v = rest.pop(j)
        new = []
        for r in rest:
            if form(r, v):
                r = multiply(r, u)
            if form(r, u):
                r = multiply(r, v)
            new.append(r)
        rest = new
        pairs.append((u, v))
    p = len(pairs)
    if 2 * p != n - s_a.dim - s_b.dim:
        raise StructureError("entanglement relation violated")
    return EntanglementDecomposition(n_a, n - n_a, p, s_a, s_b, tuple(pairs))


# ---------------------------------------------------------------------------
# cosets


@dataclass(frozen=True)
class Coset:
    representative: PauliString
    members: Tuple[PauliString, ...]


@dataclass(frozen=True)
class CosetTable:
    parent: PauliSubgroup
    subgroup: PauliSubgroup
    cosets: Tuple[Coset, ...]

    def __len__(self) -> int:
        return len(self.cosets)


def coset_table(s: PauliSubgroup, h: PauliSubgroup) -> CosetTable:
    """All cosets of ``h`` in ``s`` with lexicographically minimal representatives."""
    if not is_subgroup(h, s):
        raise GroupError("second argument is not a subgroup of the first")
    basis, piv = gf2.rref(h.vectors)
    buckets: Dict[int, List[PauliString]] = {}
    for g in s.elements():
        buckets.setdefault(gf2.reduce(g.vector, basis, piv), []).append(g)
    cosets = []
    for members in buckets.values():
        members.sort(key=letter_key)
        cosets.append(Coset(members[0], tuple(members)))
    cosets.sort(key=lambda c: letter_key(c.representative))
    return CosetTable(s, h, tuple(cosets))


def double_coset_table(s: PauliSubgroup, s_a: PauliSubgroup, s_b: PauliSubgroup) -> CosetTable:
    return coset_table(s, product_group(s_a, s_b))


def coset_sides(c: Coset, n_a: int) -> Tuple[Tuple[ProjectivePauli, ...], Tuple[ProjectivePauli, ...]]:
    """Distinct A-side and B-side letters occurring in a coset."""
    n = c.representative.n
    a = sorted({restrict(g.projective(), range(n_a)) for g in c.members}, key=letter_key)
    b = sorted({restrict(g.projective(), range(n_a, n)) for g in c.members}, key=letter_key)
    return tuple(a), tuple(b)


# ---------------------------------------------------------------------------
# counting formulas


def stabilizer_overlap(s1: PauliSubgroup, s2: PauliSubgroup) -> Fraction:
    """``|<psi1|psi2>|^2`` for the states stabilized by ``s1`` and ``s2``."""
    if not (s1.signed and s2.signed):
        raise NeedsSignsError("overlap needs signed groups")
    _same_n(s1, s2)
    if not (s1.is_maximal() and s2.is_maximal()):
        raise StructureError("overlap needs maximal stabilizer groups")
    common = intersect(s1, s2)
    for g in common.generators:
        if s2.member(g).phase != g.phase:
            return Fraction(0)
    return Fraction(common.order, 1 << s1.n)


def zfree_centralizer_count(h: PauliSubgroup) -> int:
    """Number of Z-free strings in ``C(h)``: mean of ``3^{n_I} (-1)^{n_Z}`` over ``h``."""
    if not h.abelian:
        raise NotAbelianError("Z-free count needs an abelian group")
    x, z, _ = h.projective().element_arrays()
    n_i = h.n - np.bitwise_count(x | z).astype(np.int64)
    n_z = np.bitwise_count(z & ~x).astype(np.int64)
    total = 0
    pairs, counts = np.unique(np.stack([n_i, n_z & 1], axis=1), axis=0, return_counts=True)
    for (ni, odd), cnt in zip(pairs.tolist(), counts.tolist()):
        total += (-1) ** odd * 3 ** ni * cnt
    q, r = divmod(total, h.order)
    assert r == 0
    return q


def zfree_centralizer_count_bruteforce(h: PauliSubgroup) -> int:
    count = 0
    for code in range(3 ** h.n):
        x = z = 0
        for q in range(h.n):
            code, d = divmod(code, 3)
            if d == 1:
                x |= 1 << q
            elif d == 2:
                x |= 1 << q
                z |= 1 << q
        p = ProjectivePauli(h.n, x, z)
        if all(symplectic(p, g) == 0 for g in h.generators):
            count += 1
    return count


# ---------------------------------------------------------------------------
# text format


@dataclass(frozen=True)
class GroupLoadReport:
    group: PauliSubgroup
    n_inputs: int
    n_dropped: int

    def summary(self) -> str:
        return (f"{self.n_inputs} generators read, {self.n_dropped} dependent dropped, "
                f"dim {self.group.dim} on {self.group.n} qubits")


def parse_group_text(text: str, signed: bool = True) -> GroupLoadReport:
    gens = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            gens.append(parse_pauli(line))
        except ValueError as exc:
            raise GroupError(f"line {lineno}: {exc}") from None
    if not gens:
        raise GroupError("group file has no generators")
    g = canonicalize(gens, signed=signed)
    return GroupLoadReport(g, len(gens), len(gens) - g.dim)


def load_group(path, signed: bool = True) -> GroupLoadReport:
    with open(path) as fh:
        return parse_group_text(fh.read(), signed=signed)


def format_group_text(g: PauliSubgroup) -> str:
    return "".join((format_pauli(x) if g.signed else x.letters()) + "\n" for x in g.generators)
