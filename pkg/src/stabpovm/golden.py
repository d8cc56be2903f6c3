"""Worked examples as executable fixtures.

Each fixture returns a list of :class:`Check` rows (expected vs computed).
Integer quantities are compared exactly; dense matrices within 1e-10.
Where a printed value is internally inconsistent, the fixture expects the
value that follows from the printed inputs and records the printed one in
``printed`` with a note.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, List, Optional, Sequence

import numpy as np

from . import dense
from .analysis import (AncillaSpec, analyze_doped, attach_data, bound_t_le_n, dense_crosscheck_group,
                       ic_condition_for, project_ancilla, span_dimension, stabilizer_effective_povm)
from .circuits import DopedCircuit, evolve_pauli, two_t_gadget_circuit, gadgetize, universal_2n_circuit
from .groups import (PauliSubgroup, align_generators, canonicalize, centralizer, centralizer_within,
                     coset_sides, coset_table, double_coset_table, embed, entanglement_decomposition,
                     group, intersect, local_subgroup, product_group, zfree_centralizer_count,
                     zfree_centralizer_count_bruteforce)
from .pauli import P, format_pauli
from .search import embedding_table, fast_magic_span, ic_witness_group, zfree_coset_count, zfree_cosets

FRAME_TOL = 1e-10


@dataclass
class Check:
    fixture: str
    label: str
    expected: Any
    computed: Any
    ok: bool
    printed: Any = None
    note: str = ""


@dataclass
class Fixture:
    name: str
    tags: Sequence[str]
    run: Callable[[], List[Check]]

    def matches(self, pattern: Optional[str]) -> bool:
        if not pattern:
            return True
        p = pattern.lower()
        return p in self.name.lower() or any(p in t.lower() for t in self.tags)


def _eq(fx: str, label: str, expected, computed, printed=None, note: str = "") -> Check:
    return Check(fx, label, expected, computed, expected == computed, printed, note)


def _gset(g: PauliSubgroup) -> List[str]:
    return sorted(x.letters() for x in g.projective().elements())


def _same_group(a: PauliSubgroup, b: PauliSubgroup) -> bool:
    return a.n == b.n and _gset(a) == _gset(b)


def _signed_group_text(g: PauliSubgroup) -> List[str]:
    return [format_pauli(x) for x in g.generators]


def _coset_sets(cosets) -> List[List[str]]:
    return sorted(sorted(c) for c in cosets)


def _double_cosets(s: PauliSubgroup, n: int) -> List[List[List[str]]]:
    dec = entanglement_decomposition(s, n)
    out = []
    for c in double_coset_table(s, dec.S_A, dec.S_B).cosets:
        a, b = coset_sides(c, n)
        out.append([sorted(x.letters() for x in a), sorted(x.letters() for x in b)])
    return sorted(out)


# ---------------------------------------------------------------------------
# normal-form examples


NORMAL_FORM_3Q = ("ZZI", "ZIZ", "XXX")
NORMAL_FORM_5Q = ("ZXZZY", "XIIIZ", "XIIZZ", "ZXYZX", "ZIYZX")


def _normal_form_3q() -> List[Check]:
    fx = "normal_form_3q"
    s = group(*NORMAL_FORM_3Q, signed=True)
    z = group("X", signed=True)
    zp = canonicalize([embed(g, 3, [2]) for g in z.generators], signed=True, n=3)
    al = align_generators(s, zp)
    form = stabilizer_effective_povm(s, z, 2)
    rows = [
        _eq(fx, "S ∩ Z' is trivial", 0, intersect(s, zp).dim),
        _eq(fx, "S ∩ C(Z')", _gset(group("ZZI", "XXX")), _gset(centralizer_within(s, zp))),
        _eq(fx, "ell", 0, al.ell),
        _eq(fx, "g~_1 anticommutes with Z'", True, bool(al.anticommutation_matrix()[0][0])),
        _eq(fx, "effective group", _gset(group("ZZ", "XX")), _gset(form.effective_group)),
        _eq(fx, "nonzero outcomes", 8, form.nonzero_outcomes),
        _eq(fx, "multiplicity", 2, form.multiplicity),
        _eq(fx, "scale", Fraction(1, 2), form.scale),
    ]
    ops = dense.effective_povm(_as_circuit(2, 1), dense.plus_state(), s)
    distinct = _distinct(ops)
    rows.append(_eq(fx, "dense: distinct elements", 4, len(distinct)))
    target = [0.5 * _proj(g) for g in _sign_products(["ZZ", "XX"])]
    rows.append(_eq(fx, "dense: elements (1/2)(I±ZZ)/2(I±XX)/2", True,
                    all(any(np.allclose(d, t, atol=1e-12) for t in target) for d in distinct)))
    return rows


def _normal_form_3q_variant() -> List[Check]:
    fx = "normal_form_3q_variant"
    s = group(*NORMAL_FORM_3Q, signed=True)
    z = group("XX", "YY", signed=True)
    zp = canonicalize([embed(g, 3, [1, 2]) for g in z.generators], signed=True, n=3)
    al = align_generators(s, zp)
    form = stabilizer_effective_povm(s, z, 1)
    sc = centralizer_within(s, zp)
    rows = [
        _eq(fx, "S ∩ Z'", _gset(group("IZZ")), _gset(intersect(s, zp))),
        _eq(fx, "S ∩ C(Z') modulo IZZ", _gset(group("XXX", "IZZ")), _gset(sc)),
        _eq(fx, "g~_1 = ZZI (mod S ∩ C(Z'))", True,
            _same_group(product_group(group(*[g.projective().lift() for g in al.g_tilde_list], n=3),
                                      sc.projective()), s.projective()) and
            any(g.letters() in ("ZZI", "IZZ", "ZIZ") for g in al.g_tilde_list)),
        _eq(fx, "effective group", _gset(group("X")), _gset(form.effective_group)),
        _eq(fx, "nonzero outcomes", 4, form.nonzero_outcomes),
        _eq(fx, "vanishing outcomes", 4, sum(v is None for v in form.outcome_relabel)),
        _eq(fx, "multiplicity", 2, form.multiplicity),
        _eq(fx, "scale", Fraction(1, 2), form.scale),
    ]
    ops = dense.effective_povm(_as_circuit(1, 2), dense.stabilizer_state(z), s)
    zero = sum(np.allclose(o, 0, atol=1e-12) for o in ops)
    rows.append(_eq(fx, "dense: vanishing elements", 4, int(zero)))
    target = [0.5 * _proj(g) for g in _sign_products(["X"])]
    nz = [o for o in ops if not np.allclose(o, 0, atol=1e-12)]
    rows.append(_eq(fx, "dense: elements (1/2)(I±X)/2", True,
                    all(any(np.allclose(d, t, atol=1e-12) for t in target) for d in nz)))
    return rows


def _normal_form_5q() -> List[Check]:
    fx = "normal_form_5q"
    s = group(*NORMAL_FORM_5Q, signed=True)
    z = group("ZZI", "ZIZ", "XXX", signed=True)
    zp = canonicalize([embed(g, 5, [2, 3, 4]) for g in z.generators], signed=True, n=5)
    sc = centralizer_within(s, zp)
    form = stabilizer_effective_povm(s, z, 2)
    rows = [
        _eq(fx, "S ∩ C(Z')", _gset(group("IXIII", "XIIZZ")), _gset(sc)),
        _eq(fx, "(S ∩ C(Z')) ∩ Z' trivial", 0, intersect(sc, zp).dim),
        _eq(fx, "effective group", _gset(group("XI", "IX")), _gset(form.effective_group)),
        _eq(fx, "nonzero outcomes", 32, form.nonzero_outcomes),
        _eq(fx, "multiplicity", 8, form.multiplicity),
        _eq(fx, "scale", Fraction(1, 8), form.scale),
    ]
    ops = dense.effective_povm(_as_circuit(2, 3), dense.stabilizer_state(z), s)
    target = [0.125 * _proj(g) for g in _sign_products(["XI", "IX"])]
    rows.append(_eq(fx, "dense: elements (1/8)(I±XI)/2(I±IX)/2", True,
                    all(any(np.allclose(o, t, atol=1e-12) for t in target) for o in ops)))
    return rows


# ---------------------------------------------------------------------------
# double cosets and ancilla states


ENT1_S = ("XIII", "IIXI", "IXIX", "IYIY")
ENT2_S = ("ZXZZY", "XIIIZ", "XIIZZ", "ZXYZX", "ZIYZX")
ENT3_S = ("IXZ", "XYY", "YZY")


def _ent1_first_state() -> np.ndarray:
    """``P_0 (x) (I + (X+Y+Z)/sqrt3)/2`` as a density matrix."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.diag([1, -1]).astype(complex)
    r = (np.eye(2) + (x + y + z) / np.sqrt(3)) / 2
    return np.kron(np.diag([1, 0]).astype(complex), r)


def _ent1() -> List[Check]:
    fx = "ent1"
    s = group(*ENT1_S, signed=True)
    dec = entanglement_decomposition(s, 2)
    rows = [
        _eq(fx, "p", 1, dec.p),
        _eq(fx, "S_n", _gset(group("XIII")), _gset(dec.S_A)),
        _eq(fx, "S_m", _gset(group("IIXI")), _gset(dec.S_B)),
        _eq(fx, "double cosets", sorted([[["II", "XI"], ["II", "XI"]], [["IX", "XX"], ["IX", "XX"]],
                                         [["IY", "XY"], ["IY", "XY"]], [["IZ", "XZ"], ["IZ", "XZ"]]]),
            _double_cosets(s, 2)),
    ]
    cases = [("P0 (x) (I+(X+Y+Z)/sqrt3)/2", AncillaSpec.dense(_ent1_first_state(), "P0 x r"), 8),
             ("|T>|T>", AncillaSpec.magic(2), 6),
             ("|00>", AncillaSpec.zeros(2), 4),
             ("generic", AncillaSpec.generic(2), 8)]
    for label, anc, want in cases:
        r = span_dimension(s, 2, anc)
        rows.append(_eq(fx, f"s_mu for {label}", want, r.s_mu))
        if anc.kind != "generic":
            dense_crosscheck_group(r, s, anc)
            rows.append(_eq(fx, f"dense rank for {label}", want, r.oracle_rank))
    r = span_dimension(s, 2, AncillaSpec.magic(2))
    rows.append(_eq(fx, "|T>|T> kills {IZ,XZ}", [["IZ", "XZ", "|", "IZ", "XZ"]], r.killed_cosets))
    return rows


def _ent2() -> List[Check]:
    fx = "ent2"
    s = group(*ENT2_S, signed=True)
    dec = entanglement_decomposition(s, 2)
    rows = [
        _eq(fx, "same group as the alternative generators", True,
            _same_group(s, group("IXIII", "IIIZI", "IIXIZ", "ZXZZY", "XIIIZ"))),
        _eq(fx, "p", 1, dec.p),
        _eq(fx, "S_n", _gset(group("IXIII")), _gset(dec.S_A)),
        _eq(fx, "S_m", _gset(group("IIIZI", "IIXIZ")), _gset(dec.S_B)),
        _eq(fx, "double cosets", sorted([
            [["II", "IX"], sorted(["III", "IZI", "XIZ", "XZZ"])],
            [["ZI", "ZX"], sorted(["ZZY", "ZIY", "YZX", "YIX"])],
            [["XI", "XX"], sorted(["IIZ", "IZZ", "XII", "XZI"])],
            [["YI", "YX"], sorted(["ZZX", "ZIX", "YZY", "YIY"])]]), _double_cosets(s, 2)),
    ]
    r = span_dimension(s, 2, AncillaSpec.magic(3))
    rows.append(_eq(fx, "max s_mu 2^(n+p)", 8, 2 ** (2 + dec.p)))
    rows.append(_eq(fx, "s_mu for |T>^3", 8, r.s_mu))
    dense_crosscheck_group(r, s, AncillaSpec.magic(3))
    rows.append(_eq(fx, "dense rank for |T>^3", 8, r.oracle_rank))
    return rows


def _ent3() -> List[Check]:
    fx = "ent3"
    s = group(*ENT3_S, signed=True)
    dec = entanglement_decomposition(s, 1)
    r = span_dimension(s, 1, AncillaSpec.magic(2))
    dense_crosscheck_group(r, s, AncillaSpec.magic(2))
    return [
        _eq(fx, "p", 1, dec.p),
        _eq(fx, "S_n trivial", 0, dec.S_A.dim),
        _eq(fx, "S_m", _gset(group("IXZ")), _gset(dec.S_B)),
        _eq(fx, "double cosets", sorted([[["I"], ["II", "XZ"]], [["X"], ["YY", "ZX"]],
                                         [["Y"], ["YX", "ZY"]], [["Z"], ["IZ", "XI"]]]),
            _double_cosets(s, 1)),
        _eq(fx, "s_mu for |T>|T>", 4, r.s_mu),
        _eq(fx, "IC", True, r.ic),
        _eq(fx, "dense rank", 4, r.oracle_rank),
    ]


def _ent4() -> List[Check]:
    fx = "ent4"
    h = group("XZ")
    s = attach_data(h, 1)
    r = span_dimension(s, 1, AncillaSpec.magic(2))
    dense_crosscheck_group(r, canonicalize(s.generators, signed=True, n=3), AncillaSpec.magic(2))
    return [
        _eq(fx, "C(XZ)/<XZ>", _coset_sets([["II", "XZ"], ["XI", "IZ"], ["YY", "ZX"], ["YX", "ZY"]]),
            _coset_sets(zfree_cosets(h))),
        _eq(fx, "every coset has a Z-free member", True, ic_condition_for(h)),
        _eq(fx, "s_mu under |T>|T>", 4, r.s_mu),
        _eq(fx, "dense rank under |T>|T>", 4, r.oracle_rank),
        _eq(fx, "s_mu under a generic state", 4, span_dimension(s, 1, AncillaSpec.generic(2)).s_mu),
    ]


def _ent5() -> List[Check]:
    fx = "ent5"
    h = group("XX")
    s = attach_data(h, 1)
    r = span_dimension(s, 1, AncillaSpec.magic(2))
    dense_crosscheck_group(r, canonicalize(s.generators, signed=True, n=3), AncillaSpec.magic(2))
    killed = [sorted(k[k.index("|") + 1:]) for k in r.killed_cosets]
    return [
        _eq(fx, "C(XX)/<XX>", _coset_sets([["II", "XX"], ["XI", "IX"], ["YY", "ZZ"], ["YZ", "ZY"]]),
            _coset_sets(zfree_cosets(h))),
        _eq(fx, "s_mu under |T>|T>", 3, r.s_mu),
        _eq(fx, "dense rank under |T>|T>", 3, r.oracle_rank),
        _eq(fx, "killed coset", [["YZ", "ZY"]], killed),
        _eq(fx, "not IC", False, ic_condition_for(h)),
    ]


# ---------------------------------------------------------------------------
# gadget examples


def _tdoped_1() -> List[Check]:
    fx = "tdoped_1"
    s = group("ZIII", "IZII", "IIXX", "IIYY", signed=True)
    res = project_ancilla(s, [P("IIXX"), P("IZII")], AncillaSpec.zeros(1).group, 1, 1)
    return [
        _eq(fx, "projected group", _gset(group("ZII", "IXX", "IYY")), _gset(res.group)),
        _eq(fx, "pinned", ["IXX"], _signed_group_text(res.fixed)),
        _eq(fx, "free generators", 2, res.free_generators),
    ]


def _tdoped_2() -> List[Check]:
    fx = "tdoped_2"
    c = two_t_gadget_circuit()
    gc = gadgetize(c)
    evolved = _evolve_each(gc, ["ZIII", "IZII", "IIZI", "IIIZ"])
    s = group(*evolved, signed=True)
    res = project_ancilla(s, [P(evolved[2]), P(evolved[3])], AncillaSpec.zeros(1).group, 1, 1)
    s_t = local_subgroup(res.group, [1, 2])
    cos = _coset_sets([[g.letters() for g in cc.members] for cc in coset_table(res.group, s_t).cosets])
    rep = analyze_doped(c, oracle=True)
    return [
        _eq(fx, "evolved generators", ["XXIX", "ZZXI", "IXZI", "IZXZ"], evolved),
        _eq(fx, "S ∩ Z' trivial", 0, res.killed.dim),
        _eq(fx, "S ∩ C(Z')", _gset(group("XIZX", "ZZXI", "IZXZ")),
            _gset(centralizer_within(s, group("IZII", signed=True)))),
        _eq(fx, "projected group", _gset(group("XZX", "ZXI", "IXZ")), _gset(res.group)),
        _eq(fx, "pinned", ["IXZ"], _signed_group_text(res.fixed)),
        _eq(fx, "p", 1, entanglement_decomposition(res.group, 1).p),
        _eq(fx, "S/S_t cosets", _coset_sets([["III", "IXZ"], ["ZXI", "ZIZ"], ["XYY", "XZX"],
                                            ["YYX", "YZY"]]), cos),
        _eq(fx, "one Z-free member per coset", [1, 1, 1, 1],
            [sum("Z" not in s_[1:] for s_ in cc) for cc in cos]),
        _eq(fx, "s_mu (gadget engine)", 4, rep.s_mu),
        _eq(fx, "IC", True, rep.ic),
        _eq(fx, "dense rank", 4, rep.oracle_rank),
    ]


def _evolve_each(gc, texts: Sequence[str]) -> List[str]:
    return [format_pauli(evolve_pauli(gc.clifford_gates, P(t), adjoint=True)) for t in texts]


def _tdoped_3() -> List[Check]:
    fx = "tdoped_3"
    s = group(*NORMAL_FORM_3Q, signed=True)
    dec = entanglement_decomposition(s, 2)
    r = span_dimension(s, 2, AncillaSpec.magic(1))
    dense_crosscheck_group(r, s, AncillaSpec.magic(1))
    cos = _coset_sets([[g.letters() for g in c.members] for c in coset_table(s, dec.S_A).cosets])
    return [
        _eq(fx, "S_n", _gset(group("ZZI")), _gset(dec.S_A)),
        _eq(fx, "S/S_n", _coset_sets([["III", "ZZI"], ["ZIZ", "IZZ"], ["XXX", "YYX"], ["YXY", "XYY"]]),
            cos),
        _eq(fx, "bound 2^n (3/2)^t", 6, bound_t_le_n(2, 1)),
        _eq(fx, "s_mu under |T>", 6, r.s_mu),
        _eq(fx, "dense rank under |T>", 6, r.oracle_rank),
        _eq(fx, "stabilizer ancilla gives 2^n", 4, span_dimension(s, 2, AncillaSpec.zeros(1)).s_mu),
        _eq(fx, "generic ancilla gives 2^(n+p)", 8, span_dimension(s, 2, AncillaSpec.generic(1)).s_mu),
    ]


# ---------------------------------------------------------------------------
# counting, frame operator, universal circuit


ZFREE_COUNT_CASES = [
    # (generators, expected, printed, note)
    (("IIZX",), 36, None, ""),
    (("IZZX",), 42, 45,
     "printed (3^4+3^2)/2 = 45 needs two identity letters and an even number of Z; "
     "IZZX has n_I=1, n_Z=2, giving (3^4+3)/2 = 42 (brute force agrees); IIZZ gives 45"),
    ((), 81, None, ""),
    (("IIXZ", "XZII"), 16, None, ""),
]


def _zfree_count_checks() -> List[Check]:
    fx = "zfree_counts"
    rows = []
    for gens, want, printed, note in ZFREE_COUNT_CASES:
        h = group(*gens) if gens else PauliSubgroup(4, (), False, True, ())
        got = zfree_centralizer_count(h)
        brute = zfree_centralizer_count_bruteforce(h)
        label = f"Z-free count in C(<{', '.join(gens)}>)" if gens else "Z-free count, trivial H on 4 qubits"
        rows.append(Check(fx, label, want, got, got == want and brute == want, printed, note))
    rows.append(_eq(fx, "IIZZ gives the printed 45", 45, zfree_centralizer_count(group("IIZZ"))))
    return rows


def _frame() -> List[Check]:
    fx = "frame"
    ops = dense.effective_povm(universal_2n_circuit(1), dense.zero_state(1))
    f = dense.frame_operator(ops)
    want = np.diag([0.5, 0.125, 0.125, 0.25])
    err = float(np.max(np.abs(f - want)))
    return [Check(fx, "frame operator diag(1/2,1/8,1/8,1/4) in (I,X,Y,Z)", "<= 1e-10",
                  f"{err:.1e}", err <= FRAME_TOL),
            _eq(fx, "frame operator invertible", 4, int(np.linalg.matrix_rank(f)))]


def _universal() -> List[Check]:
    fx = "universal_2n"
    rows = []
    for n in (1, 2, 3):
        c = universal_2n_circuit(n)
        rep = analyze_doped(c, oracle=n <= 2)
        rows.append(_eq(fx, f"n={n}: s_mu", 4 ** n, rep.s_mu))
        if n <= 2:
            rows.append(_eq(fx, f"n={n}: dense rank", 4 ** n, rep.oracle_rank))
        h = ic_witness_group(n)
        rows.append(_eq(fx, f"n={n}: gadget-local group has Z-free cosets", 4 ** n, zfree_coset_count(h)))
        rows.append(_eq(fx, f"n={n}: completed group IC", 4 ** n, fast_magic_span(attach_data(h, n), n)))
    return rows


def _witness_embedding() -> List[Check]:
    fx = "witness_embedding"
    h = ic_witness_group(1)
    got = _coset_sets(embedding_table(h))
    want = _coset_sets([["XI", "IZ"], ["YY", "ZX"], ["YX", "ZY"]])
    return [Check(fx, "cosets of C(XZ)/<XZ> carrying X, Y, Z", want, got, want == got,
                  printed="Z -> {YZ, ZI}",
                  note="YZ and ZI anticommute with XZ; the Z coset is {YX, ZY}, as in the XZ "
                       "quotient listed among the worked examples")]


# ---------------------------------------------------------------------------
# helpers


def _as_circuit(n: int, m: int) -> DopedCircuit:
    return DopedCircuit(n, m, ())


def _sign_products(gens: Sequence[str]) -> List[List[Any]]:
    out = []
    for b in range(1 << len(gens)):
        out.append([("-" if (b >> k) & 1 else "") + g for k, g in enumerate(gens)])
    return out


def _proj(signed_gens: Sequence[str]) -> np.ndarray:
    mats = [dense.pauli_matrix(P(g)) for g in signed_gens]
    d = mats[0].shape[0]
    out = np.eye(d, dtype=complex)
    for m_ in mats:
        out = out @ (np.eye(d) + m_) / 2
    return out


def _distinct(ops: Sequence[np.ndarray]) -> List[np.ndarray]:
    out: List[np.ndarray] = []
    for o in ops:
        if not any(np.allclose(o, q, atol=1e-12) for q in out):
            out.append(o)
    return out


FIXTURES: List[Fixture] = [
    Fixture("normal_form_3q", ("normal_form",), _normal_form_3q),
    Fixture("normal_form_3q_variant", ("normal_form",), _normal_form_3q_variant),
    Fixture("normal_form_5q", ("normal_form",), _normal_form_5q),
    Fixture("ent1", ("double_coset",), _ent1),
    Fixture("ent2", ("double_coset",), _ent2),
    Fixture("ent3", ("double_coset",), _ent3),
    Fixture("ent4", ("quotient",), _ent4),
    Fixture("ent5", ("quotient",), _ent5),
    Fixture("tdoped_1", ("gadget",), _tdoped_1),
    Fixture("tdoped_2", ("gadget",), _tdoped_2),
    Fixture("tdoped_3", ("gadget",), _tdoped_3),
    Fixture("zfree_counts", ("counting",), _zfree_count_checks),
    Fixture("frame", ("frame_checks",), _frame),
    Fixture("universal_2n", ("frame_checks",), _universal),
    Fixture("witness_embedding", ("witness",), _witness_embedding),
]


def run_fixtures(pattern: Optional[str] = None) -> List[Check]:
    rows: List[Check] = []
    for fx in FIXTURES:
        if fx.matches(pattern):
            rows.extend(fx.run())
    return rows


def format_table(rows: Sequence[Check]) -> str:
    lines = []
    for r in rows:
        status = "ok  " if r.ok else "FAIL"
        extra = f"  [printed {r.printed}]" if r.printed is not None else ""
        lines.append(f"{status} {r.fixture:<18} {r.label}: expected {r.expected}, got {r.computed}{extra}")
        if r.note:
            lines.append(f"     note: {r.note}")
    return "\n".join(lines)
