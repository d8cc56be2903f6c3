"""Span dimension of effective POVMs built from stabilizer and T-doped circuits.

Conventions: the data register is qubits ``[0, n)``, the ancilla register
``[n, n+m)`` and, for doped circuits, the T-gadget register follows. For a
measurement group ``S`` the effective elements are

    mu_b = 2^-(n+m) sum_{g in S_b} <psi| pi_m(g) |psi> pi_n(g)

so the span of ``{mu_b}`` equals the span of the group Fourier components
``sum_b (-1)^(xi.b) mu_b``. Everything below works with those components.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import gf2
from .circuits import DopedCircuit, Gate, Tableau, gadgetize, inverse_gates
from .groups import (
    AlignedGenerators,
    PauliSubgroup,
    StructureError,
    align_generators,
    canonicalize,
    centralizer,
    centralizer_within,
    coset_sides,
    double_coset_table,
    element_arrays,
    embed,
    entanglement_decomposition,
    group,
    intersect,
    letter_key,
    project,
)
from .pauli import (
    DimensionError,
    PauliString,
    ProjectivePauli,
    format_pauli,
    is_z_free,
    multiply,
    restrict,
    symplectic,
)

DENSE_TOL = 1e-9


class AnalysisError(ValueError):
    pass


class AnalysisWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# ancilla states


@dataclass(frozen=True)
class AncillaSpec:
    """Ancilla state: stabilizer group, ``|T>^t``, explicit vector, or generic."""

    kind: str
    size: int
    group: Optional[PauliSubgroup] = None
    vector: Optional[np.ndarray] = field(default=None, compare=False)
    label: str = ""

    @staticmethod
    def stabilizer(g: PauliSubgroup, label: str = "") -> "AncillaSpec":
        if not (g.signed and g.is_maximal()):
            raise AnalysisError("stabilizer ancilla needs a maximal signed group")
        return AncillaSpec("stabilizer", g.n, group=g, label=label or "stab")

    @staticmethod
    def zeros(m: int) -> "AncillaSpec":
        if m == 0:
            return AncillaSpec("stabilizer", 0, group=PauliSubgroup(0, (), True), label="|>")
        gens = [PauliString.single(m, q, "Z") for q in range(m)]
        return AncillaSpec("stabilizer", m, group=canonicalize(gens, signed=True), label=f"|0>^{m}")

    @staticmethod
    def magic(t: int) -> "AncillaSpec":
        return AncillaSpec("magic_T_power", t, label=f"T^{t}")

    @staticmethod
    def dense(vec: np.ndarray, label: str = "dense") -> "AncillaSpec":
        v = np.asarray(vec, dtype=complex)
        d = v.shape[0]
        m = d.bit_length() - 1
        if d != 1 << m:
            raise AnalysisError("dense ancilla dimension must be a power of two")
        if v.ndim == 1:
            if abs(np.linalg.norm(v) - 1) > 1e-12:
                raise AnalysisError("dense ancilla vector must have unit norm")
        elif v.shape != (d, d) or abs(np.trace(v) - 1) > 1e-12:
            raise AnalysisError("dense ancilla matrix must be a unit-trace density matrix")
        return AncillaSpec("dense", m, vector=v, label=label)

    @staticmethod
    def generic(m: int) -> "AncillaSpec":
        return AncillaSpec("generic", m, label="generic")

    @property
    def is_pure(self) -> bool:
        return not (self.kind == "dense" and self.vector.ndim == 2)

    def expectation(self, g: Union[PauliString, ProjectivePauli]) -> Optional[float]:
        """``<psi|P|psi>`` for the Hermitian ``+`` lift of ``g``; None for generic."""
        if g.n != self.size:
            raise DimensionError(f"ancilla has {self.size} qubits, string has {g.n}")
        p = ProjectivePauli(g.n, g.x, g.z)
        if self.kind == "stabilizer":
            if self.size == 0:
                return 1.0
            s = self.group.member_sign(p.lift()) if self.group.contains(p) else None
            return 0.0 if s is None else float(s)
        if self.kind == "magic_T_power":
            if not is_z_free(p):
                return 0.0
            return 2.0 ** (-(p.x.bit_count()) / 2)
        if self.kind == "dense":
            from .dense import pauli_expectation

            return float(pauli_expectation(self.vector, p.lift()).real)
        return None

    def survives(self, g) -> bool:
        if self.kind == "generic":
            return True
        if self.kind == "magic_T_power":
            return is_z_free(g)
        return abs(self.expectation(g)) > DENSE_TOL

    def describe(self) -> str:
        if self.kind == "stabilizer":
            return f"stab:{self.group}"
        return self.label or self.kind


# ---------------------------------------------------------------------------
# Normal form for stabilizer ancillas


@dataclass(frozen=True)
class StabilizerPovmForm:
    n: int
    m: int
    ell: int
    aligned: AlignedGenerators
    effective_generators: Tuple[PauliString, ...]
    sign_vector: Tuple[int, ...]
    outcome_relabel: Tuple[Optional[int], ...]

    @property
    def nonzero_outcomes(self) -> int:
        return sum(v is not None for v in self.outcome_relabel)

    @property
    def multiplicity(self) -> int:
        return 1 << (self.m - self.ell)

    @property
    def scale(self) -> Fraction:
        return Fraction(2) ** (self.ell - self.m)

    @property
    def effective_group(self) -> PauliSubgroup:
        return canonicalize(self.effective_generators, signed=True, n=self.n)

    def element_paulis(self, index: int) -> List[Tuple[PauliString, ...]]:
        """Effective element ``index`` as ``scale * prod_k (I + s_k G_k)/2``."""
        return [(-g if (index >> k) & 1 else g) for k, g in enumerate(self.effective_generators)]


def _split_factor(g: PauliString, n: int, m: int) -> Tuple[PauliString, ProjectivePauli, int]:
    """Write ``g = eps * P_n (x) P_m`` with both factors Hermitian ``+`` lifts."""
    pn = restrict(g.projective(), range(n)).lift()
    pm = restrict(g.projective(), range(n, n + m))
    e = (g.phase - pn.n_y - (pm.x & pm.z).bit_count()) % 4
    if e % 2:
        raise AnalysisError(f"{format_pauli(g)} is not Hermitian")
    return pn, pm, 1 if e == 0 else -1


def stabilizer_effective_povm(s: PauliSubgroup, z: PauliSubgroup, n: int) -> StabilizerPovmForm:
    """Normal form of the POVM from measuring ``s`` with ancilla stabilized by ``z``.

    Outcome ``b`` (bit ``j`` flips the sign of generator ``j`` of ``s``) maps
    to effective element ``outcome_relabel[b]`` or to zero (None).
    """
    m = s.n - n
    if m < 0 or z.n != m:
        raise DimensionError(f"ancilla group on {z.n} qubits, expected {m}")
    if not (s.signed and z.signed):
        raise AnalysisError("normal form needs signed groups")
    if not s.is_maximal() or not z.is_maximal():
        raise StructureError("normal form needs maximal groups")
    zprime = canonicalize([embed(g, s.n, range(n, n + m)) for g in z.generators],
                          signed=True, n=s.n)
    al = align_generators(s, zprime)
    if len(al.g_list) != n:
        raise StructureError("unexpected number of effective generators")
    eff, signs = [], []
    for g in al.g_list:
        pn, pm, eps = _split_factor(g, n, m)
        d = z.member_sign(pm.lift()) if m else 1
        signs.append(d)
        eff.append(pn if eps * d > 0 else -pn)

    def eigen_rule(a: PauliString) -> Tuple[int, int]:
        c = s.coefficients(a)
        flip = (s.element(c).phase - a.phase) % 4
        return c, (1 if flip == 2 else 0)

    h_rules = []
    for h in al.h_list:
        _, pm, eps = _split_factor(h, n, m)
        want = eps * z.member_sign(pm.lift())
        c, f = eigen_rule(h)
        h_rules.append((c, f, 0 if want > 0 else 1))
    g_rules = [eigen_rule(g) for g in al.g_list]
    table: List[Optional[int]] = []
    for b in range(1 << s.n):
        ok = all(((c & b).bit_count() + f) % 2 == w for c, f, w in h_rules)
        if not ok:
            table.append(None)
            continue
        idx = 0
        for k, (c, f) in enumerate(g_rules):
            idx |= (((c & b).bit_count() + f) % 2) << k
        table.append(idx)
    return StabilizerPovmForm(n, m, len(al.h_list), al, tuple(eff), tuple(signs), tuple(table))


# ---------------------------------------------------------------------------
# group Fourier transform


def group_fourier(family, inverse: bool = False) -> np.ndarray:
    """``mu_b = 2^-d sum_xi (-1)^(xi.b) mu'_xi``; ``inverse`` undoes it."""
    arr = np.array(family, dtype=complex)
    size = arr.shape[0]
    d = size.bit_length() - 1
    if size == 0 or size != 1 << d:
        raise AnalysisError("family size must be a power of two")
    out = arr.copy()
    h = 1
    while h < size:
        out = out.reshape((size // (2 * h), 2, h) + arr.shape[1:])
        a, b = out[:, 0].copy(), out[:, 1].copy()
        out[:, 0], out[:, 1] = a + b, a - b
        out = out.reshape(arr.shape)
        h *= 2
    return out if inverse else out / size


# ---------------------------------------------------------------------------
# bounds


def bound_t_le_n(n: int, t: int) -> int:
    """``2^n (3/2)^t`` for ``0 <= t <= n``."""
    if not 0 <= t <= n:
        raise AnalysisError("bound_t_le_n needs 0 <= t <= n")
    return 2 ** (n - t) * 3 ** t


def bound_t_gt_n(n: int, t: int) -> int:
    """Constructive value ``2^-l (3^(a+1)-1)^r (3^a-1)^(l-r)`` with ``l=t-n``."""
    if not t > n >= 1:
        raise AnalysisError("bound_t_gt_n needs t > n >= 1")
    ell = t - n
    a = t // ell
    r = t - a * ell
    num = (3 ** (a + 1) - 1) ** r * (3 ** a - 1) ** (ell - r)
    q, rem = divmod(num, 2 ** ell)
    assert rem == 0
    return q


def necessary_t(n: int) -> int:
    """Smallest ``t`` with ``3^t >= 4^n``."""
    if n < 0:
        raise AnalysisError("n must be nonnegative")
    t = 0
    while 3 ** t < 4 ** n:
        t += 1
    return t


def rank_bound(n: int, t: int) -> int:
    """Applicable rank bound (t <= n) or constructive target (t > n), capped at 4^n."""
    if t <= n:
        return bound_t_le_n(n, t)
    return min(bound_t_gt_n(n, t), 4 ** n)


def bounds_table(n: int, t: int) -> Dict[str, Any]:
    out: Dict[str, Any] = {"n": n, "t": t, "necessary_t": necessary_t(n), "ic_sufficient_t": 2 * n}
    if t <= n:
        out["rank_bound"] = bound_t_le_n(n, t)
        out["rank_bound_kind"] = "upper bound"
    else:
        out["rank_bound"] = min(bound_t_gt_n(n, t), 4 ** n)
        out["rank_bound_kind"] = "constructive target"
    if 3 ** t < 4 ** n:
        verdict = "impossible (below necessity bound)"
    elif t >= 2 * n:
        verdict = "achievable"
    else:
        verdict = "unknown below 2n, conjectured impossible"
    out["ic_verdict"] = verdict
    return out


# ---------------------------------------------------------------------------
# reports


@dataclass
class EffectivePovmReport:
    n: int
    m: int
    t: int
    s_mu: int
    p: int
    ic: bool
    ancilla: str
    reconstructed_directions: List[str] = field(default_factory=list)
    surviving_cosets: List[List[str]] = field(default_factory=list)
    killed_cosets: List[List[str]] = field(default_factory=list)
    bounds: Dict[str, Any] = field(default_factory=dict)
    free_generators: Optional[int] = None
    oracle_checked: Optional[bool] = None
    oracle_rank: Optional[int] = None
    warnings: List[str] = field(default_factory=list)
    method: str = ""
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def k(self) -> Union[int, Fraction]:
        f = Fraction(self.s_mu, 2 ** (self.n - self.p))
        return int(f) if f.denominator == 1 else f

    @property
    def k_is_integral(self) -> bool:
        return isinstance(self.k, int)

    def to_json(self) -> Dict[str, Any]:
        k = self.k
        return {
            "n": self.n, "m": self.m, "t": self.t, "s_mu": self.s_mu, "p": self.p,
            "k": k if isinstance(k, int) else str(k), "ic": self.ic, "ancilla": self.ancilla,
            "method": self.method,
            "reconstructed_directions": self.reconstructed_directions,
            "surviving_cosets": self.surviving_cosets, "killed_cosets": self.killed_cosets,
            "bounds": self.bounds, "free_generators": self.free_generators,
            "oracle_checked": self.oracle_checked, "oracle_rank": self.oracle_rank,
            "warnings": self.warnings, **({"extra": self.extra} if self.extra else {}),
        }

    def csv_row(self) -> Dict[str, Any]:
        return {"n": self.n, "m": self.m, "t": self.t, "p": self.p, "s_mu": self.s_mu,
                "k": str(self.k), "ic": int(self.ic)}


CSV_COLUMNS = ("n", "m", "t", "p", "s_mu", "k", "ic")


# ---------------------------------------------------------------------------
# double-coset path


def span_dimension(s: PauliSubgroup, n: int, ancilla: AncillaSpec) -> EffectivePovmReport:
    """s_mu from the double-coset decomposition of ``s`` across ``n | m``.

    Each coset of ``S_A S_B`` carries ``2^(n-p)`` data directions and
    survives when one of its members has a nonzero ancilla expectation.
    """
    if not s.is_maximal():
        raise StructureError("span_dimension needs a maximal abelian group")
    m = s.n - n
    if ancilla.size != m:
        raise DimensionError(f"ancilla on {ancilla.size} qubits, register has {m}")
    dec = entanglement_decomposition(s, n)
    table = double_coset_table(s, dec.S_A, dec.S_B)
    surviving, killed, directions = [], [], []
    borderline = []
    for c in table.cosets:
        a_side, b_side = coset_sides(c, n)
        alive = False
        for b in b_side:
            if ancilla.kind == "dense":
                v = abs(ancilla.expectation(b))
                if DENSE_TOL < v < 1e3 * DENSE_TOL or 0 < v <= DENSE_TOL:
                    borderline.append(f"{b.letters()}: {v:.3e}")
                if v > DENSE_TOL:
                    alive = True
                    break
            elif ancilla.survives(b):
                alive = True
                break
        label = [f"{a.letters()}" for a in a_side] + ["|"] + [b.letters() for b in b_side]
        if alive:
            surviving.append(label)
            directions += [a.letters() for a in a_side]
        else:
            killed.append(label)
    s_mu = len(surviving) * 2 ** (n - dec.p)
    rep = EffectivePovmReport(n, m, 0, s_mu, dec.p, s_mu == 4 ** n, ancilla.describe(),
                              sorted(directions, key=lambda x: letter_key(ProjectivePauli(n, *_xz(x)))),
                              surviving, killed, method="double_coset")
    rep.bounds = {"upper_2^(n+p)": 2 ** (n + dec.p), "lower_2^n": 2 ** n if ancilla.is_pure else None}
    if ancilla.kind == "magic_T_power" and m <= n:
        rep.bounds["rank_bound"] = bound_t_le_n(n, m)
    if borderline:
        rep.warnings.append("near-threshold ancilla expectations: " + ", ".join(borderline))
    return rep


def _xz(letters: str) -> Tuple[int, int]:
    x = z = 0
    for k, ch in enumerate(letters):
        if ch in "XY":
            x |= 1 << k
        if ch in "ZY":
            z |= 1 << k
    return x, z


# ---------------------------------------------------------------------------
# exact engine for stabilizer ancillas plus T gadgets


def _find_primes(count: int, start: int) -> List[int]:
    out = []
    p = start
    while len(out) < count:
        if p % 8 == 7 and all(p % d for d in range(3, int(p ** 0.5) + 1, 2)):
            out.append(p)
        p -= 2
    return out


_PRIMES = [2 ** 31 - 1] + _find_primes(1, 2 ** 31 - 3)
_SQRT2 = {p: pow(2, (p + 1) // 4, p) for p in _PRIMES}


def rank_mod_p(mat: np.ndarray, p: int) -> int:
    """Rank over GF(p) of an int64 matrix with entries in ``[0, p)``."""
    a = np.array(mat, dtype=np.int64) % p
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        below = a[r + 1:, c]
        mask = below != 0
        if mask.any():
            idx = np.nonzero(mask)[0] + r + 1
            a[idx] = (a[idx] - (a[idx, c][:, None] * a[r]) % p) % p
        r += 1
    return r


@dataclass
class DopedSpan:
    s_mu: int
    p: int
    free_generators: int
    frozen_data_trivial: bool
    directions: List[int]
    zero_probability: bool
    reduced_generators: List[PauliString]


def _bit_gather(v: np.ndarray, positions: Sequence[int]) -> np.ndarray:
    out = np.zeros_like(v)
    for k, q in enumerate(positions):
        out |= ((v >> np.uint64(q)) & np.uint64(1)) << np.uint64(k)
    return out


def doped_span(gens: Sequence[PauliString], n: int, m: int, t: int,
               zpsi: Optional[PauliSubgroup]) -> DopedSpan:
    """Exact s_mu for measurement generators on ``n + m + t`` qubits.

    The first ``n + m`` generators take free signs (the outcome), the last
    ``t`` are pinned to ``+1``. The ancilla register carries the stabilizer
    state of ``zpsi`` and the gadget register carries ``|T>^t``.
    """
    N = n + m + t
    if len(gens) != N or any(g.n != N for g in gens):
        raise DimensionError("need n+m+t generators on n+m+t qubits")
    nf = n + m
    anc = list(range(n, n + m))
    # subgroup commuting with the embedded ancilla stabilizer
    if m:
        zp = [embed(g, N, anc) for g in zpsi.generators]
        rows = []
        for h in zp:
            mask = 0
            for k, g in enumerate(gens):
                if symplectic(g, h):
                    mask |= 1 << k
            rows.append(mask)
        masks = gf2.nullspace(rows, N)
    else:
        masks = [1 << k for k in range(N)]
    elems = []
    for c in masks:
        e = PauliString.identity(N)
        for k in range(N):
            if (c >> k) & 1:
                e = multiply(e, gens[k])
        elems.append(e)
    x, z, ph = element_arrays(N, elems)
    cm = np.zeros(1, dtype=np.uint64)
    for c in masks:
        cm = np.concatenate([cm, cm ^ np.uint64(c)])

    dmask = np.uint64((1 << n) - 1)
    xn, zn = x & dmask, z & dmask
    sh_m, sh_t = np.uint64(n), np.uint64(n + m)
    xm = (x >> sh_m) & np.uint64((1 << m) - 1)
    zm = (z >> sh_m) & np.uint64((1 << m) - 1)
    xt, zt = x >> sh_t, z >> sh_t
    keep = (zt & ~xt) == 0
    # ancilla sign lookup over symplectic vectors x | z << m
    if m:
        lut = np.zeros(1 << (2 * m), dtype=np.int64)
        ax, az, aph = zpsi.element_arrays()
        avec = (ax | (az << np.uint64(m))).astype(np.int64)
        ay = np.bitwise_count(ax & az).astype(np.int64)
        lut[avec] = np.where((aph - ay) % 4 == 0, 1, -1)
        sig = lut[(xm | (zm << np.uint64(m))).astype(np.int64)]
    else:
        sig = np.ones(x.shape[0], dtype=np.int64)
    keep &= sig != 0
    y_tot = np.bitwise_count(x & z).astype(np.int64)
    e = (ph - y_tot) % 4
    if np.any(e[keep] % 2):
        raise AnalysisError("non-Hermitian element in measurement group")
    sign = np.where(e == 0, 1, -1) * sig
    w = np.bitwise_count(xt).astype(np.int64)

    xi = (cm & np.uint64((1 << nf) - 1))[keep]
    col = (xn | (zn << np.uint64(n))).astype(np.int64)[keep]
    sign, w = sign[keep], w[keep]

    # structural data: reduced group on data+gadget and its frozen part
    nt_vec = [(g.x & ((1 << n) - 1)) | ((g.x >> (n + m)) << n)
              | (((g.z & ((1 << n) - 1)) | ((g.z >> (n + m)) << n)) << (n + t)) for g in elems]
    frozen_masks = gf2.intersect(masks, [1 << (nf + k) for k in range(t)], N) if t else []
    red_basis, _ = gf2.rref(nt_vec)
    # image of frozen combinations in the reduced group
    f_img = []
    for c in frozen_masks:
        sol = gf2.solve(c, masks)
        v = 0
        for k in range(len(masks)):
            if (sol >> k) & 1:
                v ^= nt_vec[k]
        f_img.append(v)
    dim_fr = gf2.rank(f_img)
    dim_r = len(red_basis)
    data_part = (1 << n) - 1
    fr_data_trivial = all(((v & data_part) == 0 and ((v >> (n + t)) & data_part) == 0) for v in f_img)
    p = gf2.rank([(v & data_part) | (((v >> (n + t)) & data_part) << n) for v in nt_vec]) - n

    if xi.size == 0:
        return DopedSpan(0, p, dim_r - dim_fr, fr_data_trivial, [], True, [])

    # exact coefficients 2^(t/2) * sign * 2^(-w/2) = sign * sqrt2^(t-w)
    exp = t - w
    rows_u, row_idx = np.unique(xi, return_inverse=True)
    cols_u, col_idx = np.unique(col, return_inverse=True)
    key = row_idx.astype(np.int64) * cols_u.size + col_idx
    a_int = np.where(exp % 2 == 0, sign * (1 << (exp // 2)), 0)
    b_int = np.where(exp % 2 == 1, sign * (1 << (exp // 2)), 0)
    size = rows_u.size * cols_u.size
    A = np.bincount(key, weights=a_int, minlength=size).astype(np.int64)
    B = np.bincount(key, weights=b_int, minlength=size).astype(np.int64)
    nonzero = (A != 0) | (B != 0)
    if not nonzero.any():
        return DopedSpan(0, p, dim_r - dim_fr, fr_data_trivial, [], True, [])
    A = A.reshape(rows_u.size, cols_u.size)
    B = B.reshape(rows_u.size, cols_u.size)
    nzm = nonzero.reshape(rows_u.size, cols_u.size)
    live_rows = nzm.any(axis=1)
    live_cols = nzm.any(axis=0)
    directions = cols_u[live_cols].tolist()
    if (nzm[live_rows].sum(axis=1) == 1).all():
        # every surviving component is a single direction
        s_mu = int(live_cols.sum())
    else:
        dvecs = [(v & data_part) | (((v >> (n + t)) & data_part) << n) for v in f_img]
        s_mu = _block_rank(A[live_rows][:, live_cols], B[live_rows][:, live_cols],
                           cols_u[live_cols], dvecs)
    return DopedSpan(s_mu, p, dim_r - dim_fr, fr_data_trivial, directions, False, [])


def _modinv(a: np.ndarray, p: int) -> np.ndarray:
    """Elementwise inverse mod ``p`` (zeros stay zero)."""
    vals, inv_idx = np.unique(a % p, return_inverse=True)
    inv = np.array([pow(int(v), p - 2, p) if v else 0 for v in vals], dtype=np.int64)
    return inv[inv_idx].reshape(a.shape)


def batched_rank_mod_p(mats: np.ndarray, p: int) -> np.ndarray:
    """Ranks over GF(p) of a stack ``(B, R, C)`` of int64 matrices."""
    m = np.array(mats, dtype=np.int64) % p
    nb, nr, nc = m.shape
    used = np.zeros((nb, nr), dtype=bool)
    rank = np.zeros(nb, dtype=np.int64)
    ar = np.arange(nb)
    for j in range(nc):
        cand = (m[:, :, j] != 0) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        prow = np.argmax(cand, axis=1)
        piv = m[ar, prow]                       # (B, C)
        inv = _modinv(piv[:, j], p)
        piv = (piv * inv[:, None]) % p
        piv[~has] = 0
        f = m[:, :, j].copy()                   # (B, R)
        f[ar, prow] = 0
        f[used] = 0
        m = (m - (f[:, :, None] * piv[:, None, :]) % p) % p
        used[ar[has], prow[has]] = True
        rank += has
    return rank


def _block_rank(A: np.ndarray, B: np.ndarray, cols: np.ndarray, dvecs: Sequence[int]) -> int:
    """Rank over Q(sqrt2) of ``A + sqrt2 B``, split into blocks of columns.

    Every row is supported on one coset of the span of ``dvecs`` (the data
    image of the pinned generators), so the matrix is block diagonal.
    Ranks are taken modulo two primes where 2 is a square; a modular rank
    never exceeds the true rank, so the larger of the two is kept.
    """
    basis, piv = gf2.rref(dvecs)
    key = cols.astype(np.int64).copy()
    idx = np.zeros_like(key)
    for k, (b, pv) in enumerate(zip(basis, piv)):
        bit = (key >> pv) & 1
        idx |= bit << k
        key ^= np.where(bit == 1, b, 0)
    blocks, col_block = np.unique(key, return_inverse=True)
    nz = (A != 0) | (B != 0)
    row_block = col_block[np.argmax(nz, axis=1)]
    order = np.argsort(row_block, kind="stable")
    counts = np.bincount(row_block, minlength=blocks.size)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    pos = np.empty_like(row_block)
    pos[order] = np.arange(row_block.size) - starts[row_block[order]]
    nr = int(counts.max())
    nc = 1 << len(basis)
    # a block can never exceed min(#rows, #live columns)
    bound = np.minimum(counts, np.bincount(col_block, minlength=blocks.size))
    r_idx = np.repeat(np.arange(A.shape[0]), A.shape[1])
    c_idx = np.tile(np.arange(A.shape[1]), A.shape[0])
    sel = nz.reshape(-1)
    rb, pr, ic = row_block[r_idx[sel]], pos[r_idx[sel]], idx[c_idx[sel]]
    a_sel, b_sel = A.reshape(-1)[sel], B.reshape(-1)[sel]
    best = np.zeros(blocks.size, dtype=np.int64)
    todo = np.ones(blocks.size, dtype=bool)
    for prime in _PRIMES:
        slot = np.full(blocks.size, -1, dtype=np.int64)
        slot[todo] = np.arange(int(todo.sum()))
        keep = todo[rb]
        mats = np.zeros((int(todo.sum()), nr, nc), dtype=np.int64)
        mats[slot[rb[keep]], pr[keep], ic[keep]] = (a_sel[keep] % prime
                                                    + (b_sel[keep] % prime) * _SQRT2[prime]) % prime
        best[todo] = np.maximum(best[todo], batched_rank_mod_p(mats, prime))
        todo = best < bound
        if not todo.any():
            break
    return int(best.sum())


def _directions_text(n: int, cols: Sequence[int]) -> List[str]:
    out = [ProjectivePauli(n, c & ((1 << n) - 1), c >> n) for c in cols]
    out.sort(key=letter_key)
    return [p.letters() for p in out]


def computational_measurement(nq: int) -> PauliSubgroup:
    return canonicalize([PauliString.single(nq, q, "Z") for q in range(nq)], signed=True, n=nq)


def measurement_generators(c: DopedCircuit, measurement: Optional[PauliSubgroup] = None) -> List[PauliString]:
    """Adjoint-evolved measurement generators followed by the gadget ``Z``s.

    The k-th T gate acts as ``CNOT(q -> n+m+k)`` onto a fresh gadget qubit.
    """
    nq = c.n_qubits
    t = c.t
    N = nq + t
    meas = measurement if measurement is not None else computational_measurement(nq)
    if meas.n != nq or not (meas.signed and meas.is_maximal()):
        raise AnalysisError("physical measurement must be a maximal signed group on n+m qubits")
    gens = [embed(g, N, range(nq)) for g in meas.generators]
    gens += [PauliString.single(N, q, "Z") for q in range(nq, N)]
    return Tableau(gens).apply(c.gates, adjoint=True, gadget_base=nq, n_t=t).paulis()


def analyze_doped(c: DopedCircuit, measurement: Optional[PauliSubgroup] = None,
                  ancilla: Optional[AncillaSpec] = None, oracle: bool = False,
                  dense_cap: int = 14) -> EffectivePovmReport:
    """s_mu of a Clifford+T circuit with a stabilizer ancilla and measurement."""
    n, m, t = c.n_data, c.n_ancilla, c.t
    anc = ancilla if ancilla is not None else AncillaSpec.zeros(m)
    if anc.kind != "stabilizer":
        raise AnalysisError("analyze_doped takes a stabilizer ancilla")
    if anc.size != m:
        raise DimensionError(f"ancilla on {anc.size} qubits, circuit has m={m}")
    gens = measurement_generators(c, measurement)
    res = doped_span(gens, n, m, t, anc.group if m else None)
    rep = EffectivePovmReport(n, m, t, res.s_mu, res.p, res.s_mu == 4 ** n, anc.describe(),
                              _directions_text(n, res.directions), method="gadget_engine")
    rep.free_generators = res.free_generators
    rep.bounds = bounds_table(n, t)
    rep.extra["evolved_generators"] = [format_pauli(g) for g in gens]
    rep.extra["frozen_data_trivial"] = res.frozen_data_trivial
    if res.zero_probability:
        rep.warnings.append("gadget post-selection has zero probability for every outcome")
    if t <= n and res.s_mu > bound_t_le_n(n, t):
        rep.warnings.append("s_mu exceeds the t <= n rank bound")
    if not rep.k_is_integral:
        if res.frozen_data_trivial:
            rep.warnings.append("s_mu is not a multiple of 2^(n-p)")
        else:
            rep.extra["multiples_rule"] = "not applicable: a pinned gadget syndrome acts on the data"
    if oracle:
        dense_crosscheck_circuit(rep, c, measurement, anc, dense_cap)
    return rep


def clifford_measurement_group(c: DopedCircuit, measurement: Optional[PauliSubgroup] = None) -> PauliSubgroup:
    """``U^dag S_meas U`` for a T-free circuit."""
    if c.t:
        raise AnalysisError("circuit contains T gates")
    gens = measurement_generators(c, measurement)
    return canonicalize(gens, signed=True, n=c.n_qubits)


def analyze_circuit(c: DopedCircuit, measurement: Optional[PauliSubgroup] = None,
                    ancilla: Optional[AncillaSpec] = None, oracle: bool = False,
                    dense_cap: int = 14) -> EffectivePovmReport:
    """Dispatch on the ancilla kind.

    ``|T>^k`` ancillas are rewritten as T gates acting on ``|+>`` ancillas,
    stabilizer ancillas use the gadget engine, and other kinds need a
    T-free circuit and go through the double-coset path.
    """
    m = c.n_ancilla
    anc = ancilla if ancilla is not None else AncillaSpec.zeros(m)
    if anc.size != m:
        raise DimensionError(f"ancilla on {anc.size} qubits, circuit has m={m}")
    if anc.kind == "magic_T_power":
        n = c.n_data
        pre = []
        for q in range(n, n + m):
            pre += [Gate("H", (q,)), Gate("T", (q,))]
        return analyze_doped(DopedCircuit(n, m, tuple(pre) + c.gates), measurement,
                             AncillaSpec.zeros(m), oracle, dense_cap)
    if anc.kind == "stabilizer":
        return analyze_doped(c, measurement, anc, oracle, dense_cap)
    s = clifford_measurement_group(c, measurement)
    rep = span_dimension(s, c.n_data, anc)
    if oracle:
        dense_crosscheck_group(rep, s, anc, dense_cap)
    return rep


# ---------------------------------------------------------------------------
# dense cross-checks


def _ancilla_vector(anc: AncillaSpec, seed: int = 12345) -> np.ndarray:
    from . import dense

    if anc.kind == "stabilizer":
        return dense.stabilizer_state(anc.group) if anc.size else np.ones(1, dtype=complex)
    if anc.kind == "magic_T_power":
        return dense.t_state(anc.size)
    if anc.kind == "dense":
        return anc.vector
    return dense.haar_state(anc.size, np.random.default_rng(seed))


def dense_crosscheck_group(rep: EffectivePovmReport, s: PauliSubgroup, anc: AncillaSpec,
                           cap: int = 14) -> EffectivePovmReport:
    from . import dense

    dense.check_cap(s.n, cap)
    signed = s if s.signed else canonicalize(s.generators, signed=True, n=s.n)
    c = DopedCircuit(rep.n, s.n - rep.n, ())
    ops = dense.effective_povm(c, _ancilla_vector(anc), signed, cap=cap)
    rep.oracle_rank = dense.span_rank(ops)
    rep.oracle_checked = rep.oracle_rank == rep.s_mu
    if not rep.oracle_checked:
        rep.warnings.append(f"dense oracle rank {rep.oracle_rank} differs from s_mu {rep.s_mu}")
    return rep


def dense_crosscheck_circuit(rep: EffectivePovmReport, c: DopedCircuit,
                             measurement: Optional[PauliSubgroup], anc: AncillaSpec,
                             cap: int = 14) -> EffectivePovmReport:
    from . import dense

    dense.check_cap(c.n_qubits, cap)
    ops = dense.effective_povm(c, _ancilla_vector(anc), measurement, cap=cap)
    rep.oracle_rank = dense.span_rank(ops)
    rep.oracle_checked = rep.oracle_rank == rep.s_mu
    if not rep.oracle_checked:
        rep.warnings.append(f"dense oracle rank {rep.oracle_rank} differs from s_mu {rep.s_mu}")
    return rep


# ---------------------------------------------------------------------------
# fixed-syndrome projection of the ancilla register


@dataclass(frozen=True)
class FixedSyndromeGroup:
    """Measurement on data + gadget qubits after projecting the ancillas.

    ``group`` is the projected measurement group, ``fixed`` the signed
    subgroup whose values are pinned, ``free_generators`` the number of
    generators still carrying outcome information.
    """

    group: PauliSubgroup
    fixed: PauliSubgroup
    free_generators: int
    killed: PauliSubgroup


def project_ancilla(s: PauliSubgroup, fixed: Sequence[PauliString], zpsi: PauliSubgroup,
                    n: int, m: int) -> FixedSyndromeGroup:
    """Project the ancilla register ``[n, n+m)`` of ``s`` onto the stabilizer
    state of ``zpsi``.

    Only elements commuting with the embedded ancilla stabilizer survive;
    each pinned element keeps its ``+1`` value times the ancilla sign of
    its ancilla factor.
    """
    N = s.n
    if not (zpsi.signed and zpsi.is_maximal() and zpsi.n == m):
        raise AnalysisError("ancilla group must be a maximal signed group on m qubits")
    if not 0 <= n and n + m <= N:
        raise DimensionError("split does not fit the group")
    anc = list(range(n, n + m))
    keep = list(range(n)) + list(range(n + m, N))
    zp = canonicalize([embed(g, N, anc) for g in zpsi.generators], signed=True, n=N) if m \
        else PauliSubgroup(N, (), True, True, ())
    for f in fixed:
        if not s.contains(f):
            raise AnalysisError(f"pinned string {format_pauli(f)} is not in the group")
    sc = centralizer_within(s, zp) if m else s
    killed = intersect(s, zp) if m else PauliSubgroup(N, (), s.signed, True, ())
    proj = project(sc, keep)
    if fixed:
        fgroup = canonicalize(fixed, signed=True, n=N)
        fc = centralizer_within(fgroup, zp) if m else fgroup
        pinned = []
        for f in fc.generators:
            a = restrict(f.projective(), anc)
            sign = f.sign * (zpsi.member_sign(a.lift()) if m else 1)
            d = restrict(f.projective(), keep).lift()
            if d.is_identity():
                continue
            pinned.append(d if sign > 0 else -d)
        fix = canonicalize(pinned, signed=True, n=len(keep)) if pinned \
            else PauliSubgroup(len(keep), (), True, True, ())
    else:
        fix = PauliSubgroup(len(keep), (), True, True, ())
    return FixedSyndromeGroup(proj, fix, proj.dim - fix.dim, killed)


# ---------------------------------------------------------------------------
# IC condition on the gadget register


def ic_condition_check(s_t: PauliSubgroup, pi_t_s: PauliSubgroup) -> bool:
    """True iff every coset of ``pi_t_s / s_t`` has a Z-free member."""
    if s_t.n != pi_t_s.n:
        raise DimensionError("groups on different registers")
    if not all(pi_t_s.contains(h) for h in s_t.generators):
        raise AnalysisError("first group must be a subgroup of the second")
    t = s_t.n
    hx, hz, _ = s_t.projective().element_arrays()
    reps = gf2.complement(list(s_t.vectors), list(pi_t_s.vectors))
    mask = (1 << t) - 1
    for i in range(1 << len(reps)):
        v = 0
        for k, r in enumerate(reps):
            if (i >> k) & 1:
                v ^= r
        x = hx ^ np.uint64(v & mask)
        z = hz ^ np.uint64(v >> t)
        if not np.any((z & ~x) == 0):
            return False
    return True


def ic_condition_for(h: PauliSubgroup) -> bool:
    """IC test for a maximally entangled group whose gadget-local part is ``h``."""
    return ic_condition_check(h, centralizer(h))


def complete_maximal(h: PauliSubgroup, n: int) -> PauliSubgroup:
    """A maximal group on ``n + t`` qubits, maximally entangled across ``n | t``,
    whose gadget-local subgroup is ``h`` (which must have dimension ``t - n``)."""
    if h.dim != h.n - n:
        raise AnalysisError("local subgroup must have dimension t - n")
    return attach_data(h, n)


def symplectic_pairs(h: PauliSubgroup) -> List[Tuple[ProjectivePauli, ProjectivePauli]]:
    """Anticommuting pairs spanning ``C(h) / h``, mutually commuting across pairs."""
    t = h.n
    c = centralizer(h)
    quot = []
    basis, piv = gf2.rref(h.vectors)
    for v in c.vectors:
        r = gf2.reduce(v, basis, piv)
        if r:
            gf2._insert(r, basis, piv)
            quot.append(ProjectivePauli(t, v & ((1 << t) - 1), v >> t))
    pairs = []
    while quot:
        u = quot.pop(0)
        j = next(i for i, w in enumerate(quot) if symplectic(u, w))
        w = quot.pop(j)
        new = []
        for r in quot:
            if symplectic(r, w):
                r = r * u
            if symplectic(r, u):
                r = r * w
            new.append(r)
        quot = new
        pairs.append((u, w))
    return pairs


def attach_data(h: PauliSubgroup, n: int) -> PauliSubgroup:
    """Maximal group on ``n + k`` qubits whose local part on the last ``k``
    qubits is ``h``.

    The ``p = (k - dim h) / 2`` symplectic pairs of ``C(h)/h`` are joined to
    ``X_i, Z_i`` on data qubits ``0..p-1``; the other data qubits get ``Z``.
    """
    k = h.n
    pairs = symplectic_pairs(h)
    if len(pairs) > n:
        raise AnalysisError(f"{len(pairs)} entangled pairs do not fit on {n} data qubits")
    N = n + k
    gens = [embed(g, N, range(n, N)) for g in h.generators]
    for i, (u, w) in enumerate(pairs):
        gens.append(_join(PauliString.single(n, i, "X"), u))
        gens.append(_join(PauliString.single(n, i, "Z"), w))
    for i in range(len(pairs), n):
        gens.append(PauliString.single(N, i, "Z"))
    return canonicalize(gens, signed=False, n=N)


def _join(a: PauliString, b: ProjectivePauli) -> PauliString:
    return ProjectivePauli(a.n + b.n, a.x | (b.x << a.n), a.z | (b.z << a.n)).lift()
