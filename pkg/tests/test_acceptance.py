"""Acceptance criteria 1-9. Each test records one pass/fail line, printed at
the end of the run by the terminal-summary hook in conftest.py."""

import numpy as np
import pytest

from stabpovm.analysis import (AncillaSpec, analyze_circuit, analyze_doped, dense_crosscheck_group,
                               group_fourier, span_dimension)
from stabpovm.circuits import DopedCircuit, random_clifford, random_doped_circuit, universal_2n_circuit
from stabpovm.dense import effective_povm, frame_operator, haar_state, povm_checks, span_rank, \
    stabilizer_state, t_state
from stabpovm.golden import FIXTURES, run_fixtures
from stabpovm.groups import (align_generators, entanglement_decomposition, group, zfree_centralizer_count,
                             zfree_centralizer_count_bruteforce)
from stabpovm.search import (SearchTask, conjecture_2n_scan, mixed_ancilla_control, run_task,
                             verify_ic_witness)

from conftest import random_abelian, random_stabilizer, record

C1_FIXTURES = ["normal_form_3q", "normal_form_3q_variant", "normal_form_5q", "ent1", "ent2", "ent3", "ent4", "ent5",
               "tdoped_1", "tdoped_2", "tdoped_3"]


def test_c1_worked_examples():
    rows = [r for fx in FIXTURES if fx.name in C1_FIXTURES for r in fx.run()]
    bad = [f"{r.fixture}: {r.label}" for r in rows if not r.ok]
    record(1, not bad and len({r.fixture for r in rows}) == len(C1_FIXTURES),
           f"{len(rows) - len(bad)}/{len(rows)} exact checks over {len(C1_FIXTURES)} worked examples")
    assert not bad, bad


def test_c2_zfree_counts():
    counts = {"IIZX": zfree_centralizer_count(group("IIZX")),
              "IZZX": zfree_centralizer_count(group("IZZX")),
              "trivial": zfree_centralizer_count(group("IIII", n=4)),
              "IIXZ,XZII": zfree_centralizer_count(group("IIXZ", "XZII"))}
    agree = 0
    for i in range(200):
        h = random_abelian(1 + i % 5, 1000 + i)
        agree += zfree_centralizer_count(h) == zfree_centralizer_count_bruteforce(h)
    corrected = [counts["IIZX"], counts["IZZX"], counts["trivial"], counts["IIXZ,XZII"]] == [36, 42, 81, 16]
    literal = [counts["IIZX"], counts["IZZX"], counts["trivial"], counts["IIXZ,XZII"]] == [36, 45, 81, 16]
    brute_45 = zfree_centralizer_count_bruteforce(group("IZZX"))
    record(2, literal and agree == 200,
           f"counts {counts['IIZX']}, {counts['IZZX']}, {counts['trivial']}, {counts['IIXZ,XZII']} "
           f"(stated 36, 45, 81, 16; <IZZX> is {brute_45} by brute force, <IIZZ> gives "
           f"{zfree_centralizer_count(group('IIZZ'))}); brute-force agreement {agree}/200")
    assert corrected and brute_45 == 42 and agree == 200


@pytest.mark.xfail(strict=True, reason="the stated 45 for <IZZX> is a misprint; the count is 42")
def test_c2_literal_izzx_value():
    assert zfree_centralizer_count(group("IZZX")) == 45


def test_c3_frame_and_universal_circuit():
    frame_ok = all(r.ok for r in run_fixtures("frame"))
    ops = effective_povm(universal_2n_circuit(1), np.array([1, 0], dtype=complex))
    f = frame_operator(ops)
    err = float(np.max(np.abs(f - np.diag([0.5, 0.125, 0.125, 0.25]))))
    ic = {}
    for n in (1, 2, 3):
        r = analyze_doped(universal_2n_circuit(n), oracle=n <= 2)
        ic[n] = r.ic and (r.oracle_checked if n <= 2 else True)
    ok = frame_ok and err <= 1e-10 and all(ic.values())
    record(3, ok, f"frame error {err:.1e}; universal circuit IC for n=1,2 (dense) and n=3 (group): "
                  f"{[ic[n] for n in (1, 2, 3)]}")
    assert ok


def test_c4_stabilizer_ancilla_gives_2_to_n():
    rng = np.random.default_rng(4)
    wrong = dense_checked = dense_bad = 0
    for i in range(1000):
        n, m = int(rng.integers(1, 5)), int(rng.integers(0, 5))
        c = DopedCircuit(n, m, tuple(random_clifford(n + m, rng)))
        meas = random_stabilizer(n + m, int(rng.integers(2 ** 31)))
        anc = AncillaSpec.stabilizer(random_stabilizer(m, int(rng.integers(2 ** 31)))) if m \
            else AncillaSpec.zeros(0)
        r = analyze_circuit(c, meas, anc)
        wrong += r.s_mu != 2 ** n
        if n + m <= 8:
            psi = stabilizer_state(anc.group) if m else np.ones(1, dtype=complex)
            dense_checked += 1
            dense_bad += span_rank(effective_povm(c, psi, meas)) != r.s_mu
    ok = wrong == 0 and dense_bad == 0
    record(4, ok, f"1000 instances, {wrong} with s_mu != 2^n; dense agreement "
                  f"{dense_checked - dense_bad}/{dense_checked} (all instances fit in 8 qubits)")
    assert ok


def _mixed_instance(i, rng):
    kind = i % 4
    if kind == 0:
        n, m, t = int(rng.integers(1, 4)), int(rng.integers(0, 4)), int(rng.integers(0, 5))
        c = random_doped_circuit(n, m, t, rng, ("serial", "parallel")[i % 8 // 4], layer_length=8)
        meas = random_stabilizer(n + m, int(rng.integers(2 ** 31)))
        anc = AncillaSpec.stabilizer(random_stabilizer(m, int(rng.integers(2 ** 31)))) if m \
            else AncillaSpec.zeros(0)
        r = analyze_doped(c, meas, anc, oracle=True)
        return r.s_mu, r.oracle_rank
    n, m = int(rng.integers(1, 4)), int(rng.integers(1, 5))
    s = random_stabilizer(n + m, int(rng.integers(2 ** 31)))
    if kind == 1:
        anc = AncillaSpec.dense(haar_state(m, rng))
    elif kind == 2:
        k = int(rng.integers(1, 1 << m))
        vs = [haar_state(m, rng) for _ in range(k)]
        w = rng.dirichlet(np.ones(k))
        anc = AncillaSpec.dense(sum(wi * np.outer(v, v.conj()) for wi, v in zip(w, vs)))
    else:
        c = DopedCircuit(n, m, tuple(random_clifford(n + m, rng)))
        r = analyze_circuit(c, None, AncillaSpec.magic(m))
        return r.s_mu, span_rank(effective_povm(c, t_state(m)))
    r = span_dimension(s, n, anc)
    dense_crosscheck_group(r, s, anc, cap=10)
    return r.s_mu, r.oracle_rank


def test_c5_oracle_master_equivalence():
    rng = np.random.default_rng(5)
    mismatches = errors = 0
    for i in range(500):
        try:
            a, b = _mixed_instance(i, rng)
            mismatches += a != b
        except Exception:
            errors += 1
    dense_rows = [r for r in run_fixtures() if "dense" in r.label]
    fixture_bad = sum(not r.ok for r in dense_rows)
    ok = mismatches == 0 and errors == 0 and fixture_bad == 0
    record(5, ok, f"500 random instances: {mismatches} mismatches, {errors} exceptions; "
                  f"fixture dense checks {len(dense_rows) - fixture_bad}/{len(dense_rows)}")
    assert ok


def test_c6_saturation_and_necessity():
    maxima = {}
    ic_below = 0
    for n, t in [(1, 1), (2, 1), (2, 2)]:
        rep = run_task(SearchTask("bound_saturation", n, t=[t], max_candidates=10 ** 7))
        assert rep.complete
        maxima[(n, t)] = rep.sections[0].max_s_mu
        ic_below += rep.sections[0].ic_count
    for n, ts in [(1, [0, 1]), (2, [0, 1, 2])]:
        rep = run_task(SearchTask("conjecture_2n", n, t=ts, max_candidates=10 ** 7))
        ic_below += sum(s.ic_count for s in rep.sections)
    doped = run_task(SearchTask("random_doped_scan", 2, m=2, t=[0, 1, 2], samples=300, seed=6,
                                max_candidates=10 ** 6))
    ic_below += sum(s.ic_count for s in doped.sections)
    ok = [maxima[k] for k in [(1, 1), (2, 1), (2, 2)]] == [3, 6, 9] and ic_below == 0 \
        and not doped.falsifying
    record(6, ok, f"max s_mu {maxima[(1, 1)]}, {maxima[(2, 1)]}, {maxima[(2, 2)]} (expected 3, 6, 9); "
                  f"{ic_below} IC instances with 3^t < 4^n")
    assert ok


def test_c7_ic_needs_2n():
    ic_small = 0
    for n, ts in [(1, [0, 1]), (2, [0, 1, 2, 3]), (3, [3, 4])]:
        rep = conjecture_2n_scan(SearchTask("conjecture_2n", n, t=ts, max_candidates=10 ** 7))
        assert rep.complete
        ic_small += sum(s.ic_count for s in rep.sections)
    witnesses = {}
    for n in (1, 2):
        rep = conjecture_2n_scan(SearchTask("conjecture_2n", n, t=[2 * n], max_candidates=10 ** 7))
        witnesses[n] = bool(rep.witnesses)
    v3 = verify_ic_witness(3)
    witnesses[3] = v3["group_ic"] and v3["circuit_ic"] and v3["dense_checked"]
    # statistical: 10^5 random doped circuits at n = m = 4, t = 0..7, both layouts
    task = SearchTask("random_doped_scan", 4, m=4, t=list(range(8)), samples=6250, seed=7,
                      max_candidates=10 ** 5, dense_samples=2)
    big = run_task(task)
    ok = ic_small == 0 and all(witnesses.values()) and big.candidates == 10 ** 5 and big.complete \
        and big.statistical and not big.falsifying and big.extra["dense_mismatches"] == 0
    record(7, ok, f"exhaustive n=1 (t<=1), n=2 (t<=3), n=3 (t<=4): {ic_small} IC; t=2n witnesses "
                  f"n=1,2,3: {[witnesses[n] for n in (1, 2, 3)]}; n=4 STATISTICAL scan of "
                  f"{big.candidates} circuits: max s_mu {max(s.max_s_mu for s in big.sections)}, "
                  f"{sum(s.ic_count for s in big.sections)} IC, "
                  f"{big.extra['dense_checked']} dense checks")
    assert ok


def test_c8_maximal_entanglement_and_mixed_control():
    rep = run_task(SearchTask("conjecture_maxent", 2, m=2, mode="random", samples=500, seed=8,
                              max_candidates=10 ** 6))
    ctl = mixed_ancilla_control()
    ok = rep.complete and not rep.falsifying and rep.candidates == 500 \
        and ctl["bell_s_mu"] == ctl["bell_dense"] == 1
    record(8, ok, f"{rep.candidates} Haar samples, {len(rep.falsifying)} violations; "
                  f"maximally mixed ancilla with Bell measurement: s_mu {ctl['bell_s_mu']} "
                  f"(dense {ctl['bell_dense']})")
    assert ok


def test_c9_structural_invariants():
    rng = np.random.default_rng(9)
    fails = {"multiples": 0, "entanglement": 0, "fourier": 0, "povm": 0, "alignment": 0}
    for i in range(300):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        s = random_stabilizer(n + m, int(rng.integers(2 ** 31)))
        anc = [AncillaSpec.dense(haar_state(m, rng)), AncillaSpec.magic(m), AncillaSpec.generic(m)][i % 3]
        r = span_dimension(s, n, anc)
        if not (r.k_is_integral and (anc.kind == "generic" or 2 ** r.p <= r.k <= 4 ** r.p)):
            fails["multiples"] += 1
        cut = int(rng.integers(0, n + m + 1))
        d = entanglement_decomposition(s, cut)
        if d.S_A.dim + d.S_B.dim + 2 * d.p != n + m or cut - d.S_A.dim != d.p:
            fails["entanglement"] += 1
        z = random_stabilizer(n + m, int(rng.integers(2 ** 31)))
        al = align_generators(s, z)
        k = len(al.h_tilde_list)
        if al.anticommutation_matrix() != [[int(a == b) for b in range(k)] for a in range(k)]:
            fails["alignment"] += 1
    for i in range(100):
        x = rng.normal(size=(1 << int(rng.integers(1, 7)), 2))
        if not np.allclose(group_fourier(group_fourier(x), inverse=True), x):
            fails["fourier"] += 1
    for i in range(200):
        n, m, t = int(rng.integers(1, 3)), int(rng.integers(0, 3)), int(rng.integers(0, 4))
        c = random_doped_circuit(n, m, t, rng, "serial", layer_length=6)
        comp, lam = povm_checks(effective_povm(c, haar_state(m, rng)))
        if comp > 1e-10 or lam < -1e-10:
            fails["povm"] += 1
    ok = not any(fails.values())
    record(9, ok, "failures per family (300 multiples/entanglement/alignment, 100 Fourier, 200 POVM): "
                  + ", ".join(f"{k} {v}" for k, v in fails.items()))
    assert ok
