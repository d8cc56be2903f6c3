import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabpovm.analysis import AncillaSpec, analyze_doped, attach_data, span_dimension
from stabpovm.groups import canonicalize, centralizer
from stabpovm.search import (EXIT_CONSISTENT, EXIT_FALSIFIED, EXIT_INCOMPLETE, SearchError, SearchReport,
                             SearchTask, enumerate_abelian_subgroups, enumerate_bruteforce, fast_magic_span,
                             load_task, merge_reports, mixed_ancilla_control, regenerate_circuit, run_task,
                             ic_witness_group,
                             verify_ic_witness, zfree_coset_count)

from conftest import random_abelian, random_stabilizer

seeds = st.integers(0, 10 ** 6)


def _keys(groups):
    return sorted(tuple(g.vectors) for g in groups)


@pytest.mark.parametrize("t", [1, 2, 3])
def test_enumeration_matches_bruteforce(t):
    for ell in range(t + 1):
        got = _keys(enumerate_abelian_subgroups(t, ell))
        assert len(got) == len(set(got))
        assert got == enumerate_bruteforce(t, ell)


def test_enumeration_counts_maximal():
    # number of stabilizer groups (unsigned) on t qubits: prod_{k=1..t} (2^k + 1)
    for t, expect in [(1, 3), (2, 15), (3, 135)]:
        assert sum(1 for _ in enumerate_abelian_subgroups(t, t)) == expect


@pytest.mark.parametrize("K", [2, 3, 5])
def test_shards_partition(K):
    full = _keys(enumerate_abelian_subgroups(3, 2))
    parts = [_keys(enumerate_abelian_subgroups(3, 2, shard=(k, K))) for k in range(K)]
    assert sorted(x for p in parts for x in p) == full


def test_symmetry_reduction_is_subset():
    full = set(_keys(enumerate_abelian_subgroups(2, 1)))
    reps = _keys(enumerate_abelian_subgroups(2, 1, symmetry=True))
    assert set(reps) <= full and len(reps) < len(full)


@given(st.integers(1, 4), seeds)
def test_zfree_coset_count_matches_span(t, seed):
    h = random_abelian(t, seed)
    n = t - h.dim
    if n < 1:
        return
    s = canonicalize(attach_data(h, n).generators, signed=True, n=n + t)
    r = span_dimension(s, n, AncillaSpec.magic(t))
    assert zfree_coset_count(h) * 2 ** (n - r.p) == r.s_mu
    assert centralizer(h).dim - h.dim == 2 * r.p


@given(st.integers(1, 3), st.integers(0, 3), seeds)
def test_fast_magic_span_matches_double_cosets(n, t, seed):
    s = random_stabilizer(n + t, seed)
    assert fast_magic_span(s, n) == span_dimension(s, n, AncillaSpec.magic(t)).s_mu


@pytest.mark.parametrize("n", [1, 2])
def test_ic_witness(n):
    out = verify_ic_witness(n)
    assert out["group_ic"] and out["circuit_ic"]
    assert out["full_group_s_mu"] == out["circuit_s_mu"] == 4 ** n
    assert out["dense_checked"]


def test_ic_witness_group_shape():
    h = ic_witness_group(2)
    assert sorted(g.letters() for g in h.generators) == ["IIXZ", "XZII"]


def test_mixed_control():
    out = mixed_ancilla_control()
    assert out["bell_s_mu"] == out["bell_dense"] == 1
    assert out["computational_s_mu"] == out["computational_dense"] == 2


def test_task_validation(tmp_path):
    with pytest.raises(SearchError, match="budget"):
        SearchTask("conjecture_2n", 1)
    with pytest.raises(SearchError, match="kind"):
        SearchTask("nope", 1, max_candidates=1)
    with pytest.raises(SearchError, match="shard"):
        SearchTask("conjecture_2n", 1, shard=(2, 2), max_candidates=1)
    p = tmp_path / "task.json"
    p.write_text('{"kind": "conjecture_2n", "n": 1, "bogus": 1, "max_candidates": 5}')
    with pytest.raises(SearchError, match="unknown task fields"):
        load_task(p)
    p.write_text("{not json")
    with pytest.raises(SearchError, match="malformed"):
        load_task(p)
    task = SearchTask("bound_saturation", 2, t=[1], max_candidates=10)
    assert SearchTask.from_json(json.loads(json.dumps(task.to_json()))) == task


def test_budget_exhaustion_is_incomplete():
    rep = run_task(SearchTask("bound_saturation", 2, t=[1], max_candidates=10))
    assert rep.exit_code == EXIT_INCOMPLETE and not rep.complete


def test_falsifying_exit_code():
    rep = SearchReport(SearchTask("conjecture_2n", 1, max_candidates=1))
    assert rep.exit_code == EXIT_CONSISTENT
    rep.falsifying.append({"t": 1})
    assert rep.exit_code == EXIT_FALSIFIED


def test_shard_merge_equals_full_run():
    base = dict(kind="conjecture_2n", n=2, t=[2, 3], max_candidates=10 ** 6)
    full = run_task(SearchTask(**base)).summary()
    parts = [run_task(SearchTask(**base, shard=(k, 3))) for k in range(3)]
    merged = merge_reports(parts[::-1]).summary()
    assert merged["sections"] == full["sections"]
    assert merged["verdict"] == full["verdict"] == "consistent"


def test_runs_are_deterministic():
    task = SearchTask("random_doped_scan", 1, m=1, t=[1, 2], samples=30, seed=5, max_candidates=1000,
                      dense_samples=3)
    a, b = run_task(task).summary(), run_task(task).summary()
    assert a == b
    assert a["extra"]["dense_mismatches"] == 0


def test_maxent_random_mode():
    rep = run_task(SearchTask("conjecture_maxent", 2, m=2, mode="random", samples=20, seed=1,
                              max_candidates=1000))
    assert rep.exit_code == EXIT_CONSISTENT and rep.statistical


def test_multiples_rule_needs_free_data_outcomes():
    # pinned gadget syndromes acting on the data can give odd s_mu; dense agrees
    task = SearchTask("random_doped_scan", 4, m=4, t=[7], samples=100, seed=0, max_candidates=100)
    c = regenerate_circuit(task, 7, "parallel", 29)
    r = analyze_doped(c, oracle=True)
    assert (r.s_mu, r.p, r.oracle_rank) == (63, 3, 63)
    assert not r.extra["frozen_data_trivial"] and not r.warnings
