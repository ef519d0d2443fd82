"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line with its numbers.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are printed even
without ``-s``.
"""
import random
import time

import pytest

from netdiag.diagonal import check_diagonal_laws, reindex
from netdiag.directed import check_laws
from netdiag.instances import law_instances, standard_chains
from netdiag.oracle import mutated_join, run_oracle
from netdiag.report import to_json
from netdiag.scenarios import run_scenario

SAMPLES = 10_000

DEMOS = {
    "product-compactness": {"coords": 4, "m_max": 10, "samples": 1000},
    "metric-compactness": {},
    "alaoglu": {},
    "un-closedness": {"dim": 3, "ops": 6, "eps": 1e-3, "lattice_pairs": 10_000},
    "counterexample-remark": {},
}


@pytest.fixture
def announce(capsys):
    def say(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    return say


@pytest.fixture(scope="module")
def demo_runs():
    """First run of every demo with seed 0, with its wall time; reused by several criteria."""
    runs = {}
    for name, kw in DEMOS.items():
        t = time.perf_counter()
        rep = run_scenario(name, seed=0, **kw)
        runs[name] = (rep, time.perf_counter() - t)
    return runs


def test_criterion_1_directed_set_laws(announce):
    instances = law_instances()
    t = time.perf_counter()
    bad = {}
    for name, D in instances.items():
        rep = check_laws(D, SAMPLES)
        if not rep.passed:
            bad[name] = {law: r.violations for law, r in rep.results.items() if r.violations}
    elapsed = time.perf_counter() - t
    ok = not bad and elapsed < 5.0
    announce(1, ok, f"{len(instances)} instances x {SAMPLES} samples, violations={bad or 0}, "
                    f"{elapsed:.2f}s (limit 5s)")
    assert not bad
    assert elapsed < 5.0


def test_criterion_2_diagonal_laws(announce):
    chains = standard_chains()
    assert len(chains) >= 5
    t = time.perf_counter()
    bad = {}
    for name, chain in chains.items():
        for law, r in check_diagonal_laws(chain, SAMPLES).items():
            assert r.checked >= SAMPLES, (name, law)
            if r.violations:
                bad[name, law] = r.violations
    elapsed = time.perf_counter() - t
    ok = not bad and elapsed < 30.0
    announce(2, ok, f"chains={sorted(chains)}, violations={bad or 0}, {elapsed:.2f}s (limit 30s)")
    assert not bad
    assert elapsed < 30.0


def test_criterion_3_oracle(announce):
    t = time.perf_counter()
    clean = run_oracle(3, 2)
    mutated = run_oracle(3, 2, join=mutated_join, stop_after=1)
    elapsed = time.perf_counter() - t
    caught = mutated.checks["dominance"].violations + mutated.checks["membership"].violations
    ok = clean.passed and clean.violations == 0 and caught >= 1 and elapsed < 60.0
    announce(3, ok, f"{clean.chains} chains, violations={clean.violations}, mutated join caught with "
                    f"{caught} violation(s), {elapsed:.2f}s (limit 60s)")
    assert clean.passed and clean.violations == 0
    assert caught >= 1
    assert elapsed < 60.0


def _random_family(rng):
    params = [(rng.randint(0, 3), rng.randint(1, 6)) for _ in range(200)]

    def family(k):
        r, q = params[k - 1]
        return lambda m: m + r + m // q
    return family, params


def test_criterion_4_sequence_reindex(announce):
    rng = random.Random(0)
    failures = []
    for inst in range(20):
        family, params = _random_family(rng)
        for k in range(0, 11):
            prev = None
            for n in range(k + 1, 201):
                v = reindex(family, n, n, k)
                if prev is not None and not v > prev:
                    failures.append((inst, k, n))
                    break
                prev = v
    ok = not failures
    announce(4, ok, f"20 families, k <= 10, n <= 200, non-increasing cases={failures or 0}")
    assert not failures


def test_criterion_5_product(demo_runs, announce):
    rep, elapsed = demo_runs["product-compactness"]
    worst = max(lv["max_residual"] for lv in rep.levels)
    ok = rep.verdict == "pass" and len(rep.levels) == 4 and worst <= 1e-2 and elapsed < 10.0
    announce(5, ok, f"verdict={rep.verdict}, coordinates={len(rep.levels)}, max residual={worst:.3g} "
                    f"over 1000 tail samples, {elapsed:.2f}s (limit 10s)")
    assert rep.verdict == "pass" and len(rep.levels) == 4
    assert worst <= 1e-2
    assert elapsed < 10.0


def test_criterion_6_alaoglu(demo_runs, announce):
    rep, _ = demo_runs["alaoglu"]
    rows = rep.check("limit in the unit ball").detail["dense_points"]
    excess = max(abs(r["limit_value"]) - r["norm"] for r in rows)
    worst = max(lv["max_residual"] for lv in rep.levels)
    ok = rep.verdict == "pass" and excess <= 1e-9 and worst <= 1e-2
    announce(6, ok, f"verdict={rep.verdict}, {len(rows)} dense points, max(|y*(x)| - |x|)={excess:.3g}, "
                    f"max residual={worst:.3g}")
    assert excess <= 1e-9
    assert worst <= 1e-2
    assert rep.verdict == "pass"


def test_criterion_7_un_closedness(demo_runs, announce):
    rep, _ = demo_runs["un-closedness"]
    cauchy = rep.check("cauchy estimate").detail
    last = rep.levels[-1]
    lattice = rep.check("truncation identity (exact)").detail
    ok = (cauchy["max_excess"] <= 1e-9 and last["max_residual"] <= 1e-3
          and lattice["pairs"] >= 10_000 and lattice["mismatches"] == 0 and rep.verdict == "pass")
    announce(7, ok, f"verdict={rep.verdict}, cauchy excess={cauchy['max_excess']:.3g}, "
                    f"T y residual={last['max_residual']:.3g} (eps 1e-3), lattice mismatches="
                    f"{lattice['mismatches']}/{lattice['pairs']}")
    assert cauchy["max_excess"] <= 1e-9
    assert last["property"] == "T y un-converges" and last["max_residual"] <= 1e-3
    assert lattice["pairs"] >= 10_000 and lattice["mismatches"] == 0
    assert rep.verdict == "pass"


def test_criterion_8_remark(demo_runs, announce):
    rep, _ = demo_runs["counterexample-remark"]
    rows = rep.check("every tested subsequence violates some P_k").detail["subsequences"]
    missing = [r["subsequence"] for r in rows
               if not r.get("violation") or not {"k", "n"} <= set(r["violation"])]
    ok = rep.verdict == "expected-failure" and rows and not missing
    announce(8, ok, f"verdict={rep.verdict}, {len(rows)} subsequences tested, without witness={missing or 0}")
    assert rep.verdict == "expected-failure" and rep.exit_code == 0
    assert rows and not missing


def test_criterion_9_determinism(demo_runs, announce):
    differing = []
    for name, kw in DEMOS.items():
        first = to_json(demo_runs[name][0].to_dict())
        again = to_json(run_scenario(name, seed=0, **kw).to_dict())
        if first != again:
            differing.append(name)
    ok = not differing
    announce(9, ok, f"{len(DEMOS)} demos rerun with seed 0, differing reports={differing or 0}")
    assert not differing
