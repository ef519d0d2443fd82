import itertools

import pytest

from netdiag.diagonal import ExtractionChain, diag_join
from netdiag.directed import chain_order, check_laws
from netdiag.nets import ContractError, Net
from netdiag.oracle import (BudgetError, FiniteChain, OracleConfig, TableMap, brute_check_diagonal,
                            compose_tables, enum_cofinal_maps, enum_directed_preorders, is_cofinal_table,
                            iter_finite_chains, materialize, mutated_join, run_oracle, sampled_verdict)


def brute_directed_preorders(n):
    """Count reflexive, transitive, upward-directed relations on ``range(n)`` from raw bit masks."""
    cells = [(i, j) for i in range(n) for j in range(n) if i != j]
    count = 0
    for bits in itertools.product((False, True), repeat=len(cells)):
        R = [[i == j for j in range(n)] for i in range(n)]
        for (i, j), b in zip(cells, bits):
            R[i][j] = b
        if not all(R[i][k] for i in range(n) for j in range(n) for k in range(n) if R[i][j] and R[j][k]):
            continue
        if all(any(R[i][k] and R[j][k] for k in range(n)) for i in range(n) for j in range(n)):
            count += 1
    return count


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_preorder_counts_match_brute_force(n):
    assert len(enum_directed_preorders(n)) == brute_directed_preorders(n)


def test_preorder_counts():
    assert [len(enum_directed_preorders(n)) for n in range(1, 5)] == [1, 3, 16, 145]
    assert [len(enum_directed_preorders(n, representatives=True)) for n in range(1, 5)] == [1, 2, 5, 14]


def test_two_point_preorders():
    rels = {D.relation for D in enum_directed_preorders(2)}
    assert rels == {((True, True), (False, True)), ((True, False), (True, True)),
                    ((True, True), (True, True))}


def test_enumerated_preorders_pass_the_law_suite():
    for n in range(1, 4):
        for D in enum_directed_preorders(n):
            assert check_laws(D, 100).passed


def test_size_cap():
    with pytest.raises(BudgetError):
        enum_directed_preorders(5)
    with pytest.raises(BudgetError):
        list(iter_finite_chains(2, 4))
    assert len(enum_directed_preorders(2, config=OracleConfig(max_stage_size=2))) == 3


def test_one_point_maps():
    P = chain_order(1)
    maps = enum_cofinal_maps(P, P)
    assert len(maps) == 1 and maps[0].table == (0,)


def test_two_chain_maps():
    C = chain_order(2)
    assert is_cofinal_table(C, C, (0, 1))
    assert not is_cofinal_table(C, C, (0, 0))
    tables = {m.table for m in enum_cofinal_maps(C, C)}
    assert tables == {(0, 1), (1, 1)}


def _small_sets():
    return [D for n in (1, 2) for D in enum_directed_preorders(n)] + enum_directed_preorders(3, True)


def test_composition_of_cofinal_maps_is_enumerated():
    sets = _small_sets()
    tables = {}
    for B, A in itertools.product(sets, repeat=2):
        tables[id(B), id(A)] = {m.table for m in enum_cofinal_maps(B, A)}
    for C, B, A in itertools.product(sets, repeat=3):
        for m2 in enum_cofinal_maps(C, B):
            for m1 in enum_cofinal_maps(B, A):
                assert compose_tables(m1, m2) in tables[id(C), id(A)]


def test_finite_chain_rejects_bad_witness():
    C = chain_order(2)
    bad = TableMap(C, C, (0, 1), (0, 0))  # nothing at or above 0 maps only above 1
    with pytest.raises(ContractError):
        FiniteChain([C, C], [bad])
    with pytest.raises(ContractError):
        FiniteChain([C, C], [])


def test_depth_zero_chain_passes_trivially():
    for D in enum_directed_preorders(3):
        rep = brute_check_diagonal(FiniteChain([D]))
        assert rep.passed and rep.size_of_B == len(D)


def test_materialise_gives_one_tuple_per_top():
    C = chain_order(3)
    m = enum_cofinal_maps(C, C)[0]
    fc = FiniteChain([C, C], [m])
    B = materialize(fc.extraction_chain())
    assert len(B) == 6 and all(len(b) in (1, 2) for b in B)


def test_oracle_small_bounds_is_clean():
    rep = run_oracle(2, 2)
    assert rep.passed and rep.chains == 120
    assert all(t.checked > 0 for t in rep.checks.values())


def test_oracle_labelled_mode_is_clean():
    rep = run_oracle(2, 2, labelled=True)
    assert rep.passed and rep.chains > 120


def test_mutated_join_is_caught():
    rep = run_oracle(2, 2, join=mutated_join)
    assert not rep.passed
    assert rep.checks["dominance"].violations > 0
    assert rep.first_failing_chain is not None
    assert rep.to_dict()["checks"]["dominance"]["counterexample"]


def test_stop_after_ends_early():
    rep = run_oracle(2, 2, join=mutated_join, stop_after=1)
    assert not rep.passed and rep.chains < 120


def test_sampled_harness_agrees_with_the_oracle():
    for join in (diag_join, mutated_join):
        for fc in iter_finite_chains(2, 2):
            assert sampled_verdict(fc, join, 300) == brute_check_diagonal(fc, join).passed, fc.describe()


def test_brute_check_accepts_extraction_chains():
    C = chain_order(2)
    m = enum_cofinal_maps(C, C)[-1].cofinal_map()
    ch = ExtractionChain.from_stages(Net(C, lambda a: a), [(C, m)])
    assert brute_check_diagonal(ch).passed


def test_report_serialises():
    d = run_oracle(1, 1).to_dict()
    assert d["passed"] and d["violations"] == 0 and d["chains"] == 2
