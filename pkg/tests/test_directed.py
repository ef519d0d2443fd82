import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from netdiag.directed import (FiniteDirectedSet, FiniteSubsets, MalformedElementError, Naturals,
                              ProductDirectedSet, chain_order, check_laws, leq, preorder_violation,
                              sample_above, upper_bound)
from netdiag.instances import N2, diamond, law_instances
from netdiag.oracle import enum_directed_preorders

N = Naturals()
FS = FiniteSubsets()


def test_leq_examples():
    assert leq(N, 3, 5)
    assert not leq(N2, (2, 7), (3, 5))
    assert leq(FS, frozenset({1}), frozenset({1, 2}))


def test_upper_bound_examples():
    assert upper_bound(N, 3, 5) == 5
    assert upper_bound(N2, (2, 7), (3, 5)) == (3, 7)
    assert upper_bound(FS, frozenset({1}), frozenset({2})) == frozenset({1, 2})


def test_sample_above_examples():
    rng = random.Random(0)
    assert all(sample_above(N, 7, rng) >= 7 for _ in range(200))
    C = chain_order(4)
    top = C.tops()[0]
    assert all(C.leq(a, top) for a in C.elements)
    for _ in range(100):
        a = N2.sample(rng)
        b = N2.sample_above(a, rng)
        assert b[0] >= a[0] and b[1] >= a[1]


def test_naturals_pass_law_suite():
    assert check_laws(N, 1000).passed


class _NeverLeq(Naturals):
    def leq(self, a, b):
        return False


def test_broken_instance_reports_reflexivity():
    rep = check_laws(_NeverLeq(), 50)
    r = rep["reflexivity"]
    assert r.violations == 50
    assert r.counterexample is not None
    assert rep.to_dict()["laws"]["reflexivity"]["counterexample"] == [str(r.counterexample[0])]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_every_small_finite_directed_set_passes(n):
    for D in enum_directed_preorders(n):
        FiniteDirectedSet(D.elements, D.relation)  # construction check
        assert check_laws(D, 200, seed=n).passed, repr(D)


@pytest.mark.parametrize("name", sorted(law_instances()))
def test_shipped_instances_pass(name):
    D = law_instances()[name]
    assert check_laws(D, 500, seed=1).passed


def test_finite_directed_set_rejects_bad_relations():
    with pytest.raises(ValueError):
        FiniteDirectedSet(range(2), [[True, False], [False, True]])  # antichain: not directed
    with pytest.raises(ValueError):
        FiniteDirectedSet(range(2), [[False, True], [False, True]])  # not reflexive


def test_preorder_violation_reports_transitivity():
    R = [[True, True, False], [False, True, True], [False, False, True]]
    assert "transitiv" in preorder_violation(R)


def test_diamond_tops_are_equivalent():
    D = diamond()
    assert set(D.tops()) == {1, 2}
    assert D.equivalent(1, 2)
    assert not D.leq(0, 3) and not D.leq(3, 0)


@pytest.mark.parametrize("bad", ["", "x", "-3", "0", "(1,2)", "1.5"])
def test_naturals_decode_rejects(bad):
    with pytest.raises(MalformedElementError):
        N.decode(bad)


@pytest.mark.parametrize("bad", ["(1)", "(1,2,3)", "(1,x)", "1,2"])
def test_product_decode_rejects(bad):
    with pytest.raises(MalformedElementError):
        N2.decode(bad)


def test_finite_subsets_encoding_is_canonical():
    assert FS.encode(frozenset({2, 1})) == "{1,2}"
    assert FS.decode("{1,2}") == frozenset({1, 2})
    assert FS.decode("{}") == frozenset()


def _brute_up_set(a, radius):
    return {p for p in itertools.product(range(1, radius + 1), repeat=len(a))
            if all(x >= y for x, y in zip(p, a))}


@pytest.mark.parametrize("a", [(1, 1), (3, 2), (2, 5, 1)])
def test_product_enumeration_reaches_every_element_above(a):
    D = ProductDirectedSet(tuple(N for _ in a))
    want = _brute_up_set(a, 8)
    seen = set()
    for b in D.enumerate_above(a):
        assert D.leq(a, b)
        seen.add(b)
        if want <= seen:
            break
    assert want <= seen


def test_mixed_product_enumeration_is_exhaustive():
    D = ProductDirectedSet((N, FS))
    a = (2, frozenset({1}))
    seen = set(itertools.islice(D.enumerate_above(a), 4000))
    for n in range(2, 5):
        for extra in ([], [2], [3], [2, 3]):
            assert (n, frozenset({1, *extra})) in seen


naturals = st.integers(min_value=1, max_value=10**6)
pairs = st.tuples(naturals, naturals)
subsets = st.frozensets(st.integers(min_value=1, max_value=30), max_size=6)


@given(pairs, pairs)
def test_product_upper_bound_is_least(a, b):
    u = N2.upper_bound(a, b)
    assert N2.leq(a, u) and N2.leq(b, u)
    assert u == (max(a[0], b[0]), max(a[1], b[1]))


@given(pairs, pairs, pairs)
def test_product_transitivity(a, b, c):
    if N2.leq(a, b) and N2.leq(b, c):
        assert N2.leq(a, c)


@given(subsets, subsets)
def test_subsets_upper_bound(a, b):
    u = FS.upper_bound(a, b)
    assert FS.leq(a, u) and FS.leq(b, u)


@given(st.one_of(pairs, subsets))
def test_encoding_round_trip(a):
    D = N2 if isinstance(a, tuple) else FS
    assert D.decode(D.encode(a)) == a


@settings(max_examples=50)
@given(st.integers(min_value=0, max_value=2**32))
def test_law_suite_is_seed_independent_on_products(seed):
    assert check_laws(ProductDirectedSet((N, FS)), 50, seed=seed).passed
