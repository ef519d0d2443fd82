import random
from fractions import Fraction

import pytest

from netdiag.directed import Naturals
from netdiag.instances import N2
from netdiag.nets import (BrokenWitnessError, CofinalMap, ContractError, Net, SubsequenceSelector,
                          WitnessSearchError, check_cofinal, compose_cofinal, frequent_subnet,
                          frequent_subsequence, frequent_witness, identity_map, nat_witness,
                          search_frequent, subnet, tail_restrict)

N = Naturals()
harmonic = Net(N, lambda n: Fraction(1, n))


def doubling():
    return CofinalMap(N, N, lambda n: 2 * n, lambda a: max(1, -(-a // 2)), "double")


def successor():
    return CofinalMap(N, N, lambda n: n + 1, lambda a: max(1, a - 1), "succ")


def test_identity_subnet_is_the_same_net():
    y = subnet(harmonic, identity_map(N))
    assert all(y(n) == harmonic(n) for n in range(1, 50))


def test_subnet_by_doubling():
    y = subnet(harmonic, doubling())
    assert [y(n) for n in (1, 2, 5)] == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)]


def test_subnet_of_subnet_equals_subnet_of_composite():
    m1, m2 = doubling(), successor()
    two_steps = subnet(subnet(harmonic, m1), m2)
    at_once = subnet(harmonic, compose_cofinal(m1, m2))
    rng = random.Random(0)
    for _ in range(100):
        n = N.sample(rng)
        assert two_steps(n) == at_once(n)


def test_compose_examples():
    c = compose_cofinal(doubling(), successor())
    assert [c(n) for n in range(1, 6)] == [2 * n + 2 for n in range(1, 6)]
    m = doubling()
    ic = compose_cofinal(identity_map(N), m)
    assert all(ic(n) == m(n) and ic.witness(n) == m.witness(n) for n in range(1, 40))


def test_composite_witness_law():
    c = compose_cofinal(doubling(), successor())
    assert check_cofinal(c, 1000).passed


def test_compose_rejects_mismatched_maps():
    other = CofinalMap(N2, N2, lambda p: p, lambda a: a)
    with pytest.raises(ContractError):
        compose_cofinal(doubling(), other)


def test_subnet_rejects_foreign_map():
    with pytest.raises(ContractError):
        subnet(harmonic, CofinalMap(N2, N2, lambda p: p, lambda a: a))


def test_broken_witness_is_caught_by_the_harness():
    bad = CofinalMap(N, N, lambda n: n // 2 + 1, lambda a: a)
    res = check_cofinal(bad, 200)
    assert not res.passed and res.counterexample is not None


def test_tail_of_naturals():
    T = tail_restrict(N, 5)
    assert T.contains(5) and T.contains(9) and not T.contains(4)
    rng = random.Random(0)
    assert all(T.sample(rng) >= 5 for _ in range(100))
    with pytest.raises(Exception):
        T.decode("4")


def test_tail_of_product_is_a_quadrant():
    T = tail_restrict(N2, (2, 3))
    assert T.contains((2, 3)) and T.contains((7, 9))
    assert not T.contains((1, 9)) and not T.contains((9, 2))


def test_tail_is_directed():
    T = tail_restrict(N2, (2, 3))
    rng = random.Random(1)
    for _ in range(1000):
        a, b = T.sample(rng), T.sample(rng)
        u = T.upper_bound(a, b)
        assert T.contains(u) and T.leq(a, u) and T.leq(b, u)


def test_frequent_subnet_of_alternating_signs():
    x = Net(N, lambda n: (-1) ** n)
    fw = lambda a: a if a % 2 == 0 else a + 1
    stage, m = frequent_subnet(x, lambda v: v == 1, fw)
    y = subnet(x, m)
    for a in range(1, 51):
        p = stage.point(a)
        assert y(p) == 1
        for b in range(p[0], p[0] + 3):
            assert y(stage.point(b)) == 1
    assert check_cofinal(m, 500).passed


def test_frequent_subnet_of_constant_net():
    x = Net(N, lambda n: 3)
    stage, m = frequent_subnet(x, lambda v: v == 3, lambda a: a)
    y = subnet(x, m)
    assert all(stage.point(a) == (a, a) and y(stage.point(a)) == 3 for a in range(1, 30))


def test_frequent_subnet_map_is_cofinal():
    x = Net(N2, lambda p: (p[0] + p[1]) % 3)
    S = lambda v: v == 0
    stage, m = frequent_subnet(x, S, frequent_witness(x, S))
    assert check_cofinal(m, 1000).passed


def test_broken_frequency_witness_is_rejected():
    x = Net(N, lambda n: (-1) ** n)
    stage, _ = frequent_subnet(x, lambda v: v == 1, lambda a: a)
    with pytest.raises(BrokenWitnessError):
        stage.point(3)


def test_search_gives_up_within_budget():
    x = Net(N, lambda n: 0)
    with pytest.raises(WitnessSearchError):
        search_frequent(x, lambda v: v == 1, 1, budget=100)


def test_search_finds_first_hit_in_enumeration():
    x = Net(N, lambda n: n % 7 == 0)
    assert search_frequent(x, lambda v: v, 8) == 14


def test_search_on_frequent_stage_scans_base_indices():
    x = Net(N2, lambda p: (p[0] % 2, p[1] % 3))
    S1 = lambda v: v[0] == 0
    stage, m = frequent_subnet(x, S1, frequent_witness(x, S1))
    y = subnet(x, m)
    S2 = lambda v: v[1] == 0
    p = stage.point((1, 1))
    q = search_frequent(y, S2, p)
    assert stage.leq(p, q) and S1(x(q[1])) and S2(y(q))


def test_nat_witness():
    w = nat_witness(lambda n: 3 * n, N)
    assert [w(a) for a in (1, 3, 4, 10)] == [1, 1, 2, 4]


def test_subsequence_selector_is_strictly_increasing():
    x = Net(N, lambda n: n % 3 == 0)
    sel = SubsequenceSelector(x, lambda v: v)
    vals = [sel(n) for n in range(1, 30)]
    assert vals == [3 * n for n in range(1, 30)]
    assert sel.witness(10) == 4 and sel(4) >= 10


def test_subsequence_needs_naturals():
    with pytest.raises(ContractError):
        frequent_subsequence(Net(N2, lambda p: 0), lambda v: True)
