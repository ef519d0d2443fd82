import random

import pytest

from netdiag.convergence import check_certificate
from netdiag.directed import Naturals
from netdiag.extractors import (NoFrequentCellError, ball_tail_extractor, box_extractor,
                                coordinate_extractor, functional_extractor, operator_image_extractor,
                                operator_norm)
from netdiag.instances import N2, oscillating_net
from netdiag.nets import Net, check_cofinal, subnet

N = Naturals()


def build(ex, x, seed=0):
    res = ex.build(x, seed)
    return res, subnet(x, res.map)


def test_ball_extractor_on_constant_net():
    x = Net(N, lambda n: (0.4, 0.4))
    centers = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]
    res, y = build(ball_tail_extractor(centers, 0.25), x)
    assert res.info["center"] == (0.5, 0.5)
    rng = random.Random(0)
    assert all(y(res.index.sample(rng)) == (0.4, 0.4) for _ in range(50))


def test_ball_extractor_tie_break_is_the_lowest_cell():
    x = Net(N, lambda n: float(n % 2))
    centers = [j / 3 for j in range(4)]
    for seed in range(5):
        res, y = build(ball_tail_extractor(centers, 1 / 3), x, seed)
        assert res.info["cell"] == 0
        rng = random.Random(seed)
        assert all(y(res.index.sample(rng)) == 0.0 for _ in range(50))


def test_ball_extractor_subsequence_mode():
    x = Net(N, lambda n: float(n % 3 == 0))
    res, y = build(ball_tail_extractor([1.0, 0.0], 0.1, subsequence=True), x)
    assert res.index is N
    assert [res.map(n) for n in range(1, 6)] == [3, 6, 9, 12, 15]
    assert all(y(n) == 1.0 for n in range(1, 40))


def test_ball_extractor_without_frequent_cell():
    x = Net(N, lambda n: 5.0)
    with pytest.raises(NoFrequentCellError):
        ball_tail_extractor([0.0, 1.0], 0.5, budget=200).build(x, 0)


def test_coordinate_extractor_on_alternating_signs_takes_the_lower_side():
    x = Net(N, lambda n: {1: float((-1) ** n)})
    res, y = build(coordinate_extractor(1, -1.0, 1.0, 8), x)
    assert res.certificate.limit == pytest.approx(-1.0 + 1.0 / 256)
    rng = random.Random(0)
    assert all(y(res.index.sample(rng))[1] == -1.0 for _ in range(100))


def test_coordinate_extractor_prefers_the_denser_half():
    # both halves are visited infinitely often, the lower one only every 50th step
    x = Net(N, lambda n: {1: 0.25 if n % 50 == 0 else 0.75})
    res, y = build(coordinate_extractor(1, 0.0, 1.0, 4), x)
    assert res.info["nests"][0][1] == (0.5, 1.0)
    assert abs(res.certificate.limit - 0.75) <= 1.0 / 2 ** 4


def test_coordinate_extractor_on_convergent_coordinate():
    x = Net(N, lambda n: {1: 0.3 + 1.0 / n})
    res, _ = build(coordinate_extractor(1, 0.0, 1.0, 10), x)
    assert abs(res.certificate.limit - 0.3) <= 1.0 / 2 ** 10


@pytest.mark.parametrize("c", [0.0, 0.123, 0.5, 0.77, 1.0])
def test_coordinate_extractor_on_constant_coordinate(c):
    x = Net(N, lambda n: {1: c})
    res, y = build(coordinate_extractor(1, 0.0, 1.0, 9), x)
    assert abs(res.certificate.limit - c) <= 1.0 / 2 ** 9
    assert res.info["nested"]


def test_coordinate_certificate_holds_on_its_stage():
    x = oscillating_net()
    res, y = build(coordinate_extractor(3, 0.0, 1.0, 10), x)
    rep = check_certificate(y, res.certificate, [1e-2], 300)
    assert rep.passed
    assert check_cofinal(res.map, 300).passed


def test_box_extractor_cells_are_nested():
    x = oscillating_net()
    ex = box_extractor([lambda v: v[1], lambda v: v[2]], [(0.0, 1.0), (0.0, 1.0)], 6)
    res, y = build(ex, x)
    nests = res.info["nests"]
    assert len(nests) == 2 and all(len(n) == 7 for n in nests)
    assert res.info["nested"]
    rng = random.Random(1)
    for _ in range(100):
        v = y(res.index.sample(rng))
        assert all(a <= t <= b for t, (a, b) in zip((v[1], v[2]), res.info["cells"]))


def test_functional_extractor_on_constant_functional():
    pts = [(1.0, 0.0), (0.0, 1.0)]
    x = Net(N, lambda m: (0.6, -0.8))
    for j, want in enumerate((0.6, -0.8)):
        res, y = build(functional_extractor(pts, j, 8), x)
        assert abs(res.certificate.limit - want) <= 2.0 / 2 ** 8
        assert check_certificate(y, res.certificate, [1e-2], 50).passed


def test_functional_extractor_on_rotating_functionals():
    import math
    pts = [(1.0, 0.0), (0.0, 1.0)]
    x = Net(N, lambda m: (math.cos(m), math.sin(m)))
    res, y = build(functional_extractor(pts, 0, 8), x)
    assert abs(res.certificate.limit) <= 1.0
    assert check_certificate(y, res.certificate, [1e-2], 100).passed


def test_operator_image_extractor_with_zero_operator():
    x = Net(N2, lambda a: (0.3, -0.2))
    res, y = build(operator_image_extractor([[0.0, 0.0], [0.0, 0.0]], (1.0, 1.0), 10), x)
    assert res.certificate.limit == (0.0, 0.0)
    assert res.certificate.mode == "un"


def test_operator_image_extractor_with_identity():
    x = Net(N, lambda n: (0.5 + 0.5 / n, -0.25))
    # frequency is judged within the search budget, so the depth is kept to what a 1/n
    # tail can reach inside it
    res, y = build(operator_image_extractor([[1.0, 0.0], [0.0, 1.0]], (1.0, 1.0), 10), x)
    lim = res.certificate.limit
    assert abs(lim[0] - 0.5) <= 2.0 / 2 ** 10 and abs(lim[1] + 0.25) <= 2.0 / 2 ** 10
    assert check_certificate(y, res.certificate, [1e-2], 100).passed


def test_operator_norm_is_max_row_sum():
    assert operator_norm([[1.0, -2.0], [0.5, 0.5]]) == 3.0
