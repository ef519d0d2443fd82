"""Ready-made directed sets, chains and nets used by the law suites and the demos."""

from __future__ import annotations

from .diagonal import DiagonalDirectedSet, ExtractionChain
from .directed import (DirectedSet, FiniteDirectedSet, FiniteSubsets, Naturals, ProductDirectedSet,
                       chain_order)
from .extractors import coordinate_extractor
from .nets import CofinalMap, Net, TailRestriction, frequent_subnet, frequent_witness

N = Naturals()
N2 = ProductDirectedSet((N, N))


class OscillatingPoint:
    """The point of ``[0, 1]^N`` with ``k``-th coordinate ``((i + 2j) mod (k+1)) / k``.

    As ``(i, j)`` runs through ``N x N`` every coordinate keeps cycling through all of
    ``0, 1/k, ..., 1``, so no coordinate converges along the full net.
    """

    __slots__ = ("i", "j")

    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j

    def __getitem__(self, k: int) -> float:
        if k < 1:
            raise IndexError("coordinates are numbered from 1")
        return ((self.i + 2 * self.j) % (k + 1)) / k

    def __repr__(self):
        return f"OscillatingPoint({self.i}, {self.j})"


class ConstantPoint:
    """The point of ``[0, 1]^N`` with every coordinate equal to ``value``."""

    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = value

    def __getitem__(self, k: int) -> float:
        return self.value


def oscillating_net() -> Net:
    return Net(N2, lambda a: OscillatingPoint(*a), "product", "oscillating")


def constant_net(value: float = 0.5) -> Net:
    p = ConstantPoint(value)
    return Net(N2, lambda a: p, "product", "constant")


def diamond() -> FiniteDirectedSet:
    """``0`` below two equivalent tops ``1 ~ 2``, plus an incomparable ``3`` below the tops."""
    R = [[True, True, True, False],
         [False, True, True, False],
         [False, True, True, False],
         [False, True, True, True]]
    return FiniteDirectedSet(range(4), R)


# -- infinite chains -----------------------------------------------------------

def _chain(base: Net, stages) -> ExtractionChain:
    return ExtractionChain.from_stages(base, stages)


def identity_chain(depth: int = 4) -> ExtractionChain:
    m = CofinalMap(N, N, lambda n: n, lambda a: a, "identity")
    return _chain(Net(N, lambda n: n), [(N, m)] * depth)


def doubling_chain(depth: int = 4) -> ExtractionChain:
    m = CofinalMap(N, N, lambda n: 2 * n, lambda a: max(1, (a + 1) // 2), "doubling")
    return _chain(Net(N, lambda n: n), [(N, m)] * depth)


def product_chain(depth: int = 4) -> ExtractionChain:
    """Stages ``N x N``; maps alternate between a shear and a coordinate swap."""
    shear = CofinalMap(N2, N2, lambda p: (p[0] + p[1], p[1]), lambda a: a, "shear")
    swap = CofinalMap(N2, N2, lambda p: (p[1], p[0]), lambda a: (a[1], a[0]), "swap")
    maps = [(N2, shear if k % 2 == 0 else swap) for k in range(depth)]
    return _chain(Net(N2, lambda p: p), maps)


def mixed_chain() -> ExtractionChain:
    """Naturals <- finite subsets <- finite subsets x naturals <- finite subsets."""
    S = FiniteSubsets()
    SN = ProductDirectedSet((S, N))
    m1 = CofinalMap(S, N, lambda s: max(s, default=1) + len(s), lambda a: frozenset({a}), "max plus size")
    m2 = CofinalMap(SN, S, lambda p: p[0] | {p[1]}, lambda t: (t, 1), "insert")
    m3 = CofinalMap(S, SN, lambda s: (s, max(s, default=1)), lambda p: p[0] | {p[1]}, "with max")
    return _chain(Net(N, lambda n: n), [(S, m1), (SN, m2), (S, m3)])


def frequent_chain(depth: int = 3, m_max: int = 4) -> ExtractionChain:
    """Coordinate extractions from the oscillating net: stages are frequent-pair sets."""
    exs = [coordinate_extractor(k, 0.0, 1.0, m_max) for k in range(1, depth + 1)]
    chain = ExtractionChain(oscillating_net(), exs, depth)
    chain.stage(depth)
    return chain


def standard_chains() -> dict[str, ExtractionChain]:
    return {
        "identity": identity_chain(),
        "doubling": doubling_chain(),
        "product": product_chain(),
        "mixed": mixed_chain(),
        "frequent": frequent_chain(),
    }


# -- directed sets for the law suite -------------------------------------------

def law_instances() -> dict[str, DirectedSet]:
    x = oscillating_net()
    S = lambda v: v[1] == 0.0
    stage, _ = frequent_subnet(x, S, frequent_witness(x, S))
    return {
        "naturals": N,
        "naturals from 0": Naturals(0),
        "N x N": N2,
        "N x N x N": ProductDirectedSet((N, N, N)),
        "N x finite subsets": ProductDirectedSet((N, FiniteSubsets())),
        "finite subsets": FiniteSubsets(),
        "chain of 5": chain_order(5),
        "diamond": diamond(),
        "tail of N x N": TailRestriction(N2, (3, 5)),
        "frequent pairs": stage,
        "diagonal (doubling)": DiagonalDirectedSet(doubling_chain()),
        "diagonal (mixed)": DiagonalDirectedSet(mixed_chain()),
    }
