"""Exhaustive finite-model checker for the diagonal construction.

Everything here is brute force over explicitly materialised finite structures:
directed preorders on at most four points, all cofinal maps between them (as full
function tables with witness tables) and every chain built from those. The diagonal
index set of a finite chain is finite, so its directedness and the cofinality of the
root and level maps can be checked without sampling.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .diagonal import (DiagonalDirectedSet, ExtractionChain, diag_join, diag_leq, diag_level_map,
                       diag_root_map)
from .directed import FiniteDirectedSet, check_laws, preorder_violation
from .nets import CofinalMap, ContractError, Net, check_cofinal


class BudgetError(ValueError):
    """A requested enumeration is beyond the configured size caps."""


@dataclass(frozen=True)
class OracleConfig:
    """Size caps for exhaustive enumeration. The diagonal set grows with every level."""

    max_stage_size: int = 4
    max_depth: int = 3


CONFIG = OracleConfig()


# -- directed preorders ------------------------------------------------------

def _relations(n: int) -> Iterator[tuple]:
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in itertools.product((False, True), repeat=len(off)):
        R = [[i == j for j in range(n)] for i in range(n)]
        for (i, j), v in zip(off, bits):
            R[i][j] = v
        yield tuple(tuple(row) for row in R)


def _canonical(R: tuple) -> tuple:
    n = len(R)
    return min(tuple(tuple(R[p[i]][p[j]] for j in range(n)) for i in range(n))
               for p in itertools.permutations(range(n)))


def enum_directed_preorders(n: int, representatives: bool = False,
                            config: OracleConfig = CONFIG) -> list[FiniteDirectedSet]:
    """All directed preorders on the points ``0..n-1``.

    With ``representatives=True`` only one relation per isomorphism class is returned
    (the lexicographically least relabelling).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > config.max_stage_size:
        raise BudgetError(f"n={n} exceeds the stage size cap {config.max_stage_size}")
    keep = []
    seen = set()
    for R in _relations(n):
        if preorder_violation(R) is not None:
            continue
        if representatives:
            c = _canonical(R)
            if c in seen:
                continue
            seen.add(c)
            R = c
        keep.append(R)
    return [FiniteDirectedSet(range(n), R, check=False) for R in keep]


# -- cofinal maps ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TableMap:
    """A function ``source -> target`` given by tables, with a cofinality witness table.

    ``table[i]`` is the image of ``source.elements[i]``; ``witness[j]`` is an element of
    the source whose whole up-set maps above ``target.elements[j]``.
    """

    source: FiniteDirectedSet
    target: FiniteDirectedSet
    table: tuple
    witness: tuple

    def apply(self, b):
        return self.table[self.source.index(b)]

    def witness_of(self, a):
        return self.witness[self.target.index(a)]

    def cofinal_map(self) -> CofinalMap:
        label = "[" + ",".join(str(v) for v in self.table) + "]"
        return CofinalMap(self.source, self.target, self.apply, self.witness_of, label)


def _witness_table(B: FiniteDirectedSet, A: FiniteDirectedSet, table: Sequence) -> tuple | None:
    pos = {b: i for i, b in enumerate(B.elements)}
    out = []
    for a0 in A.elements:
        for g in B.elements:
            if all(A.leq(a0, table[pos[b]]) for b in B.up_set(g)):
                out.append(g)
                break
        else:
            return None
    return tuple(out)


def is_cofinal_table(B: FiniteDirectedSet, A: FiniteDirectedSet, table: Sequence) -> bool:
    return _witness_table(B, A, table) is not None


def enum_cofinal_maps(B: FiniteDirectedSet, A: FiniteDirectedSet) -> list[TableMap]:
    """Every function ``B -> A`` satisfying the cofinality law, in lexicographic table order."""
    out = []
    for table in itertools.product(A.elements, repeat=len(B)):
        w = _witness_table(B, A, table)
        if w is not None:
            out.append(TableMap(B, A, table, w))
    return out


def compose_tables(m1: TableMap, m2: TableMap) -> tuple:
    """Table of ``m1 o m2`` (``m2`` first)."""
    if m2.target is not m1.source:
        raise ContractError("maps are not composable")
    return tuple(m1.apply(v) for v in m2.table)


# -- chains ------------------------------------------------------------------

@dataclass(eq=False)
class FiniteChain:
    """Stages ``A_0, ..., A_K`` with maps ``phi_i: A_i -> A_{i-1}`` given as tables."""

    stages: list
    maps: list = field(default_factory=list)

    def __post_init__(self):
        self.stages = list(self.stages)
        self.maps = list(self.maps)
        if len(self.maps) != len(self.stages) - 1:
            raise ContractError("a chain of K+1 stages needs K maps")
        for i, m in enumerate(self.maps, start=1):
            if m.source is not self.stages[i] or m.target is not self.stages[i - 1]:
                raise ContractError(f"map {i} does not go from A_{i} to A_{i - 1}")
            for j, a0 in enumerate(m.target.elements):
                g = m.witness[j]
                if not all(m.target.leq(a0, m.apply(b)) for b in m.source.up_set(g)):
                    raise ContractError(f"witness table of map {i} fails at {a0}")

    @property
    def depth(self) -> int:
        return len(self.maps)

    def extraction_chain(self) -> ExtractionChain:
        A0 = self.stages[0]
        base = Net(A0, lambda a: a, "discrete", "identity on A_0")
        return ExtractionChain.from_stages(base, [(m.source, m.cofinal_map()) for m in self.maps])

    def describe(self) -> str:
        st = ";".join(repr(s) for s in self.stages)
        mp = ";".join("[" + ",".join(str(v) for v in m.table) + "]" for m in self.maps)
        return f"stages={st} maps={mp}"


def iter_finite_chains(max_size: int, max_depth: int, *, labelled: bool = False,
                       config: OracleConfig = CONFIG) -> Iterator[FiniteChain]:
    """Every chain of depth ``<= max_depth`` whose stages have at most ``max_size`` points.

    Stages range over all labelled preorders when ``labelled`` is true, otherwise over
    one preorder per isomorphism class; maps between consecutive stages always range over
    every labelled cofinal map. Relabelling a stage does not change any verdict, so the
    second mode covers the same cases up to isomorphism much faster.
    """
    if max_depth > config.max_depth:
        raise BudgetError(f"depth {max_depth} exceeds the cap {config.max_depth}")
    if max_depth < 0:
        raise ValueError("depth must be >= 0")
    pool = [D for n in range(1, max_size + 1)
            for D in enum_directed_preorders(n, representatives=not labelled, config=config)]
    cache: dict = {}

    def maps(B, A):
        key = (id(B), id(A))
        if key not in cache:
            cache[key] = enum_cofinal_maps(B, A)
        return cache[key]

    def extend(stages, ms):
        yield FiniteChain(stages, ms)
        if len(ms) == max_depth:
            return
        for D in pool:
            for m in maps(D, stages[-1]):
                yield from extend(stages + [D], ms + [m])

    for A0 in pool:
        yield from extend([A0], [])


# -- the exhaustive check ----------------------------------------------------

CHECKS = ("membership", "dominance", "directed", "preorder", "root_cofinal",
          "level_cofinal", "eventual_subnet", "compatibility")


@dataclass
class CheckTally:
    checked: int = 0
    violations: int = 0
    counterexample: str | None = None

    def record(self, ok: bool, example) -> None:
        self.checked += 1
        if not ok:
            self.violations += 1
            if self.counterexample is None:
                self.counterexample = example() if callable(example) else str(example)

    def merge(self, other: "CheckTally") -> None:
        self.checked += other.checked
        self.violations += other.violations
        if self.counterexample is None:
            self.counterexample = other.counterexample


@dataclass
class OracleReport:
    chains: int = 0
    size_of_B: int = 0
    checks: dict = field(default_factory=lambda: {c: CheckTally() for c in CHECKS})
    first_failing_chain: str | None = None
    params: dict = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return sum(t.violations for t in self.checks.values())

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def merge(self, other: "OracleReport") -> None:
        self.chains += other.chains
        self.size_of_B += other.size_of_B
        for k, t in other.checks.items():
            self.checks[k].merge(t)
        if self.first_failing_chain is None:
            self.first_failing_chain = other.first_failing_chain

    def to_dict(self) -> dict:
        return {
            "params": dict(self.params),
            "chains": self.chains,
            "elements_of_B": self.size_of_B,
            "violations": self.violations,
            "passed": self.passed,
            "checks": {k: {"checked": t.checked, "violations": t.violations,
                           "counterexample": t.counterexample} for k, t in self.checks.items()},
            "first_failing_chain": self.first_failing_chain,
        }


def materialize(chain: ExtractionChain) -> list[tuple]:
    """All of ``B``: one compatible tuple for each level and each top element."""
    return [chain.extend_down(t, k) for k in range(chain.depth + 1)
            for t in chain.index_set(k).elements]


def brute_check_diagonal(chain: FiniteChain | ExtractionChain,
                         join: Callable = diag_join) -> OracleReport:
    """Exhaustively verify the diagonal construction on a finite chain.

    Checks, for the materialised ``B``: every join is a compatible tuple dominating both
    arguments; ``B`` is directed and ``<=`` is a preorder on it; the root map's witness
    works for every ``a_0``; every level map's witness works for every anchor of length
    ``>= n + 2`` and every ``a_n``; the tail above every anchor of length ``>= n + 1``
    maps cofinally into ``A_n`` (by search, without witnesses); and ``y_b`` equals the
    stage-``n`` net at ``b_n``.
    """
    fc = chain if isinstance(chain, FiniteChain) else None
    ch = chain.extraction_chain() if fc is not None else chain
    K = ch.depth
    B = DiagonalDirectedSet(ch, join=join)
    els = materialize(ch)
    pos = {b: i for i, b in enumerate(els)}
    enc = B.encode
    rep = OracleReport(chains=1, size_of_B=len(els))
    c = rep.checks
    N = len(els)
    le = [[diag_leq(ch, b, d) for d in els] for b in els]
    up = [[j for j in range(N) if le[i][j]] for i in range(N)]
    stages = [ch.index_set(n) for n in range(K + 1)]
    # stay[n][i]: the a_n that every element above els[i] stays above at level n
    stay = [[frozenset(an for an in stages[n].elements
                       if all(len(els[j]) > n and stages[n].leq(an, els[j][n]) for j in up[i]))
             for i in range(N)] for n in range(K + 1)]

    def where(t):
        return pos.get(tuple(t))

    for i, b in enumerate(els):
        for k, d in enumerate(els):
            try:
                j = where(join(ch, b, d))
            except Exception as exc:  # a broken join is report content
                c["membership"].record(False, f"join({enc(b)}, {enc(d)}) raised {exc}")
                continue
            c["membership"].record(j is not None, lambda: f"join({enc(b)}, {enc(d)}) is not in B")
            if j is not None:
                c["dominance"].record(le[i][j] and le[k][j],
                                      lambda: f"join({enc(b)}, {enc(d)}) = {enc(els[j])} does not dominate")
            c["directed"].record(any(le[k][u] for u in up[i]),
                                 lambda: f"{enc(b)} and {enc(d)} have no upper bound in B")
    for i in range(N):
        c["preorder"].record(le[i][i], lambda: f"{enc(els[i])} is not <= itself")
        for j in up[i]:
            c["preorder"].record(all(le[i][k] for k in up[j]),
                                 lambda: f"transitivity fails above {enc(els[i])} <= {enc(els[j])}")

    if K >= 1:
        root = diag_root_map(ch, B)
        for a0 in stages[0].elements:
            w = root.witness(a0)
            g = where(w)
            c["root_cofinal"].record(g is not None and a0 in stay[0][g],
                                     lambda: f"root witness {w!r} fails for a_0={a0}")

    for n in range(K + 1):
        An = stages[n]
        xs = ch.stage(n).net
        for i, anchor in enumerate(els):
            if len(anchor) < n + 1:
                continue
            for an in An.elements:
                c["eventual_subnet"].record(any(an in stay[n][g] for g in up[i]),
                                            lambda: f"tail above {enc(anchor)} never stays above {an} at level {n}")
            if len(anchor) >= n + 2:
                psi = diag_level_map(ch, n, anchor, B)
                for an in An.elements:
                    try:
                        w = psi.witness(an)
                        g = where(w)
                        ok = g is not None and le[i][g] and an in stay[n][g]
                    except Exception as exc:
                        ok, w = False, f"error {exc}"
                    c["level_cofinal"].record(ok, lambda: f"level {n} witness {w!r} fails for anchor {enc(anchor)}, a_n={an}")
        for b in els:
            if len(b) > n:
                c["compatibility"].record(ch.base_net(b[0]) == xs(b[n]),
                                          lambda: f"y at {enc(b)} differs from stage {n} at b_{n}")
    if not rep.passed and fc is not None:
        rep.first_failing_chain = fc.describe()
    return rep


def mutated_join(chain: ExtractionChain, b, c) -> tuple:
    """``diag_join`` with the witness step left out: a deliberately broken control."""
    if len(b) > len(c):
        b, c = c, b
    p, q = len(b) - 1, len(c) - 1
    t = chain.index_set(0).upper_bound(b[0], c[0])
    for i in range(1, q + 1):
        A = chain.index_set(i)
        low = b[i] if i <= p else c[i]
        t = A.upper_bound(low, c[i])
    return chain.extend_down(t, q)


def run_oracle(max_size: int = 3, max_depth: int = 2, *, join: Callable = diag_join,
               labelled: bool = False, config: OracleConfig = CONFIG,
               stop_after: int | None = None) -> OracleReport:
    """Check every finite chain within the bounds; ``stop_after`` ends the run after that
    many failing chains (useful for mutation controls)."""
    total = OracleReport(chains=0)
    total.params = {"max_size": max_size, "max_depth": max_depth, "labelled": labelled,
                    "join": getattr(join, "__name__", "join")}
    failing = 0
    for fc in iter_finite_chains(max_size, max_depth, labelled=labelled, config=config):
        r = brute_check_diagonal(fc, join)
        total.merge(r)
        if not r.passed:
            failing += 1
            if stop_after is not None and failing >= stop_after:
                break
    return total


# -- sampled harness on finite chains ------------------------------------------

def sampled_verdict(chain: FiniteChain, join: Callable = diag_join, samples: int = 500,
                    seed: int = 0) -> bool:
    """Verdict of the sampling harness (law suite plus root-map cofinality) on a finite chain;
    used to confirm it agrees with the exhaustive oracle."""
    ch = chain.extraction_chain()
    B = DiagonalDirectedSet(ch, join=join)
    rng = random.Random(seed)
    try:
        ok = check_laws(B, samples, rng=rng).passed
        if ch.depth >= 1:
            ok = ok and check_cofinal(diag_root_map(ch, B), samples, rng=rng).passed
    except Exception:
        return False
    return ok

