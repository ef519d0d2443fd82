"""Nets, cofinal maps with explicit witnesses, tails and frequently-in-a-set subnets."""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Any, Callable

from .directed import DirectedSet, LawResult, MalformedElementError, Naturals, encode_tuple, decode_tuple


class ContractError(ValueError):
    """A precondition of a net operation was violated."""


class BrokenWitnessError(ContractError):
    """A caller-supplied witness does not satisfy its stated property."""


class WitnessSearchError(RuntimeError):
    """A budgeted witness search gave up."""


@dataclass(frozen=True, eq=False)
class Net:
    """A map from a directed set into a value space."""

    index: DirectedSet
    func: Callable[[Any], Any]
    space: str = "metric"
    label: str = ""

    def __call__(self, a):
        return self.func(a)


@dataclass(frozen=True, eq=False)
class CofinalMap:
    """``apply: source -> target`` with ``witness: target -> source``.

    Law: ``source.leq(witness(a0), b)`` implies ``target.leq(a0, apply(b))``.
    """

    source: DirectedSet
    target: DirectedSet
    apply: Callable[[Any], Any]
    witness: Callable[[Any], Any]
    label: str = ""

    def __call__(self, b):
        return self.apply(b)


def identity_map(D: DirectedSet) -> CofinalMap:
    return CofinalMap(D, D, lambda b: b, lambda a: a, "identity")


def subnet(x: Net, m: CofinalMap) -> Net:
    if m.target != x.index:
        raise ContractError("cofinal map does not land in the net's index set")
    f, g = x.func, m.apply
    return Net(m.source, lambda b: f(g(b)), x.space, x.label)


def compose_cofinal(m1: CofinalMap, m2: CofinalMap) -> CofinalMap:
    """``m1 o m2`` where ``m2: C -> B`` and ``m1: B -> A``."""
    if m2.target != m1.source:
        raise ContractError("maps are not composable")
    a1, a2, w1, w2 = m1.apply, m2.apply, m1.witness, m2.witness
    return CofinalMap(m2.source, m1.target, lambda c: a1(a2(c)), lambda a0: w2(w1(a0)),
                      f"{m1.label}*{m2.label}")


def check_cofinal(m: CofinalMap, samples: int = 1000, seed: int = 0, *,
                  rng: random.Random | None = None, anchors=None) -> LawResult:
    """Sample ``(a0, b >= witness(a0))`` pairs and test ``a0 <= apply(b)``.

    ``anchors`` optionally replaces the sampler for ``a0``.
    """
    rng = rng or random.Random(seed)
    res = LawResult("cofinality")
    for i in range(samples):
        a0 = anchors[i % len(anchors)] if anchors else m.target.sample(rng)
        w = m.witness(a0)
        b = m.source.sample_above(w, rng)
        ok = m.source.leq(w, b) and m.target.leq(a0, m.apply(b))
        res.record(ok, lambda: (m.target.encode(a0), m.source.encode(b)))
    return res


def nat_witness(apply: Callable[[int], Any], target: DirectedSet, start: int = 1,
                budget: int = 10_000) -> Callable[[Any], int]:
    """Witness for a monotone map out of the naturals: the first ``n`` with ``a0 <= apply(n)``."""

    def witness(a0):
        for n in range(start, start + budget):
            if target.leq(a0, apply(n)):
                return n
        raise WitnessSearchError(f"no n < {start + budget} maps above {target.encode(a0)}")

    return witness


# -- tails -------------------------------------------------------------------

@dataclass(frozen=True)
class TailRestriction(DirectedSet):
    """``{b : anchor <= b}`` with the inherited order."""

    parent: DirectedSet
    anchor: Any
    name = "tail"

    @property
    def suffix_closed(self):
        return self.parent.suffix_closed

    def contains(self, b) -> bool:
        return self.parent.leq(self.anchor, b)

    def leq(self, a, b):
        return self.parent.leq(a, b)

    def upper_bound(self, a, b):
        return self.parent.upper_bound(a, b)

    def sample(self, rng):
        return self.parent.sample_above(self.anchor, rng)

    def sample_above(self, a, rng):
        return self.parent.sample_above(a, rng)

    def encode(self, a):
        return self.parent.encode(a)

    def decode(self, s):
        b = self.parent.decode(s)
        if not self.contains(b):
            raise MalformedElementError(f"{s} is outside the tail above {self.parent.encode(self.anchor)}")
        return b

    def enumerate_above(self, a):
        return self.parent.enumerate_above(a)

    def scan_above(self, a):
        return self.parent.scan_above(a)


def tail_restrict(D: DirectedSet, anchor) -> TailRestriction:
    D.validate(anchor)
    return TailRestriction(D, anchor)


# -- frequently-in-a-set subnets -----------------------------------------------

class _Memo:
    """Thread-safe memo for deterministic functions of encodable keys."""

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, key, default=None):
        return self._data.get(key, default)

    def put(self, key, value):
        with self._lock:
            return self._data.setdefault(key, value)

    def __len__(self):
        return len(self._data)


def search_frequent(x: Net, S: Callable[[Any], bool], alpha, budget: int = 10_000,
                    memo: _Memo | None = None):
    """First index above ``alpha`` (in the index set's enumeration) whose value lies in ``S``.

    ``budget`` bounds the number of scan steps, so for nested stages it bounds the number
    of base indices examined.

    On suffix-closed index sets the result is shared with every element passed over
    during the scan, which keeps repeated searches along a chain linear.
    """
    D = x.index
    if memo is not None:
        hit = memo.get(alpha)
        if hit is not None:
            return hit
    passed = []
    share = memo is not None and D.suffix_closed
    for count, b in enumerate(D.scan_above(alpha)):
        if count >= budget:
            break
        if b is None:
            continue
        if share and count:
            hit = memo.get(b)
            if hit is not None:
                _share(memo, passed, alpha, hit)
                return hit
        if S(x(b)):
            if memo is not None:
                _share(memo, passed, alpha, b)
            return b
        if share:
            passed.append(b)
    raise WitnessSearchError(f"no element of {D.name} within {budget} steps above "
                             f"{D.encode(alpha)} has its value in the target set")


def _share(memo, passed, alpha, hit):
    for b in passed:
        memo.put(b, hit)
    memo.put(alpha, hit)


def frequent_witness(x: Net, S: Callable[[Any], bool], budget: int = 10_000) -> Callable:
    """Memoised ``alpha -> beta >= alpha`` with ``x(beta)`` in ``S`` by enumeration search."""
    memo = _Memo()

    def fw(alpha):
        return search_frequent(x, S, alpha, budget, memo)

    fw.memo = memo
    return fw


class FrequentStage(DirectedSet):
    """Pairs ``(a, b)`` with ``a <= b`` and ``x(b)`` in ``S``, preordered by the first coordinate.

    ``upper_bound((a1, b1), (a2, b2)) = (a, fw(a))`` with
    ``a = ub(ub(a1, a2), ub(b1, b2))``.
    """

    name = "frequent pairs"

    def __init__(self, x: Net, S: Callable[[Any], bool], freq_witness: Callable, label: str = ""):
        self.net = x
        self.parent = x.index
        self.S = S
        self._fw = freq_witness
        self.label = label
        self._ub = _Memo()
        self._checked = _Memo()  # alpha -> verified witness

    @property
    def suffix_closed(self):
        return self.parent.suffix_closed

    def fw(self, alpha):
        b = self._checked.get(alpha)
        if b is not None:
            return b
        b = self._fw(alpha)
        P = self.parent
        if not P.leq(alpha, b):
            raise BrokenWitnessError(f"witness {P.encode(b)} is not above {P.encode(alpha)}")
        if not self.S(self.net(b)):
            raise BrokenWitnessError(f"value at witness {P.encode(b)} is not in the target set")
        return self._checked.put(alpha, b)

    def point(self, alpha):
        return (alpha, self.fw(alpha))

    def leq(self, p, q):
        return self.parent.leq(p[0], q[0])

    def upper_bound(self, p, q):
        key = (p, q)
        hit = self._ub.get(key)
        if hit is not None:
            return hit
        P = self.parent
        a = P.upper_bound(P.upper_bound(p[0], q[0]), P.upper_bound(p[1], q[1]))
        return self._ub.put(key, self.point(a))

    def sample(self, rng):
        return self.point(self.parent.sample(rng))

    def sample_above(self, p, rng):
        return self.point(self.parent.sample_above(p[0], rng))

    def enumerate_above(self, p):
        return (q for q in self.scan_above(p) if q is not None)

    def scan_above(self, p):
        # Pairs (p[0], b) for the S-hits b of the parent scan above p[0]. This is not all
        # of the up-set of p, but every value the net takes above p is taken on some pair
        # yielded, which is what witness searches need. A search at a deep stage thus
        # becomes one filtered scan of the base index set. This covers the nets that
        # factor through the second coordinate, as the one from frequent_subnet does;
        # other nets over this index set may have values the scan never reaches.
        a = p[0]
        x, S = self.net, self.S
        for b in self.parent.scan_above(a):
            yield (a, b) if b is not None and S(x(b)) else None

    def encode(self, p):
        if not (isinstance(p, tuple) and len(p) == 2):
            raise MalformedElementError(f"{p!r} is not a pair")
        return encode_tuple([self.parent.encode(p[0]), self.parent.encode(p[1])])

    def decode(self, s):
        ea, eb = decode_tuple(s, 2)
        p = (self.parent.decode(ea), self.parent.decode(eb))
        self.validate(p)
        return p

    def validate(self, p):
        if not (isinstance(p, tuple) and len(p) == 2):
            raise MalformedElementError(f"{p!r} is not a pair")
        a, b = p
        self.parent.validate(a)
        self.parent.validate(b)
        if not self.parent.leq(a, b) or not self.S(self.net(b)):
            raise MalformedElementError(f"{self.encode(p)} is not in the frequent stage")


def frequent_subnet(x: Net, S: Callable[[Any], bool], freq_witness: Callable,
                    label: str = "") -> tuple[FrequentStage, CofinalMap]:
    """Subnet of ``x`` lying entirely in ``S``, given evidence that ``x`` is frequently in ``S``."""
    stage = FrequentStage(x, S, freq_witness, label)
    m = CofinalMap(stage, x.index, lambda p: p[1], stage.point, label or "frequent")
    return stage, m


# -- frequently-in-a-set subsequences ----------------------------------------

class SubsequenceSelector:
    """Strictly increasing ``n -> n-th index whose value lies in S`` for a net over the naturals."""

    def __init__(self, x: Net, S: Callable[[Any], bool], budget: int = 10_000):
        if not isinstance(x.index, Naturals):
            raise ContractError("subsequence extraction needs a net over the naturals")
        self.net = x
        self.S = S
        self.budget = budget
        self.start = x.index.start
        self._hits: list[int] = []
        self._next = self.start
        self._lock = threading.Lock()

    def __call__(self, n: int) -> int:
        k = n - self.start
        if k < 0:
            raise MalformedElementError(f"{n} is below {self.start}")
        with self._lock:
            while len(self._hits) <= k:
                limit = self._next + self.budget
                m = self._next
                while m < limit and not self.S(self.net(m)):
                    m += 1
                if m >= limit:
                    raise WitnessSearchError(f"no index in [{self._next}, {limit}) has its value in the target set")
                self._hits.append(m)
                self._next = m + 1
            return self._hits[k]

    def witness(self, a0: int) -> int:
        n = self.start
        while self(n) < a0:
            n += 1
        return n


def frequent_subsequence(x: Net, S: Callable[[Any], bool], budget: int = 10_000,
                         label: str = "") -> tuple[Naturals, CofinalMap]:
    sel = SubsequenceSelector(x, S, budget)
    return x.index, CofinalMap(x.index, x.index, sel, sel.witness, label or "subsequence")
