"""Directed sets given by contracts: an order oracle, an upper-bound choice and samplers.

Infinite index sets are never enumerated wholesale. Every instance exposes

* ``leq(a, b)``            the preorder (antisymmetry is not assumed),
* ``upper_bound(a, b)``    some common upper bound, not necessarily least,
* ``sample(rng)`` and ``sample_above(a, rng)``,
* ``encode`` / ``decode``  a canonical string form used for hashing and reports.

``rng`` is always a :class:`random.Random`.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Sequence


class MalformedElementError(ValueError):
    """An element (or its encoding) does not belong to the directed set."""


class DirectedSet:
    """Base contract. Subclasses override the five primitive operations."""

    name = "directed set"
    # True when enumerate_above(e), for any e met while enumerating above a, is the
    # remaining suffix of that enumeration (the naturals, for example).
    suffix_closed = False

    def leq(self, a, b) -> bool:
        raise NotImplementedError

    def upper_bound(self, a, b):
        raise NotImplementedError

    def sample(self, rng: random.Random):
        raise NotImplementedError

    def sample_above(self, a, rng: random.Random):
        raise NotImplementedError

    def encode(self, a) -> str:
        raise NotImplementedError

    def decode(self, s: str):
        raise NotImplementedError

    def validate(self, a) -> None:
        self.decode(self.encode(a))

    def enumerate_above(self, a) -> Iterator:
        """Enumerate the up-set of ``a``; optional.

        Witness searches for "frequently in S" rely on the enumeration reaching every
        element above ``a`` (a cofinal chain is not enough: it can miss values).
        """
        raise NotImplementedError(f"{self.name} has no enumeration")

    def scan_above(self, a) -> Iterator:
        """``enumerate_above``, possibly interleaved with ``None`` for steps that examined an
        underlying index without producing an element. Search budgets count steps."""
        return self.enumerate_above(a)

    def geq(self, a, b) -> bool:
        return self.leq(b, a)

    def equivalent(self, a, b) -> bool:
        return self.leq(a, b) and self.leq(b, a)

    def __repr__(self) -> str:
        return f"<{self.name}>"


# -- canonical encoding helpers ---------------------------------------------

def split_top_level(body: str) -> list[str]:
    """Split ``body`` on commas that are not nested in (), {} or []."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
            if depth < 0:
                raise MalformedElementError(f"unbalanced encoding {body!r}")
        elif ch == "," and depth == 0:
            parts.append(body[start:i])
            start = i + 1
    if depth != 0:
        raise MalformedElementError(f"unbalanced encoding {body!r}")
    parts.append(body[start:])
    return parts


def encode_tuple(parts: Sequence[str]) -> str:
    return "(" + ",".join(parts) + ")"


def decode_tuple(s: str, arity: int | None = None) -> list[str]:
    if not (isinstance(s, str) and len(s) >= 2 and s[0] == "(" and s[-1] == ")"):
        raise MalformedElementError(f"not a tuple encoding: {s!r}")
    parts = split_top_level(s[1:-1])
    if arity is not None and len(parts) != arity:
        raise MalformedElementError(f"expected {arity} components in {s!r}")
    return parts


def _decode_int(s: str) -> int:
    if not isinstance(s, str) or not s or not (s.isdigit() or (s[0] == "-" and s[1:].isdigit())):
        raise MalformedElementError(f"not a decimal integer: {s!r}")
    return int(s)


def dovetail(iterables: Sequence[Iterator]) -> Iterator[tuple]:
    """Yield the product of several (possibly infinite) iterators by increasing index sum."""
    its = list(iterables)
    k = len(its)
    cache: list[list] = [[] for _ in range(k)]
    done = [False] * k

    def advance(i, n):
        while len(cache[i]) <= n and not done[i]:
            try:
                cache[i].append(next(its[i]))
            except StopIteration:
                done[i] = True

    for total in itertools.count():
        for i in range(k):
            advance(i, total)
        if all(done) and total > sum(len(c) - 1 for c in cache):
            return
        for combo in _compositions(total, k):
            if all(n < len(cache[i]) for i, n in enumerate(combo)):
                yield tuple(cache[i][n] for i, n in enumerate(combo))


def _compositions(total: int, k: int):
    if k == 1:
        yield (total,)
        return
    if k == 2:
        for first in range(total + 1):
            yield (first, total - first)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


_SCALES = (2.0, 20.0, 1000.0)


def _jump(rng: random.Random) -> int:
    # Mixture of scales: any height is reached with positive probability.
    # one uniform draw: its third picks the scale, the rest is a fresh uniform
    u = 3.0 * rng.random()
    i = int(u)
    return int(-math.log(1.0 - (u - i)) * _SCALES[i])


# -- concrete instances ------------------------------------------------------

@dataclass(frozen=True)
class Naturals(DirectedSet):
    """The integers ``start, start+1, ...`` with the usual order; ``upper_bound`` is max."""

    start: int = 1
    name = "naturals"
    suffix_closed = True

    def leq(self, a, b):
        return a <= b

    def upper_bound(self, a, b):
        return a if a >= b else b

    def sample(self, rng):
        return self.start + _jump(rng)

    def sample_above(self, a, rng):
        return a + _jump(rng)

    def encode(self, a):
        if not isinstance(a, int) or isinstance(a, bool) or a < self.start:
            raise MalformedElementError(f"{a!r} is not a natural >= {self.start}")
        return str(a)

    def decode(self, s):
        n = _decode_int(s)
        if n < self.start:
            raise MalformedElementError(f"{s!r} is below {self.start}")
        return n

    def validate(self, a):
        self.encode(a)

    def enumerate_above(self, a):
        return itertools.count(a)


@dataclass(frozen=True)
class ProductDirectedSet(DirectedSet):
    """Finite product with the componentwise preorder; elements are tuples."""

    factors: tuple[DirectedSet, ...]
    name = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a product needs at least one factor")
        # products of naturals are the common case and get direct integer paths
        starts = tuple(f.start for f in self.factors) if all(type(f) is Naturals for f in self.factors) else None
        object.__setattr__(self, "_starts", starts)

    def leq(self, a, b):
        if self._starts is not None:
            for x, y in zip(a, b):
                if x > y:
                    return False
            return True
        for f, x, y in zip(self.factors, a, b):
            if not f.leq(x, y):
                return False
        return True

    def upper_bound(self, a, b):
        if self._starts is not None:
            return tuple(x if x >= y else y for x, y in zip(a, b))
        return tuple(f.upper_bound(x, y) for f, x, y in zip(self.factors, a, b))

    def sample(self, rng):
        return tuple(f.sample(rng) for f in self.factors)

    def sample_above(self, a, rng):
        return tuple(f.sample_above(x, rng) for f, x in zip(self.factors, a))

    def encode(self, a):
        if not isinstance(a, tuple) or len(a) != len(self.factors):
            raise MalformedElementError(f"{a!r} is not a {len(self.factors)}-tuple")
        if self._starts is not None:
            for x, st in zip(a, self._starts):
                if type(x) is not int or x < st:
                    return self._slow_encode(a)
            return "(" + ",".join(map(str, a)) + ")"
        return self._slow_encode(a)

    def _slow_encode(self, a):
        return encode_tuple([f.encode(x) for f, x in zip(self.factors, a)])

    def decode(self, s):
        if self._starts is not None and isinstance(s, str) and s[:1] == "(" and s[-1:] == ")":
            # integers never contain brackets, so a plain split finds the same parts
            parts = s[1:-1].split(",")
            if len(parts) != len(self.factors):
                raise MalformedElementError(f"expected {len(self.factors)} components in {s!r}")
            return tuple(f.decode(p) for f, p in zip(self.factors, parts))
        parts = decode_tuple(s, len(self.factors))
        return tuple(f.decode(p) for f, p in zip(self.factors, parts))

    def validate(self, a):
        self.encode(a)

    def enumerate_above(self, a):
        if all(type(f) is Naturals for f in self.factors):
            return _shells(a)
        return dovetail([f.enumerate_above(x) for f, x in zip(self.factors, a)])


def _shells(a: tuple) -> Iterator[tuple]:
    """``a + d`` for every offset ``d`` in ``N^k``, by increasing ``sum(d)``."""
    k = len(a)
    if k == 2:
        x, y = a
        for r in itertools.count():
            for i in range(r + 1):
                yield (x + i, y + r - i)
    for r in itertools.count():
        for d in _compositions(r, k):
            yield tuple(x + e for x, e in zip(a, d))


@dataclass(frozen=True)
class FiniteSubsets(DirectedSet):
    """Finite subsets of the naturals ordered by inclusion; ``upper_bound`` is union."""

    start: int = 1
    name = "finite subsets"

    def leq(self, a, b):
        return a <= b

    def upper_bound(self, a, b):
        return a | b

    def sample(self, rng):
        return self.sample_above(frozenset(), rng)

    def sample_above(self, a, rng):
        extra = frozenset(self.start + _jump(rng) for _ in range(rng.randint(0, 3)))
        return frozenset(a) | extra

    def encode(self, a):
        if not isinstance(a, frozenset) or any(
            not isinstance(x, int) or isinstance(x, bool) or x < self.start for x in a
        ):
            raise MalformedElementError(f"{a!r} is not a finite set of naturals")
        return "{" + ",".join(str(x) for x in sorted(a)) + "}"

    def decode(self, s):
        if not (isinstance(s, str) and s.startswith("{") and s.endswith("}")):
            raise MalformedElementError(f"not a set encoding: {s!r}")
        body = s[1:-1]
        items = [] if body == "" else [_decode_int(p) for p in body.split(",")]
        if items != sorted(set(items)) or any(x < self.start for x in items):
            raise MalformedElementError(f"non-canonical set encoding: {s!r}")
        return frozenset(items)

    def validate(self, a):
        self.encode(a)

    def enumerate_above(self, a):
        a = frozenset(a)
        top = max(a, default=self.start - 1)
        low = [x for x in range(self.start, top + 1) if x not in a]
        for r in range(len(low) + 1):
            for extra in itertools.combinations(low, r):
                yield a | frozenset(extra)
        for n in itertools.count(top + 1):
            free = [x for x in range(self.start, n) if x not in a]
            for r in range(len(free) + 1):
                for extra in itertools.combinations(free, r):
                    yield a | frozenset(extra) | {n}


class FiniteDirectedSet(DirectedSet):
    """An explicit finite preorder, checked exhaustively at construction.

    ``relation[i][j]`` is true when ``elements[i] <= elements[j]``. The canonical
    upper bound of ``a`` and ``b`` is ``b`` if ``a <= b``, else ``a`` if ``b <= a``,
    else the first common upper bound in element order.
    """

    name = "finite directed set"

    def __init__(self, elements: Sequence[Any], relation: Sequence[Sequence[bool]], *, check: bool = True):
        self.elements = tuple(elements)
        n = len(self.elements)
        self.relation = tuple(tuple(bool(x) for x in row) for row in relation)
        if n == 0:
            raise ValueError("a directed set is nonempty")
        if len(self.relation) != n or any(len(row) != n for row in self.relation):
            raise ValueError("relation must be an n x n matrix")
        self._pos = {e: i for i, e in enumerate(self.elements)}
        self._codes = [str(e) for e in self.elements]
        if len(set(self._codes)) != n:
            raise ValueError("element encodings must be distinct")
        self._by_code = {c: e for c, e in zip(self._codes, self.elements)}
        if check:
            problem = preorder_violation(self.relation)
            if problem:
                raise ValueError(f"not a directed preorder: {problem}")
        R = self.relation
        self._ub = [[self._choose_ub(i, j) for j in range(n)] for i in range(n)]
        self._up = [tuple(j for j in range(n) if R[i][j]) for i in range(n)]

    def _choose_ub(self, i, j):
        R = self.relation
        if R[i][j]:
            return j
        if R[j][i]:
            return i
        for k in range(len(R)):
            if R[i][k] and R[j][k]:
                return k
        raise ValueError("no common upper bound")

    def __len__(self):
        return len(self.elements)

    def index(self, a) -> int:
        try:
            return self._pos[a]
        except (KeyError, TypeError):
            raise MalformedElementError(f"{a!r} is not an element") from None

    def leq(self, a, b):
        return self.relation[self._pos[a]][self._pos[b]]

    def upper_bound(self, a, b):
        return self.elements[self._ub[self._pos[a]][self._pos[b]]]

    def up_set(self, a) -> tuple:
        return tuple(self.elements[j] for j in self._up[self._pos[a]])

    def tops(self) -> tuple:
        """Elements above everything (nonempty for a finite directed preorder)."""
        n = len(self.elements)
        return tuple(self.elements[j] for j in range(n) if all(self.relation[i][j] for i in range(n)))

    def sample(self, rng):
        return rng.choice(self.elements)

    def sample_above(self, a, rng):
        return rng.choice(self.up_set(a))

    def encode(self, a):
        return self._codes[self.index(a)]

    def decode(self, s):
        try:
            return self._by_code[s]
        except (KeyError, TypeError):
            raise MalformedElementError(f"unknown element encoding {s!r}") from None

    def validate(self, a):
        self.index(a)

    def enumerate_above(self, a):
        return iter(self.up_set(a))

    def __repr__(self):
        rows = "".join("".join("1" if x else "0" for x in row) + ";" for row in self.relation)
        return f"FiniteDirectedSet({len(self)}: {rows})"


def preorder_violation(R: Sequence[Sequence[bool]]) -> str | None:
    """Return a description of the first failed law, or None when ``R`` is a directed preorder."""
    n = len(R)
    for i in range(n):
        if not R[i][i]:
            return f"reflexivity fails at {i}"
    for i in range(n):
        for j in range(n):
            if R[i][j]:
                for k in range(n):
                    if R[j][k] and not R[i][k]:
                        return f"transitivity fails at ({i},{j},{k})"
    for i in range(n):
        for j in range(n):
            if not any(R[i][k] and R[j][k] for k in range(n)):
                return f"no upper bound for ({i},{j})"
    return None


def chain_order(n: int) -> FiniteDirectedSet:
    """The total order 0 < 1 < ... < n-1."""
    return FiniteDirectedSet(range(n), [[i <= j for j in range(n)] for i in range(n)])


# -- module-level operations -------------------------------------------------

def leq(D: DirectedSet, a, b) -> bool:
    D.validate(a)
    D.validate(b)
    return D.leq(a, b)


def upper_bound(D: DirectedSet, a, b):
    return D.upper_bound(a, b)


def sample_above(D: DirectedSet, a, rng: random.Random):
    return D.sample_above(a, rng)


@dataclass
class LawResult:
    law: str
    checked: int = 0
    violations: int = 0
    counterexample: tuple | None = None

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def record(self, ok: bool, example) -> None:
        """Count one case; ``example`` (a tuple, or a callable producing one) is kept for
        the first violation."""
        self.checked += 1
        if not ok:
            self.violations += 1
            if self.counterexample is None:
                self.counterexample = example() if callable(example) else example


@dataclass
class LawReport:
    instance: str
    results: dict[str, LawResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())

    def __getitem__(self, law: str) -> LawResult:
        return self.results[law]

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "passed": self.passed,
            "laws": {
                k: {
                    "checked": r.checked,
                    "violations": r.violations,
                    "counterexample": None if r.counterexample is None else [str(x) for x in r.counterexample],
                }
                for k, r in self.results.items()
            },
        }


LAWS = ("reflexivity", "transitivity", "dominance", "sample_above", "encoding")


def check_laws(D: DirectedSet, budget: int = 1000, seed: int = 0, *,
               rng: random.Random | None = None) -> LawReport:
    """Check the directed-set laws on ``budget`` sampled triples.

    Triples are drawn so that chains ``a <= b <= c`` occur often enough for the
    transitivity law to be exercised, not only vacuously satisfied.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    rng = rng or random.Random(seed)
    report = LawReport(D.name, {law: LawResult(law) for law in LAWS})
    r = report.results
    enc = _safe_encoder(D)
    leq, sample, above, uniform = D.leq, D.sample, D.sample_above, rng.random
    refl, trans, dom, samp, codec = (r[law].record for law in
                                     ("reflexivity", "transitivity", "dominance", "sample_above", "encoding"))
    for _ in range(budget):
        a = sample(rng)
        b = above(a, rng) if uniform() < 0.5 else sample(rng)
        c = above(b, rng) if uniform() < 0.5 else sample(rng)
        refl(leq(a, a), lambda: (enc(a),))
        if leq(a, b) and leq(b, c):
            trans(leq(a, c), lambda: (enc(a), enc(b), enc(c)))
        u = D.upper_bound(a, b)
        dom(leq(a, u) and leq(b, u), lambda: (enc(a), enc(b), enc(u)))
        s = above(a, rng)
        samp(leq(a, s), lambda: (enc(a), enc(s)))
        try:
            e = D.encode(a)
            ok = D.encode(D.decode(e)) == e
        except MalformedElementError:
            ok = False
        codec(ok, lambda: (enc(a),))
    return report


def _safe_encoder(D: DirectedSet) -> Callable[[Any], str]:
    def enc(x):
        try:
            return D.encode(x)
        except Exception:  # counterexamples must be reportable even if encoding is broken
            return repr(x)
    return enc
