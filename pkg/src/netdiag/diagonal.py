"""The diagonal construction, for sequences and for nets.

Sequence half: ``y_n = x[phi_1 o ... o phi_n (n)]``.

Net half: given a chain ``A_0 <- A_1 <- ... <- A_K`` of index sets joined by cofinal
maps ``phi_i: A_i -> A_{i-1}``, the index set ``B`` consists of the compatible tuples
``(b_0, ..., b_k)`` with ``b_{i-1} = phi_i(b_i)``, ordered by

    (b_0..b_p) <= (c_0..c_q)  iff  p <= q and b_i <= c_i for i <= p,

and ``y_b = x[b_0]`` is a subnet of ``x`` and an eventual subnet of every stage.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .directed import DirectedSet, MalformedElementError, decode_tuple, encode_tuple
from .nets import CofinalMap, ContractError, Net, TailRestriction, identity_map, subnet


class ExtractionError(RuntimeError):
    """Building stage ``level`` of a chain failed."""

    def __init__(self, level: int, message: str):
        super().__init__(f"level {level}: {message}")
        self.level = level


class DiagonalWitnessError(RuntimeError):
    """A cofinality witness failed inside the diagonal construction."""

    def __init__(self, level: int, message: str):
        super().__init__(f"witness at level {level}: {message}")
        self.level = level


# -- sequences ---------------------------------------------------------------

def _selector(selectors, k: int) -> Callable[[int], int]:
    return selectors(k) if callable(selectors) else selectors[k - 1]


def diagonal_subsequence(selectors, n: int) -> int:
    """``phi_1 o ... o phi_n (n)``; only selectors ``1..n`` are consulted.

    ``selectors`` is a list (``selectors[k-1]`` is ``phi_k``) or a callable ``k -> phi_k``.
    Strict monotonicity is checked locally at every consulted argument ``m``:
    ``phi(m) >= m`` and ``phi(m - 1) < phi(m)``.
    """
    if n < 1:
        raise ContractError("n must be positive")
    return reindex(selectors, n, n, 0)


def reindex(selectors, n: int, m: int, k: int = 0) -> int:
    """``phi_{k+1} o ... o phi_n (m)``: the index of ``y_n``'s term inside stage ``k``."""
    for j in range(n, k, -1):
        phi = _selector(selectors, j)
        v = phi(m)
        if v < m or (m > 1 and phi(m - 1) >= v):
            raise ContractError(f"selector {j} is not strictly increasing at {m}")
        m = v
    return m


# -- chains ------------------------------------------------------------------

@dataclass
class Stage:
    level: int
    index: DirectedSet
    net: Net
    map: CofinalMap | None = None           # phi_level: A_level -> A_{level-1}
    certificate: Any = None
    label: str = ""
    info: dict = field(default_factory=dict)


class ExtractionChain:
    """Lazily built, memoised chain of subnet extractions.

    Stage ``n`` is produced by ``extractors[n-1].build(x^{n-1}, seed_n)``; the seed of
    each level is derived from the chain seed so rebuilding gives identical stages.
    """

    def __init__(self, base_net: Net, extractors: Sequence = (), depth: int | None = None, seed: int = 0):
        self.base_net = base_net
        self.extractors = list(extractors)
        self.depth = len(self.extractors) if depth is None else depth
        if self.depth < 0:
            raise ContractError("depth must be >= 0")
        if self.depth > len(self.extractors):
            raise ContractError("depth exceeds the number of extractors")
        self.seed = seed
        self._stages: list[Stage] = [Stage(0, base_net.index, base_net, label="base")]
        self._lock = threading.RLock()

    @classmethod
    def from_stages(cls, base_net: Net, stages: Sequence[tuple[DirectedSet, CofinalMap]]) -> "ExtractionChain":
        """Chain with explicitly given stages ``(A_n, phi_n)``."""
        chain = cls(base_net)
        chain.depth = len(stages)
        net = base_net
        for n, (D, m) in enumerate(stages, start=1):
            if m.source != D or m.target != chain._stages[-1].index:
                raise ContractError(f"stage {n} map does not go from A_{n} to A_{n-1}")
            net = subnet(net, m)
            chain._stages.append(Stage(n, D, net, m, label=m.label))
        return chain

    def seed_for(self, level: int) -> int:
        return (self.seed * 1_000_003 + level * 7919) % (2 ** 63)

    @property
    def built(self) -> int:
        return len(self._stages) - 1

    def stage(self, n: int) -> Stage:
        st = self._stages
        if 0 <= n < len(st):
            return st[n]
        if n < 0 or n > self.depth:
            raise ContractError(f"level {n} outside 0..{self.depth}")
        with self._lock:
            while self.built < n:
                k = self.built + 1
                prev = self._stages[-1]
                ex = self.extractors[k - 1]
                try:
                    res = ex.build(prev.net, self.seed_for(k))
                except Exception as exc:
                    raise ExtractionError(k, str(exc)) from exc
                self._stages.append(Stage(k, res.index, subnet(prev.net, res.map), res.map,
                                          res.certificate, getattr(ex, "label", ""), dict(res.info)))
        return self._stages[n]

    def index_set(self, n: int) -> DirectedSet:
        return self.stage(n).index

    def phi(self, n: int) -> CofinalMap:
        if n < 1:
            raise ContractError("phi_n is defined for n >= 1")
        return self.stage(n).map

    def stages_upto(self, n: int) -> list[Stage]:
        """The built stage list, guaranteed to reach level ``n`` (used by the hot paths)."""
        if n >= len(self._stages):
            self.stage(n)
        return self._stages

    def extend_down(self, top, level: int) -> tuple:
        """The unique compatible tuple of length ``level + 1`` ending in ``top``."""
        st = self.stages_upto(level)
        out = [top]
        for i in range(level, 0, -1):
            out.append(st[i].map.apply(out[-1]))
        out.reverse()
        return tuple(out)


# -- the diagonal index set --------------------------------------------------

def diag_member(chain: ExtractionChain, t: Sequence) -> bool:
    t = tuple(t)
    if not t:
        return False
    st = chain.stages_upto(len(t) - 1)
    for i in range(1, len(t)):
        A = st[i - 1].index
        v = st[i].map.apply(t[i])
        # equal values have equal canonical encodings; compare encodings only otherwise
        if v != t[i - 1] and A.encode(v) != A.encode(t[i - 1]):
            return False
    return True


def diag_leq(chain: ExtractionChain, b: Sequence, c: Sequence) -> bool:
    if len(b) > len(c):
        return False
    st = chain.stages_upto(len(b) - 1)
    for i, x in enumerate(b):
        if not st[i].index.leq(x, c[i]):
            return False
    return True


def diag_join(chain: ExtractionChain, b: Sequence, c: Sequence) -> tuple:
    """Upper bound of ``b`` and ``c`` in ``B`` built exactly as in the directedness argument.

    With ``len(b) <= len(c)``: ``t_0 = ub(b_0, c_0)``; for ``i = 1..q``,
    ``t_i`` dominates ``phi_i.witness(t_{i-1})``, ``b_i`` (``c_i`` past the end of ``b``)
    and ``c_i``; the result is the compatible tuple hanging from ``t_q``.
    """
    if len(b) > len(c):
        b, c = c, b
    p, q = len(b) - 1, len(c) - 1
    st = chain.stages_upto(q)
    t = st[0].index.upper_bound(b[0], c[0])
    for i in range(1, q + 1):
        A = st[i].index
        try:
            w = st[i].map.witness(t)
        except Exception as exc:
            raise DiagonalWitnessError(i, str(exc)) from exc
        low = b[i] if i <= p else c[i]
        t = A.upper_bound(A.upper_bound(w, low), c[i])
    return chain.extend_down(t, q)


class DiagonalDirectedSet(DirectedSet):
    """``(B, <=)`` for a chain, restricted to tuples of length at most ``max_level + 1``."""

    name = "diagonal"

    def __init__(self, chain: ExtractionChain, max_level: int | None = None,
                 join: Callable | None = None):
        self.chain = chain
        self.max_level = chain.depth if max_level is None else max_level
        self._join = join or diag_join

    def leq(self, b, c):
        return diag_leq(self.chain, b, c)

    def upper_bound(self, b, c):
        return self._join(self.chain, b, c)

    def random_tuple(self, level: int, rng) -> tuple:
        st = self.chain.stages_upto(level)
        return self.chain.extend_down(st[level].index.sample(rng), level)

    def sample(self, rng):
        return self.random_tuple(rng.randrange(self.max_level + 1), rng)

    def sample_above(self, b, rng):
        level = rng.randrange(len(b) - 1, self.max_level + 1)
        return self.upper_bound(b, self.random_tuple(level, rng))

    def encode(self, b):
        if not isinstance(b, tuple) or not 1 <= len(b) <= self.max_level + 1:
            raise MalformedElementError(f"{b!r} is not a diagonal index")
        st = self.chain.stages_upto(len(b) - 1)
        return encode_tuple([st[i].index.encode(x) for i, x in enumerate(b)])

    def decode(self, s):
        parts = decode_tuple(s)
        if len(parts) > self.max_level + 1:
            raise MalformedElementError(f"{s} is longer than the chain")
        st = self.chain.stages_upto(len(parts) - 1)
        b = tuple(st[i].index.decode(p) for i, p in enumerate(parts))
        if not diag_member(self.chain, b):
            raise MalformedElementError(f"{s} is not compatible")
        return b

    def validate(self, b):
        self.decode(self.encode(b))


def diagonal_set(chain: ExtractionChain, join: Callable | None = None) -> DiagonalDirectedSet:
    return DiagonalDirectedSet(chain, join=join)


def diagonal_net(chain: ExtractionChain, B: DiagonalDirectedSet | None = None) -> Net:
    B = B or DiagonalDirectedSet(chain)
    x = chain.base_net
    return Net(B, lambda b: x(b[0]), x.space, "diagonal")


def diag_root_map(chain: ExtractionChain, B: DiagonalDirectedSet | None = None) -> CofinalMap:
    """``b -> b_0``, with witness ``(phi_1(g_1), g_1)`` where ``g_1 = phi_1.witness(a_0)``."""
    if chain.depth < 1:
        raise ContractError("the root map needs a chain of depth >= 1")
    B = B or DiagonalDirectedSet(chain)

    def witness(a0):
        try:
            g1 = chain.phi(1).witness(a0)
        except Exception as exc:
            raise DiagonalWitnessError(1, str(exc)) from exc
        return (chain.phi(1).apply(g1), g1)

    return CofinalMap(B, chain.index_set(0), lambda b: b[0], witness, "root")


def diag_level_map(chain: ExtractionChain, n: int, anchor: Sequence,
                   B: DiagonalDirectedSet | None = None) -> CofinalMap:
    """``b -> b_n`` on the tail of ``B`` above ``anchor`` (length >= n + 2).

    Witness for ``a_n``: ``g_{n+1} = phi_{n+1}.witness(a_n)``, extended down to a compatible
    ``g``, then joined with the anchor.
    """
    anchor = tuple(anchor)
    if len(anchor) < n + 2:
        raise ContractError(f"anchor must have length >= {n + 2}, got {len(anchor)}")
    B = B or DiagonalDirectedSet(chain)
    tail = TailRestriction(B, anchor)

    def witness(an):
        try:
            g = chain.phi(n + 1).witness(an)
        except Exception as exc:
            raise DiagonalWitnessError(n + 1, str(exc)) from exc
        return B.upper_bound(anchor, chain.extend_down(g, n + 1))

    return CofinalMap(tail, chain.index_set(n), lambda b: b[n], witness, f"level {n}")


# -- sampled law harness ------------------------------------------------------

DIAGONAL_LAWS = ("join", "root_cofinal", "level_cofinal")


def check_diagonal_laws(chain: ExtractionChain, samples: int = 10_000, seed: int = 0, *,
                        join: Callable | None = None, rng: random.Random | None = None) -> dict:
    """Sample the three properties that make ``y`` a common eventual subnet.

    ``join``: the upper bound of two sampled tuples is compatible and dominates both.
    ``root_cofinal``: ``b >= root.witness(a_0)`` implies ``b_0 >= a_0``.
    ``level_cofinal``: on the tail above a random anchor, ``b >= psi_n.witness(a_n)``
    implies ``b_n >= a_n``. Returns ``{law: LawResult}``.
    """
    from .directed import LawResult
    rng = rng or random.Random(seed)
    B = DiagonalDirectedSet(chain, join=join)
    out = {law: LawResult(law) for law in DIAGONAL_LAWS}
    K = chain.depth

    for _ in range(samples):
        b, c = B.sample(rng), B.sample(rng)
        j = B.upper_bound(b, c)
        out["join"].record(diag_member(chain, j) and B.leq(b, j) and B.leq(c, j),
               lambda: (B.encode(b), B.encode(c), repr(j)))
    if K < 1:
        return out
    root = diag_root_map(chain, B)
    A0 = chain.index_set(0)
    for _ in range(samples):
        a0 = A0.sample(rng)
        w = root.witness(a0)
        b = B.sample_above(w, rng)
        out["root_cofinal"].record(diag_member(chain, w) and B.leq(w, b) and A0.leq(a0, b[0]),
               lambda: (A0.encode(a0), B.encode(b)))
    for _ in range(samples):
        n = rng.randint(0, K - 1)
        anchor = B.random_tuple(rng.randint(n + 1, K), rng)
        psi = diag_level_map(chain, n, anchor, B)
        An = chain.index_set(n)
        an = An.sample(rng)
        w = psi.witness(an)
        b = B.sample_above(w, rng)
        ok = diag_member(chain, w) and B.leq(anchor, w) and B.leq(w, b) and An.leq(an, b[n])
        out["level_cofinal"].record(ok, lambda: (str(n), B.encode(anchor), An.encode(an), B.encode(b)))
    return out


# -- verification runs -------------------------------------------------------

@dataclass
class LevelResult:
    level: int
    label: str
    mode: str | None
    eps_grid: list
    residuals: list = field(default_factory=list)
    passed: bool = True
    anchor: str | None = None
    witnesses: list = field(default_factory=list)
    error: str | None = None
    limit: Any = None

    @property
    def max_residual(self):
        vals = [r for r in self.residuals if r is not None]
        return max(vals) if vals else None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "property": self.label,
            "mode": self.mode,
            "eps_grid": list(self.eps_grid),
            "residuals": list(self.residuals),
            "max_residual": self.max_residual,
            "passed": self.passed,
            "anchor": self.anchor,
            "witnesses": list(self.witnesses),
            "limit": self.limit,
            "error": self.error,
        }


@dataclass
class DiagonalReport:
    depth: int
    levels: list[LevelResult]
    root_map: dict
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.root_map.get("violations", 0) == 0 and all(
            lv.passed for lv in self.levels)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "passed": self.passed,
            "root_map": dict(self.root_map),
            "levels": [lv.to_dict() for lv in self.levels],
            "error": self.error,
        }


@dataclass
class VerificationPlan:
    eps_grid: Sequence[float] = (1e-2,)
    samples: int = 200
    root_samples: int = 200
    seed: int = 0


class _Identity:
    label = "identity (closing stage)"

    def build(self, net, seed):
        from .extractors import Extraction  # local: extractors imports this module
        return Extraction(net.index, identity_map(net.index), None)


def run_diagonal(x: Net, extractors: Sequence, depth: int | None = None,
                 plan: VerificationPlan | None = None, *, chain_seed: int | None = None,
                 join: Callable | None = None) -> tuple[DiagonalReport, ExtractionChain]:
    """Build the chain, the diagonal net and its root map, and re-check every certificate.

    The certificate of level ``k`` is checked on the diagonal net over the tail above a
    length ``k + 2`` anchor through the level map; an identity stage is appended so the
    deepest level also has such anchors.
    """
    plan = plan or VerificationPlan()
    depth = len(extractors) if depth is None else depth
    exs = list(extractors[:depth]) + [_Identity()]
    chain = ExtractionChain(x, exs, depth + 1, seed=plan.seed if chain_seed is None else chain_seed)
    rng = random.Random(plan.seed)
    B = DiagonalDirectedSet(chain, join=join)
    levels: list[LevelResult] = []
    root: dict = {"checked": 0, "violations": 0}
    try:
        chain.stage(depth + 1)
    except ExtractionError as exc:
        failed = exc.level
        for k in range(1, depth + 1):
            lr = LevelResult(k, getattr(exs[k - 1], "label", ""), None, list(plan.eps_grid), passed=False)
            lr.error = str(exc) if k >= failed else None
            lr.passed = k < failed
            levels.append(lr)
        return DiagonalReport(depth, levels, root, error=str(exc)), chain

    y = diagonal_net(chain, B)
    root = _check_root(chain, B, plan.root_samples, rng)
    for k in range(1, depth + 1):
        levels.append(_check_level(chain, B, y, k, plan, rng))
    return DiagonalReport(depth, levels, root), chain


def _check_root(chain, B, samples, rng) -> dict:
    from .nets import check_cofinal
    try:
        res = check_cofinal(diag_root_map(chain, B), samples, rng=rng)
    except Exception as exc:
        return {"checked": 0, "violations": 1, "error": str(exc)}
    return {"checked": res.checked, "violations": res.violations,
            "counterexample": None if res.counterexample is None else list(res.counterexample)}


def _check_level(chain, B, y, k, plan, rng) -> LevelResult:
    st = chain.stage(k)
    cert = st.certificate
    lr = LevelResult(k, st.label, getattr(cert, "mode", None), list(plan.eps_grid))
    if cert is None:
        return lr
    lr.limit = _plain(cert.limit)
    anchor = B.random_tuple(k + 1, rng)
    lr.anchor = B.encode(anchor)
    psi = diag_level_map(chain, k, anchor, B)
    for eps in plan.eps_grid:
        try:
            a_k = cert.tail_witness(eps)
            theta = psi.witness(a_k)
        except Exception as exc:
            lr.residuals.append(None)
            lr.passed = False
            lr.error = f"eps={eps!r}: {exc}"
            continue
        lr.witnesses.append(B.encode(theta))
        worst = 0.0
        for _ in range(plan.samples):
            b = B.sample_above(theta, rng)
            if not (B.leq(theta, b) and B.leq(anchor, b)):
                lr.passed = False
                lr.error = f"sampled {B.encode(b)} is not above the certified tail"
                break
            d = cert.distance(y(b))
            worst = max(worst, d)
        lr.residuals.append(worst)
        if worst > eps:
            lr.passed = False
    return lr


def _plain(v):
    if isinstance(v, (int, float, str)) or v is None:
        return v
    coords = getattr(v, "coords", None)
    if coords is not None:
        return [float(c) for c in coords]
    try:
        return [float(c) for c in v]
    except TypeError:
        return repr(v)


# -- sequence-diagonal verification -------------------------------------------

@dataclass
class SequenceLevel:
    level: int
    stage_holds: bool
    tail_holds: bool
    diagonal_holds: bool
    violation: tuple | None

    def to_dict(self):
        return {"level": self.level, "stage_holds": self.stage_holds, "reindexed_tail_holds": self.tail_holds,
                "diagonal_holds": self.diagonal_holds,
                "violation": None if self.violation is None else list(self.violation)}


def run_sequence_diagonal(selectors, K: int, L: int,
                          prop: Callable[[int, Callable[[int], Any]], tuple | None],
                          term: Callable[[int], Any]) -> list[SequenceLevel]:
    """Check properties ``P_1..P_K`` along the sequence diagonal.

    ``term(i)`` is ``x_i``; ``prop(k, seq)`` inspects ``seq(1..L)`` and returns the first
    violating position ``(k, n, ...)`` or None. For each level the property is checked on
    stage ``k`` itself, on the tail ``y_k, y_{k+1}, ...`` re-indexed from 1 (the part that is
    a subsequence of stage ``k``) and on the diagonal ``y`` with its own positions.
    """
    out = []

    def y(n):
        return term(reindex(selectors, n, n, 0))

    for k in range(1, K + 1):
        stage_seq = lambda n, k=k: term(reindex(selectors, k, n, 0))
        tail_seq = lambda j, k=k: y(k - 1 + j)
        s = prop(k, stage_seq)
        t = prop(k, tail_seq)
        d = prop(k, y)
        out.append(SequenceLevel(k, s is None, t is None, d is None, d))
    return out
