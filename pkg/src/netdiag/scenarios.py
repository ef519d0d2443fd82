"""Desk-scale demonstrations of the diagonal principle, each producing a ScenarioReport.

Every scenario is a pure function of its parameters and seed, so two runs with the
same arguments give identical reports.
"""

from __future__ import annotations

import functools
import math
import random
from fractions import Fraction
from typing import Callable

from . import __version__
from .convergence import LatticeIdentityError, as_vector, lattice_cauchy_gap, sup_norm, un_distance
from .diagonal import (DiagonalDirectedSet, DiagonalWitnessError, ExtractionChain, ExtractionError,
                       VerificationPlan, diag_level_map, diagonal_net, reindex, run_diagonal,
                       run_sequence_diagonal)
from .directed import Naturals
from .extractors import (Extraction, Extractor, NoFrequentCellError, ball_tail_extractor,
                         coordinate_extractor, functional_extractor, operator_image_extractor,
                         operator_norm)
from .instances import constant_net, oscillating_net
from .nets import CofinalMap, ContractError, Net, WitnessSearchError
from .report import Check, ScenarioReport

TOL = 1e-9

# Failures of a search or witness inside a scenario: reported with exit code 3.
EXTRACTION_ERRORS = (ExtractionError, DiagonalWitnessError, WitnessSearchError, NoFrequentCellError)


def _report(name, params, seed, **kw) -> ScenarioReport:
    return ScenarioReport(name, params, seed, version=__version__, **kw)


def _levels(diag_report) -> list[dict]:
    return [lv.to_dict() for lv in diag_report.levels]


# -- product compactness -------------------------------------------------------

def _value_map_instead_of_witness(ex: Extractor) -> Extractor:
    """Negative control: the stage map sends a pair ``(a, b)`` to the first index above ``a``
    whose value is outside the cell, instead of the witness ``b`` where the net is inside.

    The mutated map stays cofinal, so the chain builds and only the certificates fail.
    """

    def build(net, seed):
        res = ex.build(net, seed)
        m, stage = res.map, res.index
        S, parent = stage.S, stage.parent

        def outside(p):
            for count, b in enumerate(parent.enumerate_above(p[0])):
                if not S(net(b)):
                    return b
                if count > 100_000:
                    break
            return p[1]

        bad = CofinalMap(m.source, m.target, outside, m.witness, m.label + " (mutated)")
        return Extraction(res.index, bad, res.certificate, dict(res.info, mutated=True))

    return Extractor(ex.label, build)


def product_compactness(coords: int = 4, m_max: int = 10, eps: float = 1e-2, samples: int = 1000,
                        seed: int = 0, constant: bool = False,
                        negative_control: bool = False) -> ScenarioReport:
    """An oscillating net in ``[0, 1]^N`` over ``N x N``; one bisection extractor per
    coordinate ``1..coords``; every coordinate is re-checked on the diagonal net."""
    if coords < 1:
        raise ContractError("coords must be >= 1")
    params = {"coords": coords, "m_max": m_max, "eps": eps, "samples": samples,
              "net": "constant" if constant else "oscillating", "negative_control": negative_control}
    x = constant_net(0.5) if constant else oscillating_net()
    exs = [coordinate_extractor(k, 0.0, 1.0, m_max) for k in range(1, coords + 1)]
    if negative_control:
        # Only the deepest stage is mutated: searches in later stages rely on the stage
        # maps being the frequent-pair projections.
        exs[-1] = _value_map_instead_of_witness(exs[-1])
    plan = VerificationPlan(eps_grid=(eps,), samples=samples, root_samples=200, seed=seed)
    diag, chain = run_diagonal(x, exs, coords, plan)
    rep = _report("product-compactness", params, seed, levels=_levels(diag), error=diag.error)
    rep.checks.append(Check("root map cofinal", diag.root_map.get("violations", 1) == 0, {"root_map": diag.root_map}))
    if diag.error is None:
        nested = [chain.stage(k).info.get("nested", False) for k in range(1, coords + 1)]
        rep.checks.append(Check("bisection cells nested", all(nested), {"cells": [chain.stage(k).info.get("cells") for k in range(1, coords + 1)]}))
    return rep


# -- metric compactness ----------------------------------------------------------

def _orbit(n: int) -> tuple:
    return ((n * math.sqrt(2.0)) % 1.0, (n * math.sqrt(3.0)) % 1.0)


def metric_compactness(k_max: int = 5, length: int = 200, seed: int = 0, constant: bool = False,
                       negative_control: bool = False) -> ScenarioReport:
    """The dense orbit ``(frac(n sqrt 2), frac(n sqrt 3))``; stage ``k`` keeps the terms in a
    ball of radius ``1/k``; the diagonal subsequence must be ``2/k``-Cauchy after position ``k``.

    The negative control checks the plain sequence instead of the diagonal.
    """
    params = {"k_max": k_max, "length": length, "sequence": "constant" if constant else "orbit",
              "negative_control": negative_control}
    x = Net(Naturals(), (lambda n: (0.3, 0.7)) if constant else _orbit, "metric", "orbit")
    exs = []
    for k in range(1, k_max + 1):
        grid = [j / k for j in range(k + 1)]
        centers = [(a, b) for a in grid for b in grid]
        exs.append(ball_tail_extractor(centers, 1.0 / k, subsequence=True, label=f"tail in a ball of radius 1/{k}"))
    chain = ExtractionChain(x, exs, k_max, seed=seed)
    rep = _report("metric-compactness", params, seed)
    try:
        chain.stage(k_max)
    except ExtractionError as exc:
        rep.error = str(exc)
        return rep
    phis = [chain.phi(k).apply for k in range(1, k_max + 1)]
    ident = lambda m: m
    selectors = lambda k: phis[k - 1] if k <= k_max else ident
    if negative_control:
        pos = list(range(1, length + 1))
    else:
        pos = [reindex(selectors, n, n, 0) for n in range(1, length + 1)]
    ys = [x(p) for p in pos]
    for k in range(1, k_max + 1):
        cert = chain.stage(k).certificate
        tail = ys[k - 1:]
        resid = max(cert.distance(v) for v in tail)
        gap = max(sup_norm(as_vector(a) - as_vector(b)) for a in tail for b in tail)
        rep.levels.append({
            "level": k, "property": chain.stage(k).label, "mode": cert.mode,
            "center": list(cert.limit), "radius": 1.0 / k,
            "max_distance_to_center": resid, "cauchy_gap": gap, "gap_bound": 2.0 / k,
            "passed": resid <= 1.0 / k + TOL and gap <= 2.0 / k + TOL,
        })
    rep.checks.append(Check("positions strictly increasing", all(a < b for a, b in zip(pos, pos[1:])),
                            {"first_positions": pos[:10]}))
    return rep


# -- Alaoglu -----------------------------------------------------------------------

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def rotating_functional(m: int, dim: int, scale: float = 1.0) -> tuple:
    """Point of the ball of radius ``scale`` in R^dim, rotating by golden-ratio angles.

    Coordinates are paired into planes, each rotating at its own angle; for even ``dim``
    the point lies on the sphere, for odd ``dim`` the unpaired coordinate only oscillates.
    """
    groups = dim // 2 + dim % 2
    r = scale / math.sqrt(groups)
    out = []
    for g in range(groups):
        theta = 2.0 * math.pi * (((g + 1) * GOLDEN) % 1.0)
        out.append(r * math.cos(m * theta))
        if len(out) < dim:
            out.append(r * math.sin(m * theta))
    return tuple(out)


def alaoglu(dim: int = 2, dense: int = 6, m_max: int = 8, eps: float = 1e-2, samples: int = 200,
            seed: int = 0, constant: bool = False, negative_control: bool = False) -> ScenarioReport:
    """Functionals ``y_m`` on Euclidean ``R^dim``; one extractor per dense point makes
    ``y(x_j)`` converge; the limit values must satisfy ``|y*(x_j)| <= |x_j|``.

    The negative control uses functionals of norm 2, so the limit leaves the unit ball.
    """
    params = {"dim": dim, "dense": dense, "m_max": m_max, "eps": eps, "samples": samples,
              "net": "constant" if constant else "rotating", "negative_control": negative_control}
    rng = random.Random(seed)
    pts = [tuple(rng.uniform(-1.0, 1.0) for _ in range(dim)) for _ in range(dense)]
    scale = 2.0 if negative_control else 1.0
    if constant:
        y0 = (0.6,) + (0.0,) * (dim - 1)
        x = Net(Naturals(), lambda m: y0, "weak*", "constant functional")
    else:
        values = functools.lru_cache(maxsize=None)(lambda m: rotating_functional(m, dim, scale))
        x = Net(Naturals(), values, "weak*", "rotating functionals")
    exs = [functional_extractor(pts, j, m_max, bound=scale) for j in range(dense)]
    plan = VerificationPlan(eps_grid=(eps,), samples=samples, root_samples=200, seed=seed)
    diag, chain = run_diagonal(x, exs, dense, plan)
    rep = _report("alaoglu", params, seed, levels=_levels(diag), error=diag.error)
    rep.checks.append(Check("root map cofinal", diag.root_map.get("violations", 1) == 0, {"root_map": diag.root_map}))
    if diag.error is None:
        rows = []
        for j, p in enumerate(pts):
            v = chain.stage(j + 1).certificate.limit
            norm = math.sqrt(sum(c * c for c in p))
            rows.append({"point": list(p), "limit_value": v, "norm": norm, "ok": abs(v) <= norm + TOL})
        rep.checks.append(Check("limit in the unit ball", all(r["ok"] for r in rows), {"dense_points": rows}))
    return rep


# -- un-closedness ---------------------------------------------------------------

def _matrix(rng, d):
    return [[rng.uniform(-1.0, 1.0) for _ in range(d)] for _ in range(d)]


def _mat_add(A, B, c=1.0):
    return [[a + c * b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _matvec(T, v):
    return tuple(sum(t * c for t, c in zip(row, v)) for row in T)


def _random_rational_vector(rng, d):
    return as_vector([Fraction(rng.randint(-999, 999), rng.randint(1, 99)) for _ in range(d)])


def un_closedness(dim: int = 3, ops: int = 6, eps: float = 1e-3, m_max: int = 40, samples: int = 200,
                  lattice_pairs: int = 10_000, budget: int = 2_000, seed: int = 0, zero_s: bool = False,
                  negative_control: bool = False) -> ScenarioReport:
    """Operators ``T_n = T + 2^-n S`` on ``R^dim`` (sup norm, truncation ``u = (1, ..., 1)``).

    Stage ``n`` makes ``T_n y`` un-converge to ``z_n``; one more stage does the same for
    ``T`` itself and gives ``z``. The checks are the Cauchy estimate for ``(z_n)``, the limsup
    bound at each ``n``, the closure bound at ``n = ops`` and the truncation identity in exact
    arithmetic. The negative control uses ``T_n = T + (-1)^n S``, which does not converge.
    """
    params = {"dim": dim, "ops": ops, "eps": eps, "m_max": m_max, "samples": samples,
              "lattice_pairs": lattice_pairs, "budget": budget, "zero_s": zero_s,
              "negative_control": negative_control}
    rng = random.Random(seed)
    T = _matrix(rng, dim)
    S = [[0.0] * dim for _ in range(dim)] if zero_s else _matrix(rng, dim)
    coef = (lambda n: (-1.0) ** n) if negative_control else (lambda n: 2.0 ** -n)
    Ts = [_mat_add(T, S, coef(n)) for n in range(1, ops + 1)]
    values = [tuple(rng.uniform(-1.0, 1.0) for _ in range(dim)) for _ in range(5)]
    from .instances import N2
    x = Net(N2, lambda a: values[(a[0] + 2 * a[1]) % len(values)], "vector lattice", "finitely valued")
    u = (1.0,) * dim
    # the net takes five values, so hits are dense and a small search budget suffices
    exs = [operator_image_extractor(Tn, u, m_max, bound=1.0, budget=budget, label=f"T_{n} y un-converges")
           for n, Tn in enumerate(Ts, start=1)]
    exs.append(operator_image_extractor(T, u, m_max, bound=1.0, budget=budget, label="T y un-converges"))
    plan = VerificationPlan(eps_grid=(eps,), samples=samples, root_samples=200, seed=seed)
    diag, chain = run_diagonal(x, exs, ops + 1, plan)
    rep = _report("un-closedness", params, seed, levels=_levels(diag), error=diag.error)
    if diag.error is not None:
        return rep
    rep.checks.append(Check("root map cofinal", diag.root_map.get("violations", 1) == 0, {"root_map": diag.root_map}))

    B = DiagonalDirectedSet(chain)
    y = diagonal_net(chain, B)
    srng = random.Random(seed + 1)
    zs = [as_vector(chain.stage(n).certificate.limit) for n in range(1, ops + 1)]
    z = as_vector(chain.stage(ops + 1).certificate.limit)
    # tail samples for the limsup bound, taken beyond each level's certified tail
    tails = []
    for n in range(1, ops + 1):
        cert = chain.stage(n).certificate
        anchor = B.random_tuple(n + 1, srng)
        theta = diag_level_map(chain, n, anchor, B).witness(cert.tail_witness(cert.resolution))
        tails.append([y(B.sample_above(theta, srng)) for _ in range(samples)])
    values_seen = [y(B.sample(srng)) for _ in range(samples)] + [v for t in tails for v in t]
    M = max(sup_norm(v) for v in values_seen)

    # (a) Cauchy estimate
    worst, rows = -math.inf, []
    for p in range(ops):
        for q in range(p + 1, ops):
            gap = lattice_cauchy_gap(zs[p], zs[q])
            bound = operator_norm(_mat_add(Ts[p], Ts[q], -1.0)) * M
            worst = max(worst, gap - bound)
            rows.append({"p": p + 1, "q": q + 1, "gap": float(gap), "bound": bound})
    rep.checks.append(Check("cauchy estimate", worst <= TOL, {"M": M, "max_excess": worst, "pairs": rows}))

    # (b) limsup bound at each n: sampled tail of the level-n certificate
    rows, ok = [], True
    cert_T = chain.stage(ops + 1).certificate
    for n in range(1, ops + 1):
        cert = chain.stage(n).certificate
        resid = max(un_distance(_matvec(T, v), z, u) for v in tails[n - 1])
        bound = (operator_norm(_mat_add(T, Ts[n - 1], -1.0)) * M + float(sup_norm(zs[n - 1] - z))
                 + cert.resolution + cert_T.resolution)
        ok = ok and resid <= bound + TOL
        rows.append({"n": n, "residual": float(resid), "bound": bound})
    rep.checks.append(Check("limsup bound", ok, {"levels": rows}))

    # closure: the bound at n = ops is of order 2^-ops
    bounds = [r["bound"] for r in rows]
    target = 2.0 ** (1 - ops) * operator_norm(S) * M
    slack = chain.stage(ops).certificate.resolution + cert_T.resolution
    rep.checks.append(Check("closure bound", min(bounds) <= target + slack + TOL,
                            {"min_bound": min(bounds), "target": target}))

    # exact truncation identity on random rational pairs and on the z_n themselves
    lrng = random.Random(seed + 2)
    bad = 0
    exact_zs = [as_vector([Fraction(c) for c in zp]) for zp in zs]
    for i in range(lattice_pairs):
        if i < len(exact_zs) ** 2:
            a, b = exact_zs[i // len(exact_zs)], exact_zs[i % len(exact_zs)]
        else:
            a, b = _random_rational_vector(lrng, dim), _random_rational_vector(lrng, dim)
        try:
            lattice_cauchy_gap(a, b)
        except LatticeIdentityError:
            bad += 1
    rep.checks.append(Check("truncation identity (exact)", bad == 0, {"pairs": lattice_pairs, "mismatches": bad}))
    return rep


# -- the Remark on subsequences ------------------------------------------------------

class RemarkSelectors:
    """Selectors ``phi_k`` with ``sigma_k = phi_1 o ... o phi_k`` satisfying
    ``sigma_k(n) >= k^(2n)``, i.e. ``x_{sigma_k(n)} <= k^-n`` for ``x_m = 1/sqrt(m)``.

    ``phi_k(m) = m + g_k(m) - 1`` where ``g_k(m)`` is the least ``j`` with
    ``sigma_{k-1}(j) >= k^(2m)``. ``g_k`` is nondecreasing, so ``phi_k`` is strictly
    increasing, and ``phi_1`` is the identity.
    """

    def __init__(self):
        self._memo: dict[tuple[int, int], int] = {}

    def sigma(self, k: int, j: int) -> int:
        for i in range(k, 0, -1):
            j = self.phi(i, j)
        return j

    def phi(self, k: int, m: int) -> int:
        key = (k, m)
        v = self._memo.get(key)
        if v is None:
            v = self._memo[key] = m + self._least(k, m) - 1
        return v

    def _least(self, k, m):
        target = k ** (2 * m)
        if self.sigma(k - 1, 1) >= target:
            return 1
        lo, hi = 1, 2
        while self.sigma(k - 1, hi) < target:
            lo, hi = hi, 2 * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.sigma(k - 1, mid) >= target:
                hi = mid
            else:
                lo = mid
        return hi

    def __call__(self, k: int) -> Callable[[int], int]:
        return lambda m: self.phi(k, m)


def _prop_violation(length: int):
    def prop(k, seq):
        # positions m encode x_m = 1/sqrt(m): x_m <= k^-n  iff  m >= k^(2n)
        for n in range(1, length + 1):
            m = seq(n)
            if m < k ** (2 * n):
                return (k, n, m)
        return None
    return prop


def _x_value(m: int) -> float:
    return 1.0 / math.sqrt(m)


def _random_subsequence(rng, length, start=1):
    out, m = [], start - 1
    for _ in range(length):
        m += 1 + rng.randint(0, 3)
        out.append(m)
    return out


def counterexample_remark(levels: int = 6, length: int = 12, tested: int = 20,
                          seed: int = 0) -> ScenarioReport:
    """``x_m = 1/sqrt(m)`` and ``P_k``: ``|y_n| <= k^-n`` for every ``n``.

    Each ``P_k`` survives passing to a subsequence, and every stage of the extraction
    satisfies its own ``P_k``. No sequence satisfies all of them, because its first term is
    positive, and the diagonal indeed fails them. Its tails, re-indexed, still satisfy
    each ``P_k``: only preservation under eventual subsequences makes the diagonal step work.
    """
    params = {"levels": levels, "length": length, "tested": tested}
    rep = _report("counterexample-remark", params, seed, expected_failure=True)
    sel = RemarkSelectors()
    prop = _prop_violation(length)
    seq_levels = run_sequence_diagonal(sel, levels, length, prop, lambda m: m)
    rng = random.Random(seed)

    for lv in seq_levels:
        k = lv.level
        stage = lambda n, k=k: sel.sigma(k, n)
        # (a) subsequences of stage k keep P_k
        kept = all(prop(k, lambda n, r=r: sel.sigma(k, r[n - 1])) is None
                   for r in (_random_subsequence(rng, length) for _ in range(tested)))
        # (b) an eventual subsequence: the stage with x_1 in front
        shifted = lambda n, stage=stage: 1 if n == 1 else stage(n - 1)
        sv = prop(k, shifted)
        entry = lv.to_dict()
        entry.update({
            "subsequences_keep_property": kept,
            "shifted_violation": None if sv is None else {"k": sv[0], "n": sv[1], "position": str(sv[2]),
                                                          "value": _x_value(sv[2]), "bound": float(k) ** -sv[1]},
        })
        # stage k and its subsequences satisfy P_k; the shifted copy must violate it when k >= 2
        entry["passed"] = lv.stage_holds and lv.tail_holds and kept and (sv is not None or k == 1)
        if lv.violation is not None:
            kk, n, m = lv.violation
            entry["violation"] = {"k": kk, "n": n, "position": str(m), "value": _x_value(m), "bound": float(kk) ** -n}
        rep.levels.append(entry)

    # (c) every tested subsequence violates some P_k
    candidates = {"diagonal": lambda n: reindex(sel, n, n, 0), "identity": lambda n: n}
    for i in range(tested):
        r = _random_subsequence(rng, length)
        candidates[f"random {i + 1}"] = lambda n, r=r: r[n - 1]
    rows = []
    for name, seq in candidates.items():
        witness = None
        for k in range(2, math.isqrt(seq(1)) + 2):
            v = prop(k, seq)
            if v is not None:
                witness = {"k": v[0], "n": v[1], "position": str(v[2]), "value": _x_value(v[2]),
                           "bound": float(v[0]) ** -v[1]}
                break
        rows.append({"subsequence": name, "first_positions": [str(seq(n)) for n in range(1, min(length, 5) + 1)],
                     "violation": witness})
    rep.checks.append(Check("every tested subsequence violates some P_k",
                            all(r["violation"] is not None for r in rows), {"subsequences": rows}))
    diag_fails = any(lv.violation is not None for lv in seq_levels)
    rep.checks.append(Check("diagonal violates some P_k", diag_fails, {}))
    return rep


SCENARIOS = {
    "product-compactness": product_compactness,
    "metric-compactness": metric_compactness,
    "alaoglu": alaoglu,
    "un-closedness": un_closedness,
    "counterexample-remark": counterexample_remark,
}


def run_scenario(name: str, **kwargs) -> ScenarioReport:
    """Run a scenario; search and witness failures become an ``error`` verdict."""
    fn = SCENARIOS[name]
    try:
        return fn(**kwargs)
    except EXTRACTION_ERRORS as exc:
        rep = _report(name, dict(kwargs), kwargs.get("seed", 0))
        rep.error = f"{type(exc).__name__}: {exc}"
        return rep
