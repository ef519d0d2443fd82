"""Extractors: given a net, produce a further subnet together with a certificate.

Every extractor here works the same way: find a cell (a ball, or a box obtained by
repeated halving) in which the net is frequently, by budgeted search from a few probe
indices, then pass to the subnet that lives in that cell.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .convergence import ConvergenceCertificate, as_vector, sup_norm
from .nets import (CofinalMap, Net, WitnessSearchError, frequent_subnet, frequent_subsequence,
                   frequent_witness, identity_map)

DEFAULT_BUDGET = 10_000
DEFAULT_PROBES = 6


class NoFrequentCellError(RuntimeError):
    """No cell of the cover showed frequent evidence within the search budget."""


@dataclass
class Extraction:
    index: Any
    map: CofinalMap
    certificate: ConvergenceCertificate | None = None
    info: dict = field(default_factory=dict)


@dataclass
class Extractor:
    label: str
    build: Callable[[Net, int], Extraction]


def identity_extractor(label: str = "identity") -> Extractor:
    return Extractor(label, lambda net, seed: Extraction(net.index, identity_map(net.index)))


def probe_indices(net: Net, seed: int, count: int = DEFAULT_PROBES) -> list:
    """A base index and ``count - 1`` indices sampled above it, reproducible from ``seed``."""
    rng = random.Random(seed)
    D = net.index
    base = D.sample(rng)
    return [base] + [D.sample_above(base, rng) for _ in range(count - 1)]


def _frequent_on(net, S, probes, budget):
    fw = frequent_witness(net, S, budget)
    try:
        for p in probes:
            fw(p)
    except WitnessSearchError:
        return None
    return fw


def _hit_count(net, S, probes, window, skip):
    """Fewest ``S``-hits in scan steps ``skip .. skip + window`` above any probe.

    Counting past ``skip`` judges where the net goes rather than where it is near the
    probes, which matters for slowly converging nets.
    """
    D = net.index
    worst = None
    for p in probes:
        hits = 0
        for b in itertools.islice(D.scan_above(p), skip, skip + window):
            if b is not None and S(net(b)):
                hits += 1
        worst = hits if worst is None else min(worst, hits)
    return worst


def _pass_to_cell(net, S, fw, probes, budget, subsequence, label):
    if subsequence:
        stage, m = frequent_subsequence(net, S, budget, label)
    else:
        stage, m = frequent_subnet(net, S, fw, label)
    return stage, m, m.witness(probes[0])


def _tail_witness(anchor, resolution: float):
    def tail_witness(eps):
        if eps < resolution:
            raise ValueError(f"eps={eps!r} is below the certified resolution {resolution!r}")
        return anchor
    return tail_witness


def _sup_dist(a, b):
    return float(sup_norm(as_vector(a) - as_vector(b)))


def ball_tail_extractor(centers: Sequence, radius: float, *, project: Callable = lambda v: v,
                        label: str | None = None, budget: int = DEFAULT_BUDGET,
                        probes: int = DEFAULT_PROBES, subsequence: bool = False) -> Extractor:
    """Pass to a subnet lying in the first ball ``B(center, radius)`` the net is frequently in.

    ``centers`` must be a ``radius``-cover of the (projected) value space in the sup norm.
    """
    centers = list(centers)
    label = label or f"tail in a ball of radius {radius:g}"

    def build(net, seed):
        ps = probe_indices(net, seed, probes)
        for idx, c in enumerate(centers):
            S = lambda v, c=c: _sup_dist(project(v), c) <= radius
            fw = _frequent_on(net, S, ps, budget)
            if fw is not None:
                break
        else:
            raise NoFrequentCellError(f"no ball of radius {radius} is frequently visited")
        stage, m, anchor = _pass_to_cell(net, S, fw, ps, budget, subsequence, label)
        cert = ConvergenceCertificate(c, _tail_witness(anchor, radius), "metric", project,
                                      resolution=radius, label=label)
        return Extraction(stage, m, cert, {"cell": idx, "center": c, "radius": radius})

    return Extractor(label, build)


def box_extractor(projections: Sequence[Callable], intervals: Sequence[tuple], m_max: int, *,
                  mode: str = "metric", truncation=None, label: str = "box",
                  budget: int = DEFAULT_BUDGET, probes: int = DEFAULT_PROBES,
                  subsequence: bool = False, scalar: bool = False, window: int = 256) -> Extractor:
    """Nested halving, one projected coordinate after another.

    For coordinate ``j`` the interval is halved ``m_max`` times, each time keeping a half
    the net (already confined to the cells of earlier coordinates) is frequently in. If
    both qualify, the one with more hits in a ``window`` of scan steps starting
    ``budget // 4`` steps above the probes is kept, the lower one on ties. A single frequent subnet is then taken
    in the final box. Its certificate limit is the box center.
    """
    projections = list(projections)
    intervals = [tuple(iv) for iv in intervals]
    if len(projections) != len(intervals):
        raise ValueError("one interval per projection")

    def build(net, seed):
        ps = probe_indices(net, seed, probes)
        cells: list[tuple] = []
        nests: list[list] = []
        fw = None
        for j, (proj, (lo, hi)) in enumerate(zip(projections, intervals)):
            nest = [(lo, hi)]
            l, h = lo, hi
            for m in range(1, m_max + 1):
                mid = (l + h) / 2
                found = []
                for a, b in ((l, mid), (mid, h)):
                    S = _box_predicate(projections[:j + 1], cells + [(a, b)])
                    cand = _frequent_on(net, S, ps, budget)
                    if cand is not None:
                        found.append((S, a, b, cand))
                if not found:
                    raise NoFrequentCellError(f"coordinate {j}: neither half of [{l}, {h}] is frequently visited")
                if len(found) == 2:
                    # the denser half avoids thin slivers whose hits are too sparse for the
                    # search budget further down the chain
                    lower, upper = (_hit_count(net, S, ps, window, budget // 4) for S, *_ in found)
                    found = found[1:] if upper > lower else found
                _, l, h, fw = found[0]
                nest.append((l, h))
            if m_max == 0:
                S = _box_predicate(projections[:j + 1], cells + [(l, h)])
                fw = _frequent_on(net, S, ps, budget)
                if fw is None:
                    raise NoFrequentCellError(f"coordinate {j}: [{l}, {h}] is not frequently visited")
            cells.append((l, h))
            nests.append(nest)
        S = _box_predicate(projections, cells)
        stage, m, anchor = _pass_to_cell(net, S, fw, ps, budget, subsequence, label)
        centers = tuple((a + b) / 2 for a, b in cells)
        resolution = max((b - a) / 2 for a, b in cells)
        if scalar:
            p0 = projections[0]
            limit, project = centers[0], p0
        else:
            limit = centers
            project = lambda v: tuple(p(v) for p in projections)
        cert = ConvergenceCertificate(limit, _tail_witness(anchor, resolution), mode, project,
                                      truncation=truncation, resolution=resolution, label=label)
        info = {"cells": cells, "nests": nests, "nested": all(_is_nested(n) for n in nests)}
        return Extraction(stage, m, cert, info)

    return Extractor(label, build)


def _box_predicate(projections, cells):
    pairs = list(zip(projections, cells))

    def S(v):
        for p, (a, b) in pairs:
            t = p(v)
            if t < a or t > b:
                return False
        return True

    return S


def _is_nested(nest) -> bool:
    return all(a0 <= a1 and b1 <= b0 for (a0, b0), (a1, b1) in zip(nest, nest[1:]))


def coordinate_extractor(k: int, lo: float = 0.0, hi: float = 1.0, m_max: int = 10, **kw) -> Extractor:
    """Subnet whose ``k``-th coordinate converges; limit within ``(hi-lo)/2**(m_max+1)``."""
    kw.setdefault("label", f"coordinate {k} converges")
    return box_extractor([lambda v: v[k]], [(lo, hi)], m_max, scalar=True, **kw)


def functional_extractor(dense_points: Sequence[Sequence[float]], n: int, m_max: int = 8,
                         bound: float = 1.0, **kw) -> Extractor:
    """Subnet of functionals (vectors) of norm ``<= bound`` along which ``y*(x_n)`` converges."""
    x = tuple(float(c) for c in dense_points[n])
    r = bound * math.sqrt(sum(c * c for c in x))
    kw.setdefault("label", f"evaluation at dense point {n} converges")
    return box_extractor([lambda v: sum(a * b for a, b in zip(v, x))], [(-r, r)], m_max, scalar=True, **kw)


def matvec(T: Sequence[Sequence[float]], v: Sequence[float]) -> tuple:
    return tuple(sum(t * c for t, c in zip(row, v)) for row in T)


def operator_norm(T: Sequence[Sequence[float]]) -> float:
    """Operator norm on (R^d, sup norm): the largest absolute row sum."""
    return max(sum(abs(t) for t in row) for row in T)


def operator_image_extractor(T: Sequence[Sequence[float]], u: Sequence[float], m_max: int = 40,
                             bound: float = 1.0, **kw) -> Extractor:
    """Subnet along which ``T y`` un-converges (truncation ``u``), for nets bounded by ``bound``."""
    rows = [tuple(float(t) for t in row) for row in T]
    projections = [lambda v, row=row: sum(t * c for t, c in zip(row, v)) for row in rows]
    intervals = [(-sum(abs(t) for t in row) * bound, sum(abs(t) for t in row) * bound) for row in rows]
    kw.setdefault("label", "image un-converges")
    return box_extractor(projections, intervals, m_max, mode="un", truncation=as_vector(u), **kw)
