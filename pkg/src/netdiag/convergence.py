"""Finite-dimensional value spaces: the vector lattice R^d, atomic measure spaces,
distances for the convergence modes and convergence certificates."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Any, Callable, Sequence

FLOAT_TOL = 1e-9
MODES = ("metric", "order", "un", "measure")


class DimensionError(ValueError):
    pass


class LatticeIdentityError(AssertionError):
    """An identity that holds in every vector lattice failed: an internal bug."""


@dataclass(frozen=True)
class LatticeVector:
    """A point of R^d with the componentwise order.

    ``exact`` vectors hold :class:`fractions.Fraction` coordinates and every lattice
    identity holds with equality; otherwise coordinates are floats.
    """

    coords: tuple

    @classmethod
    def of(cls, values: Sequence, exact: bool = False) -> "LatticeVector":
        if exact:
            return cls(tuple(Fraction(v) for v in values))
        return cls(tuple(float(v) for v in values))

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Rational) for c in self.coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def _zip(self, other):
        other = as_vector(other)
        if other.dim != self.dim:
            raise DimensionError(f"dimensions {self.dim} and {other.dim} differ")
        return zip(self.coords, other.coords)

    def __add__(self, other):
        return LatticeVector(tuple(a + b for a, b in self._zip(other)))

    def __sub__(self, other):
        return LatticeVector(tuple(a - b for a, b in self._zip(other)))

    def __neg__(self):
        return LatticeVector(tuple(-a for a in self.coords))

    def __mul__(self, s):
        return LatticeVector(tuple(s * a for a in self.coords))

    __rmul__ = __mul__

    def __abs__(self):
        return LatticeVector(tuple(abs(a) for a in self.coords))

    def __and__(self, other):
        return meet(self, other)

    def __or__(self, other):
        return join(self, other)

    def __le__(self, other):
        return all(a <= b for a, b in self._zip(other))

    def __ge__(self, other):
        return all(a >= b for a, b in self._zip(other))

    def __len__(self):
        return self.dim

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def is_positive(self) -> bool:
        return all(c >= 0 for c in self.coords)


def as_vector(v) -> LatticeVector:
    if isinstance(v, LatticeVector):
        return v
    if isinstance(v, (int, float, Fraction)):
        return LatticeVector((v,))
    return LatticeVector(tuple(v))


def meet(a, b) -> LatticeVector:
    a = as_vector(a)
    return LatticeVector(tuple(x if x <= y else y for x, y in a._zip(b)))


def join(a, b) -> LatticeVector:
    a = as_vector(a)
    return LatticeVector(tuple(y if x <= y else x for x, y in a._zip(b)))


def lattice_abs(a) -> LatticeVector:
    return abs(as_vector(a))


def sup_norm(a) -> Any:
    return max((abs(c) for c in as_vector(a).coords), default=0)


def un_distance(f, g, u, norm: str = "sup", weights: Sequence | None = None):
    """``|| |f - g| ^ u ||`` in the sup norm, or the weighted l1 norm of an atomic space."""
    u = as_vector(u)
    if not u.is_positive():
        raise ValueError("truncation vector u must be positive")
    t = meet(lattice_abs(as_vector(f) - as_vector(g)), u)
    if norm == "sup":
        return sup_norm(t)
    if norm == "l1":
        w = weights if weights is not None else [Fraction(1, t.dim) if t.exact else 1.0 / t.dim] * t.dim
        return sum(wi * c for wi, c in zip(w, t.coords))
    raise ValueError(f"unknown norm {norm!r}")


@dataclass(frozen=True)
class AtomicMeasureSpace:
    """``n`` atoms with positive weights summing to one (uniform by default)."""

    n: int
    weights: tuple = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one atom")
        w = tuple(self.weights) or tuple([Fraction(1, self.n)] * self.n)
        if len(w) != self.n or any(x <= 0 for x in w):
            raise ValueError("weights must be n positive numbers")
        if abs(sum(w) - 1) > FLOAT_TOL:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "weights", w)

    def measure(self, atoms) -> Any:
        return sum(self.weights[i] for i in atoms)

    def l1(self, f) -> Any:
        return sum(w * abs(c) for w, c in zip(self.weights, as_vector(f).coords))


def exceedance_measure(f, g, eps, space: AtomicMeasureSpace):
    """Weight of the atoms on which ``|f - g| > eps``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = as_vector(f) - as_vector(g)
    if d.dim != space.n:
        raise DimensionError("function and space sizes differ")
    return space.measure(i for i, c in enumerate(d.coords) if abs(c) > eps)


def lattice_cauchy_gap(zp, zq, tol: float = FLOAT_TOL):
    """``||zp - zq||``, after checking ``|| |zp-zq| ^ (|zp|+|zq|) || == ||zp - zq||``.

    The truncation is inactive because ``|a - b| <= |a| + |b|``; the check is exact for
    rational vectors and uses ``tol`` otherwise.
    """
    zp, zq = as_vector(zp), as_vector(zq)
    gap = sup_norm(zp - zq)
    truncated = un_distance(zp, zq, lattice_abs(zp) + lattice_abs(zq))
    exact = zp.exact and zq.exact
    if (truncated != gap) if exact else (abs(truncated - gap) > tol):
        raise LatticeIdentityError(f"truncated gap {truncated} differs from gap {gap}")
    return gap


# -- certificates ------------------------------------------------------------

def _identity(v):
    return v


@dataclass(eq=False)
class ConvergenceCertificate:
    """A limit candidate together with ``eps -> index`` tail witnesses.

    Claim: for every ``b >= tail_witness(eps)``, ``distance(project(x(b)), limit) <= eps``.
    ``resolution`` is the smallest ``eps`` the witness supports.
    """

    limit: Any
    tail_witness: Callable[[float], Any]
    mode: str = "metric"
    project: Callable[[Any], Any] = _identity
    truncation: Any = None
    space: AtomicMeasureSpace | None = None
    resolution: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "un" and self.truncation is None:
            raise ValueError("un certificates need a truncation vector")
        if self.mode == "measure" and self.space is None:
            raise ValueError("measure certificates need a measure space")

    def distance(self, value) -> float:
        v = self.project(value)
        if self.mode in ("metric", "order"):
            # order convergence on R^d is dominated by eps * (1, ..., 1): the sup norm
            return float(sup_norm(as_vector(v) - as_vector(self.limit)))
        if self.mode == "un":
            return float(un_distance(v, self.limit, self.truncation))
        return float(self._ky_fan(v))

    def _ky_fan(self, v):
        # smallest eps with mu(|v - limit| > eps) <= eps
        diffs = [abs(c) for c in (as_vector(v) - as_vector(self.limit)).coords]
        w = self.space.weights

        def tail(t):
            return sum(wi for wi, c in zip(w, diffs) if c > t)

        candidates = {0.0, *diffs, *(tail(t) for t in [0.0, *diffs])}
        return min(t for t in candidates if tail(t) <= t)


@dataclass
class CertEntry:
    eps: float
    anchor: str | None
    max_distance: float | None
    passed: bool
    offending: str | None = None
    error: str | None = None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class CertReport:
    entries: list[CertEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_residual(self):
        vals = [e.max_distance for e in self.entries if e.max_distance is not None]
        return max(vals) if vals else None

    def to_dict(self):
        return {"passed": self.passed, "entries": [e.to_dict() for e in self.entries]}


def check_certificate(net, cert: ConvergenceCertificate, eps_grid: Sequence[float],
                      samples_per_eps: int = 100, seed: int = 0, *,
                      rng: random.Random | None = None) -> CertReport:
    """Sample indices above each certified anchor and compare distances with ``eps``."""
    if any(e <= 0 for e in eps_grid):
        raise ValueError("eps grid must be positive")
    rng = rng or random.Random(seed)
    D = net.index
    report = CertReport()
    for eps in eps_grid:
        try:
            anchor = cert.tail_witness(eps)
        except Exception as exc:
            report.entries.append(CertEntry(eps, None, None, False, error=str(exc)))
            continue
        worst, offending = 0.0, None
        for _ in range(samples_per_eps):
            b = D.sample_above(anchor, rng)
            d = cert.distance(net(b))
            if d > worst:
                worst = d
            if d > eps and offending is None:
                offending = D.encode(b)
        report.entries.append(CertEntry(eps, D.encode(anchor), worst, offending is None, offending))
    return report
