"""Exact calculus on piecewise-analytic functions with step/delta bookkeeping.

Every segment law is a finite sum of monomials ``c * t**p * exp(K*t)``.
Power laws, exponentials and constants are the single-term members of that
family, and the family is closed under differentiation, products and
division by a single-term piece, which is all the curvature formulas need.
Exponents ``p`` and rates ``K`` are held as :class:`fractions.Fraction` so
that like terms merge exactly (``t**(2/3-1)`` squared over ``t**(4/3)``
really is ``t**-2``).

A :class:`GenFun` pairs a :class:`PiecewiseFn` regular part with a list of
:class:`DeltaAtom`.  The unit step follows mu(0) = 0, so a piecewise function
evaluated exactly at a breakpoint returns the value of the left segment.
"""
from __future__ import annotations

import bisect
import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    AmbiguousPoint,
    ArityMismatch,
    DomainError,
    QuadratureFailure,
    SegmentationError,
    UnsupportedDistribution,
)

#: relative zero tolerance for atom weights and one-sided-limit comparisons
ZERO_TOL = 1e-12
#: absolute tolerance of the adaptive quadrature used by :func:`weak_pairing`
QUAD_TOL = 1e-10

# merged coefficients smaller than this fraction of their inputs are roundoff
_CANCEL = 64 * np.finfo(float).eps


def as_fraction(x) -> Fraction:
    """Exact rational for an exponent or rate (``"2/3"``, ``0.5``, ``Fraction``)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, int):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite exponent {x!r}")
    return Fraction(x)


def _pow(t, e: float):
    if isinstance(t, np.ndarray):
        return np.power(t, e)
    return math.pow(t, e)


def _exp(x):
    if isinstance(x, np.ndarray):
        return np.exp(x)
    return math.exp(x)


@dataclass(frozen=True)
class Monomial:
    """``coef * t**power * exp(rate*t)``."""

    coef: float
    power: Fraction = Fraction(0)
    rate: Fraction = Fraction(0)
    _pf: float = field(init=False, repr=False, compare=False)
    _rf: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coef", float(self.coef))
        object.__setattr__(self, "power", as_fraction(self.power))
        object.__setattr__(self, "rate", as_fraction(self.rate))
        object.__setattr__(self, "_pf", float(self.power))
        object.__setattr__(self, "_rf", float(self.rate))

    def __call__(self, t):
        out = self.coef
        if self.power != 0:
            out = out * _pow(t, self._pf)
        if self.rate != 0:
            out = out * _exp(self._rf * t)
        if isinstance(t, np.ndarray) and np.ndim(out) == 0:
            out = np.full(t.shape, out)
        return out

    def derivative(self) -> list[Monomial]:
        out = []
        if self.power != 0:
            out.append(Monomial(self.coef * self._pf, self.power - 1, self.rate))
        if self.rate != 0:
            out.append(Monomial(self.coef * self._rf, self.power, self.rate))
        return out


def _normalize(terms: Iterable[Monomial]) -> tuple[Monomial, ...]:
    groups: dict[tuple[Fraction, Fraction], list[float]] = {}
    for m in terms:
        groups.setdefault((m.power, m.rate), []).append(m.coef)
    out = []
    for (p, r), coefs in groups.items():
        s = math.fsum(coefs)
        if s == 0.0:
            continue
        if len(coefs) > 1 and abs(s) <= _CANCEL * math.fsum(abs(c) for c in coefs):
            continue
        out.append(Monomial(s, p, r))
    out.sort(key=lambda m: (m.power, m.rate))
    return tuple(out)


@dataclass(frozen=True)
class AnalyticPiece:
    """A closed-form segment law: a sum of monomials with exact derivatives.

    Use :meth:`power_law`, :meth:`exponential` and :meth:`constant` for the
    three elementary laws; sums, products and derivatives of those stay in
    this class.
    """

    terms: tuple[Monomial, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", _normalize(self.terms))

    @classmethod
    def power_law(cls, c: float, p) -> AnalyticPiece:
        return cls((Monomial(c, as_fraction(p)),))

    @classmethod
    def exponential(cls, c: float, rate) -> AnalyticPiece:
        return cls((Monomial(c, 0, as_fraction(rate)),))

    @classmethod
    def constant(cls, c: float) -> AnalyticPiece:
        return cls((Monomial(c),))

    @property
    def kind(self) -> str:
        law = self.law
        return "sum" if law is None else law[0]

    @property
    def law(self) -> tuple | None:
        """``(kind, c, param)`` for an elementary law, ``None`` for a general sum."""
        if not self.terms:
            return ("constant", 0.0, None)
        if len(self.terms) > 1:
            return None
        (m,) = self.terms
        if m.power == 0 and m.rate == 0:
            return ("constant", m.coef, None)
        if m.rate == 0:
            return ("power_law", m.coef, m.power)
        if m.power == 0:
            return ("exponential", m.coef, m.rate)
        return None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def requires_positive_t(self) -> bool:
        return any(m.power.denominator != 1 or m.power < 0 for m in self.terms)

    def __call__(self, t):
        if isinstance(t, np.ndarray):
            out = np.zeros(t.shape)
            for m in self.terms:
                out = out + m(t)
            return out
        t = float(t)
        return math.fsum(m(t) for m in self.terms)

    def derivative(self, order: int = 1) -> AnalyticPiece:
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        piece = self
        for _ in range(order):
            piece = AnalyticPiece(tuple(d for m in piece.terms for d in m.derivative()))
        return piece

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if isinstance(other, Real):
            other = AnalyticPiece.constant(float(other))
        if not isinstance(other, AnalyticPiece):
            return NotImplemented
        return AnalyticPiece(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Real):
            s = float(other)
            return AnalyticPiece(tuple(Monomial(m.coef * s, m.power, m.rate) for m in self.terms))
        if not isinstance(other, AnalyticPiece):
            return NotImplemented
        return AnalyticPiece(
            tuple(
                Monomial(a.coef * b.coef, a.power + b.power, a.rate + b.rate)
                for a in self.terms
                for b in other.terms
            )
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Real):
            s = float(other)
            return AnalyticPiece(tuple(Monomial(m.coef / s, m.power, m.rate) for m in self.terms))
        if not isinstance(other, AnalyticPiece):
            return NotImplemented
        if self.is_zero:
            return self
        if len(other.terms) != 1:
            raise ValueError("division is only closed for single-term denominators")
        (d,) = other.terms
        return AnalyticPiece(
            tuple(Monomial(m.coef / d.coef, m.power - d.power, m.rate - d.rate) for m in self.terms)
        )

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = AnalyticPiece.constant(1.0)
        for _ in range(n):
            out = out * self
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in self.terms:
            s = f"{m.coef:.17g}"
            if m.power != 0:
                s += f"*t^({m.power})"
            if m.rate != 0:
                s += f"*exp({float(m.rate):.17g}*t)"
            parts.append(s)
        return " + ".join(parts)


power_law = AnalyticPiece.power_law
exponential = AnalyticPiece.exponential
constant = AnalyticPiece.constant


class Continuity(str, enum.Enum):
    JUMP = "jump"
    C0 = "C0"
    C1 = "C1"
    CINF = "Cinf"


def _same(left: AnalyticPiece, right: AnalyticPiece, t: float) -> bool:
    """Do two laws agree at ``t`` up to roundoff in their own terms?

    The yardstick is the sum of absolute term values on either side, so the
    test is independent of the time unit (no absolute floor).
    """
    a, b = left(t), right(t)
    scale = max(math.fsum(abs(m(t)) for m in left.terms), math.fsum(abs(m(t)) for m in right.terms))
    return abs(b - a) <= ZERO_TOL * scale


@dataclass(frozen=True)
class Segment:
    piece: AnalyticPiece
    lo: float
    hi: float


class PiecewiseFn:
    """Contiguous analytic segments covering an open domain ``(t0, t_inf)``.

    Immutable.  Evaluation exactly at a breakpoint uses the left segment.
    """

    __slots__ = ("segments", "breakpoints", "_deriv_cache")

    def __init__(self, segments: Sequence[Segment | tuple]):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in segments)
        if not segs:
            raise SegmentationError("a piecewise function needs at least one segment")
        for i, s in enumerate(segs):
            if not isinstance(s.piece, AnalyticPiece):
                raise SegmentationError(f"segment {i}: piece is not an AnalyticPiece")
            if not s.lo < s.hi:
                raise SegmentationError(f"segment {i}: empty interval ({s.lo}, {s.hi})")
        for i, (a, b) in enumerate(zip(segs, segs[1:])):
            if a.hi > b.lo:
                raise SegmentationError(f"segments {i} and {i + 1} overlap on ({b.lo}, {a.hi})")
            if a.hi < b.lo:
                raise SegmentationError(f"gap between segments {i} and {i + 1} on ({a.hi}, {b.lo})")
        if segs[0].lo < 0 and any(s.piece.requires_positive_t for s in segs):
            raise SegmentationError(
                f"domain starts at {segs[0].lo} but a fractional or negative power needs t > 0"
            )
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "breakpoints", tuple(s.hi for s in segs[:-1]))
        object.__setattr__(self, "_deriv_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("PiecewiseFn is immutable")

    @classmethod
    def from_pieces(cls, pieces: Sequence[AnalyticPiece], breakpoints: Sequence[float],
                    domain: tuple[float, float] = (0.0, math.inf)) -> PiecewiseFn:
        if len(pieces) != len(breakpoints) + 1:
            raise ArityMismatch(
                f"{len(pieces)} pieces need {len(pieces) - 1} breakpoints, got {len(breakpoints)}"
            )
        edges = [float(domain[0]), *map(float, breakpoints), float(domain[1])]
        return cls([Segment(p, a, b) for p, a, b in zip(pieces, edges, edges[1:])])

    @classmethod
    def smooth(cls, piece: AnalyticPiece, domain=(0.0, math.inf)) -> PiecewiseFn:
        return cls([Segment(piece, float(domain[0]), float(domain[1]))])

    @property
    def domain(self) -> tuple[float, float]:
        return self.segments[0].lo, self.segments[-1].hi

    @property
    def pieces(self) -> tuple[AnalyticPiece, ...]:
        return tuple(s.piece for s in self.segments)

    def __repr__(self):
        body = ", ".join(f"[{s.lo:g}, {s.hi:g}]: {s.piece}" for s in self.segments)
        return f"PiecewiseFn({body})"

    def __eq__(self, other):
        return isinstance(other, PiecewiseFn) and self.segments == other.segments

    def __hash__(self):
        return hash(self.segments)

    def _check_domain(self, t):
        lo, hi = self.domain
        if np.ndim(t) == 0:
            if not lo < t < hi:
                raise DomainError(f"t={t!r} outside the open domain ({lo}, {hi})")
        elif not (np.all(t > lo) and np.all(t < hi)):
            raise DomainError(f"sample outside the open domain ({lo}, {hi})")

    def segment_index(self, t: float, side: str = "left") -> int:
        """Index of the segment used at ``t``; ``side`` only matters at breakpoints."""
        self._check_domain(t)
        if side == "left":
            return bisect.bisect_left(self.breakpoints, t)
        if side == "right":
            return bisect.bisect_right(self.breakpoints, t)
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")

    def __call__(self, t):
        if np.ndim(t) == 0:
            return self.segments[self.segment_index(float(t))].piece(float(t))
        t = np.asarray(t, dtype=float)
        self._check_domain(t)
        idx = np.searchsorted(self.breakpoints, t, side="left")
        out = np.empty(t.shape)
        for i, s in enumerate(self.segments):
            mask = idx == i
            if mask.any():
                out[mask] = s.piece(t[mask])
        return out

    def derivative(self, order: int = 1) -> PiecewiseFn:
        if order not in self._deriv_cache:
            self._deriv_cache[order] = PiecewiseFn(
                [Segment(s.piece.derivative(order), s.lo, s.hi) for s in self.segments]
            )
        return self._deriv_cache[order]

    def limit(self, t: float, side: str, order: int = 0) -> float:
        """One-sided limit of the ``order``-th derivative at ``t``."""
        piece = self.segments[self.segment_index(t, side)].piece
        return piece.derivative(order)(t) if order else piece(t)

    def jump(self, t: float, order: int = 0) -> float:
        """Right limit minus left limit of the ``order``-th derivative."""
        return self.limit(t, "right", order) - self.limit(t, "left", order)

    def is_continuous_at(self, t: float, order: int = 0) -> bool:
        """Do the one-sided limits of the ``order``-th derivative agree (relative 1e-12)?"""
        t = float(t)
        left = self.segments[self.segment_index(t, "left")].piece.derivative(order)
        right = self.segments[self.segment_index(t, "right")].piece.derivative(order)
        return _same(left, right, t)

    def smoothness_order_at(self, t: float, max_order: int = 8) -> int:
        """Largest m <= max_order with derivatives 0..m matching at ``t`` (-1 on a value jump)."""
        m = -1
        while m < max_order and self.is_continuous_at(t, m + 1):
            m += 1
        return m

    def continuity_class_at(self, t: float) -> Continuity:
        i = self.segment_index(t, "left")
        if t not in self.breakpoints or self.segments[i].piece == self.segments[i + 1].piece:
            return Continuity.CINF
        m = self.smoothness_order_at(t)
        if m < 0:
            return Continuity.JUMP
        if m == 0:
            return Continuity.C0
        return Continuity.CINF if m >= 8 else Continuity.C1

    @property
    def is_continuous(self) -> bool:
        return all(self.is_continuous_at(b) for b in self.breakpoints)

    # arithmetic -----------------------------------------------------------
    def map(self, fn: Callable[[AnalyticPiece], AnalyticPiece]) -> PiecewiseFn:
        return PiecewiseFn([Segment(fn(s.piece), s.lo, s.hi) for s in self.segments])

    def combine(self, other: PiecewiseFn, op) -> PiecewiseFn:
        """Apply a piece-level binary ``op`` on the common refinement."""
        if self.domain != other.domain:
            raise ValueError(f"domains differ: {self.domain} vs {other.domain}")
        cuts = sorted(set(self.breakpoints) | set(other.breakpoints))
        lo, hi = self.domain
        edges = [lo, *cuts, hi]
        segs = []
        for a, b in zip(edges, edges[1:]):
            p = self.segments[bisect.bisect_right(self.breakpoints, a) if a != lo else 0].piece
            q = other.segments[bisect.bisect_right(other.breakpoints, a) if a != lo else 0].piece
            segs.append(Segment(op(p, q), a, b))
        return PiecewiseFn(segs)

    def _binary(self, other, op):
        if isinstance(other, PiecewiseFn):
            return self.combine(other, op)
        if isinstance(other, (Real, AnalyticPiece)):
            return self.map(lambda p: op(p, other))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, lambda p, q: p + q)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda p, q: p - q)

    def __rsub__(self, other):
        return self._binary(other, lambda p, q: q - p)

    def __mul__(self, other):
        return self._binary(other, lambda p, q: p * q)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda p, q: p / q)

    def __neg__(self):
        return self.map(lambda p: -p)

    def __pow__(self, n: int):
        return self.map(lambda p: p ** n)


@dataclass(frozen=True, order=True)
class DeltaAtom:
    location: float
    weight: float


def _merge_atoms(atoms: Iterable[DeltaAtom]) -> tuple[DeltaAtom, ...]:
    groups: dict[float, list[float]] = {}
    for a in atoms:
        groups.setdefault(float(a.location), []).append(float(a.weight))
    out = []
    for loc in sorted(groups):
        ws = groups[loc]
        w = math.fsum(ws)
        if w == 0.0:
            continue
        if len(ws) > 1 and abs(w) <= ZERO_TOL * max(abs(x) for x in ws):
            continue
        out.append(DeltaAtom(loc, w))
    return tuple(out)


@dataclass(frozen=True)
class GenFun:
    """Regular piecewise part plus a finite sum of weighted Dirac deltas."""

    regular: PiecewiseFn
    atoms: tuple[DeltaAtom, ...] = ()

    def __post_init__(self):
        atoms = _merge_atoms(a if isinstance(a, DeltaAtom) else DeltaAtom(*a) for a in self.atoms)
        bps = set(self.regular.breakpoints)
        for a in atoms:
            if a.location not in bps:
                raise ValueError(f"delta atom at t={a.location!r} is not a breakpoint of the regular part")
        object.__setattr__(self, "atoms", atoms)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.regular.breakpoints

    def atom_at(self, t: float) -> float:
        for a in self.atoms:
            if a.location == t:
                return a.weight
        return 0.0

    def __call__(self, t):
        return eval_regular(self, t)

    # linear algebra on generalized functions -----------------------------
    def __add__(self, other):
        if isinstance(other, GenFun):
            return GenFun(self.regular + other.regular, self.atoms + other.atoms)
        if isinstance(other, (PiecewiseFn, Real, AnalyticPiece)):
            return GenFun(self.regular + other, self.atoms)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scale_atoms(self, h, op) -> tuple[DeltaAtom, ...]:
        if isinstance(h, Real):
            return tuple(DeltaAtom(a.location, op(a.weight, float(h))) for a in self.atoms)
        out = []
        for a in self.atoms:
            if not h.is_continuous_at(a.location):
                raise UnsupportedDistribution(
                    f"delta at t={a.location} multiplied by a function that jumps there"
                )
            out.append(DeltaAtom(a.location, op(a.weight, h(a.location))))
        return tuple(out)

    def __mul__(self, other):
        if isinstance(other, GenFun):
            if other.atoms and self.atoms:
                raise UnsupportedDistribution("product of two delta series is undefined")
            if other.atoms:
                return other * self
            other = other.regular
        if isinstance(other, AnalyticPiece):
            other = PiecewiseFn.smooth(other, self.regular.domain)
        if isinstance(other, (Real, PiecewiseFn)):
            return GenFun(self.regular * other, self._scale_atoms(other, lambda w, v: w * v))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GenFun):
            if other.atoms:
                raise UnsupportedDistribution("division by a delta series is undefined")
            other = other.regular
        if isinstance(other, (Real, PiecewiseFn)):
            return GenFun(self.regular / other, self._scale_atoms(other, lambda w, v: w / v))
        return NotImplemented

    def square(self) -> GenFun:
        if self.atoms:
            raise UnsupportedDistribution("square of a delta series is undefined")
        return GenFun(self.regular * self.regular)


def as_genfun(g) -> GenFun:
    if isinstance(g, GenFun):
        return g
    if isinstance(g, PiecewiseFn):
        return GenFun(g)
    if isinstance(g, AnalyticPiece):
        return GenFun(PiecewiseFn.smooth(g))
    raise TypeError(f"cannot interpret {type(g).__name__} as a generalized function")


def eval_regular(g, t: float) -> float:
    """Value of the regular part at ``t``.

    Raises:
        DomainError: ``t`` outside the open domain.
        AmbiguousPoint: ``t`` is a breakpoint where the regular part jumps;
            use :func:`eval_one_sided` there.
    """
    f = as_genfun(g).regular
    t = float(t)
    i = f.segment_index(t)
    if t in f.breakpoints and not f.is_continuous_at(t):
        raise AmbiguousPoint(f"regular part jumps at t={t!r}; ask for a one-sided limit")
    return f.segments[i].piece(t)


def eval_one_sided(g, t: float, side: str) -> float:
    return as_genfun(g).regular.limit(float(t), side)


def jump_atom(location: float, left: float, right: float,
              weight: float | None = None) -> DeltaAtom | None:
    """Atom for a jump from ``left`` to ``right``, or None if it is below the zero tolerance.

    ``weight`` overrides ``right - left`` when the caller has the jump in
    another closed form.
    """
    w = right - left if weight is None else weight
    if abs(w) <= ZERO_TOL * max(1.0, abs(left), abs(right)):
        return None
    return DeltaAtom(float(location), w)


def jump_atoms(f: PiecewiseFn) -> tuple[DeltaAtom, ...]:
    """One atom per breakpoint where ``f`` jumps by more than the zero tolerance."""
    atoms = (jump_atom(b, f.limit(b, "left"), f.limit(b, "right")) for b in f.breakpoints)
    return tuple(a for a in atoms if a is not None)


def derivative(g) -> GenFun:
    """Distributional derivative: segmentwise closed form plus jump deltas."""
    g = as_genfun(g)
    if g.atoms:
        raise UnsupportedDistribution("derivatives of delta atoms are not modelled")
    return GenFun(g.regular.derivative(), jump_atoms(g.regular))


# step-function reconstruction ------------------------------------------------

@dataclass(frozen=True)
class StepTerm:
    """``piece * mu(t - t_l)`` (direction +1) or ``piece * mu(t_l - t)`` (direction -1).

    ``index`` is the 1-based breakpoint number l.
    """

    piece: AnalyticPiece
    index: int
    direction: int

    def active_on(self, segment: int) -> bool:
        # segment j is the open interval (t_j, t_{j+1})
        return segment >= self.index if self.direction > 0 else segment < self.index


def collapse_steps(terms: Sequence[StepTerm], breakpoints: Sequence[float],
                   domain: tuple[float, float] = (0.0, math.inf)) -> PiecewiseFn:
    """Sum the step terms active on each open interval into one segment law."""
    n = len(breakpoints)
    for term in terms:
        if not 1 <= term.index <= n:
            raise ArityMismatch(f"step term refers to breakpoint {term.index}, only {n} exist")
    pieces = [
        sum((term.piece for term in terms if term.active_on(j)), AnalyticPiece())
        for j in range(n + 1)
    ]
    return PiecewiseFn.from_pieces(pieces, breakpoints, domain)


def step_terms(pieces: Sequence[AnalyticPiece], order: int) -> list[StepTerm]:
    """The literal step combination for the ``order``-th derivative.

    With D_k the derivative of piece k and A the mean of D_0..D_{n-1}:
    ``(D_n - D_{n-1} + A) mu(t-t_n) + sum_l (A - D_{l-1}) mu(t-t_l)
    + A mu(t_n-t) + sum_l (A - D_l) mu(t_l-t)``, l = 1..n-1.
    """
    d = [p.derivative(order) for p in pieces]
    n = len(d) - 1
    if n < 1:
        raise ArityMismatch("step reconstruction needs at least one breakpoint")
    mean = sum(d[:n], AnalyticPiece()) * (1.0 / n)
    terms = [StepTerm(d[n] - d[n - 1] + mean, n, +1)]
    terms += [StepTerm(mean - d[l - 1], l, +1) for l in range(1, n)]
    terms.append(StepTerm(mean, n, -1))
    terms += [StepTerm(mean - d[l], l, -1) for l in range(1, n)]
    return terms


def _check_arity(pieces, breakpoints):
    if len(pieces) != len(breakpoints) + 1:
        raise ArityMismatch(
            f"{len(pieces)} pieces need {len(pieces) - 1} breakpoints, got {len(breakpoints)}"
        )
    if any(b >= c for b, c in zip(breakpoints, breakpoints[1:])):
        raise ArityMismatch("breakpoints must be strictly increasing")


def _reconstruct(pieces, breakpoints, order, domain):
    _check_arity(pieces, breakpoints)
    if not breakpoints:
        return PiecewiseFn.smooth(pieces[0].derivative(order), domain)
    return collapse_steps(step_terms(pieces, order), breakpoints, domain)


def step_reconstruct_fprime(pieces: Sequence[AnalyticPiece], breakpoints: Sequence[float],
                            domain: tuple[float, float] = (0.0, math.inf)) -> GenFun:
    """f' assembled from unit steps; carries no atoms."""
    return GenFun(_reconstruct(pieces, breakpoints, 1, domain))


def step_reconstruct_fpp(pieces: Sequence[AnalyticPiece], breakpoints: Sequence[float],
                         continuity: str = "C1",
                         domain: tuple[float, float] = (0.0, math.inf)) -> GenFun:
    """f'' assembled from unit steps.

    In ``"C0"`` mode a delta is added at every breakpoint with weight equal
    to the jump of the first derivative there; ``"C1"`` mode assumes those
    jumps vanish and emits none.
    """
    if continuity not in ("C0", "C1"):
        raise ValueError(f"continuity must be 'C0' or 'C1', not {continuity!r}")
    regular = _reconstruct(pieces, breakpoints, 2, domain)
    atoms = []
    if continuity == "C0":
        for l, b in enumerate(breakpoints, start=1):
            atom = jump_atom(b, pieces[l - 1].derivative()(b), pieces[l].derivative()(b))
            if atom is not None:
                atoms.append(atom)
    return GenFun(regular, tuple(atoms))


def weak_pairing(g, phi: Callable[[float], float], interval: tuple[float, float],
                 tol: float = QUAD_TOL) -> float:
    """Action of ``g`` on a test function supported inside ``interval``.

    The regular part is integrated with adaptive Gauss-Kronrod quadrature,
    split at every breakpoint; atoms contribute ``weight * phi(t_i)``.
    """
    g = as_genfun(g)
    a, b = map(float, interval)
    lo, hi = g.regular.domain
    if not (lo <= a < b <= hi):
        raise DomainError(f"interval {interval} not inside the domain ({lo}, {hi})")
    total = []
    for s in g.regular.segments:
        left, right = max(a, s.lo), min(b, s.hi)
        if left >= right or s.piece.is_zero:
            continue
        piece = s.piece
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, err = integrate.quad(lambda t: piece(t) * phi(t), left, right,
                                          epsabs=tol, epsrel=1e-12, limit=400)
            except integrate.IntegrationWarning as exc:
                raise QuadratureFailure(f"on ({left}, {right}): {exc}") from exc
        if err > tol:
            raise QuadratureFailure(f"on ({left}, {right}): error estimate {err:.3g} > {tol:.3g}")
        total.append(val)
    total.extend(atom.weight * phi(atom.location) for atom in g.atoms if a <= atom.location <= b)
    return math.fsum(total)
