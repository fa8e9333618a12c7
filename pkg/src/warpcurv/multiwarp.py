"""Ricci and Riemann terms of ``-dt^2 + sum_i f_i(t)^2 g_i`` with C0 warping at one time p.

Every warping function may have a kink at the shared point ``p`` and
nowhere else.  Jumps of f_i' at p appear in two ways:

* as delta atoms at p, in the f_i''/f_i terms;
* as plain numbers ("point terms"), where a formula multiplies jumps
  together or adds one-sided derivatives.  No distribution is attached to
  those; they are reported next to the GenFun, evaluated at p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from numbers import Real

from .errors import MissingFiberRicci, SameFiber, ValidationError
from .genfun import ZERO_TOL, AnalyticPiece, GenFun, PiecewiseFn
from .warped import _check_positive


@dataclass(frozen=True)
class Fiber:
    """One fiber factor: dimension, warping function and (optional) fiber Ricci coefficient.

    ``ricci_coeff`` stands in for the fiber's own Ricci tensor on unit
    vectors; a constant suffices for constant-curvature fibers.
    """

    dim: int
    f: PiecewiseFn
    ricci_coeff: float | AnalyticPiece | None = None


@dataclass(frozen=True)
class MultiWarpModel:
    fibers: tuple[Fiber, ...]
    p: float
    _jumps: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fibers", tuple(self.fibers))
        if not self.fibers:
            raise ValidationError("at least one fiber is required")
        domain = self.fibers[0].f.domain
        for i, fib in enumerate(self.fibers):
            if not isinstance(fib.dim, int) or fib.dim < 1:
                raise ValidationError(f"fiber {i}: dimension must be a positive integer")
            if fib.f.domain != domain:
                raise ValidationError(f"fiber {i}: domain {fib.f.domain} differs from {domain}")
            if any(b != self.p for b in fib.f.breakpoints):
                raise ValidationError(f"fiber {i}: breakpoints {fib.f.breakpoints} other than p={self.p}")
            if not fib.f.is_continuous:
                raise ValidationError(f"fiber {i}: warping function is not continuous at p")
            _check_positive(fib.f)
        if not domain[0] < self.p < domain[1]:
            raise ValidationError(f"p={self.p} outside the domain {domain}")
        object.__setattr__(self, "_jumps", tuple(self.derivative_jump(i) for i in range(len(self.fibers))))

    def one_sided_derivatives(self, i: int) -> tuple[float, float]:
        """``(f_i'^-, f_i'^+)`` at p."""
        f = self.fibers[i].f
        return f.limit(self.p, "left", 1), f.limit(self.p, "right", 1)

    def derivative_jump(self, i: int) -> float:
        """``f_i'^+ - f_i'^-`` at p; roundoff-sized jumps are reported as exactly 0."""
        minus, plus = self.one_sided_derivatives(i)
        if abs(plus - minus) <= ZERO_TOL * max(1.0, abs(minus), abs(plus)):
            return 0.0
        return plus - minus

    def value_at_p(self, i: int) -> float:
        return self.fibers[i].f(self.p)


def _hessian_term(m: MultiWarpModel, i: int) -> GenFun:
    """``(f_i'' + delta(t-p) (f_i'^+ - f_i'^-)) / f_i``.

    """
    f = _split(m.fibers[i].f, m.p)
    jump = m._jumps[i]
    atoms = ((m.p, jump / m.value_at_p(i)),) if jump else ()
    return GenFun(f.derivative(2) / f, atoms)


def _split(f: PiecewiseFn, p: float) -> PiecewiseFn:
    """Same function with ``p`` forced into the breakpoint list."""
    if p in f.breakpoints:
        return f
    lo, hi = f.domain
    zero = PiecewiseFn.from_pieces([AnalyticPiece(), AnalyticPiece()], [p], (lo, hi))
    return f + zero


def ricci_base(m: MultiWarpModel) -> GenFun:
    """Coefficient of ``X^1 Y^1`` in Ric(X, Y): ``-sum_i d_i (f_i'' + jump_i delta)/f_i``."""
    total = None
    for i, fib in enumerate(m.fibers):
        term = _hessian_term(m, i) * float(-fib.dim)
        total = term if total is None else total + term
    return total


@dataclass(frozen=True)
class FiberRicci:
    """Ric(U_i, V_i) / <U_i, V_i>: a GenFun plus the number-valued jump terms at p."""

    coefficient: GenFun
    point_term: float
    self_jump_term: float
    cross_jump_term: float
    p: float


def ricci_fiber(m: MultiWarpModel, i: int, assume_ricci_flat: bool = False) -> FiberRicci:
    """Fiber-direction Ricci coefficient for fiber ``i``.

    ``coefficient`` holds the fiber Ricci term and ``(f_i'' + jump delta)/f_i``.
    ``point_term`` is ``(d_i - 1) jump_i / f_i^2 + sum_{j != i} d_j jump_i jump_j / (f_i f_j)``
    evaluated at p.

    Raises:
        MissingFiberRicci: the fiber has no ``ricci_coeff`` and
            ``assume_ricci_flat`` is false.
    """
    fib = m.fibers[i]
    rc = fib.ricci_coeff
    if rc is None:
        if not assume_ricci_flat:
            raise MissingFiberRicci(f"fiber {i} has no Ricci coefficient")
        rc = 0.0
    coeff = _hessian_term(m, i)
    if isinstance(rc, Real):
        coeff = coeff + float(rc)
    else:
        coeff = coeff + PiecewiseFn.smooth(rc, fib.f.domain)
    fi = m.value_at_p(i)
    jump_i = m._jumps[i]
    self_term = (fib.dim - 1) * jump_i / (fi * fi)
    cross = [
        other.dim * jump_i * m._jumps[j] / (fi * m.value_at_p(j))
        for j, other in enumerate(m.fibers)
        if j != i
    ]
    cross_term = math.fsum(cross)
    return FiberRicci(coeff, self_term + cross_term, self_term, cross_term, m.p)


def riemann_mixed(m: MultiWarpModel, i: int, j: int) -> float:
    """Coefficient of ``U_i <U_j, V_j>`` in R_{U_i U_j} V_j at p, i != j.

    ``(f_i'^+ + f_i'^-)(f_j'^+ + f_j'^-) / (f_i f_j)``, with the one-sided
    derivatives summed as written, not averaged.
    """
    if i == j:
        raise SameFiber(f"riemann_mixed needs two different fibers, got i = j = {i}")
    mi, pi = m.one_sided_derivatives(i)
    mj, pj = m.one_sided_derivatives(j)
    return (pi + mi) * (pj + mj) / (m.value_at_p(i) * m.value_at_p(j))


def riemann_base_fiber(m: MultiWarpModel, i: int) -> GenFun:
    """Coefficient of ``U_i X^1 Y^1`` in R_{U_i X} Y."""
    return _hessian_term(m, i)


def riemann_fiber_step_term(m: MultiWarpModel, i: int) -> PiecewiseFn:
    """``(f_i'^+ mu(t-p) + f_i'^- mu(p-t)) / f_i^2``, the warping part of R_{U_i V_i} W_i.

    The one-sided derivatives are constants frozen at p, so the result is a
    step function divided by f_i^2.
    """
    f = _split(m.fibers[i].f, m.p)
    minus, plus = m.one_sided_derivatives(i)
    lo, hi = f.domain
    steps = PiecewiseFn.from_pieces(
        [AnalyticPiece.constant(minus), AnalyticPiece.constant(plus)], [m.p], (lo, hi)
    )
    return steps / (f * f)
