"""Spatially flat radiation -> matter -> lambda cosmology with C0 phase joins.

The scale factor is

    c0 t^(1/2)      for t < t1          (radiation dominated, RD)
    c1 t^(2/3)      for t1 <= t <= t2   (matter dominated, MD)
    c2 exp(K t)     for t > t2          (lambda dominated, LD)

with c1, c2 fixed by value continuity at t1 and t2.  Units are G = c = 1 and
whatever time unit the caller uses; rho and P come out in 1/time^2.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import AmbiguousPoint, DegenerateFit, ValidationError
from .genfun import (
    AnalyticPiece,
    GenFun,
    Monomial,
    PiecewiseFn,
    StepTerm,
    collapse_steps,
    exponential,
    jump_atom,
    power_law,
)
from .warped import FRWModel, scale_factor_derivatives

#: radiation-matter and matter-lambda transition times, in years
DEFAULT_T1 = 4.7e4
DEFAULT_T2 = 9.8e9

RD_EXPONENT = Fraction(1, 2)
MD_EXPONENT = Fraction(2, 3)
PHASES = ("RD", "MD", "LD")


@dataclass(frozen=True)
class CosmologyParams:
    """Inputs of the three-phase model.

    ``K`` defaults to ``2/(3 t2)``, the rate that makes f' continuous at t2;
    ``K_is_default`` records whether that default was used.
    """

    c0: float = 1.0
    t1: float = DEFAULT_T1
    t2: float = DEFAULT_T2
    K: float | None = None
    Lambda: float = 0.0
    time_unit: str = "yr"
    K_is_default: bool = field(init=False, default=False)

    def __post_init__(self):
        for name in ("c0", "t1", "t2", "Lambda"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.c0 > 0:
            raise ValidationError(f"c0 must be positive, got {self.c0}")
        if not 0 < self.t1 < self.t2:
            raise ValidationError(f"need 0 < t1 < t2, got t1={self.t1}, t2={self.t2}")
        if self.K is None:
            object.__setattr__(self, "K", default_rate(self.t2))
            object.__setattr__(self, "K_is_default", True)
        else:
            object.__setattr__(self, "K", float(self.K))
        if not self.K > 0:
            raise ValidationError(f"K must be positive, got {self.K}")
        # exp(K t) must stay finite across the lambda era's start
        if self.K * self.t2 > _MAX_EXP:
            raise ValidationError(f"K*t2={self.K * self.t2:.6g} overflows exp (limit {_MAX_EXP:.6g})")
        if self.Lambda < 0:
            raise ValidationError(f"Lambda must be >= 0, got {self.Lambda}")

    @property
    def c1(self) -> float:
        return self.c0 * self.t1 ** (-1 / 6)

    @property
    def c2(self) -> float:
        return self.c0 * self.t1 ** (-1 / 6) * self.t2 ** (2 / 3) * math.exp(-self.K * self.t2)


_MAX_EXP = math.log(sys.float_info.max)


def default_rate(t2: float) -> float:
    return 2.0 / (3.0 * t2)


def phase_pieces(params: CosmologyParams) -> list[AnalyticPiece]:
    return [
        power_law(params.c0, RD_EXPONENT),
        power_law(params.c1, MD_EXPONENT),
        exponential(params.c2, params.K),
    ]


def build_scale_factor(params: CosmologyParams) -> PiecewiseFn:
    return PiecewiseFn.from_pieces(phase_pieces(params), [params.t1, params.t2], (0.0, math.inf))


def frw_model(params: CosmologyParams, Lambda: float | None = None) -> FRWModel:
    lam = params.Lambda if Lambda is None else Lambda
    return FRWModel(build_scale_factor(params), k=0, Lambda=lam)


def c1_matching_residual(params: CosmologyParams) -> tuple[float, float]:
    """Mismatch of f' at t1 and at t2: both zero only if f were C1."""
    c0, c1, c2, t1, t2, K = params.c0, params.c1, params.c2, params.t1, params.t2, params.K
    r1 = 0.5 * c0 * t1 ** -0.5 - (2 / 3) * c1 * t1 ** (-1 / 3)
    r2 = (2 / 3) * c1 * t2 ** (-1 / 3) - K * c2 * math.exp(K * t2)
    return r1, r2


def frw_derivatives(params: CosmologyParams) -> tuple[GenFun, GenFun]:
    """f' and f'' written out term by term for the three phases.

    These are the hand-expanded step combinations with their explicit
    coefficients (1/4 c0, 1/3 c1, 1/8 c0, 1/9 c1, ...), not a call into the
    generic reconstruction, so the two can be compared.
    """
    c0, c1, c2, K = params.c0, params.c1, params.c2, params.K
    h, th = Fraction(-1, 2), Fraction(-1, 3)
    h3, th4 = Fraction(-3, 2), Fraction(-4, 3)

    def piece(*terms):
        return AnalyticPiece(tuple(Monomial(*t) for t in terms))

    fp_terms = [
        StepTerm(piece((c0 / 4, h), (-c1 / 3, th), (K * c2, 0, K)), 2, +1),
        StepTerm(piece((-c0 / 4, h), (c1 / 3, th)), 1, +1),
        StepTerm(piece((c0 / 4, h), (c1 / 3, th)), 2, -1),
        StepTerm(piece((c0 / 4, h), (-c1 / 3, th)), 1, -1),
    ]
    fpp_terms = [
        StepTerm(piece((-c0 / 8, h3), (c1 / 9, th4), (K * K * c2, 0, K)), 2, +1),
        StepTerm(piece((c0 / 8, h3), (-c1 / 9, th4)), 1, +1),
        StepTerm(piece((-c0 / 8, h3), (-c1 / 9, th4)), 2, -1),
        StepTerm(piece((-c0 / 8, h3), (c1 / 9, th4)), 1, -1),
    ]
    bps = [params.t1, params.t2]
    t1, t2 = params.t1, params.t2
    atoms = [
        jump_atom(t1, piece((c0 / 2, h))(t1), piece((2 / 3 * c1, th))(t1),
                  piece((-1 / 2 * c0, h), (2 / 3 * c1, th))(t1)),
        jump_atom(t2, piece((2 / 3 * c1, th))(t2), piece((K * c2, 0, K))(t2),
                  piece((-2 / 3 * c1, th), (K * c2, 0, K))(t2)),
    ]
    fp = GenFun(collapse_steps(fp_terms, bps))
    fpp = GenFun(collapse_steps(fpp_terms, bps), tuple(a for a in atoms if a is not None))
    return fp, fpp


# Friedmann inversion ---------------------------------------------------------

def density_function(m: FRWModel) -> PiecewiseFn:
    """``rho = (3 (f'^2 + k)/f^2 - Lambda) / (8 pi)`` on the regular region (k = 0 for the preset)."""
    fp, _ = scale_factor_derivatives(m)
    hubble_sq = (fp.regular * fp.regular + m.k) / (m.f * m.f)
    return (hubble_sq * 3.0 - m.Lambda) / (8 * math.pi)


def pressure_function(m: FRWModel) -> PiecewiseFn:
    """``P = ((Lambda - 3 f''/f) / (4 pi) - rho) / 3`` on the regular region."""
    _, fpp = scale_factor_derivatives(m)
    accel = fpp.regular / m.f
    return ((m.Lambda - accel * 3.0) / (4 * math.pi) - density_function(m)) / 3.0


def _regular_point(m: FRWModel, t: float) -> float:
    t = float(t)
    if t in m.f.breakpoints:
        raise AmbiguousPoint(f"t={t!r} is a phase transition; density and pressure are one-sided there")
    m.f.segment_index(t)
    return t


def friedmann_density(m: FRWModel, t: float) -> float:
    return density_function(m)(_regular_point(m, t))


def friedmann_pressure(m: FRWModel, t: float) -> float:
    return pressure_function(m)(_regular_point(m, t))


@dataclass(frozen=True)
class FluidState:
    t: float
    rho: float
    P: float
    omega: float | None


def fluid_state(m: FRWModel, t: float) -> FluidState:
    t = _regular_point(m, t)
    rho = density_function(m)(t)
    P = pressure_function(m)(t)
    return FluidState(t, rho, P, P / rho if rho != 0 else None)


def segment_samples(f: PiecewiseFn, segment: int, count: int = 50) -> np.ndarray:
    """``count`` interior points of a segment, log-spaced when the segment is positive.

    Unbounded ends are truncated: a segment starting at 0 is sampled from
    ``1e-3 * t_hi``; one running to infinity stops at ``10 * t_lo``.
    """
    s = f.segments[segment]
    lo, hi = s.lo, s.hi
    if lo <= 0 and math.isfinite(hi) and hi > 0:
        lo = hi * 1e-3 if lo == 0 else lo
    if not math.isfinite(hi):
        hi = 10.0 * lo if lo > 0 else lo + 10.0
    if not math.isfinite(lo):
        lo = hi - 10.0
    if lo > 0:
        return np.geomspace(lo, hi, count + 2)[1:-1]
    return np.linspace(lo, hi, count + 2)[1:-1]


def eos_scaling_exponent(m: FRWModel, phase: int, count: int = 50) -> float:
    """Least-squares slope of log rho against log f across one smooth segment.

    For P = omega rho the slope is -3 (1 + omega).
    """
    ts = segment_samples(m.f, phase, count)
    fv = m.f(ts)
    rho = density_function(m)(ts)
    if np.any(rho <= 0):
        raise DegenerateFit(f"density is not positive on segment {phase}")
    x = np.log(fv)
    if np.ptp(x) <= 1e-12 * max(1.0, np.max(np.abs(x))):
        raise DegenerateFit(f"scale factor is constant on segment {phase}")
    slope, _ = np.polyfit(x, np.log(rho), 1)
    return float(slope)


def continuity_residual_function(m: FRWModel) -> PiecewiseFn:
    """``d(rho f^3)/dt + P d(f^3)/dt`` in closed form."""
    f3 = m.f * m.f * m.f
    return (density_function(m) * f3).derivative() + pressure_function(m) * f3.derivative()


def continuity_check(m: FRWModel, segment: int, count: int = 50, relative: bool = False) -> float:
    """Max residual of the fluid energy balance over interior samples of a segment.

    With ``relative=True`` the residual is divided by ``max |d(rho f^3)/dt|``
    (or returned as is when that vanishes).
    """
    ts = segment_samples(m.f, segment, count)
    resid = float(np.max(np.abs(continuity_residual_function(m)(ts))))
    if relative:
        f3 = m.f * m.f * m.f
        scale = float(np.max(np.abs((density_function(m) * f3).derivative()(ts))))
        if scale > 0:
            resid /= scale
    return resid
