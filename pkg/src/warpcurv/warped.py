"""Curvature of the single-fiber warped product ``-dt^2 + f(t)^2 g_H``.

All curvature is reported through scalar coefficient functions of time:

* ``A = (f'^2 + k) / f^2``  -- spatial sectional part, ``R_XY Z = A(<X,Z>Y - <Y,Z>X)``
* ``B = f'' / f``           -- ``R_XU U = B X``
* ``ric_uu = -3 B``, ``ric_sp = 2A + B`` (orthonormal spatial frame)
* ``R = 6A + 6B``

Each is a :class:`~warpcurv.genfun.GenFun`; deltas only enter through f''.
The scale factor must be continuous.  A value jump would put a delta into
f' and make f'^2 meaningless, so it is rejected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegeneratePlane, UnsupportedDistribution, ValidationError
from .genfun import GenFun, PiecewiseFn, derivative, eval_regular

PLANE_TOL = 1e-12


@dataclass(frozen=True)
class FRWModel:
    """Scale factor ``f`` (> 0), spatial curvature sign ``k`` and cosmological constant."""

    f: PiecewiseFn
    k: int = 0
    Lambda: float = 0.0

    def __post_init__(self):
        if self.k not in (-1, 0, 1):
            raise ValidationError(f"k must be -1, 0 or 1, not {self.k!r}")
        _check_positive(self.f)


def _check_positive(f: PiecewiseFn) -> None:
    for i, s in enumerate(f.segments):
        law = s.piece.law
        simple = law is not None and (
            law[0] in ("constant", "exponential") or (law[0] == "power_law" and s.lo >= 0)
        )
        if simple:
            ok = law[1] > 0
        else:
            lo = s.lo if math.isfinite(s.lo) else s.hi - 10.0
            hi = s.hi if math.isfinite(s.hi) else lo + 10.0 * max(1.0, abs(lo))
            ts = np.linspace(lo, hi, 257)[1:-1]
            ok = bool(np.all(s.piece(ts) > 0))
        if not ok:
            raise ValidationError(f"scale factor is not positive on segment {i} ({s.lo}, {s.hi})")


def scale_factor_derivatives(m: FRWModel) -> tuple[GenFun, GenFun]:
    """``(f', f'')`` as generalized functions."""
    fp = derivative(m.f)
    if fp.atoms:
        raise UnsupportedDistribution(
            "scale factor jumps in value; f' would carry deltas and f'^2 is undefined"
        )
    return fp, derivative(fp)


def riemann_coefficients(m: FRWModel) -> tuple[GenFun, GenFun]:
    """``(A, B)`` with A = (f'^2 + k)/f^2 purely regular and B = f''/f."""
    fp, fpp = scale_factor_derivatives(m)
    a = GenFun((fp.regular * fp.regular + m.k) / (m.f * m.f))
    b = fpp / m.f
    return a, b


def ricci(m: FRWModel) -> tuple[GenFun, GenFun]:
    """``(Ric(U,U), ric_sp)``; ric_sp multiplies <X,Y> for unit spatial X, Y."""
    a, b = riemann_coefficients(m)
    return b * -3.0, a * 2.0 + b


def scalar_curvature(m: FRWModel) -> GenFun:
    a, b = riemann_coefficients(m)
    return a * 6.0 + b * 6.0


def sectional_genfun(m: FRWModel, alpha: float, beta: float,
                     literal_bracket: bool = False) -> GenFun:
    """Sectional curvature of the plane (alpha U + beta Y, X) as a function of time.

    ``K = (-alpha^2 f'' + beta^2 (f'^2 + k)) / ((beta^2 - alpha^2) f^2)``.
    With ``literal_bracket=True`` the bracket reads ``(f' + k)`` instead, as
    the formula is sometimes printed; that variant is not dimensionally
    consistent with ``A`` and is kept only for comparison.
    """
    denom = beta * beta - alpha * alpha
    if abs(denom) < PLANE_TOL * max(1.0, alpha * alpha, beta * beta):
        raise DegeneratePlane(f"alpha^2 == beta^2 (alpha={alpha}, beta={beta}) spans a null plane")
    fp, fpp = scale_factor_derivatives(m)
    spatial = (fp.regular + m.k) if literal_bracket else (fp.regular * fp.regular + m.k)
    numer = fpp * (-alpha * alpha) + spatial * (beta * beta)
    return numer / (m.f * m.f * denom)


@dataclass(frozen=True)
class SectionalValue:
    value: float
    atom_weight: float = 0.0


def sectional(m: FRWModel, alpha: float, beta: float, t: float,
              literal_bracket: bool = False) -> SectionalValue:
    """Regular value at ``t`` plus the delta weight carried by the f'' term.

    At a breakpoint the regular value follows the left segment (mu(0) = 0).
    """
    g = sectional_genfun(m, alpha, beta, literal_bracket)
    return SectionalValue(g.regular(float(t)), g.atom_at(float(t)))


@dataclass(frozen=True)
class CurvatureProfile:
    samples: tuple[tuple[float, float, float, float], ...]
    events: tuple[tuple[float, float, float, float], ...]


def curvature_profile(m: FRWModel, ts: Sequence[float]) -> CurvatureProfile:
    """Sample (t, ric_uu, ric_sp, R) at ``ts`` and tabulate the delta events.

    Samples exactly at a jump breakpoint raise AmbiguousPoint.
    """
    ric_uu, ric_sp = ricci(m)
    r = scalar_curvature(m)
    samples = tuple(
        (float(t), eval_regular(ric_uu, t), eval_regular(ric_sp, t), eval_regular(r, t))
        for t in ts
    )
    locs = sorted({a.location for g in (ric_uu, ric_sp, r) for a in g.atoms})
    events = tuple((t, ric_uu.atom_at(t), ric_sp.atom_at(t), r.atom_at(t)) for t in locs)
    return CurvatureProfile(samples, events)
