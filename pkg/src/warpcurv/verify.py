"""Independent oracles for the distributional formulas.

Three families:

* a brute-force piecewise derivative read straight off each segment's law
  (no step functions, no shared algebra with :mod:`warpcurv.genfun`);
* mollification: smooth f with a compact bump of width eps on a uniform grid,
  take central second differences and pair with a test function.  As eps -> 0
  this converges weakly to f'' including its delta atoms;
* fourth-order finite differences of f for textbook FRW curvature on smooth
  stretches.

:func:`verification_report` runs them all against a model and returns one
:class:`PropertyResult` per property.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import BreakpointQuery, DomainError, GridTooCoarse, ValidationError
from .genfun import (
    ZERO_TOL,
    AnalyticPiece,
    GenFun,
    PiecewiseFn,
    derivative,
    step_reconstruct_fpp,
    step_reconstruct_fprime,
    weak_pairing,
)
from .warped import FRWModel, ricci, riemann_coefficients, scalar_curvature

#: quadrature tolerance for reference pairings; well below the mollifier errors
PAIRING_TOL = 1e-14

# brute-force oracle ------------------------------------------------------------


def _law_derivative(law: tuple, order: int, t):
    kind, c, q = law
    if kind == "constant":
        return c + 0.0 * t if order == 0 else 0.0 * t
    if kind == "power_law":
        falling = 1
        for i in range(order):
            falling *= q - i
        e = float(q - order)
        return c * float(falling) * (np.power(t, e) if isinstance(t, np.ndarray) else math.pow(t, e))
    if kind == "exponential":
        r = float(q)
        ex = np.exp(r * t) if isinstance(t, np.ndarray) else math.exp(r * t)
        return c * r ** order * ex
    raise ValueError(f"unknown law {kind!r}")


def _laws(pieces: Sequence[AnalyticPiece]) -> list[tuple]:
    laws = [p.law for p in pieces]
    if any(law is None for law in laws):
        raise ValueError("the brute-force oracle only knows power laws, exponentials and constants")
    return laws


def brute_piecewise_derivative(pieces: Sequence[AnalyticPiece], breakpoints: Sequence[float],
                               order: int) -> Callable:
    """Derivative of the active segment's law at ``t``.

    The returned callable accepts a float or an array and raises
    BreakpointQuery at a breakpoint, where the naive derivative does not exist.
    """
    laws = _laws(pieces)
    bps = np.asarray(breakpoints, dtype=float)
    if len(laws) != len(bps) + 1:
        raise ValueError("need one more piece than breakpoints")

    def evaluate(t):
        if np.ndim(t) == 0:
            t = float(t)
            if t in breakpoints:
                raise BreakpointQuery(f"t={t!r} is a breakpoint")
            i = int(np.searchsorted(bps, t))
            return _law_derivative(laws[i], order, t)
        t = np.asarray(t, dtype=float)
        if np.isin(t, bps).any():
            raise BreakpointQuery("sample hits a breakpoint")
        idx = np.searchsorted(bps, t)
        out = np.empty(t.shape)
        for i, law in enumerate(laws):
            mask = idx == i
            if mask.any():
                out[mask] = _law_derivative(law, order, t[mask])
        return out

    return evaluate


def brute_jumps(pieces: Sequence[AnalyticPiece], breakpoints: Sequence[float],
                order: int = 1) -> list[tuple[float, float]]:
    """``(t_i, right - left)`` of the order-th derivative, zero-tolerance applied."""
    laws = _laws(pieces)
    out = []
    for i, b in enumerate(breakpoints):
        left = _law_derivative(laws[i], order, float(b))
        right = _law_derivative(laws[i + 1], order, float(b))
        if abs(right - left) > ZERO_TOL * max(1.0, abs(left), abs(right)):
            out.append((float(b), right - left))
    return out


# mollifier -----------------------------------------------------------------------


def bump(x):
    """``exp(-1/(1-x^2))`` on (-1, 1), zero outside."""
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    out = np.zeros(x.shape)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def kernel_mass() -> float:
    """Integral of :func:`bump` over (-1, 1)."""
    half, _ = integrate.quad(lambda x: math.exp(-1.0 / (1.0 - x * x)), 0.0, 1.0,
                             epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * half


def kernel(x, eps: float = 1.0):
    """Unit-mass mollifier of half-width ``eps``."""
    return bump(np.asarray(x) / eps) / (eps * kernel_mass())


@dataclass(frozen=True)
class MollifierSpec:
    """Smoothing width ``eps`` and grid spacing ``h`` (default eps/50)."""

    eps: float
    h: float | None = None

    def __post_init__(self):
        if not self.eps > 0:
            raise ValidationError(f"eps must be positive, got {self.eps}")
        if self.h is None:
            object.__setattr__(self, "h", self.eps / 50.0)
        if not self.h > 0:
            raise ValidationError(f"h must be positive, got {self.h}")

    def check(self, f: PiecewiseFn) -> None:
        if self.h > self.eps / 20.0:
            raise GridTooCoarse(f"h={self.h:.3g} exceeds eps/20={self.eps / 20:.3g}")
        edges = [*f.breakpoints]
        gaps = [b - a for a, b in zip(edges, edges[1:])]
        if gaps and not self.eps < 0.5 * min(gaps):
            raise ValidationError(f"eps={self.eps:.3g} not below half the smallest breakpoint gap")


def mollify(f: PiecewiseFn, spec: MollifierSpec, interval: tuple[float, float],
            anchor: float | None = None):
    """Samples of ``f * kernel_eps`` on a grid of spacing h covering ``interval``.

    Returns ``(t, u)`` with one extra grid point on each side of the
    interval.  The sampled kernel is rescaled to unit discrete mass so that
    constants are reproduced exactly.  With ``anchor`` (typically a
    breakpoint) the grid start moves left so the anchor is a grid node; the
    kink then sits at the same relative spot for every eps and the error
    expansion in eps stays clean.
    """
    spec.check(f)
    a, b = map(float, interval)
    h = spec.h
    if anchor is not None and a < anchor:
        a = anchor - math.ceil((anchor - a) / h) * h
    n = int(math.ceil((b - a) / h - 1e-9))
    half = int(math.floor(spec.eps / h))
    weights = bump(np.arange(-half, half + 1) * h / spec.eps)
    weights = weights / weights.sum()
    j = np.arange(-1 - half, n + 2 + half)
    grid = a + j * h
    lo, hi = f.domain
    if grid[0] <= lo or grid[-1] >= hi:
        raise DomainError(f"smoothing stencil for {interval} leaves the domain ({lo}, {hi})")
    u = np.convolve(f(grid), weights, mode="valid")
    return a + np.arange(-1, n + 2) * h, u


def mollified_second_derivative(f: PiecewiseFn, spec: MollifierSpec,
                                interval: tuple[float, float], anchor: float | None = None):
    """``(t, (f * kernel_eps)'')`` by second-order central differences, t on the interval grid."""
    t, u = mollify(f, spec, interval, anchor)
    d2 = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / spec.h ** 2
    return t[1:-1], d2


def _sample(phi, t):
    try:
        return np.asarray(phi(t), dtype=float)
    except (TypeError, ValueError):
        return np.array([phi(x) for x in t], dtype=float)


def mollified_pairing(f: PiecewiseFn, phi, interval: tuple[float, float],
                      spec: MollifierSpec, anchor: float | None = None) -> float:
    """Trapezoid value of ``integral (f * kernel_eps)'' phi dt`` over ``interval``."""
    t, d2 = mollified_second_derivative(f, spec, interval, anchor)
    w = d2 * _sample(phi, t)
    return float(spec.h * (w.sum() - 0.5 * (w[0] + w[-1])))


@dataclass(frozen=True)
class BumpTest:
    """Test function ``bump((t - center)/radius)**power`` on [center - radius, center + radius].

    At the centre, power 4 (the default) has a negative second and a positive fourth
    derivative; power 1 has both negative.  That sign pattern decides whether
    mollifier error ratios approach 4 from below or from above.
    """

    center: float
    radius: float
    power: int = 4

    def __call__(self, t):
        return bump((np.asarray(t, dtype=float) - self.center) / self.radius) ** self.power

    @property
    def support(self) -> tuple[float, float]:
        return self.center - self.radius, self.center + self.radius


def breakpoint_room(f: PiecewiseFn, t_i: float) -> float:
    """Distance from ``t_i`` to the nearest other breakpoint or domain edge."""
    lo, hi = f.domain
    others = [b for b in (lo, *f.breakpoints, hi) if b != t_i]
    return min(abs(b - t_i) for b in others)


def regular_second_derivative(f: PiecewiseFn) -> GenFun:
    return GenFun(f.derivative(2))


def atom_extraction(f: PiecewiseFn, spec: MollifierSpec, t_i: float,
                    radius: float | None = None) -> float:
    """Estimate the delta weight of f'' at ``t_i`` by mollification.

    Pairs the mollified f'' with a bump centred on ``t_i``, subtracts the
    pairing of the regular part and divides by the bump's value at ``t_i``.
    """
    if t_i not in f.breakpoints:
        raise ValidationError(f"t={t_i!r} is not a breakpoint")
    if radius is None:
        radius = 0.5 * breakpoint_room(f, t_i)
    phi = BumpTest(t_i, radius)
    total = mollified_pairing(f, phi, phi.support, spec, anchor=t_i)
    smooth = weak_pairing(regular_second_derivative(f), phi, phi.support, tol=PAIRING_TOL)
    return (total - smooth) / float(phi(t_i))


@dataclass(frozen=True)
class ConvergenceStudy:
    eps: tuple[float, ...]
    errors: tuple[float, ...]

    @property
    def ratios(self) -> tuple[float, ...]:
        return tuple(a / b if b else math.inf for a, b in zip(self.errors, self.errors[1:]))

    def ratios_within(self, lo: float = 1.5, hi: float = 4.0) -> bool:
        return all(lo <= r <= hi for r in self.ratios)

    @property
    def non_increasing(self) -> bool:
        return all(b <= a for a, b in zip(self.errors, self.errors[1:]))


def weak_convergence(f: PiecewiseFn, fpp: GenFun, phi: BumpTest, eps0: float,
                     halvings: int = 4) -> ConvergenceStudy:
    """``|<f'', phi> - integral (f * kernel_eps)'' phi|`` for eps0, eps0/2, ...

    The mollifier grid is anchored on the breakpoint inside the support, if any.
    """
    exact = weak_pairing(fpp, phi, phi.support, tol=PAIRING_TOL)
    lo, hi = phi.support
    inside = [b for b in f.breakpoints if lo < b < hi]
    anchor = inside[0] if inside else None
    eps = tuple(eps0 / 2 ** i for i in range(halvings + 1))
    errors = tuple(
        abs(exact - mollified_pairing(f, phi, phi.support, MollifierSpec(e), anchor))
        for e in eps
    )
    return ConvergenceStudy(eps, errors)


def atom_convergence(f: PiecewiseFn, t_i: float, eps0: float, halvings: int = 4,
                     radius: float | None = None) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Atom estimates at eps0, eps0/2, ...; returns ``(eps, estimates)``."""
    eps = tuple(eps0 / 2 ** i for i in range(halvings + 1))
    return eps, tuple(atom_extraction(f, MollifierSpec(e), t_i, radius) for e in eps)


def random_bumps(f: PiecewiseFn, rng: np.random.Generator, count: int = 10,
                 locations: Sequence[float] | None = None) -> list[BumpTest]:
    """Bumps straddling breakpoints: radius 30-60% of the free room, centre within 20% of it."""
    locations = list(f.breakpoints if locations is None else locations)
    out = []
    for i in range(count):
        t_i = locations[i % len(locations)]
        room = breakpoint_room(f, t_i)
        radius = room * rng.uniform(0.3, 0.6)
        out.append(BumpTest(t_i + radius * rng.uniform(-0.2, 0.2), radius))
    return out


# finite-difference curvature -------------------------------------------------------


def fd_derivatives(fn: Callable[[float], float], t: float, h: float) -> tuple[float, float]:
    """Fourth-order central differences for (f', f'')."""
    f2m, f1m, f0, f1p, f2p = (fn(t + k * h) for k in (-2, -1, 0, 1, 2))
    d1 = (-f2p + 8 * f1p - 8 * f1m + f2m) / (12 * h)
    d2 = (-f2p + 16 * f1p - 30 * f0 + 16 * f1m - f2m) / (12 * h * h)
    return d1, d2


def textbook_curvature(fn: Callable[[float], float], k: int, t: float,
                       h: float | None = None) -> dict[str, float]:
    """FRW curvature coefficients from finite differences of a smooth scale factor."""
    h = 1e-3 * abs(t) if h is None else h
    f0 = fn(t)
    d1, d2 = fd_derivatives(fn, t, h)
    a = (d1 * d1 + k) / (f0 * f0)
    b = d2 / f0
    return {"A": a, "B": b, "ric_uu": -3 * b, "ric_sp": 2 * a + b, "R": 6 * a + 6 * b}


# report ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _rel_err(x, y, floor=0.0):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    scale = np.maximum(np.maximum(np.abs(x), np.abs(y)), floor)
    with np.errstate(invalid="ignore", divide="ignore"):
        err = np.where(scale > 0, np.abs(x - y) / scale, 0.0)
    return float(np.max(err)) if err.size else 0.0


def interior_points(f: PiecewiseFn, rng: np.random.Generator, count: int) -> np.ndarray:
    """Random non-breakpoint points, spread evenly over the segments."""
    from .cosmo import segment_samples

    per = max(1, count // len(f.segments))
    pts = []
    for i in range(len(f.segments)):
        grid = segment_samples(f, i, 200)
        lo, hi = grid[0], grid[-1]
        if lo > 0:
            pts.append(np.exp(rng.uniform(math.log(lo), math.log(hi), per)))
        else:
            pts.append(rng.uniform(lo, hi, per))
    t = np.concatenate(pts)[:count]
    return t[~np.isin(t, f.breakpoints)]


def check_reconstruction(f: PiecewiseFn, rng: np.random.Generator,
                         count: int = 500) -> tuple[float, float]:
    """Max relative error of step-reconstructed f', f'' against the brute oracle."""
    pieces, bps = f.pieces, f.breakpoints
    t = interior_points(f, rng, count)
    errs = []
    for order, recon in ((1, step_reconstruct_fprime), (2, step_reconstruct_fpp)):
        g = recon(pieces, bps, domain=f.domain)
        errs.append(_rel_err(g.regular(t), brute_piecewise_derivative(pieces, bps, order)(t)))
    return errs[0], errs[1]


def check_atoms(f: PiecewiseFn) -> float:
    """Largest |difference| between reconstructed/derived f'' atoms and brute jumps (inf on mismatch)."""
    expected = brute_jumps(f.pieces, f.breakpoints, 1)
    worst = 0.0
    for g in (step_reconstruct_fpp(f.pieces, f.breakpoints, "C0", f.domain),
              derivative(derivative(f))):
        got = [(a.location, a.weight) for a in g.atoms]
        if [loc for loc, _ in got] != [loc for loc, _ in expected]:
            return math.inf
        worst = max([worst, *(abs(w - e) for (_, w), (_, e) in zip(got, expected))])
    return worst


def check_trace(m: FRWModel, rng: np.random.Generator, count: int = 1000) -> tuple[float, float]:
    """``R`` vs ``-ric_uu + 3 ric_sp``: (max relative regular error, max atom difference)."""
    ric_uu, ric_sp = ricci(m)
    r = scalar_curvature(m)
    a, b = riemann_coefficients(m)
    trace = ric_uu * -1.0 + ric_sp * 3.0
    t = interior_points(m.f, rng, count)
    scale = 6.0 * (np.abs(a.regular(t)) + np.abs(b.regular(t)))
    diff = np.abs(r.regular(t) - trace.regular(t))
    reg = float(np.max(diff / np.maximum(scale, np.finfo(float).tiny)))
    atoms_r = dict((at.location, at.weight) for at in r.atoms)
    atoms_t = dict((at.location, at.weight) for at in trace.atoms)
    if atoms_r.keys() != atoms_t.keys():
        return reg, math.inf
    return reg, max([0.0, *(abs(atoms_r[k] - atoms_t[k]) for k in atoms_r)])


def check_smooth_segments(m: FRWModel, count: int = 20) -> float:
    """Max relative error of curvature vs finite differences inside each segment."""
    from .cosmo import segment_samples

    a, b = riemann_coefficients(m)
    worst = 0.0
    for i, s in enumerate(m.f.segments):
        piece = s.piece
        for t in segment_samples(m.f, i, count):
            h = 1e-3 * min(abs(t), t - s.lo, s.hi - t) / 2.0
            ref = textbook_curvature(piece, m.k, t, h)
            for name, got in (("A", a.regular(t)), ("B", b.regular(t))):
                scale = max(abs(ref["A"]), abs(ref["B"]), 1e-300)
                worst = max(worst, abs(got - ref[name]) / scale)
    return worst


def verification_report(m: FRWModel, seed: int = 0, eps_fraction: float = 0.1,
                        bumps: int = 10, params=None) -> list[PropertyResult]:
    """Run every oracle against ``m``; cosmology checks are added when ``params`` is given."""
    rng = np.random.default_rng(seed)
    out = []
    f = m.f
    simple = all(p.law is not None for p in f.pieces)
    if simple:
        e1, e2 = check_reconstruction(f, rng)
        out.append(PropertyResult("reconstruction_fprime", e1 <= 1e-12, e1, 1e-12))
        out.append(PropertyResult("reconstruction_fpp", e2 <= 1e-12, e2, 1e-12))
        da = check_atoms(f)
        out.append(PropertyResult("atom_weights_closed_form", da == 0.0, da, 0.0))
    reg, atom = check_trace(m, rng)
    out.append(PropertyResult("trace_identity_regular", reg <= 1e-12, reg, 1e-12))
    out.append(PropertyResult("trace_identity_atoms", atom == 0.0, atom, 0.0))
    sm = check_smooth_segments(m)
    out.append(PropertyResult("smooth_segment_fd_agreement", sm <= 1e-6, sm, 1e-6))

    if f.breakpoints:
        fpp = derivative(derivative(f))
        ratios = []
        monotone = True
        for phi in random_bumps(f, rng, bumps):
            study = weak_convergence(f, fpp, phi, eps_fraction * phi.radius)
            ratios.extend(study.ratios)
            monotone &= study.non_increasing
        lo, hi = min(ratios), max(ratios)
        out.append(PropertyResult("weak_convergence_ratio_min", lo >= 1.5, lo, 1.5,
                                  f"per-halving ratios over {bumps} bumps"))
        out.append(PropertyResult("weak_convergence_ratio_max", hi <= 4.0, hi, 4.0,
                                  f"per-halving ratios over {bumps} bumps"))
        out.append(PropertyResult("weak_convergence_non_increasing", monotone, float(not monotone), 0.0))
        for t_i in f.breakpoints:
            room = breakpoint_room(f, t_i)
            _, est = atom_convergence(f, t_i, eps_fraction * 0.5 * room, radius=0.5 * room)
            exact = fpp.atom_at(t_i)
            left = abs(f.limit(t_i, "left", 1))
            if exact:
                err = abs(est[-1] - exact) / abs(exact)
                tol = 0.01
            else:
                err = abs(est[-1]) / max(left, 1e-300)
                tol = 0.01
            out.append(PropertyResult(f"atom_extraction[t={t_i:.17g}]", err <= tol, err, tol,
                                      f"estimate {est[-1]:.17g}, closed form {exact:.17g}"))
    if params is not None:
        out.extend(cosmology_checks(params, rng))
    return out


def cosmology_checks(params, rng: np.random.Generator) -> list[PropertyResult]:
    """Three-phase specific properties (run at Lambda = 0)."""
    from . import cosmo

    out = []
    pieces = cosmo.phase_pieces(params)
    bps = [params.t1, params.t2]
    fp, fpp = cosmo.frw_derivatives(params)
    gp = step_reconstruct_fprime(pieces, bps)
    gpp = step_reconstruct_fpp(pieces, bps, "C0")
    f = cosmo.build_scale_factor(params)
    t = interior_points(f, rng, 600)
    err = max(_rel_err(fp.regular(t), gp.regular(t)), _rel_err(fpp.regular(t), gpp.regular(t)))
    out.append(PropertyResult("phase_specialization_regular", err <= 1e-12, err, 1e-12))
    same = fpp.atoms == gpp.atoms
    out.append(PropertyResult("phase_specialization_atoms", same, float(not same), 0.0))

    m = cosmo.frw_model(params, Lambda=0.0)
    r = scalar_curvature(m)
    rd = np.geomspace(params.t1 * 1e-3, params.t1, 1002)[1:-1]
    flat = float(np.max(np.abs(r.regular(rd))))
    out.append(PropertyResult("rd_scalar_flatness", flat <= 1e-12, flat, 1e-12))
    md = np.geomspace(params.t1, params.t2, 102)[1:-1]
    ld = np.linspace(params.t2, params.t2 + 10.0 / params.K, 102)[1:-1]
    e_md = _rel_err(r.regular(md), 4.0 / (3.0 * md ** 2))
    e_ld = _rel_err(r.regular(ld), 12.0 * params.K ** 2)
    out.append(PropertyResult("md_scalar_closed_form", e_md <= 1e-12, e_md, 1e-12))
    out.append(PropertyResult("ld_scalar_closed_form", e_ld <= 1e-12, e_ld, 1e-12))

    expected_w = (1 / 3, 0.0, -1.0)
    expected_slope = (-4.0, -3.0, 0.0)
    for seg, name in enumerate(cosmo.PHASES):
        ts = cosmo.segment_samples(m.f, seg, 50)
        rho = cosmo.density_function(m)(ts)
        P = cosmo.pressure_function(m)(ts)
        w_err = float(np.max(np.abs(P / rho - expected_w[seg])))
        out.append(PropertyResult(f"eos_ratio[{name}]", w_err <= 1e-10, w_err, 1e-10))
        slope = cosmo.eos_scaling_exponent(m, seg)
        s_err = abs(slope - expected_slope[seg])
        out.append(PropertyResult(f"eos_scaling_exponent[{name}]", s_err <= 1e-6, s_err, 1e-6))
        resid = cosmo.continuity_check(m, seg)
        out.append(PropertyResult(f"continuity[{name}]", resid <= 1e-8, resid, 1e-8))

    r1, r2 = cosmo.c1_matching_residual(params)
    scale = 0.5 * params.c0 * params.t1 ** -0.5
    out.append(PropertyResult("c1_mismatch_at_t1", abs(r1) >= 1e-3 * scale, abs(r1), 1e-3 * scale,
                              "must be at least the tolerance"))
    return out
