import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from warpcurv import cosmo
from warpcurv.cosmo import (
    CosmologyParams,
    build_scale_factor,
    c1_matching_residual,
    continuity_check,
    eos_scaling_exponent,
    fluid_state,
    friedmann_density,
    friedmann_pressure,
    frw_derivatives,
    frw_model,
)
from warpcurv.errors import AmbiguousPoint, DegenerateFit, ValidationError
from warpcurv.genfun import AnalyticPiece, Continuity, PiecewiseFn, step_reconstruct_fpp
from warpcurv.warped import FRWModel, scalar_curvature

NATURAL = CosmologyParams(c0=1.0, t1=1.0, t2=math.e, K=1 / 3)

# K t2 stays moderate so exp(K t2) is representable
params_st = st.builds(
    lambda c0, t1, ratio, kt: CosmologyParams(
        c0=c0, t1=t1, t2=t1 * ratio, K=None if kt is None else kt / (t1 * ratio)),
    st.floats(0.1, 10.0), st.floats(0.1, 1e5), st.floats(2.0, 1e5),
    st.one_of(st.none(), st.floats(1e-3, 50.0)),
)


class TestParams:
    def test_defaults(self):
        p = CosmologyParams()
        assert (p.c0, p.t1, p.t2) == (1.0, 4.7e4, 9.8e9)
        assert p.K_is_default and p.K == 2 / (3 * 9.8e9)
        assert p.Lambda == 0.0

    def test_natural_constants(self):
        assert NATURAL.c1 == 1.0
        assert NATURAL.c2 == pytest.approx(math.exp(2 / 3) * math.exp(-math.e / 3), rel=1e-15)
        assert not NATURAL.K_is_default

    @pytest.mark.parametrize("kw", [dict(c0=0.0), dict(t1=2.0, t2=1.0), dict(K=-1.0), dict(Lambda=-1.0),
                                    dict(t1=1.0, t2=10.0, K=80.0)])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            CosmologyParams(**kw)


class TestScaleFactor:
    def test_continuity(self):
        f = build_scale_factor(NATURAL)
        assert f.limit(1.0, "left") == f.limit(1.0, "right")
        assert f.domain == (0.0, math.inf) and f.breakpoints == (1.0, math.e)
        assert [f.continuity_class_at(b) for b in f.breakpoints] == [Continuity.C0, Continuity.C0]

    def test_default_k_makes_t2_c1(self):
        f = build_scale_factor(CosmologyParams())
        assert f.continuity_class_at(4.7e4) is Continuity.C0
        assert f.continuity_class_at(9.8e9) is Continuity.C1

    @settings(max_examples=50, deadline=None)
    @given(params_st)
    def test_values_match(self, p):
        f = build_scale_factor(p)
        for b in f.breakpoints:
            assert f.limit(b, "left") == pytest.approx(f.limit(b, "right"), rel=1e-13)


class TestResiduals:
    def test_natural(self):
        r1, _ = c1_matching_residual(CosmologyParams(c0=1.0, t1=1.0, t2=5.0))
        assert r1 == pytest.approx(-1 / 6, rel=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.1, 10.0), st.floats(0.1, 1e5), st.floats(2.0, 1e5))
    def test_default_k_closes_t2_only(self, c0, t1, ratio):
        p = CosmologyParams(c0=c0, t1=t1, t2=t1 * ratio)
        r1, r2 = c1_matching_residual(p)
        assert abs(r1) >= 1e-3 * 0.5 * c0 * t1 ** -0.5
        assert abs(r2) <= 1e-12 * (2 / 3) * p.c1 * p.t2 ** (-1 / 3)

    def test_equal_pieces_no_mismatch(self):
        f = PiecewiseFn.from_pieces([AnalyticPiece.power_law(1.0, "1/2")] * 2, [1.0])
        assert f.jump(1.0, 1) == 0.0


class TestDerivatives:
    def test_atoms(self):
        _, fpp = frw_derivatives(NATURAL)
        assert [a.location for a in fpp.atoms] == [1.0, math.e]
        assert fpp.atom_at(1.0) == pytest.approx(1 / 6, rel=1e-15)
        t2, K = math.e, 1 / 3
        want = -2 / 3 * NATURAL.c1 * t2 ** (-1 / 3) + K * NATURAL.c2 * math.exp(K * t2)
        assert fpp.atom_at(t2) == pytest.approx(want, rel=1e-14)

    def test_default_k_kills_t2_atom(self):
        _, fpp = frw_derivatives(CosmologyParams())
        assert [a.location for a in fpp.atoms] == [4.7e4]

    @settings(max_examples=40, deadline=None)
    @given(params_st)
    def test_literal_equals_generic(self, p):
        fp, fpp = frw_derivatives(p)
        g = step_reconstruct_fpp(cosmo.phase_pieces(p), [p.t1, p.t2], "C0")
        assert fpp.atoms == g.atoms
        ts = np.concatenate([np.geomspace(p.t1 * 1e-2, p.t2 * 0.999, 40),
                             np.linspace(p.t2 * 1.001, p.t2 + 5 / p.K, 10)])
        np.testing.assert_allclose(fpp.regular(ts), g.regular(ts), rtol=1e-12)
        f = build_scale_factor(p)
        np.testing.assert_allclose(fp.regular(ts), f.derivative()(ts), rtol=1e-12)

    def test_t1_atom_closed_form(self):
        p = CosmologyParams()
        _, fpp = frw_derivatives(p)
        assert fpp.atom_at(p.t1) == pytest.approx(p.c0 * p.t1 ** -0.5 / 6, rel=1e-12)
        assert fpp.atom_at(p.t1) > 0


class TestFriedmann:
    def test_matter_density(self):
        m = frw_model(NATURAL)
        assert friedmann_density(m, 2.0) == pytest.approx(1 / (6 * math.pi * 4), rel=1e-14)
        assert friedmann_pressure(m, 2.0) == pytest.approx(0.0, abs=1e-16)

    def test_radiation(self):
        m = frw_model(NATURAL)
        t = 0.3
        rho = friedmann_density(m, t)
        assert rho == pytest.approx(3 / (32 * math.pi * t * t), rel=1e-14)
        assert friedmann_pressure(m, t) == pytest.approx(rho / 3, rel=1e-14)

    def test_lambda_era(self):
        m = frw_model(NATURAL)
        rho = friedmann_density(m, 5.0)
        assert friedmann_pressure(m, 5.0) == pytest.approx(-rho, rel=1e-14)
        de_sitter = frw_model(NATURAL, Lambda=3 * (1 / 3) ** 2)
        assert friedmann_density(de_sitter, 5.0) == pytest.approx(0.0, abs=1e-15)

    def test_breakpoint_refused(self):
        m = frw_model(NATURAL)
        with pytest.raises(AmbiguousPoint):
            friedmann_density(m, 1.0)
        with pytest.raises(AmbiguousPoint):
            fluid_state(m, math.e)

    def test_fluid_state(self):
        s = fluid_state(frw_model(NATURAL), 0.5)
        assert s.omega == pytest.approx(1 / 3, rel=1e-14)

    @pytest.mark.parametrize("seg,slope", [(0, -4.0), (1, -3.0), (2, 0.0)])
    def test_eos_exponent(self, seg, slope):
        for p in (NATURAL, CosmologyParams()):
            assert eos_scaling_exponent(frw_model(p), seg) == pytest.approx(slope, abs=1e-6)

    def test_eos_degenerate(self):
        m = FRWModel(PiecewiseFn.smooth(AnalyticPiece.constant(2.0), (0.0, 10.0)))
        with pytest.raises(DegenerateFit):
            eos_scaling_exponent(m, 0)

    def test_continuity(self):
        m = frw_model(NATURAL)
        for seg in range(3):
            assert continuity_check(m, seg) <= 1e-8
        assert continuity_check(frw_model(CosmologyParams()), 0, relative=True) <= 1e-8
        static = FRWModel(PiecewiseFn.smooth(AnalyticPiece.constant(2.0), (0.0, 10.0)))
        assert continuity_check(static, 0) == 0.0

    def test_curved_density_includes_k(self):
        m = FRWModel(PiecewiseFn.smooth(AnalyticPiece.power_law(1.0, 1)), k=1)
        assert friedmann_density(m, 1.0) == pytest.approx(6 / (8 * math.pi))


def test_radiation_scalar_flat():
    r = scalar_curvature(frw_model(CosmologyParams()))
    ts = np.geomspace(47.0, 4.7e4, 1000)[:-1]
    assert np.max(np.abs(r.regular(ts))) <= 1e-12
