import csv
import io
import math
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from warpcurv.cli import (
    EVENT_COLUMNS,
    FLUID_COLUMNS,
    PROFILE_COLUMNS,
    VERIFY_COLUMNS,
    describe,
    fmt,
    main,
)
from warpcurv.errors import ParseError, ScenarioIOError, ValidationError
from warpcurv.scenario import (
    CustomModel,
    Sampling,
    Scenario,
    SegmentSpec,
    dump_scenario,
    load_scenario,
    parse_scenario,
    sample_times,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

NUDGE = """\
name: nudge
preset: flat-rd-md-ld
params: {c0: 1, t1: 1, t2: 3, K: 0.25}
sampling: {t_min: 0.5, t_max: 4, count: 8, spacing: linear}
outputs: [profile, events, fluid, verify]
"""


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def table(path):
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))


class TestParsing:
    def test_preset_default_k(self):
        sc = parse_scenario("preset: flat-rd-md-ld\n", default_name="x")
        assert sc.name == "x" and sc.params.K_is_default
        assert sc.sampling == Sampling(4.7e4 * 1e-3, 9.8e9 * 10, 200, "log")
        assert sc.outputs == ("profile", "events")

    def test_exponent_string_numbers(self):
        sc = parse_scenario("preset: flat-rd-md-ld\nparams: {t1: 4.7e4, t2: 9.8e9}\n")
        assert sc.params.t1 == 4.7e4

    def test_yaml_error_position(self):
        with pytest.raises(ParseError, match=r"^bad\.yaml:3:1: expected ',' or ']'"):
            parse_scenario("name: a\nsampling: [1, 2\n", source="bad.yaml")

    def test_overlap_names_segments(self):
        text = """\
custom:
  segments:
    - {kind: constant, c: 1, t_lo: 0, t_hi: 2}
    - {kind: constant, c: 1, t_lo: 1, t_hi: 3}
sampling: {t_min: 0.5, t_max: 1.5, count: 3}
"""
        with pytest.raises(ValidationError, match=r"s:4: custom\.segments\[1\]: segments 0 and 1 overlap"):
            parse_scenario(text, source="s")

    def test_gap(self):
        text = """\
custom:
  segments:
    - {kind: constant, c: 1, t_lo: 0, t_hi: 1}
    - {kind: constant, c: 1, t_lo: 2, t_hi: 3}
sampling: {t_min: 0.5, t_max: 1.5, count: 3}
"""
        with pytest.raises(ValidationError, match="gap between segments 0 and 1"):
            parse_scenario(text)

    def test_value_jump(self):
        text = """\
custom:
  segments:
    - {kind: constant, c: 1, t_lo: 0, t_hi: 1}
    - {kind: constant, c: 2, t_lo: 1, t_hi: 3}
sampling: {t_min: 0.5, t_max: 1.5, count: 3}
"""
        with pytest.raises(ValidationError, match="scale factor jumps at t=1.0"):
            parse_scenario(text)

    @pytest.mark.parametrize("text,match", [
        ("preset: flat-rd-md-ld\nbogus: 1\n", "unknown key"),
        ("preset: other\n", "unknown preset"),
        ("preset: flat-rd-md-ld\nparams: {c0: -1}\n", "params"),
        ("preset: flat-rd-md-ld\nsampling: {count: 1}\n", "at least 2"),
        ("preset: flat-rd-md-ld\nsampling: {t_min: 0, spacing: log}\n", "domain"),
        ("preset: flat-rd-md-ld\noutputs: [profile, plots]\n", "unknown output"),
        ("custom: {segments: [{kind: power_law, c: 1, t_lo: 0, t_hi: 1}]}\n", "needs 'p'"),
        ("name: a\n", "missing key"),
    ])
    def test_rejections(self, text, match):
        with pytest.raises(ValidationError, match=match):
            parse_scenario(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioIOError):
            load_scenario(tmp_path / "nope.yaml")

    def test_shipped_scenarios_load(self):
        names = sorted(p.stem for p in SCENARIOS.glob("*.yaml"))
        assert names == ["kinked_closed", "natural_units", "static", "three_phase"]
        for p in SCENARIOS.glob("*.yaml"):
            assert load_scenario(p).name == p.stem


_powers = st.integers(-6, 12).map(lambda n: Fraction(n, 3))
_rates = st.integers(-8, 8).map(lambda n: Fraction(n, 4))


@st.composite
def custom_scenarios(draw):
    n = draw(st.integers(1, 4))
    edges = sorted(draw(st.lists(st.integers(1, 40), min_size=n - 1, max_size=n - 1, unique=True)))
    edges = [0.0] + [e / 4 for e in edges] + [math.inf]
    segs, prev = [], None
    for lo, hi in zip(edges, edges[1:]):
        kind = draw(st.sampled_from(["power_law", "exponential", "constant"]))
        param = {"power_law": _powers, "exponential": _rates, "constant": st.none()}[kind]
        spec = SegmentSpec(kind, 1.0, draw(param), lo, hi)
        c = draw(st.floats(0.1, 10.0)) if prev is None else prev.piece()(lo) / spec.piece()(lo)
        spec = SegmentSpec(kind, c, spec.param, lo, hi)
        segs.append(spec)
        prev = spec
    t_min = draw(st.floats(0.05, 1.0))
    sampling = Sampling(t_min, t_min + draw(st.floats(0.5, 10.0)), draw(st.integers(2, 50)),
                        draw(st.sampled_from(["linear", "log"])))
    outputs = draw(st.lists(st.sampled_from(["profile", "events", "fluid"]), min_size=1, unique=True))
    custom = CustomModel(draw(st.sampled_from([-1, 0, 1])), draw(st.floats(0.0, 2.0)), tuple(segs))
    return Scenario(draw(st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True)), sampling, tuple(outputs),
                    custom=custom)


class TestRoundTrip:
    @settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(custom_scenarios())
    def test_custom(self, sc):
        assert parse_scenario(dump_scenario(sc)) == sc

    @given(st.floats(0.1, 10), st.floats(1, 100), st.floats(2, 50), st.one_of(st.none(), st.floats(0.01, 50)))
    def test_preset(self, c0, t1, ratio, kt):
        K = None if kt is None else kt / (t1 * ratio)
        text = f"preset: flat-rd-md-ld\nparams: {{c0: {c0!r}, t1: {t1!r}, t2: {t1 * ratio!r}"
        text += "}\n" if K is None else f", K: {K!r}}}\n"
        sc = parse_scenario(text)
        again = parse_scenario(dump_scenario(sc))
        assert again == sc and again.params.K_is_default == (K is None)


class TestSampling:
    def test_breakpoint_nudged(self):
        sc = parse_scenario(NUDGE)
        ts, nudges = sample_times(sc)
        assert nudges == [(1.0, math.nextafter(1.0, math.inf)), (3.0, math.nextafter(3.0, math.inf))]
        assert 1.0 not in ts.tolist() and 3.0 not in ts.tolist()

    def test_endpoints_exact(self):
        ts, _ = sample_times(parse_scenario("preset: flat-rd-md-ld\n"))
        assert ts[0] == 47.0 and ts[-1] == 9.8e10 and len(ts) == 200


class TestRun:
    def test_outputs_and_headers(self, tmp_path):
        code, out = run_cli("run", write(tmp_path, NUDGE), "--out", str(tmp_path / "o"), "--emit-plot-script")
        assert code == 0
        o = tmp_path / "o"
        assert sorted(p.name for p in o.iterdir()) == [
            "nudge_events.csv", "nudge_fluid.csv", "nudge_plot.gp", "nudge_profile.csv", "nudge_verify.csv"]
        text = (o / "nudge_profile.csv").read_bytes()
        assert b"\r" not in text
        head = [ln for ln in text.decode().splitlines() if ln.startswith("#")]
        assert "# K: 0.25 (given)" in head
        assert "# nudged sample 1 -> 1.0000000000000002 (breakpoint)" in head
        assert tuple(table(o / "nudge_profile.csv")[0]) == PROFILE_COLUMNS
        assert tuple(table(o / "nudge_events.csv")[0]) == EVENT_COLUMNS
        assert tuple(table(o / "nudge_fluid.csv")[0]) == FLUID_COLUMNS
        assert tuple(table(o / "nudge_verify.csv")[0]) == VERIFY_COLUMNS
        assert all(r[1] == "PASS" for r in table(o / "nudge_verify.csv")[1:])
        assert "nudge_curvature.png" in (o / "nudge_plot.gp").read_text()

    def test_default_k_echoed(self, tmp_path):
        code, _ = run_cli("run", write(tmp_path, "name: d\npreset: flat-rd-md-ld\n"), "--out", str(tmp_path))
        assert code == 0
        head = (tmp_path / "d_profile.csv").read_text().splitlines()
        assert "# K: 6.8027210884353736e-11 (default 2/(3 t2))" in head

    def test_events_values(self, tmp_path):
        run_cli("run", write(tmp_path, NUDGE), "--out", str(tmp_path))
        rows = table(tmp_path / "nudge_events.csv")[1:]
        assert [float(r[0]) for r in rows] == [1.0, 3.0]
        w = float(rows[0][1])
        assert w == pytest.approx(1 / 6, rel=1e-15)
        assert float(rows[0][2]) == -3 * w and float(rows[0][4]) == 6 * w

    def test_fluid_ratios(self, tmp_path):
        run_cli("run", write(tmp_path, NUDGE), "--out", str(tmp_path))
        want = {"RD": 1 / 3, "MD": 0.0, "LD": -1.0}
        for t, phase, rho, p, ratio in table(tmp_path / "nudge_fluid.csv")[1:]:
            assert float(rho) > 0
            assert float(ratio) == pytest.approx(want[phase], abs=1e-10)

    def test_static_is_flat(self, tmp_path):
        code, _ = run_cli("run", str(SCENARIOS / "static.yaml"), "--out", str(tmp_path))
        assert code == 0
        rows = table(tmp_path / "static_profile.csv")
        assert len(rows) == 6
        for r in rows[1:]:
            assert r[1] == "1" and all(v == "0" for v in r[2:])
        assert table(tmp_path / "static_events.csv") == [list(EVENT_COLUMNS)]

    def test_kinked_closed_events(self, tmp_path):
        run_cli("run", str(SCENARIOS / "kinked_closed.yaml"), "--out", str(tmp_path))
        (row,) = table(tmp_path / "kinked_closed_events.csv")[1:]
        assert [float(x) for x in row] == pytest.approx([2.0, -0.5, 0.75, -0.25, -1.5], rel=1e-12)

    def test_deterministic(self, tmp_path):
        src = str(SCENARIOS / "three_phase.yaml")
        for d in ("a", "b"):
            assert run_cli("run", src, "--out", str(tmp_path / d), "--emit-plot-script")[0] == 0
        for p in (tmp_path / "a").iterdir():
            assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


class TestExitCodes:
    def test_missing_file(self, tmp_path):
        assert run_cli("describe", str(tmp_path / "missing.yaml"))[0] == 3

    def test_parse_error(self, tmp_path):
        assert run_cli("describe", write(tmp_path, "a: [1\n"))[0] == 1

    @pytest.mark.parametrize("params", ["{t1: 5, t2: 1}", "{t1: 15, t2: 720, K: 1}"])
    def test_validation(self, tmp_path, params):
        assert run_cli("run", write(tmp_path, f"preset: flat-rd-md-ld\nparams: {params}\n"))[0] == 1

    def test_overflow_is_computation_error(self, tmp_path):
        text = """\
custom:
  segments:
    - {kind: exponential, c: 1, K: 800, t_lo: 0, t_hi: .inf}
sampling: {t_min: 1, t_max: 2, count: 3}
"""
        path = write(tmp_path, text)
        assert run_cli("run", path, "--out", str(tmp_path))[0] == 2
        assert not list(tmp_path.glob("*.csv"))
        assert run_cli("verify", path)[0] == 2

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert run_cli("run", str(SCENARIOS / "static.yaml"), "--out", str(blocker / "sub"))[0] == 3

    def test_verify_ok(self):
        code, out = run_cli("verify", str(SCENARIOS / "natural_units.yaml"))
        assert code == 0
        assert out.splitlines()[0] == ",".join(VERIFY_COLUMNS)


class TestDescribe:
    def test_year_unit_constants(self):
        text = describe(parse_scenario("preset: flat-rd-md-ld\n"))
        lines = dict(ln.split(": ", 1) for ln in text.splitlines())
        c1, t2 = 4.7e4 ** (-1 / 6), 9.8e9
        assert lines["c1"] == fmt(c1)
        K = 2 / (3 * t2)
        assert float(lines["c2"]) == pytest.approx(c1 * t2 ** (2 / 3) * math.exp(-K * t2), rel=1e-14)
        assert lines["continuity at 47000"].startswith("C0")
        assert lines["continuity at 9800000000"].startswith("C1")
        assert abs(float(lines["r2"])) <= 1e-12

    def test_seventeen_digits(self):
        assert fmt(1 / 3) == "0.33333333333333331"
        assert float(fmt(math.pi)) == math.pi
