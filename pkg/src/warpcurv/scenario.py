"""Scenario files: a YAML document describing a scale factor, a time grid and outputs.

Grammar (keys not listed are rejected)::

    name: str                      # optional, defaults to the file stem
    preset: flat-rd-md-ld          # either this ...
    params: {c0, t1, t2, K, Lambda, time_unit}   # all optional
    custom:                        # ... or this
      k: -1 | 0 | 1
      Lambda: float
      segments:
        - {kind: power_law, c: 1.0, p: 1/2, t_lo: 0, t_hi: 1}
        - {kind: exponential, c: 2.0, K: 0.5, t_lo: 1, t_hi: .inf}
        - {kind: constant, c: 1.0, t_lo: ..., t_hi: ...}
    sampling: {t_min, t_max, count, spacing: linear | log}
    outputs: [profile, events, fluid, verify]

Exponents and rates accept ``"2/3"`` style strings and are kept exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import cosmo
from .errors import ParseError, ScenarioIOError, ValidationError
from .genfun import AnalyticPiece, PiecewiseFn, Segment, as_fraction
from .warped import FRWModel

PRESET = "flat-rd-md-ld"
OUTPUTS = ("profile", "events", "fluid", "verify")
KINDS = ("power_law", "exponential", "constant")
_PARAM_KEYS = ("c0", "t1", "t2", "K", "Lambda", "time_unit")


@dataclass(frozen=True)
class SegmentSpec:
    kind: str
    c: float
    param: Fraction | None
    t_lo: float
    t_hi: float

    def piece(self) -> AnalyticPiece:
        if self.kind == "power_law":
            return AnalyticPiece.power_law(self.c, self.param)
        if self.kind == "exponential":
            return AnalyticPiece.exponential(self.c, self.param)
        return AnalyticPiece.constant(self.c)


@dataclass(frozen=True)
class CustomModel:
    k: int
    Lambda: float
    segments: tuple[SegmentSpec, ...]


@dataclass(frozen=True)
class Sampling:
    t_min: float
    t_max: float
    count: int
    spacing: str


@dataclass(frozen=True)
class Scenario:
    name: str
    sampling: Sampling
    outputs: tuple[str, ...]
    params: cosmo.CosmologyParams | None = None
    custom: CustomModel | None = None
    _model: FRWModel = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if (self.params is None) == (self.custom is None):
            raise ValidationError("exactly one of preset and custom is required")
        if self.params is not None:
            m = cosmo.frw_model(self.params)
        else:
            f = PiecewiseFn([Segment(s.piece(), s.t_lo, s.t_hi) for s in self.custom.segments])
            m = FRWModel(f, self.custom.k, self.custom.Lambda)
        object.__setattr__(self, "_model", m)

    @property
    def is_preset(self) -> bool:
        return self.params is not None

    def model(self) -> FRWModel:
        return self._model


# parsing ---------------------------------------------------------------------


def _line_map(node, path=(), out=None) -> dict[tuple, int]:
    """1-based source line of every mapping key and sequence item."""
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            sub = path + (k.value,)
            out[sub] = k.start_mark.line + 1
            _line_map(v, sub, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out[path + (i,)] = v.start_mark.line + 1
            _line_map(v, path + (i,), out)
    return out


class _Ctx:
    def __init__(self, source: str, lines: dict[tuple, int]):
        self.source, self.lines = source, lines

    def fail(self, path: tuple, msg: str):
        where = ".".join(f"[{p}]" if isinstance(p, int) else str(p) for p in path).replace(".[", "[")
        line = next((self.lines[path[:i]] for i in range(len(path), -1, -1) if path[:i] in self.lines), None)
        loc = f"{self.source}:{line}" if line else self.source
        raise ValidationError(f"{loc}: {where or '<document>'}: {msg}")

    def mapping(self, data, path, allowed, required=()):
        if not isinstance(data, dict):
            self.fail(path, "expected a mapping")
        for key in data:
            if key not in allowed:
                self.fail(path + (key,), f"unknown key (allowed: {', '.join(allowed)})")
        for key in required:
            if key not in data:
                self.fail(path, f"missing key {key!r}")
        return data

    def number(self, data, path, integer=False):
        """Numeric field or None when absent; YAML 1.1 reads ``4.7e4`` as text, so strings are parsed."""
        if path[-1] not in data:
            return None
        v = data[path[-1]]
        if integer:
            if isinstance(v, bool) or not isinstance(v, int):
                self.fail(path, f"expected an integer, got {v!r}")
            return v
        if isinstance(v, str):
            try:
                v = float(v)
            except ValueError:
                pass
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(path, f"expected a number, got {v!r}")
        return float(v)

    def fraction(self, data, path):
        try:
            return as_fraction(data[path[-1]])
        except (TypeError, ValueError, ZeroDivisionError):
            self.fail(path, f"expected a number or 'p/q', got {data[path[-1]]!r}")


def parse_scenario(text: str, source: str = "<string>", default_name: str = "scenario") -> Scenario:
    """Validate scenario text; errors name the file, line and field."""
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        pos = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark else source
        raise ParseError(f"{pos}: {e.problem}") from None
    except yaml.YAMLError as e:
        raise ParseError(f"{source}: {e}") from None
    ctx = _Ctx(source, _line_map(node) if node is not None else {})
    top = ctx.mapping(data, (), ("name", "preset", "params", "custom", "sampling", "outputs"))
    name = str(top.get("name", default_name))

    params = custom = None
    if "preset" in top:
        if "custom" in top:
            ctx.fail(("custom",), "give either preset or custom, not both")
        if top["preset"] != PRESET:
            ctx.fail(("preset",), f"unknown preset {top['preset']!r} (known: {PRESET})")
        params = _parse_params(ctx, top.get("params") or {})
    elif "custom" in top:
        if "params" in top:
            ctx.fail(("params",), "params belong to a preset")
        custom = _parse_custom(ctx, top["custom"])
    else:
        ctx.fail((), "missing key 'preset' or 'custom'")

    if params is not None:
        default_sampling = Sampling(params.t1 * 1e-3, params.t2 * 10.0, 200, "log")
    else:
        default_sampling = None
    sampling = _parse_sampling(ctx, top.get("sampling"), default_sampling)

    outputs = top.get("outputs", ["profile", "events"])
    if not isinstance(outputs, list) or not outputs:
        ctx.fail(("outputs",), "expected a non-empty list")
    for i, o in enumerate(outputs):
        if o not in OUTPUTS:
            ctx.fail(("outputs", i), f"unknown output {o!r} (known: {', '.join(OUTPUTS)})")
    if len(set(outputs)) != len(outputs):
        ctx.fail(("outputs",), "duplicate entries")

    try:
        sc = Scenario(name, sampling, tuple(outputs), params, custom)
    except ValidationError as e:
        key = ("params",) if params is not None else ("custom", "segments")
        ctx.fail(key, str(e))
    f = sc.model().f
    for i, b in enumerate(f.breakpoints):
        if not f.is_continuous_at(b):
            left, right = f.limit(b, "left"), f.limit(b, "right")
            ctx.fail(("custom", "segments", i + 1),
                     f"scale factor jumps at t={b!r}: segment {i} ends at {left!r}, segment {i + 1} starts at {right!r}")
    _check_sampling(ctx, sc)
    return sc


def _parse_params(ctx: _Ctx, raw) -> cosmo.CosmologyParams:
    ctx.mapping(raw, ("params",), _PARAM_KEYS)
    kw = {}
    for key in _PARAM_KEYS[:-1]:
        v = ctx.number(raw, ("params", key))
        if v is not None:
            kw[key] = float(v)
    if "time_unit" in raw:
        kw["time_unit"] = str(raw["time_unit"])
    try:
        return cosmo.CosmologyParams(**kw)
    except ValidationError as e:
        ctx.fail(("params",), str(e))


def _parse_custom(ctx: _Ctx, raw) -> CustomModel:
    base = ("custom",)
    ctx.mapping(raw, base, ("k", "Lambda", "segments"), required=("segments",))
    k = ctx.number(raw, base + ("k",), integer=True)
    k = 0 if k is None else k
    if k not in (-1, 0, 1):
        ctx.fail(base + ("k",), f"must be -1, 0 or 1, got {k}")
    lam = ctx.number(raw, base + ("Lambda",))
    segs_raw = raw["segments"]
    if not isinstance(segs_raw, list) or not segs_raw:
        ctx.fail(base + ("segments",), "expected a non-empty list")
    segs = []
    for i, s in enumerate(segs_raw):
        p = base + ("segments", i)
        ctx.mapping(s, p, ("kind", "c", "p", "K", "t_lo", "t_hi"), required=("kind", "c", "t_lo", "t_hi"))
        kind = s["kind"]
        if kind not in KINDS:
            ctx.fail(p + ("kind",), f"unknown kind {kind!r} (known: {', '.join(KINDS)})")
        wanted = {"power_law": "p", "exponential": "K", "constant": None}[kind]
        for other in ("p", "K"):
            if other in s and other != wanted:
                ctx.fail(p + (other,), f"not a parameter of {kind}")
        if wanted and wanted not in s:
            ctx.fail(p, f"{kind} needs {wanted!r}")
        param = ctx.fraction(s, p + (wanted,)) if wanted else None
        c = float(ctx.number(s, p + ("c",)))
        lo, hi = float(ctx.number(s, p + ("t_lo",))), float(ctx.number(s, p + ("t_hi",)))
        if not lo < hi:
            ctx.fail(p, f"t_lo={lo!r} must be below t_hi={hi!r}")
        segs.append(SegmentSpec(kind, c, param, lo, hi))
    for i, (a, b) in enumerate(zip(segs, segs[1:])):
        if a.t_hi > b.t_lo:
            ctx.fail(base + ("segments", i + 1), f"segments {i} and {i + 1} overlap ({a.t_hi!r} > {b.t_lo!r})")
        if a.t_hi < b.t_lo:
            ctx.fail(base + ("segments", i + 1), f"gap between segments {i} and {i + 1} ({a.t_hi!r} < {b.t_lo!r})")
    return CustomModel(k, 0.0 if lam is None else float(lam), tuple(segs))


def _parse_sampling(ctx: _Ctx, raw, default: Sampling | None) -> Sampling:
    base = ("sampling",)
    if raw is None:
        if default is None:
            ctx.fail((), "missing key 'sampling'")
        return default
    required = () if default else ("t_min", "t_max", "count")
    ctx.mapping(raw, base, ("t_min", "t_max", "count", "spacing"), required=required)
    d = default or Sampling(0.0, 0.0, 0, "linear")
    t_min = ctx.number(raw, base + ("t_min",))
    t_max = ctx.number(raw, base + ("t_max",))
    count = ctx.number(raw, base + ("count",), integer=True)
    spacing = raw.get("spacing", d.spacing)
    if spacing not in ("linear", "log"):
        ctx.fail(base + ("spacing",), f"must be linear or log, got {spacing!r}")
    return Sampling(d.t_min if t_min is None else float(t_min), d.t_max if t_max is None else float(t_max),
                    d.count if count is None else count, spacing)


def _check_sampling(ctx: _Ctx, sc: Scenario) -> None:
    s = sc.sampling
    lo, hi = sc.model().f.domain
    base = ("sampling",)
    if s.count < 2:
        ctx.fail(base + ("count",), f"need at least 2 samples, got {s.count}")
    if not (math.isfinite(s.t_min) and math.isfinite(s.t_max)) or not s.t_min < s.t_max:
        ctx.fail(base, f"need finite t_min < t_max, got {s.t_min!r}, {s.t_max!r}")
    if not lo < s.t_min or not s.t_max < hi:
        ctx.fail(base, f"[{s.t_min!r}, {s.t_max!r}] is not inside the open domain ({lo!r}, {hi!r})")
    if s.spacing == "log" and not s.t_min > 0:
        ctx.fail(base + ("spacing",), "log spacing needs t_min > 0")


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ScenarioIOError(f"cannot read {path}: {e}") from e
    return parse_scenario(text, str(path), path.stem)


# serialization ---------------------------------------------------------------


def _exact(q: Fraction):
    if q.denominator == 1:
        return int(q)
    if q.denominator <= 10 ** 6:
        return f"{q.numerator}/{q.denominator}"
    return float(q)


def scenario_to_dict(sc: Scenario) -> dict:
    """Plain-data form that :func:`parse_scenario` reads back to an equal Scenario."""
    out: dict = {"name": sc.name}
    if sc.params is not None:
        p = sc.params
        params = {"c0": p.c0, "t1": p.t1, "t2": p.t2}
        if not p.K_is_default:
            params["K"] = p.K
        params.update(Lambda=p.Lambda, time_unit=p.time_unit)
        out.update(preset=PRESET, params=params)
    else:
        segs = []
        for s in sc.custom.segments:
            d = {"kind": s.kind, "c": s.c}
            if s.kind == "power_law":
                d["p"] = _exact(s.param)
            elif s.kind == "exponential":
                d["K"] = _exact(s.param)
            d.update(t_lo=s.t_lo, t_hi=s.t_hi)
            segs.append(d)
        out["custom"] = {"k": sc.custom.k, "Lambda": sc.custom.Lambda, "segments": segs}
    s = sc.sampling
    out["sampling"] = {"t_min": s.t_min, "t_max": s.t_max, "count": s.count, "spacing": s.spacing}
    out["outputs"] = list(sc.outputs)
    return out


def dump_scenario(sc: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(sc), sort_keys=False)


# sampling --------------------------------------------------------------------


def sample_times(sc: Scenario) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """Sample grid, with any point landing on a breakpoint moved one ulp to the right.

    Returns the grid and the list of ``(original, nudged)`` pairs.
    """
    s = sc.sampling
    if s.spacing == "log":
        ts = np.geomspace(s.t_min, s.t_max, s.count)
    else:
        ts = np.linspace(s.t_min, s.t_max, s.count)
    ts[0], ts[-1] = s.t_min, s.t_max
    bps = set(sc.model().f.breakpoints)
    nudges = []
    for i, t in enumerate(ts):
        if float(t) in bps:
            moved = math.nextafter(float(t), math.inf)
            nudges.append((float(t), moved))
            ts[i] = moved
    return ts, nudges
