"""``warpcurv`` command line: run, verify and describe scenario files.

Exit codes: 0 success, 1 invalid scenario, 2 computation failure (including
failed verification properties), 3 file I/O.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import cosmo
from .errors import ComputationError, ScenarioIOError, ValidationError, WarpcurvError
from .genfun import Continuity
from .scenario import Scenario, load_scenario, sample_times
from .verify import PropertyResult, verification_report
from .warped import ricci, scalar_curvature, scale_factor_derivatives

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_IO = 0, 1, 2, 3

PROFILE_COLUMNS = ("t", "f", "fp", "fpp", "ric_uu", "ric_sp", "scalar")
EVENT_COLUMNS = ("t_i", "fpp_atom", "ric_uu_atom", "ric_sp_atom", "scalar_atom")
FLUID_COLUMNS = ("t", "phase", "rho", "P", "P_over_rho")
VERIFY_COLUMNS = ("property", "status", "measured", "tolerance", "detail")


def fmt(x) -> str:
    """17 significant digits; integers and specials via the same path."""
    return format(float(x), ".17g")


def _csv_field(s: str) -> str:
    return f'"{s}"' if any(c in s for c in ',"\n') else s


def _rows(columns: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_csv_field(c) for c in r) for r in rows]
    return "\n".join(lines) + "\n"


# header ----------------------------------------------------------------------


def header_lines(sc: Scenario, nudges: Sequence[tuple[float, float]] = ()) -> list[str]:
    """Metadata shared by every output file, as ``key: value`` strings."""
    m = sc.model()
    out = [f"scenario: {sc.name}"]
    if sc.is_preset:
        p = sc.params
        out += [
            f"preset: flat-rd-md-ld (k=0, Lambda={fmt(p.Lambda)}, time unit {p.time_unit})",
            f"c0: {fmt(p.c0)}",
            f"t1: {fmt(p.t1)}",
            f"t2: {fmt(p.t2)}",
            f"K: {fmt(p.K)}" + (" (default 2/(3 t2))" if p.K_is_default else " (given)"),
            f"c1: {fmt(p.c1)}",
            f"c2: {fmt(p.c2)}",
        ]
    else:
        out.append(f"custom: k={m.k}, Lambda={fmt(m.Lambda)}")
        for i, s in enumerate(m.f.segments):
            out.append(f"segment {i}: ({fmt(s.lo)}, {fmt(s.hi)}) f = {s.piece}")
    out.append("breakpoints: " + (" ".join(fmt(b) for b in m.f.breakpoints) or "none"))
    s = sc.sampling
    out.append(f"sampling: {s.spacing} {fmt(s.t_min)} .. {fmt(s.t_max)}, {s.count} points")
    for old, new in nudges:
        out.append(f"nudged sample {fmt(old)} -> {fmt(new)} (breakpoint)")
    return out


def _with_header(sc: Scenario, body: str, nudges=()) -> str:
    return "".join(f"# {line}\n" for line in header_lines(sc, nudges)) + body


# tables ----------------------------------------------------------------------


def profile_table(sc: Scenario, ts: np.ndarray) -> str:
    m = sc.model()
    fp, fpp = scale_factor_derivatives(m)
    ric_uu, ric_sp = ricci(m)
    r = scalar_curvature(m)
    cols = [ts, m.f(ts), fp.regular(ts), fpp.regular(ts), ric_uu.regular(ts),
            ric_sp.regular(ts), r.regular(ts)]
    return _rows(PROFILE_COLUMNS, ([fmt(c[i]) for c in cols] for i in range(len(ts))))


def events_table(sc: Scenario) -> str:
    m = sc.model()
    _, fpp = scale_factor_derivatives(m)
    ric_uu, ric_sp = ricci(m)
    r = scalar_curvature(m)
    gs = (fpp, ric_uu, ric_sp, r)
    locs = sorted({a.location for g in gs for a in g.atoms})
    return _rows(EVENT_COLUMNS, ([fmt(t)] + [fmt(g.atom_at(t)) for g in gs] for t in locs))


def _phase_names(sc: Scenario) -> list[str]:
    n = len(sc.model().f.segments)
    return list(cosmo.PHASES) if sc.is_preset else [f"segment{i}" for i in range(n)]


def fluid_table(sc: Scenario, ts: np.ndarray) -> str:
    m = sc.model()
    rho = cosmo.density_function(m)(ts)
    P = cosmo.pressure_function(m)(ts)
    names = _phase_names(sc)
    rows = []
    for t, r, p in zip(ts, rho, P):
        seg = m.f.segment_index(float(t))
        ratio = fmt(p / r) if r != 0 else ""
        rows.append([fmt(t), names[seg], fmt(r), fmt(p), ratio])
    return _rows(FLUID_COLUMNS, rows)


def verify_table(results: Sequence[PropertyResult]) -> str:
    return _rows(VERIFY_COLUMNS, (
        [r.name, "PASS" if bool(r.passed) else "FAIL", fmt(r.measured), fmt(r.tolerance), r.detail]
        for r in results
    ))


def run_verification(sc: Scenario) -> list[PropertyResult]:
    m = sc.model()
    return verification_report(m, params=sc.params if sc.is_preset else None)


def plot_script(sc: Scenario, files: dict[str, str]) -> str:
    """gnuplot script drawing the profile (and event impulses, when written)."""
    log = sc.sampling.spacing == "log"
    lines = [
        f"# run from the output directory: gnuplot {sc.name}_plot.gp",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        "set terminal pngcairo size 1000,700",
        f"set output '{sc.name}_curvature.png'",
        "set xlabel 't'",
        "set ylabel 'curvature'",
        "set logscale x" if log else "unset logscale x",
        "set grid",
    ]
    plots = []
    if "profile" in files:
        src = files["profile"]
        for col, name in ((5, "ric_uu"), (6, "ric_sp"), (7, "scalar")):
            plots.append(f"'{src}' using 1:{col} with lines title '{name}'")
    if "events" in files:
        plots.append(f"'{files['events']}' using 1:5 with impulses lw 2 title 'scalar atom weight'")
    if plots:
        lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


# commands --------------------------------------------------------------------


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise ScenarioIOError(f"cannot write {path}: {e}") from e


def run(sc: Scenario, out_dir: Path, emit_plot_script: bool = False) -> dict[str, Path]:
    """Write every requested output; returns ``{output: path}``."""
    ts, nudges = sample_times(sc)
    texts = {}
    # overflow or NaN anywhere is a computation failure, not a CSV of infs
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            if "profile" in sc.outputs:
                texts["profile"] = _with_header(sc, profile_table(sc, ts), nudges)
            if "events" in sc.outputs:
                texts["events"] = _with_header(sc, events_table(sc))
            if "fluid" in sc.outputs:
                texts["fluid"] = _with_header(sc, fluid_table(sc, ts), nudges)
            if "verify" in sc.outputs:
                texts["verify"] = _with_header(sc, verify_table(run_verification(sc)))
    except (WarpcurvError, ArithmeticError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ComputationError(f"scenario {sc.name!r}: {type(e).__name__}: {e}") from e
    written = {}
    for key, text in texts.items():
        path = out_dir / f"{sc.name}_{key}.csv"
        _write(path, text)
        written[key] = path
    if emit_plot_script:
        path = out_dir / f"{sc.name}_plot.gp"
        _write(path, plot_script(sc, {k: p.name for k, p in written.items()}))
        written["plot"] = path
    return written


def describe(sc: Scenario) -> str:
    """Derived constants, one ``key: value`` per line."""
    m = sc.model()
    lines = header_lines(sc)
    if sc.is_preset:
        r1, r2 = cosmo.c1_matching_residual(sc.params)
        lines += [f"r1: {fmt(r1)}", f"r2: {fmt(r2)}"]
    f = m.f
    for b in f.breakpoints:
        cls = f.continuity_class_at(b)
        jump = f.jump(b, 1) if cls is not Continuity.JUMP else math.nan
        lines.append(f"continuity at {fmt(b)}: {cls.name}, f' jump {fmt(jump)}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="warpcurv", description="Distributional FRW curvature from scenario files.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="write the requested CSV outputs")
    r.add_argument("scenario")
    r.add_argument("--out", default=".", help="output directory (default: current)")
    r.add_argument("--emit-plot-script", action="store_true", help="also write a gnuplot script")
    v = sub.add_parser("verify", help="print the verification report")
    v.add_argument("scenario")
    d = sub.add_parser("describe", help="print derived constants")
    d.add_argument("scenario")
    return ap


def main(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
        if args.command == "run":
            for key, path in run(sc, Path(args.out), args.emit_plot_script).items():
                print(f"{key}: {path}", file=stdout)
            return EXIT_OK
        if args.command == "describe":
            stdout.write(describe(sc))
            return EXIT_OK
        try:
            with np.errstate(over="raise", invalid="raise", divide="raise"):
                results = run_verification(sc)
        except (WarpcurvError, ArithmeticError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ComputationError(f"scenario {sc.name!r}: {e}") from e
        stdout.write(verify_table(results))
        return EXIT_OK if all(bool(r.passed) for r in results) else EXIT_COMPUTATION
    except ScenarioIOError as e:
        print(f"warpcurv: {e}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as e:
        print(f"warpcurv: invalid scenario: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (WarpcurvError, ArithmeticError) as e:
        print(f"warpcurv: {e}", file=sys.stderr)
        return EXIT_COMPUTATION


if __name__ == "__main__":
    sys.exit(main())
