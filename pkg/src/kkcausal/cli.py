"""``kk`` command-line front end.

Subcommands::

    kk demo     --signal ID [--param k=v]... --grid MIN:MAX:N --engine pv|spectral
    kk contour  --signal ID --omega W --radius R --epsilon E
    kk classify --signal ID
    kk check    --input PATH --columns omega,re,im --grid MIN:MAX:N --engine pv|spectral

Reports are JSON with top-level keys ``tool_version``, ``subcommand``,
``config``, ``results`` and ``verdict``, written to ``--report``/``--out``
or to stdout. Exit codes: 0 consistent (or closed / matching), 2
inconsistent, 3 inconclusive, 1 on any error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .catalog import CATALOG_IDS, CatalogError, Membership, Verdict, catalog_get, \
    classify_integrability
from .contour import ContourGeometryError, ContourSpec, integrate_contour
from .hilbert import Engine, KKVerdict, Thresholds, control_spectrum, kk_check, \
    spectrum_from_signal
from .quadrature import QuadratureError
from .spectra import NO_TAIL, FrequencyGrid, GridError, Spectrum, SpectrumParseError, \
    TailModel, atomic_write_text, read_spectrum_csv, resample, write_columns_csv
from .transforms import laplace_transform

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONSISTENT = 2
EXIT_INCONCLUSIVE = 3

MIN_ROWS = 64

_EXIT_FOR = {KKVerdict.CONSISTENT: EXIT_OK, KKVerdict.INCONSISTENT: EXIT_INCONSISTENT,
             KKVerdict.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# deterministic JSON


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return f"{x:.11e}"


def to_json(obj: Any, indent: int = 0) -> str:
    """Serialize with insertion-ordered keys and 12-significant-digit floats.

    Non-finite floats become ``null``; complex numbers become
    ``{"re": ..., "im": ...}``.
    """
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, str):
        return _json_str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_str(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}{to_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def _emit(report: dict, path: Optional[str]):
    text = to_json(report) + "\n"
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


def _report(subcommand: str, config: dict, results: dict, verdict: str) -> dict:
    return {"tool_version": __version__, "subcommand": subcommand, "config": config,
            "results": results, "verdict": verdict}


# ---------------------------------------------------------------------------
# argument helpers


def _parse_params(items: Sequence[str]) -> dict[str, float]:
    params = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise CliError(f"--param expects k=v, got {item!r}")
        try:
            params[key.strip()] = float(val)
        except ValueError:
            raise CliError(f"--param {key}: not a number: {val!r}") from None
    return params


def _parse_tail(text: str) -> TailModel:
    if text.lower() == "none":
        return NO_TAIL
    name, _, order = text.partition(":")
    if name.lower() != "rational":
        raise CliError(f"--tail must be 'none' or 'rational[:ORDER]', got {text!r}")
    try:
        return TailModel.rational(float(order) if order else 1.0)
    except ValueError as exc:
        raise CliError(f"--tail: {exc}") from None


def _thresholds(args) -> Thresholds:
    try:
        return Thresholds(args.consistent_below, args.inconsistent_above)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _plot(path, spectrum: Spectrum, rec_re, rec_im):
    write_columns_csv(path, {
        "omega": spectrum.omegas,
        "re_given": spectrum.real,
        "im_given": spectrum.imag,
        "re_reconstructed": rec_re,
        "im_reconstructed": rec_im,
    })


# ---------------------------------------------------------------------------
# subcommands


def run_demo(args) -> int:
    params = _parse_params(args.param)
    grid = FrequencyGrid.parse(args.grid)
    thresholds = _thresholds(args)
    signal = catalog_get(args.signal, params)
    if signal.negative_control:
        tail = _parse_tail(args.tail) if args.tail else TailModel.rational(1.0)
        spectrum = control_spectrum(signal, grid, tail)
    elif signal.l1_membership is Membership.YES:
        spectrum = spectrum_from_signal(signal, grid)
        if args.tail:
            spectrum = Spectrum(grid, spectrum.values, _parse_tail(args.tail))
    else:
        raise CliError(f"{signal.id} is not absolutely integrable and is not a negative control")
    rep = kk_check(spectrum, Engine(args.engine_enum), thresholds)
    if args.plot:
        _plot(args.plot, spectrum, rep.reconstructed_real, rep.reconstructed_imag)
    config = {"signal": signal.id, "parameters": dict(sorted(signal.parameters.items())),
              "negative_control": signal.negative_control, "grid": str(grid),
              "engine": rep.engine.value, "tail_model": str(spectrum.tail_model)}
    _emit(_report("demo", config, rep.to_dict(), rep.verdict.value), args.report)
    return _EXIT_FOR[rep.verdict]


def _laplace_of(signal):
    if signal.closed_form_laplace is not None:
        return signal.closed_form_laplace
    return lambda s: laplace_transform(signal, s)


def run_contour(args) -> int:
    params = _parse_params(args.param)
    signal = catalog_get(args.signal, params)
    if signal.l1_membership is not Membership.YES:
        raise CliError(f"{signal.id} is not absolutely integrable; its transform need not "
                       "be analytic on the closed right half-plane")
    try:
        spec = ContourSpec(args.omega, args.radius, args.epsilon)
    except ContourGeometryError as exc:
        raise CliError(f"contour geometry: {exc}") from None
    br = integrate_contour(_laplace_of(signal), spec)
    closed = br.closes()
    results = {
        "segment_lower": br.segment_lower,
        "segment_upper": br.segment_upper,
        "small_arc": br.small_arc,
        "large_arc": br.large_arc,
        "total": br.total,
        "abs_total": abs(br.total),
        "segment_errors": list(br.errors),
        "error_budget": br.error_budget,
    }
    config = {"signal": signal.id, "parameters": dict(sorted(signal.parameters.items())),
              "omega": args.omega, "radius_R": args.radius, "epsilon": args.epsilon}
    _emit(_report("contour", config, results, "Closed" if closed else "NotClosed"), args.out)
    return EXIT_OK if closed else EXIT_INCONSISTENT


def run_classify(args) -> int:
    params = _parse_params(args.param)
    signal = catalog_get(args.signal, params)
    v = classify_integrability(signal)

    def fit(f):
        if f is None:
            return None
        return {"exponent": f.exponent, "coefficient": f.coefficient, "offset": f.offset,
                "rel_rms": f.rel_rms}

    results = {
        "l1": v.l1.value, "l2": v.l2.value,
        "l1_partial_integral": v.l1_partial_integral,
        "l2_partial_integral": v.l2_partial_integral,
        "t_max_probed": v.t_max_probed,
        "l1_partials": list(v.l1_partials), "l2_partials": list(v.l2_partials),
        "l1_fit": fit(v.l1_fit), "l2_fit": fit(v.l2_fit),
        "ground_truth": {"l1": signal.l1_membership.value, "l2": signal.l2_membership.value},
    }
    pairs = [(v.l1, signal.l1_membership), (v.l2, signal.l2_membership)]
    if any(got is Verdict.INCONCLUSIVE for got, _ in pairs):
        verdict, code = "Inconclusive", EXIT_INCONCLUSIVE
    elif all(got.value == truth.value for got, truth in pairs
             if truth is not Membership.UNKNOWN):
        verdict, code = "Match", EXIT_OK
    else:
        verdict, code = "Mismatch", EXIT_INCONSISTENT
    config = {"signal": signal.id, "parameters": dict(sorted(signal.parameters.items()))}
    _emit(_report("classify", config, results, verdict), args.out)
    return code


def run_check(args) -> int:
    columns = [c.strip() for c in args.columns.split(",")]
    if len(columns) != 3:
        raise CliError("--columns must name three fields: omega,re,im")
    thresholds = _thresholds(args)
    omega, values = read_spectrum_csv(args.input, columns)
    if len(omega) < MIN_ROWS:
        raise CliError(f"{args.input}: {len(omega)} data rows, need at least {MIN_ROWS}")
    if args.grid:
        grid = FrequencyGrid.parse(args.grid)
    else:
        n = len(omega) + len(omega) % 2
        grid = FrequencyGrid(float(omega[0]), float(omega[-1]), n)
    warnings = []
    span = omega[-1] - omega[0]
    if grid.omega_min > omega[0] + 1e-12 * span or grid.omega_max < omega[-1] - 1e-12 * span:
        warnings.append(
            f"grid [{grid.omega_min:g}, {grid.omega_max:g}] is narrower than the data range "
            f"[{omega[0]:g}, {omega[-1]:g}]; samples outside it are ignored")
    tail = _parse_tail(args.tail) if args.tail else TailModel.rational(1.0)
    spectrum = Spectrum(grid, resample(omega, values, grid), tail)
    rep = kk_check(spectrum, Engine(args.engine_enum), thresholds)
    if args.plot:
        _plot(args.plot, spectrum, rep.reconstructed_real, rep.reconstructed_imag)
    results = rep.to_dict()
    results["rows_read"] = len(omega)
    results["warnings"] = warnings
    config = {"input": args.input, "columns": columns, "grid": str(grid),
              "engine": rep.engine.value, "tail_model": str(tail)}
    _emit(_report("check", config, results, rep.verdict.value), args.report)
    return _EXIT_FOR[rep.verdict]


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1 (2 is reserved for Inconsistent)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _add_engine(p):
    p.add_argument("--engine", choices=("pv", "spectral"), default="pv",
                   help="Hilbert-transform engine (default: pv)")
    p.add_argument("--tail", default=None,
                   help="tail model beyond the grid: none or rational[:ORDER]")
    p.add_argument("--consistent-below", type=float, default=0.05)
    p.add_argument("--inconsistent-above", type=float, default=0.25)
    p.add_argument("--report", default=None, help="report JSON path (default: stdout)")
    p.add_argument("--plot", default=None, help="reconstruction CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kk", description="Causality and Kramers-Kronig toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("demo", help="KK round trip on a catalog signal")
    p.add_argument("--signal", required=True, help=f"one of: {', '.join(CATALOG_IDS)}")
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("--grid", default="-50:50:4096", help="MIN:MAX:N (default -50:50:4096)")
    _add_engine(p)
    p.set_defaults(func=run_demo)

    p = sub.add_parser("contour", help="four-segment contour integral of G(s)/(s + i w)")
    p.add_argument("--signal", required=True)
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--radius", type=float, default=100.0)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--out", default=None)
    p.set_defaults(func=run_contour)

    p = sub.add_parser("classify", help="L1/L2 membership from partial integrals")
    p.add_argument("--signal", required=True)
    p.add_argument("--param", action="append", default=[], metavar="K=V")
    p.add_argument("--out", default=None)
    p.set_defaults(func=run_classify)

    p = sub.add_parser("check", help="KK consistency of a spectrum CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--columns", default="omega,re,im")
    p.add_argument("--grid", default=None, help="MIN:MAX:N (default: data range)")
    _add_engine(p)
    p.set_defaults(func=run_check)
    return parser


def _glue_values(argv: Sequence[str]) -> list[str]:
    """Turn ``--grid -50:50:N`` into ``--grid=-50:50:N`` so argparse accepts it."""
    out = []
    it = iter(argv)
    for a in it:
        if a in ("--grid", "--omega"):
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_values(sys.argv[1:] if argv is None else argv))
    if hasattr(args, "engine"):
        args.engine_enum = Engine.PV if args.engine == "pv" else Engine.SPECTRAL
    try:
        return args.func(args)
    except (CliError, CatalogError, GridError, SpectrumParseError, QuadratureError,
            ValueError, OSError) as exc:
        print(f"kk {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
