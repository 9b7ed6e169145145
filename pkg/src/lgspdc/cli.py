"""Command-line front end.

Every command writes rows with the columns

    gamma_s,gamma_i,ell_s,ell_i,p_s,p_i,amplitude_re,amplitude_im,probability

as CSV (default) or JSON.  Diagnostics go to stderr as ``# key=value``
lines.  Exit status: 0 success, 1 usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import re
import sys

from . import __version__
from .amplitudes import coincidence_closed, coincidence_superposition
from .errors import LgSpdcError, NumericalError, ScanPointError
from .modes import BeamWidths, ModeIndex
from .oracle import coincidence_quadrature_radial_batch
from .pumps import PumpSpec, format_pump_text, load_pump, singularities_to_lg
from .spectra import find_equal_probability_gammas, gamma_scan, spiral_spectrum, subspace_probabilities

COLUMNS = ("gamma_s", "gamma_i", "ell_s", "ell_i", "p_s", "p_i", "amplitude_re", "amplitude_im", "probability")
ORACLE_COLUMNS = COLUMNS + ("oracle_re", "oracle_im", "abs_error", "rel_error", "ok")
# Below this magnitude the oracle check is absolute rather than relative.
SMALL_AMPLITUDE = 1e-6
SMALL_ABS_TOL = 1e-12

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- argument parsing helpers ----------------------------------------------

def _int_pair(text: str) -> tuple[int, int]:
    parts = [t.strip() for t in text.split(",")]
    if len(parts) == 1:
        parts.append("0")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'ell,p', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers in {text!r}") from None


def _mode(text: str) -> ModeIndex:
    ell, p = _int_pair(text)
    if p < 0:
        raise argparse.ArgumentTypeError(f"radial index must be >= 0 in {text!r}")
    return ModeIndex(ell, p)


def _int_range(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(-?\d+)\s*:\s*(-?\d+)\s*", text)
    if not m or int(m.group(1)) > int(m.group(2)):
        raise argparse.ArgumentTypeError(f"expected 'lo:hi' with lo <= hi, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _float_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo:hi', got {text!r}") from None
    if not 0.0 < lo < hi:
        raise argparse.ArgumentTypeError(f"need 0 < lo < hi, got {text!r}")
    return lo, hi


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0.0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _gamma_grid(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, step = (float(p) for p in text.split(":"))
            if not (0.0 < lo <= hi and step > 0.0):
                raise ValueError
            n = int(math.floor((hi - lo) / step + 1e-9))
            values = [round(lo + k * step, 12) for k in range(n + 1)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo:hi:step' or 'g1,g2,...', got {text!r}") from None
    if not values or any(not (math.isfinite(v) and v > 0) for v in values):
        raise argparse.ArgumentTypeError(f"gamma values must be positive: {text!r}")
    return sorted(set(values))


def _p_family(text: str) -> list[tuple[int, int]]:
    pairs = [_int_pair(chunk) for chunk in text.split(";") if chunk.strip()]
    if not pairs:
        raise argparse.ArgumentTypeError("empty p family")
    return pairs


def _states(text: str) -> list[tuple[ModeIndex, ModeIndex]]:
    """``"ls,li;ls,li"`` (radial indices 0) or ``"ls,ps,li,pi;..."``."""
    states = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        try:
            nums = [int(t) for t in chunk.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad state {chunk!r}") from None
        if len(nums) == 2:
            states.append((ModeIndex(nums[0], 0), ModeIndex(nums[1], 0)))
        elif len(nums) == 4:
            states.append((ModeIndex(nums[0], nums[1]), ModeIndex(nums[2], nums[3])))
        else:
            raise argparse.ArgumentTypeError(f"state must be 'ls,li' or 'ls,ps,li,pi', got {chunk!r}")
    if not states:
        raise argparse.ArgumentTypeError("empty state list")
    return states


def _singularities(text: str) -> list[tuple[float, float]]:
    """``"rho,phi_deg;rho,phi_deg"`` with rho in units of w_p."""
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        try:
            rho, phi = (float(t) for t in chunk.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad singularity {chunk!r}") from None
        out.append((rho, math.radians(phi)))
    return out


def _existing_file(text: str) -> str:
    if not os.path.isfile(text):
        raise argparse.ArgumentTypeError(f"no such file: {text!r}")
    return text


_NEG_VALUE = re.compile(r"-(\d|\.\d)")


def _join_negative_values(argv):
    """Glue ``--opt -1,0`` into ``--opt=-1,0`` so argparse does not read the
    value as a flag."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEG_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    output = _Parser(add_help=False)
    output.add_argument("--format", choices=("csv", "json"), default="csv")
    output.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    output.add_argument("--wp", type=_positive, default=1.0, help="pump waist (length unit, default 1)")

    pump = _Parser(add_help=False)
    src = pump.add_mutually_exclusive_group(required=True)
    src.add_argument("--pump", type=_mode, metavar="ELL,P", help="single LG pump mode")
    src.add_argument("--pump-file", type=_existing_file, metavar="PATH", help="pump description file")
    src.add_argument("--singularities", type=_singularities, metavar="RHO,PHI_DEG;...",
                     help="unit-charge vortices, rho in units of w_p, phi in degrees")

    widths = _Parser(add_help=False)
    widths.add_argument("--gamma", type=_positive, help="set gamma_s = gamma_i")
    widths.add_argument("--gamma-s", type=_positive)
    widths.add_argument("--gamma-i", type=_positive)

    window = _Parser(add_help=False)
    window.add_argument("--ell-window", type=_int_range, default=(-15, 15), metavar="LO:HI")
    window.add_argument("--p-family", type=_p_family, default=[(0, 0)], metavar="PS,PI;...")

    parser = _Parser(prog="lgspdc", description="LG spectral decomposition of SPDC biphotons")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("amplitude", parents=[output, pump, widths], help="one coincidence amplitude")
    p.add_argument("--signal", type=_mode, required=True, metavar="ELL,P")
    p.add_argument("--idler", type=_mode, required=True, metavar="ELL,P")
    p.add_argument("--path", choices=("auto", "general"), default="auto")

    sub.add_parser("spectrum", parents=[output, pump, widths, window], help="spiral bandwidth at one gamma")

    p = sub.add_parser("scan", parents=[output, pump, window], help="spectra over a gamma grid")
    p.add_argument("--gamma-grid", type=_gamma_grid, required=True, metavar="LO:HI:STEP")
    p.add_argument("--gamma-ratio", type=_positive, default=1.0, help="gamma_i / gamma_s (default 1)")
    p.add_argument("--states", type=_states, help="report these subspace probabilities instead of spectra")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for the grid")

    sub.add_parser("decompose", parents=[output, pump], help="LG decomposition of a vortex pump")

    p = sub.add_parser("equalize", parents=[output, pump], help="gammas with equal subspace probabilities")
    p.add_argument("--states", type=_states, required=True, metavar="LS,LI;...")
    p.add_argument("--interval", type=_float_range, default=(0.3, 3.0), metavar="LO:HI")
    p.add_argument("--mode", choices=("strict", "paper"), default="strict")
    p.add_argument("--tolerance", type=_positive, help="override the CV acceptance threshold")
    p.add_argument("--step", type=_positive, default=0.01, help="scan step in gamma")

    p = sub.add_parser("oracle-check", parents=[output, pump, widths],
                       help="closed form against radial quadrature")
    p.add_argument("--signal", type=_mode, metavar="ELL,P")
    p.add_argument("--idler", type=_mode, metavar="ELL,P")
    p.add_argument("--ell-window", type=_int_range, default=(-6, 6), metavar="LO:HI")
    p.add_argument("--p-max", type=int, default=3)
    p.add_argument("--tolerance", type=_positive, default=1e-8, help="relative tolerance")
    return parser


# --- formatting ------------------------------------------------------------

def _num(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if x == 0.0:
        return "0"
    return format(x, ".12g")


def _row(gs, gi, ell_s, ell_i, p_s, p_i, amp, prob, **extra):
    row = {
        "gamma_s": gs, "gamma_i": gi, "ell_s": ell_s, "ell_i": ell_i, "p_s": p_s, "p_i": p_i,
        "amplitude_re": None if amp is None else complex(amp).real,
        "amplitude_im": None if amp is None else complex(amp).imag,
        "probability": prob,
    }
    row.update(extra)
    return row


def _render(rows, columns, fmt: str, meta: dict) -> str:
    if fmt == "json":
        doc = {"columns": list(columns), "rows": [[row.get(c) for c in columns] for row in rows], "meta": meta}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_num(row.get(c)) for c in columns) + "\n")
    return buf.getvalue()


def _diagnose(meta: dict, stream) -> None:
    for key, value in meta.items():
        if isinstance(value, float):
            value = _num(value)
        stream.write(f"# {key}={value}\n")


# --- commands --------------------------------------------------------------

def _pump_from_args(args) -> PumpSpec:
    if args.pump is not None:
        return PumpSpec.single(args.pump)
    if args.pump_file is not None:
        return load_pump(args.pump_file)
    return PumpSpec.from_singularities(args.singularities)


def _widths_from_args(args) -> BeamWidths:
    gs = args.gamma_s if args.gamma_s is not None else (args.gamma if args.gamma is not None else 1.0)
    gi = args.gamma_i if args.gamma_i is not None else (args.gamma if args.gamma is not None else 1.0)
    if args.gamma is not None and (args.gamma_s is not None or args.gamma_i is not None):
        raise UsageError("--gamma cannot be combined with --gamma-s/--gamma-i")
    return BeamWidths(args.wp, gs, gi)


def _cmd_amplitude(args):
    pump = _pump_from_args(args)
    widths = _widths_from_args(args)
    if pump.kind == "single":
        amp = coincidence_closed(pump.terms[0][1], args.signal, args.idler, widths, path=args.path)
    else:
        amp = coincidence_superposition(pump, args.signal, args.idler, widths)
    row = _row(widths.gamma_s, widths.gamma_i, args.signal.ell, args.idler.ell, args.signal.p, args.idler.p,
               amp.value, amp.probability)
    return [row], COLUMNS, {"path": amp.path, "condition": amp.condition}


def _spectrum_rows(spec, widths):
    rows = []
    for (ell_s, p_s, p_i), prob in spec.family_entries.items():
        amp = spec.amplitudes.get((ell_s, p_s, p_i))
        ell_i = spec.pump_ell - ell_s if spec.pump_ell is not None else None
        rows.append(_row(widths.gamma_s, widths.gamma_i, ell_s, ell_i, p_s, p_i, amp, prob))
    return rows


def _spectrum_meta(spec) -> dict:
    return {
        "outside_window_mass": spec.outside_window_mass,
        "tail_mass": spec.tail_mass,
        "ell_support": f"{spec.ell_support[0]}:{spec.ell_support[1]}",
    }


def _cmd_spectrum(args):
    pump = _pump_from_args(args)
    widths = _widths_from_args(args)
    spec = spiral_spectrum(pump, widths, args.p_family, args.ell_window)
    return _spectrum_rows(spec, widths), COLUMNS, _spectrum_meta(spec)


def _state_rows(pump, widths, states):
    probs = subspace_probabilities(pump, widths, states)
    rows = []
    for (s, i), prob in zip(states, probs):
        amp = coincidence_superposition(pump, s, i, widths).value
        rows.append(_row(widths.gamma_s, widths.gamma_i, s.ell, i.ell, s.p, i.p, amp, prob))
    return rows


def _cmd_scan(args):
    pump = _pump_from_args(args)
    grid = [(g, g * args.gamma_ratio) for g in args.gamma_grid]
    if args.states:
        rows = []
        for gs, gi in grid:
            rows.extend(_state_rows(pump, BeamWidths(args.wp, gs, gi), args.states))
        return rows, COLUMNS, {"points": len(grid)}
    scan = gamma_scan(pump, grid, args.p_family, args.ell_window, w_p=args.wp, workers=args.jobs)
    rows = []
    worst_outside = 0.0
    for (gs, gi), spec in zip(scan.gammas, scan.spectra):
        rows.extend(_spectrum_rows(spec, BeamWidths(args.wp, gs, gi)))
        worst_outside = max(worst_outside, spec.outside_window_mass)
    return rows, COLUMNS, {"points": len(grid), "max_outside_window_mass": worst_outside}


def _cmd_decompose(args):
    pump = _pump_from_args(args)
    if pump.kind == "singularities":
        pump = singularities_to_lg(pump.singularities, args.wp)
    if args.format == "json":
        doc = {"type": pump.kind,
               "modes": [[m.ell, m.p, a.real, a.imag] for a, m in pump.components]}
        return json.dumps(doc, indent=2) + "\n"
    return format_pump_text(pump)


def _cmd_equalize(args):
    pump = _pump_from_args(args)
    result = find_equal_probability_gammas(pump, args.states, args.interval, args.wp, mode=args.mode,
                                           tolerance=args.tolerance, step=args.step)
    rows = []
    for root in result.roots:
        rows.extend(_state_rows(pump, BeamWidths(args.wp, root, root), args.states))
    meta = {
        "roots": ";".join(_num(r) for r in result.roots),
        "residuals": ";".join(_num(r) for r in result.residuals),
        "tolerance": result.tolerance,
    }
    return rows, COLUMNS, meta


def _cmd_oracle_check(args):
    pump = _pump_from_args(args)
    if pump.kind != "single":
        raise UsageError("oracle-check needs a single-mode pump (--pump ELL,P)")
    mode = pump.terms[0][1]
    widths = _widths_from_args(args)
    if (args.signal is None) != (args.idler is None):
        raise UsageError("give both --signal and --idler, or neither")
    if args.signal is not None:
        pairs = [(args.signal, args.idler)]
    else:
        lo, hi = args.ell_window
        pairs = [(ModeIndex(ls, ps), ModeIndex(mode.ell - ls, pi))
                 for ls in range(lo, hi + 1) for ps in range(args.p_max + 1) for pi in range(args.p_max + 1)]
    values, _ = coincidence_quadrature_radial_batch(mode, pairs, widths)
    rows = []
    failures = 0
    worst = 0.0
    for (s, i), q in zip(pairs, values):
        c = coincidence_closed(mode, s, i, widths).value.real
        abs_err = abs(c - float(q))
        if abs(c) < SMALL_AMPLITUDE:
            rel_err = None
            ok = abs_err <= SMALL_ABS_TOL
        else:
            rel_err = abs_err / abs(c)
            ok = rel_err <= args.tolerance
            worst = max(worst, rel_err)
        failures += not ok
        rows.append(_row(widths.gamma_s, widths.gamma_i, s.ell, i.ell, s.p, i.p, c, c * c,
                         oracle_re=float(q), oracle_im=0.0, abs_error=abs_err, rel_error=rel_err, ok=int(ok)))
    meta = {"pairs": len(pairs), "failures": failures, "worst_rel_error": worst, "tolerance": args.tolerance,
            "status": "ok" if failures == 0 else "mismatch"}
    return rows, ORACLE_COLUMNS, meta


_COMMANDS = {
    "amplitude": _cmd_amplitude,
    "spectrum": _cmd_spectrum,
    "scan": _cmd_scan,
    "decompose": _cmd_decompose,
    "equalize": _cmd_equalize,
    "oracle-check": _cmd_oracle_check,
}


def _write(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _is_numeric(exc) -> bool:
    if isinstance(exc, ScanPointError):
        return _is_numeric(exc.cause)
    return isinstance(exc, (NumericalError, ArithmeticError))


def run(argv=None) -> int:
    """Run the CLI on ``argv`` and return the exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_values(argv))
        result = _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except LgSpdcError as exc:
        sys.stderr.write(f"lgspdc: error: {exc}\n")
        return EXIT_NUMERIC if _is_numeric(exc) else EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"lgspdc: error: {exc}\n")
        return EXIT_USAGE

    if isinstance(result, str):
        _write(result, args.out)
        return EXIT_OK
    rows, columns, meta = result
    _write(_render(rows, columns, args.format, meta), args.out)
    _diagnose(meta, sys.stderr)
    if args.command == "oracle-check" and meta["status"] != "ok":
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())
