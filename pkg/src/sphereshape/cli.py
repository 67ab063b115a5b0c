"""Command-line front end: ``sphereshape <command> ...``.

Exit status is 0 on success, 1 for usage errors and 2 for runtime failures.
Numbers are printed with 6 significant digits; ``--json`` where offered gives
full precision.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, List, Optional, Sequence

from . import __version__
from .analysis.bmd import wachsmann_optimum, wachsmann_sweep
from .analysis.complexity import METHODS, complexity_bounds, trellis_complexity
from .analysis.metrics import shaping_gain
from .analysis.sweeps import rate_loss_sweep, write_rate_loss_csv, write_wachsmann_csv
from .codecs import ess_decode, ess_encode, input_length
from .errors import ShapingError
from .trellis import (
    FULL,
    AmplitudeAlphabet,
    ApproximationWarning,
    Precision,
    amplitude_distribution,
    average_energy,
    build_trellis,
    trellis_storage_bound,
)

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def g6(x) -> str:
    if isinstance(x, int):
        return str(x) if abs(x) < 10**6 else f"{x:.6g}"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def _range(text: str) -> List[float]:
    """``start:stop:step`` (inclusive stop) or a comma-separated list."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise ValueError
            start, stop, step = parts
            n = int(math.floor((stop - start) / step + 1e-9))
            return [start + i * step for i in range(n + 1)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step or a list, got {text!r}") from None


def _int_range(text: str) -> List[int]:
    vals = _range(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"block lengths must be integers, got {text!r}")
    return [int(v) for v in vals]


def _add_trellis_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, required=True,
                   help="bit levels per symbol (2**m-ASK)")
    p.add_argument("--N", type=int, required=True,
                   help="block length in amplitudes")
    p.add_argument("--Emax", type=int, required=True,
                   help="maximum sequence energy")
    p.add_argument("--nm", type=int, help="mantissa bits (bounded precision)")
    p.add_argument("--np", type=int, dest="np_", metavar="NP", help="exponent bits (bounded precision)")


def _precision(args) -> Precision:
    if (args.nm is None) != (args.np_ is None):
        raise UsageError("--nm and --np must be given together")
    return FULL if args.nm is None else Precision.bounded(args.nm, args.np_)


def _trellis(args):
    if args.m < 2:
        raise UsageError("--m must be >= 2")
    if args.N < 1:
        raise UsageError("--N must be >= 1")
    return build_trellis(AmplitudeAlphabet(args.m), args.N, args.Emax, _precision(args))


@contextmanager
def _open_out(path: Optional[str]) -> Iterator[IO[str]]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


@contextmanager
def _open_in(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdin
    else:
        with open(path) as fh:
            yield fh


# --------------------------------------------------------------------------
# commands


def cmd_trellis_info(args) -> int:
    t = _trellis(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApproximationWarning)
        pa = amplitude_distribution(t)
    k = input_length(t.size)
    Eav = average_energy(t)
    Rs = t.rate
    info = {
        "m": t.alphabet.m,
        "N": t.N,
        "Emax": t.Emax,
        "precision": t.precision.mode,
        "levels": t.L,
        "size": t.size,
        "k": k,
        "Rs": Rs,
        "k_over_N": k / t.N,
        "P_A": {str(a): float(p) for a, p in pa.items()},
        "E_av": Eav,
        "G_s_dB": shaping_gain(k / t.N, Eav, t.N),
        "storage_bits": trellis_storage_bound(t),
        "complexity": {
            m: {"bit_ops_per_dim": c.bit_ops_per_dim, "storage_bits": c.storage_bits}
            for m in METHODS
            for c in [trellis_complexity(t, m)]
        },
    }
    if args.json:
        json.dump(info, sys.stdout, indent=2)
        sys.stdout.write("\n")
        return EXIT_OK
    out = sys.stdout
    out.write(f"alphabet      {t.alphabet.amplitudes}\n")
    out.write(f"N, Emax       {t.N}, {t.Emax}  ({t.L} levels, {t.precision.mode} precision)\n")
    out.write(f"|S|           {g6(t.size)}\n")
    out.write(f"k             {k}\n")
    out.write(f"R_s           {g6(Rs)} bit/amp (k/N = {g6(k / t.N)})\n")
    out.write("P_A           " + "  ".join(f"{a}:{g6(float(p))}" for a, p in pa.items()) + "\n")
    out.write(f"E_av          {g6(Eav)}\n")
    out.write(f"G_s           {g6(info['G_s_dB'])} dB\n")
    out.write(f"storage       {g6(info['storage_bits'])} bits\n")
    for m, c in info["complexity"].items():
        out.write(f"{m:<13} {g6(c['bit_ops_per_dim'])} bit-ops/1-D, {g6(c['storage_bits'])} storage bits\n")
    return EXIT_OK


def cmd_shape(args) -> int:
    t = _trellis(args)
    k = input_length(t.size)
    with _open_in(args.input) as src, _open_out(args.output) as dst:
        for lineno, line in enumerate(src, 1):
            text = line.strip()
            if not text:
                continue
            try:
                index = int(text, 16)
            except ValueError:
                raise ShapingError(f"line {lineno}: not a hexadecimal index: {text!r}") from None
            if index >> k:
                raise ShapingError(f"line {lineno}: index {text} does not fit in {k} bits")
            dst.write(" ".join(str(a) for a in ess_encode(t, index)) + "\n")
    return EXIT_OK


def cmd_deshape(args) -> int:
    t = _trellis(args)
    k = input_length(t.size)
    width = -(-k // 4)
    with _open_in(args.input) as src, _open_out(args.output) as dst:
        for lineno, line in enumerate(src, 1):
            if not line.strip():
                continue
            try:
                seq = tuple(int(v) for v in line.split())
            except ValueError:
                raise ShapingError(f"line {lineno}: amplitudes must be integers") from None
            try:
                index = ess_decode(t, seq)
            except ShapingError as exc:
                raise ShapingError(f"line {lineno}: {exc}") from None
            if index >> k:
                raise ShapingError(f"line {lineno}: index {index} is not used by {k}-bit shaping")
            dst.write(f"{index:0{width}x}\n")
    return EXIT_OK


def cmd_rate_loss_sweep(args) -> int:
    notes: List[str] = []
    rows = rate_loss_sweep(args.m, args.Rs, args.N_range, notes)
    for n in notes:
        print(f"skipped: {n}", file=sys.stderr)
    with _open_out(args.output) as fh:
        write_rate_loss_csv(rows, fh)
    return EXIT_OK


def cmd_wachsmann(args) -> int:
    if args.optimum:
        best = wachsmann_optimum(args.m, args.rate)
        uniform = wachsmann_sweep(args.m, args.rate, [float(args.m)])[0]
        print(f"H(X)*        {g6(best.Hx)}")
        print(f"delta_snr    {g6(best.delta_snr)} dB")
        print(f"code_rate    {g6(best.code_rate)}")
        print(f"gamma        {g6(best.gamma)}")
        print(f"gain         {g6(uniform.delta_snr - best.delta_snr)} dB over uniform")
        return EXIT_OK
    grid = args.hx if args.hx is not None else _range(f"{args.rate + 0.05}:{args.m}:0.05")
    points = wachsmann_sweep(args.m, args.rate, grid)
    with _open_out(args.output) as fh:
        write_wachsmann_csv(points, fh)
    return EXIT_OK


def cmd_complexity(args) -> int:
    precision = _precision(args)
    if args.Rs is not None:
        if args.L is None:
            raise UsageError("--Rs needs --L")
        rows = [complexity_bounds(m, args.N, args.Rs, args.L, 2 ** (args.m - 1), precision) for m in args.method]
    else:
        if args.Emax is None:
            raise UsageError("give --Emax, or --Rs with --L")
        t = build_trellis(AmplitudeAlphabet(args.m), args.N, args.Emax, precision)
        rows = [trellis_complexity(t, m) for m in args.method]
    print("method,bit_ops_per_dim,storage_bits")
    for c in rows:
        print(f"{c.method},{g6(c.bit_ops_per_dim)},{g6(c.storage_bits)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .pas.sim import fer_sim, load_sim_config, run_metadata, write_fer_csv

    sim = load_sim_config(args.config)
    seed = sim.link.seed if args.seed is None else args.seed

    def progress(p):
        print(f"snr {g6(p.snr_db)} dB: {p.frame_errors}/{p.frames} frame errors", file=sys.stderr)

    points = fer_sim(sim.link, sim.snr_db, sim.max_frames, sim.target_errors, seed, sim.batch, progress)
    with _open_out(args.output) as fh:
        write_fer_csv(points, fh)
    meta_path = args.meta
    if meta_path is None and args.output not in (None, "-"):
        meta_path = str(Path(args.output).with_suffix(".json"))
    if meta_path:
        with open(meta_path, "w") as fh:
            json.dump(run_metadata(sim, seed), fh, indent=2)
            fh.write("\n")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sphereshape", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("trellis-info", help="codebook size, rate, energy and cost of a sphere code")
    _add_trellis_args(s)
    s.add_argument("--json", action="store_true", help="full-precision JSON output")
    s.set_defaults(func=cmd_trellis_info)

    for name, func, what in (
        ("shape", cmd_shape, "hex indices (one per line) to amplitude lines"),
        ("deshape", cmd_deshape, "amplitude lines to hex indices"),
    ):
        s = sub.add_parser(name, help=what)
        _add_trellis_args(s)
        s.add_argument("input", help="input file, or - for stdin")
        s.add_argument("-o", "--output", help="output file (default stdout)")
        s.set_defaults(func=func)

    s = sub.add_parser("rate-loss-sweep", help="rate loss of sphere, single-shell and CC codes (CSV)")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--Rs", type=float, default=1.75, help="target shaping rate, bit/amp")
    s.add_argument("--N-range", dest="N_range", type=_int_range, default=_int_range("16:256:8"),
                   help="block lengths, start:stop:step or a list (default 16:256:8)")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_rate_loss_sweep)

    s = sub.add_parser("wachsmann", help="gap to capacity versus input entropy (CSV)")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--rate", type=float, default=1.5, help="target transmission rate R_t")
    s.add_argument("--hx", type=_range, help="H(X) grid, start:stop:step or a list")
    s.add_argument("--optimum", action="store_true", help="report the minimising H(X) instead")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_wachsmann)

    s = sub.add_parser("complexity", help="bit-operation and storage bounds")
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--Emax", type=int, help="derive R_s and L from the trellis")
    s.add_argument("--Rs", type=float, help="shaping rate (with --L, skips building the trellis)")
    s.add_argument("--L", type=int, help="number of trellis levels")
    s.add_argument("--nm", type=int)
    s.add_argument("--np", type=int, dest="np_", metavar="NP")
    s.add_argument("--method", nargs="+", choices=METHODS, default=list(METHODS))
    s.set_defaults(func=cmd_complexity)

    s = sub.add_parser("simulate", help="Monte Carlo FER of a PAS link (CSV + JSON metadata)")
    s.add_argument("config", help="JSON simulation config")
    s.add_argument("-o", "--output", help="CSV output (default stdout)")
    s.add_argument("--meta", help="metadata JSON path (default: next to the CSV)")
    s.add_argument("--seed", type=int, help="override the config seed")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sphereshape: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ShapingError, ValueError, OSError) as exc:
        print(f"sphereshape: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
