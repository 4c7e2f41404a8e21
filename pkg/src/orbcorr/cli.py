"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 usage or input parse error,
3 optimizer non-convergence when ``--strict`` is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import DEMOS, analyze_integrals, analyze_state, demo_report, hubbard_sweep, log_grid
from .fock import SectorLabel, StateVector, config_twice_sz, enumerate_sector_basis, popcount
from .models import FCIDumpParseError, HubbardParams, parse_fcidump
from .report import LN2, AnalysisReport, format_table, sweep_csv, sweep_svg, write_report
from .separable import OptimizerOptions
from .ssr import SSR_MODES

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONVERGED = 0, 1, 2, 3
FORMATS = ("json", "csv", "svg")


class UsageError(Exception):
    """Bad input detected after argparse accepted the command line."""


def parse_ssr(text: str) -> list[str]:
    if text == "all":
        return list(SSR_MODES)
    modes = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in modes if m not in SSR_MODES]
    if bad or not modes:
        raise argparse.ArgumentTypeError(f"SSR modes must be drawn from none, parity, number or be 'all'; got {text!r}")
    return [m for m in SSR_MODES if m in modes]


def parse_orbitals(text: str) -> list[int]:
    """1-based comma list such as ``1,2`` or ``1-3,6`` to 0-based indices."""
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = (int(v) for v in part.split("-", 1))
                out.extend(range(lo, hi + 1))
            elif part:
                out.append(int(part))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad orbital list {text!r}") from exc
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("orbitals are 1-based positive integers")
    return sorted({k - 1 for k in out})


def parse_formats(text: str) -> list[str]:
    fmts = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in fmts if f not in FORMATS]
    if bad or not fmts:
        raise argparse.ArgumentTypeError(f"formats must be drawn from {', '.join(FORMATS)}; got {text!r}")
    return fmts


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def nonnegative_float(text: str) -> float:
    if text.strip() in ("0", "0.0"):
        return 0.0
    return positive_float(text)


def _common(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("output and optimizer")
    g.add_argument("--ssr", type=parse_ssr, default=list(SSR_MODES), help="none, parity, number, a comma list, or all (default)")
    g.add_argument("--out", type=Path, help="directory for report files")
    g.add_argument("--format", type=parse_formats, default=["json", "csv"], help="comma list of json,csv,svg (default json,csv)")
    g.add_argument("--bits", action="store_true", help="display values in bits instead of nats")
    g.add_argument("--seed", type=int, help="optimizer base seed")
    g.add_argument("--tol", type=positive_float, help="round-level improvement tolerance of the optimizer")
    g.add_argument("--strict", action="store_true", help="exit with status 3 if any optimization did not converge")
    g.add_argument("--jobs", type=int, default=1, help="worker processes for the pairwise loop")
    g.add_argument("-v", "--verbose", action="store_true")


def _inputs(parser: argparse.ArgumentParser):
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--fcidump", type=Path, help="FCIDUMP integral file")
    src.add_argument("--hubbard", type=int, metavar="SITES", help="built-in open Hubbard chain with this many sites")
    src.add_argument("--state", type=Path, help="JSON state: mode_count, configs, amplitudes")
    parser.add_argument("--t", type=positive_float, default=1.0, help="Hubbard hopping (default 1)")
    parser.add_argument("--u", type=nonnegative_float, default=4.0, help="Hubbard repulsion (default 4)")
    parser.add_argument("--n-electrons", type=int, help="electron count (overrides the input)")
    parser.add_argument("--ms2", type=int, help="2 S_z (overrides the input)")
    parser.add_argument("--orbitals", type=parse_orbitals, help="1-based orbital list, e.g. 1,2 or 1-4")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbcorr", description="Orbital correlation and entanglement analysis.")
    parser.add_argument("--version", action="version", version=f"orbcorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo", help="two-orbital showcase states")
    p.add_argument("name", choices=DEMOS)
    p.add_argument("--t", type=positive_float, default=1.0)
    p.add_argument("--u", type=nonnegative_float, default=1.0)
    _common(p)

    p = sub.add_parser("hubbard-sweep", help="Hubbard dimer over a log-spaced t/U grid")
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--min", dest="lo", type=positive_float, default=1e-3)
    p.add_argument("--max", dest="hi", type=positive_float, default=10.0)
    p.add_argument("--u", type=positive_float, default=1.0)
    _common(p)

    p = sub.add_parser("analyze", help="ground state of integrals, a Hubbard chain or a stored state")
    _inputs(p)
    _common(p)

    p = sub.add_parser("noninteracting", help="as analyze with the two-body interaction removed")
    _inputs(p)
    _common(p)
    return parser


def _options(args) -> OptimizerOptions:
    opts = OptimizerOptions()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.tol is not None:
        changes["round_tol"] = args.tol
    return dataclasses.replace(opts, **changes)


def load_state(path: Path) -> StateVector:
    """State from JSON ``{"mode_count", "configs", "amplitudes"}``; complex amplitudes as ``[re, im]``."""
    try:
        data = json.loads(Path(path).read_text())
        mode_count = int(data["mode_count"])
        configs = [int(c) for c in data["configs"]]
        amps = [complex(*a) if isinstance(a, list) else complex(a) for a in data["amplitudes"]]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read state {path}: {exc}") from exc
    if len(configs) != len(amps) or not configs:
        raise UsageError("state needs equally many configs and amplitudes")
    ns = {popcount(c) for c in configs}
    sz = {config_twice_sz(c) for c in configs}
    if len(ns) != 1 or len(sz) != 1:
        raise UsageError("state must have a fixed electron number and S_z")
    sector = SectorLabel(ns.pop(), Fraction(sz.pop(), 2))
    basis = enumerate_sector_basis(mode_count, sector)
    try:
        state = StateVector.from_configs(basis, dict(zip(configs, amps)))
    except ValueError as exc:
        raise UsageError(f"invalid state: {exc}") from exc
    return state


def _integrals(args):
    if args.fcidump is not None:
        try:
            ints = parse_fcidump(args.fcidump)
        except OSError as exc:
            raise UsageError(f"cannot read {args.fcidump}: {exc}") from exc
        title = f"FCIDUMP {args.fcidump.name}"
    else:
        ints = HubbardParams(args.t, args.u, args.hubbard).integrals()
        title = f"Hubbard chain L={args.hubbard} t={args.t:g} U={args.u:g}"
    if args.n_electrons is not None or args.ms2 is not None:
        ints = dataclasses.replace(
            ints,
            electron_count=ints.electron_count if args.n_electrons is None else args.n_electrons,
            ms2=ints.ms2 if args.ms2 is None else args.ms2,
        )
    return ints, title


def _print_report(report: AnalysisReport, bits: bool):
    unit = "bits" if bits else "nats"
    scale = 1 / LN2 if bits else 1.0
    print(report.title)
    if report.ground_energy is not None:
        print(f"ground energy: {report.ground_energy:.12f}")
    if report.intrinsic_correlation is not None:
        print(f"intrinsic correlation: {report.intrinsic_correlation:.6e}")
    print(f"single orbital [{unit}]")
    for mode in report.ssr_modes:
        for k, entry in enumerate(report.single_orbital[mode]):
            if entry is not None:
                print(f"  orbital {k + 1:3d} {mode:7s} I={entry['I'] * scale:.6f} E={entry['E'] * scale:.6f}")
    for i, j in report.pairs():
        print(format_table(report, i, j, bits))
    if not report.converged:
        print("warning: some optimizations did not converge (see pair_status)")


def _finish(report_converged: bool, args) -> int:
    if args.strict and not report_converged:
        print("error: optimizer did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_demo(args) -> int:
    report = demo_report(args.name, args.t, args.u, ssr_modes=args.ssr, options=_options(args), jobs=args.jobs)
    _print_report(report, args.bits)
    if args.out:
        write_report(report, args.out, args.format, stem=args.name.replace("-", "_"), bits=args.bits)
    return _finish(report.converged, args)


def cmd_hubbard_sweep(args) -> int:
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if args.lo > args.hi:
        raise UsageError("--min must not exceed --max")
    options = _options(args)
    rows = hubbard_sweep(log_grid(args.lo, args.hi, args.points), args.u, options, jobs=args.jobs)
    text = sweep_csv(rows, args.bits)
    print(text, end="")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        if "csv" in args.format:
            (args.out / "hubbard_sweep.csv").write_text(text)
        if "svg" in args.format:
            sweep_svg(rows, args.out / "hubbard_sweep.svg", args.bits)
        if "json" in args.format:
            payload = {"u": args.u, "units": "nats", "optimizer": dataclasses.asdict(options), "rows": rows}
            (args.out / "hubbard_sweep.json").write_text(json.dumps(payload, indent=2, allow_nan=False) + "\n")
    return _finish(all(r["status"] == "ok" for r in rows), args)


def _analyze(args, noninteracting: bool) -> int:
    kwargs = dict(orbitals=args.orbitals, ssr_modes=args.ssr, options=_options(args), jobs=args.jobs)
    if args.state is not None:
        if noninteracting:
            raise UsageError("noninteracting needs integrals (--fcidump or --hubbard), not a stored state")
        report = analyze_state(load_state(args.state), f"state {args.state.name}", **kwargs)
    else:
        ints, title = _integrals(args)
        if noninteracting:
            ints, title = ints.without_interaction(), title + " (interaction off)"
        _check_orbitals(args.orbitals, ints.orbital_count)
        report = analyze_integrals(ints, title, extra_metadata={"noninteracting": noninteracting}, **kwargs)
    _print_report(report, args.bits)
    if args.out:
        stem = "noninteracting" if noninteracting else "analysis"
        write_report(report, args.out, args.format, stem=stem, bits=args.bits)
    return _finish(report.converged, args)


def _check_orbitals(orbitals, count: int):
    if orbitals is not None and max(orbitals) >= count:
        raise UsageError(f"orbital {max(orbitals) + 1} outside 1..{count}")


def cmd_analyze(args) -> int:
    return _analyze(args, noninteracting=False)


def cmd_noninteracting(args) -> int:
    return _analyze(args, noninteracting=True)


COMMANDS = {
    "demo": cmd_demo,
    "hubbard-sweep": cmd_hubbard_sweep,
    "analyze": cmd_analyze,
    "noninteracting": cmd_noninteracting,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FCIDumpParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
