"""
Command-line front end.

    hexsep constellation --order 16 --kind regular --out points.csv --regions-out cells.csv
    hexsep params --order 16 --kind regular
    hexsep sep --order 3 --kind 3psk --snr-linear 0
    hexsep simulate --order 64 --snr-db 20 --channel rayleigh --n-symbols 1000000
    hexsep sweep --order 256 --kind regular --grid -4:23:3 --channel awgn --out sweep.csv
    hexsep table2 --out table2.csv
    hexsep rayleigh-curve --order 16 --grid 0:40:5 --mc --out fading.csv

Exit status is 0 on success, 2 on invalid input and 3 when a numerical
routine runs out of budget.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import shlex
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analytic import (BSource, db_to_linear, params_from_constellation, rayleigh_zero_snr_limit,
                       sep_3psk_exact, sep_hqam_closed, sep_hqam_corrected, sep_hqam_rayleigh,
                       sep_nn_awgn)
from .errors import NumericalBudgetError, ValidationError
from .lattice import (SUPPORTED_ORDERS, ConstellationKind, build_constellation, decision_regions,
                      neighbor_stats, write_points_csv, write_regions_csv)
from .montecarlo import Channel, SimConfig, simulate
from .oracle import exact_sep_awgn, exact_sep_rayleigh
from .report import (ESTIMATORS, TABLE2, sweep, sweep_json, table2_report, write_sweep_csv,
                     write_table2_csv)

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 2, 3


class UsageError(ValidationError):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` in dB, stop inclusive; or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return np.round(start + step * np.arange(n), 10)
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise UsageError("--grid", f"{text!r} is not 'start:stop:step' (step > 0, stop >= start) "
                         "or a comma-separated list of dB values") from None


def _order(value: str) -> int:
    try:
        M = int(value)
    except ValueError:
        M = -1
    if M not in SUPPORTED_ORDERS:
        raise argparse.ArgumentTypeError(f"{value!r} is not one of {', '.join(map(str, SUPPORTED_ORDERS))}")
    return M


def _snr_db(value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not a number in dB (use -inf for zero SNR)") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hexsep", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"hexsep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p, order_default=16, kind_default="regular"):
        p.add_argument("--order", "-M", type=_order, default=order_default,
                       help=f"constellation size, one of {SUPPORTED_ORDERS}")
        p.add_argument("--kind", choices=[k.value for k in ConstellationKind], default=kind_default)
        p.add_argument("--b-source", choices=[b.value for b in BSource], default="table1",
                       help="correction coefficient B from the published table or from geometry")

    def snr(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--snr-db", type=_snr_db, help="average symbol SNR Es/N0 in dB")
        g.add_argument("--snr-linear", type=float, help="average symbol SNR Es/N0, linear")

    def sim(p, seed=True):
        p.add_argument("--n-symbols", type=int, default=1_000_000)
        p.add_argument("--batch-size", type=int, default=1 << 16)
        if seed:
            p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("constellation", help="dump constellation points and decision regions as CSV")
    common(p)
    p.add_argument("--out", help="points CSV path (default: stdout)")
    p.add_argument("--regions-out", help="decision-region CSV path")

    p = sub.add_parser("params", help="print alpha, A, A_c and both B values")
    common(p)

    p = sub.add_parser("sep", help="evaluate every estimator at one SNR")
    common(p)
    snr(p)
    p.add_argument("--mc", action="store_true", help="also run the Monte Carlo simulator")
    sim(p)

    p = sub.add_parser("simulate", help="Monte Carlo SEP estimate")
    common(p)
    snr(p)
    p.add_argument("--channel", choices=[c.value for c in Channel], default="awgn")
    sim(p)
    p.add_argument("--out", help="write the estimate as JSON")

    for name, help_text, channel in (("sweep", "SEP over an SNR grid", None),
                                     ("rayleigh-curve", "fading closed form vs exact vs simulation",
                                      "rayleigh")):
        p = sub.add_parser(name, help=help_text)
        common(p)
        p.add_argument("--grid", required=True, help="dB grid 'start:stop:step' or 'a,b,c'")
        if channel is None:
            p.add_argument("--channel", choices=[c.value for c in Channel], default="awgn")
        p.add_argument("--estimators", default="eq5,eq6,nn,exact",
                       help=f"comma-separated subset of {','.join(ESTIMATORS)}")
        p.add_argument("--mc", action="store_true", help="add the Monte Carlo column")
        sim(p)
        p.add_argument("--out", help="output path; .json selects JSON, anything else CSV")

    p = sub.add_parser("table2", help="recompute the 256-HQAM AE table and compare")
    common(p, order_default=256)
    p.add_argument("--out", help="comparison CSV path (a text table is always printed)")
    return parser


# flags whose values may start with "-" (negative dB, -inf)
_SIGNED_FLAGS = ("--grid", "--snr-db", "--snr-linear")


def _join_signed_values(argv: Sequence[str]) -> list:
    out, k = [], 0
    while k < len(argv):
        if argv[k] in _SIGNED_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{argv[k]}={argv[k + 1]}")
            k += 2
            continue
        out.append(argv[k])
        k += 1
    return out


def _header(argv: Sequence[str], seed: Optional[int] = None) -> list:
    lines = [f"hexsep {__version__}", "command: " + shlex.join(["hexsep", *argv])]
    if seed is not None:
        lines.append(f"seed: {seed}")
    return lines


def _gamma(args) -> float:
    if args.snr_linear is not None:
        if not args.snr_linear >= 0 or math.isinf(args.snr_linear):
            raise UsageError("--snr-linear", "must be a finite number >= 0")
        return float(args.snr_linear)
    if math.isnan(args.snr_db) or args.snr_db == math.inf:
        raise UsageError("--snr-db", "must be a finite number or -inf")
    return float(db_to_linear(args.snr_db))


def _constellation(args):
    if args.kind == "3psk" and args.order != 3:
        raise UsageError("--order", "3psk requires --order 3")
    return build_constellation(args.order, args.kind)


def _sim_config(args, channel="awgn") -> SimConfig:
    if args.n_symbols < 10_000:
        raise UsageError("--n-symbols", "must be >= 10000")
    if args.batch_size < 1:
        raise UsageError("--batch-size", "must be >= 1")
    return SimConfig(args.n_symbols, args.seed, channel, args.batch_size)


def _write(path: Optional[str], text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_constellation(args, argv, stdout):
    c = _constellation(args)
    buf = io.StringIO()
    for line in _header(argv):
        buf.write(f"# {line}\n")
    write_points_csv(c, buf)
    _write(args.out, buf.getvalue(), stdout)
    if args.regions_out:
        buf = io.StringIO()
        for line in _header(argv):
            buf.write(f"# {line}\n")
        write_regions_csv(decision_regions(c), buf)
        _write(args.regions_out, buf.getvalue(), stdout)


def cmd_params(args, argv, stdout):
    c = _constellation(args)
    stats = neighbor_stats(c)
    geometric = params_from_constellation(c, "geometric")
    table = params_from_constellation(c, "table1")
    b_table = f"{table.B:.4f}" if table.source is BSource.TABLE1 else "n/a"
    stdout.write(
        f"constellation  {c.name}\n"
        f"alpha          {stats.alpha:.10g}\n"
        f"A              {float(stats.A):.10g} ({stats.A})\n"
        f"A_c            {float(stats.A_c):.10g} ({stats.A_c})\n"
        f"B_geometric    {geometric.B:.4f}\n"
        f"B_table1       {b_table}\n")


def cmd_sep(args, argv, stdout):
    c = _constellation(args)
    gamma = _gamma(args)
    p = params_from_constellation(c, args.b_source)
    out = [f"constellation        {c.name}",
           f"gamma_s (linear)     {gamma:.10g}",
           f"nearest-neighbor     {sep_nn_awgn(p, gamma):.6g}",
           f"closed form          {sep_hqam_closed(p, gamma):.6g}",
           f"corrected (num. C)   {sep_hqam_corrected(p, gamma):.6g}"]
    if c.kind is ConstellationKind.THREE_PSK:
        out.append(f"3-PSK exact          {sep_3psk_exact(gamma, 'numeric'):.6g}")
        out.append(f"3-PSK closed C       {sep_3psk_exact(gamma, 'closed'):.6g}")
    if gamma > 0:
        out.append(f"exact (AWGN)         {exact_sep_awgn(c, gamma).value:.6g}")
        out.append(f"Rayleigh closed form {sep_hqam_rayleigh(p, gamma):.6g}")
        out.append(f"exact (Rayleigh)     {exact_sep_rayleigh(c, gamma).value:.6g}")
    else:
        out.append(f"exact (AWGN)         {(c.M - 1) / c.M:.6g}  (zero-SNR limit)")
        out.append(f"Rayleigh closed form {rayleigh_zero_snr_limit(p):.6g}  (zero-SNR limit)")
    if args.mc:
        if gamma <= 0:
            raise UsageError("--mc", "simulation needs SNR > 0")
        est = simulate(c, gamma, _sim_config(args))
        out.append(f"Monte Carlo          {est.sep_hat:.6g} +/- {est.ci95_halfwidth:.2g} "
                   f"({est.n_errors}/{est.n_symbols}, seed {est.seed})")
    stdout.write("\n".join(out) + "\n")


def cmd_simulate(args, argv, stdout):
    c = _constellation(args)
    gamma = _gamma(args)
    if gamma <= 0:
        raise UsageError("--snr-db/--snr-linear", "simulation needs SNR > 0")
    est = simulate(c, gamma, _sim_config(args, args.channel))
    payload = {"header": _header(argv, args.seed), "constellation": c.name, "channel": args.channel,
               "gamma_s": gamma, "sep_hat": est.sep_hat, "n_errors": est.n_errors,
               "n_symbols": est.n_symbols, "ci95_halfwidth": est.ci95_halfwidth, "seed": est.seed}
    stdout.write(f"{c.name} {args.channel} gamma_s={gamma:.6g}: SEP = {est.sep_hat:.6g} "
                 f"+/- {est.ci95_halfwidth:.2g} ({est.n_errors}/{est.n_symbols}, seed {est.seed})\n")
    if args.out:
        _write(args.out, json.dumps(payload, indent=2) + "\n", stdout)


def _run_sweep(args, argv, stdout, channel):
    c = _constellation(args)
    grid = parse_grid(args.grid)
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad:
        raise UsageError("--estimators", f"unknown {bad}; choose from {','.join(ESTIMATORS)}")
    if args.mc and "mc" not in estimators:
        estimators.append("mc")
    sim = _sim_config(args, channel) if "mc" in estimators else SimConfig(seed=args.seed)
    p = params_from_constellation(c, args.b_source)
    try:
        rows = sweep(c, grid, channel, estimators, params=p, sim=sim)
    except ValidationError as exc:
        raise UsageError("--grid", str(exc)) from None
    header = _header(argv, args.seed) + [f"constellation: {c.name}", f"channel: {channel}",
                                         f"alpha={p.alpha!r} A={p.A!r} B={p.B!r} ({p.source.value})"]
    if args.out and args.out.endswith(".json"):
        text = sweep_json(rows, header)
    else:
        buf = io.StringIO()
        write_sweep_csv(rows, buf, header)
        text = buf.getvalue()
    _write(args.out, text, stdout)
    failed = [r for r in rows if r.error]
    if failed and all("Budget" in r.error or "NotConverged" in r.error for r in failed):
        return EXIT_BUDGET
    return EXIT_OK


def cmd_sweep(args, argv, stdout):
    return _run_sweep(args, argv, stdout, args.channel)


def cmd_rayleigh_curve(args, argv, stdout):
    return _run_sweep(args, argv, stdout, "rayleigh")


def cmd_table2(args, argv, stdout):
    c = _constellation(args)
    p = params_from_constellation(c, args.b_source)
    rows = sweep(c, TABLE2.snr_db, "awgn", ("eq5", "exact"), params=p)
    report = table2_report(rows, TABLE2)
    stdout.write("\n".join(report.lines()) + "\n")
    stdout.write(f"max |recomputed - published| = {report.max_deviation:.4f} "
                 f"(tolerance {report.tolerance:g}); dominance "
                 f"{'holds' if report.dominance_holds else 'fails'}\n")
    if args.out:
        buf = io.StringIO()
        write_table2_csv(report, buf, _header(argv) + [f"constellation: {c.name}"])
        _write(args.out, buf.getvalue(), stdout)


COMMANDS = {
    "constellation": cmd_constellation,
    "params": cmd_params,
    "sep": cmd_sep,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "rayleigh-curve": cmd_rayleigh_curve,
    "table2": cmd_table2,
}


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(_join_signed_values(argv))
    except SystemExit as exc:  # argparse reports the offending flag itself
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, argv, stdout) or EXIT_OK
    except ValidationError as exc:
        stderr.write(f"hexsep {args.command}: error: {exc}\n")
        return EXIT_INVALID
    except NumericalBudgetError as exc:
        stderr.write(f"hexsep {args.command}: numerical budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except OSError as exc:
        stderr.write(f"hexsep {args.command}: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
