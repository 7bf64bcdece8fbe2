"""Command-line entry point: ``spmilb {sweep,optimal-alpha,optimal-lp,validate,pilot-dump}``.

Powers are given in dB relative to the noise variance,
``P_db = 10 log10(P / sigma2)``. Exit status: 0 success, 1 validation
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys

from . import analysis
from .experiments import (
    CSV_COLUMNS,
    VALIDATE_SUITES,
    SpecError,
    SweepSpec,
    fmt,
    jsonable,
    optimal_alpha_report,
    optimal_lp_report,
    point_row,
    run_sweep,
    run_validate,
)
from .linklevel import db_to_power
from .pilots import dump_csv, gen_mwbe_pilots

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "scheme": "both",
    "axis": "power-db",
    "k": [40],
    "k_range": [31, 60, 1],
    "l": 30,
    "n": 60,
    "sigma2": 1.0,
    "p_db": [20.0],
    "p_db_range": [0.0, 40.0, 2.0],
    "alpha": None,
    "lp": None,
    "trials": None,
    "seed": 0,
    "format": "csv",
    "per_channel_use": False,
    "allow_k_below_l": False,
    "workers": 1,
    "suite": "all",
    "explain": False,
}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    # every default is None so that a --config file can fill in what the flags leave unset
    add = {
        "k": lambda: p.add_argument("--k", type=int, nargs="+", help="user count(s) K"),
        "l": lambda: p.add_argument("--l", type=int, help="coherence length L (default 30)"),
        "n": lambda: p.add_argument("--n", type=int, help="BS antennas N (default 60)"),
        "sigma2": lambda: p.add_argument("--sigma2", type=float, help="noise variance (default 1)"),
        "p_db": lambda: p.add_argument(
            "--p-db", type=float, nargs="+", help="power(s) in dB, 10*log10(P/sigma2)"
        ),
        "seed": lambda: p.add_argument("--seed", type=int, help="master seed (default 0)"),
        "trials": lambda: p.add_argument("--trials", type=int, help="Monte Carlo trials"),
        "out": lambda: p.add_argument("--out", help="output path (default stdout)"),
        "format": lambda: p.add_argument("--format", choices=("csv", "json"), help="output format"),
        "config": lambda: p.add_argument("--config", help="JSON file of defaults; flags override it"),
    }
    for n in names:
        add[n]()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spmilb",
        description=__doc__.split("\n\n")[0],
        epilog="Power convention: P_db = 10*log10(P/sigma2).",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="MILB over a power or user-count axis")
    sw.add_argument("--scheme", choices=("sp", "rp", "both"))
    sw.add_argument("--axis", choices=("power-db", "users"))
    sw.add_argument("--p-db-range", type=float, nargs=3, metavar=("START", "STOP", "STEP"))
    sw.add_argument("--k-range", type=int, nargs=3, metavar=("START", "STOP", "STEP"))
    alloc = sw.add_mutually_exclusive_group()
    alloc.add_argument("--alpha", type=float, help="fixed SP power factor")
    alloc.add_argument("--lp", type=int, help="fixed RP pilot length")
    alloc.add_argument("--optimal", action="store_true", help="re-solve alpha*/Lp* per point (default)")
    sw.add_argument("--per-channel-use", action="store_true", default=None, help="divide bounds by L")
    sw.add_argument(
        "--allow-k-below-l",
        action="store_true",
        default=None,
        help="evaluate closed forms at K < L (outside the overloaded regime)",
    )
    sw.add_argument("--workers", type=int)
    _common(sw, "k", "l", "n", "sigma2", "p_db", "seed", "trials", "out", "format", "config")

    oa = sub.add_parser("optimal-alpha", help="optimal SP power allocation")
    oa.add_argument("--explain", action="store_true", default=None, help="include the residual-variance breakdown")
    _common(oa, "k", "l", "n", "sigma2", "p_db", "out", "config")

    ol = sub.add_parser("optimal-lp", help="optimal RP pilot length by exhaustive search")
    _common(ol, "k", "l", "n", "sigma2", "p_db", "out", "config")

    va = sub.add_parser("validate", help="Monte Carlo versus closed-form checks")
    va.add_argument("--suite", choices=VALIDATE_SUITES)
    _common(va, "trials", "seed", "out", "config")

    pd = sub.add_parser("pilot-dump", help="write the pilot matrix as CSV (re, im per entry)")
    pd.add_argument("--length", type=int, help="pilot length (default L)")
    _common(pd, "k", "l", "out")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config file < explicit flags."""
    cfg = dict(DEFAULTS)
    path = getattr(args, "config", None)
    if path:
        try:
            with open(path) as fh:
                from_file = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        unknown = set(from_file) - set(DEFAULTS) - {"out", "length"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(from_file)
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command", "verbose"):
            cfg[k] = v
    for key in ("k", "p_db"):
        if not isinstance(cfg[key], list):
            cfg[key] = [cfg[key]]
    return cfg


def _single(cfg, key):
    vals = cfg[key]
    if len(vals) != 1:
        raise UsageError(f"--{key.replace('_', '-')} takes a single value here")
    return vals[0]


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _header_lines(resolved: dict) -> list[str]:
    return ["# " + json.dumps(jsonable(resolved), sort_keys=True)]


def cmd_sweep(cfg: dict) -> int:
    axis_range = cfg["p_db_range"] if cfg["axis"] == "power-db" else cfg["k_range"]
    spec = SweepSpec(
        scheme=cfg["scheme"],
        axis=cfg["axis"],
        K=[int(k) for k in cfg["k"]],
        p_db=[float(p) for p in cfg["p_db"]],
        axis_range=tuple(float(x) for x in axis_range),
        L=cfg["l"],
        N=cfg["n"],
        sigma2=cfg["sigma2"],
        alpha=cfg["alpha"],
        lp=cfg["lp"],
        per_channel_use=bool(cfg["per_channel_use"]),
        trials=cfg["trials"] or 0,
        seed=cfg["seed"],
        allow_k_below_l=bool(cfg["allow_k_below_l"]),
    )
    rows = [point_row(p) for p in run_sweep(spec, workers=cfg["workers"])]
    resolved = {"command": "sweep", **spec.to_dict()}
    fh, close = _open_out(cfg.get("out"))
    try:
        if cfg["format"] == "json":
            json.dump(jsonable({"config": resolved, "columns": list(CSV_COLUMNS), "rows": rows}), fh, indent=2)
            fh.write("\n")
        else:
            buf = io.StringIO()
            for line in _header_lines(resolved):
                buf.write(line + "\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for r in rows:
                w.writerow([fmt(r[c]) for c in CSV_COLUMNS])
            fh.write(buf.getvalue())
    finally:
        if close:
            fh.close()
    return EXIT_OK


def _write_json(obj, path) -> None:
    fh, close = _open_out(path)
    try:
        json.dump(jsonable(obj), fh, indent=2)
        fh.write("\n")
    finally:
        if close:
            fh.close()


def cmd_optimal_alpha(cfg: dict) -> int:
    p_db, K = _single(cfg, "p_db"), _single(cfg, "k")
    report = optimal_alpha_report(p_db, K, cfg["l"], cfg["n"], cfg["sigma2"])
    if cfg["explain"]:
        P = db_to_power(p_db, cfg["sigma2"])
        report["breakdown"] = analysis.trace_terms_sp(
            report["alpha"], P, K, cfg["l"], cfg["n"], cfg["sigma2"]
        ).to_dict()
    _write_json(report, cfg.get("out"))
    return EXIT_OK


def cmd_optimal_lp(cfg: dict) -> int:
    report = optimal_lp_report(_single(cfg, "p_db"), _single(cfg, "k"), cfg["l"], cfg["n"], cfg["sigma2"])
    _write_json(report, cfg.get("out"))
    return EXIT_OK


def cmd_validate(cfg: dict) -> int:
    report = run_validate(cfg["suite"], cfg["trials"] or 10000, cfg["seed"])
    _write_json(report, cfg.get("out"))
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: {c['observed']:.10g} vs {c['expected']:.10g} (band {c['band']:.3g})", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_pilot_dump(cfg: dict) -> int:
    K = _single(cfg, "k")
    length = cfg.get("length") or cfg["l"]
    pilots = gen_mwbe_pilots(K, length)
    out = cfg.get("out")
    if out in (None, "-"):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in pilots.entries:
            w.writerow([v for z in row for v in (repr(float(z.real)), repr(float(z.imag)))])
        sys.stdout.write(buf.getvalue())
    else:
        dump_csv(pilots, out)
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "optimal-alpha": cmd_optimal_alpha,
    "optimal-lp": cmd_optimal_lp,
    "validate": cmd_validate,
    "pilot-dump": cmd_pilot_dump,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, SpecError, ValueError) as exc:
        print(f"spmilb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"spmilb {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
