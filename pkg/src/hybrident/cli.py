"""Command-line front end: ``hybrident run|sweep|blocks|verify``.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 truncation
failure.  Output files default to the directory named by HYBRIDENT_OUT.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .fock import TruncationError
from .schemes import SCHEMES
from .sweeps import (FORMATS, METRICS, OUTPUT_ENV, Scenario, SweepResult, SweepSpec,
                     default_output_dir, emit_blocks, evaluate, run_sweep, write_text)
from .verify import check_ids, verify_oracles

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_TRUNCATION = 0, 1, 2, 3

# flag name -> Scenario field
SCENARIO_FLAGS = {"scheme": "scheme", "squeezing_db": "squeezing_db", "mu": "mu",
                  "eta_a": "eta_a", "eta_b": "eta_b", "sigma_deg": "sigma_deg", "dim": "dim",
                  "model": "model", "tap_theta": "tap_theta", "tmss_lambda": "tmss_lambda"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _mu(text: str):
    return text if text == "balanced" else float(text)


def _add_scenario(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with default settings (flags override it)")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--squeezing-db", type=float)
    p.add_argument("--mu", type=_mu, help="weight parameter or 'balanced'")
    p.add_argument("--eta-a", type=float, help="DV-mode transmission")
    p.add_argument("--eta-b", type=float, help="CV-mode transmission")
    p.add_argument("--sigma-deg", type=float, help="phase-noise standard deviation in degrees")
    p.add_argument("--dim", type=int, help="minimum CV truncation")
    p.add_argument("--model", choices=("perturbative", "exact"))
    p.add_argument("--tap-theta", type=float)
    p.add_argument("--tmss-lambda", type=float)


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out", help="output path; '-' for stdout")
    p.add_argument("--metrics", help=f"comma-separated subset of {','.join(METRICS)}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hybrident", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a single operating point")
    _add_scenario(run)
    _add_output(run)

    sweep = sub.add_parser("sweep", help="sweep one parameter")
    _add_scenario(sweep)
    _add_output(sweep)
    sweep.add_argument("--sweep", help="NAME:START:STOP, e.g. eta:0.5:1")
    sweep.add_argument("--steps", type=int)
    sweep.add_argument("--workers", type=int, default=None)

    blocks = sub.add_parser("blocks", help="write Wigner maps of every DV block")
    _add_scenario(blocks)
    blocks.add_argument("--basis", choices=("number", "rotated"))
    blocks.add_argument("--grid", help="LO:HI:N for both axes (default -4:4:81)")
    blocks.add_argument("--out", help="output directory")

    ver = sub.add_parser("verify", help="run golden-value and oracle checks")
    ver.add_argument("--tolerance", type=float, help="override every stated tolerance")
    ver.add_argument("--check", help="run a single check by id")
    ver.add_argument("--list", action="store_true", help="list check ids and exit")
    ver.add_argument("--only", choices=("paper", "derived"), help="restrict to one kind of check")
    return parser


def load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def merged(args: argparse.Namespace) -> dict:
    """Config file values overridden by explicitly given flags."""
    cfg = load_config(getattr(args, "config", None))
    known = {f.name for f in fields(Scenario)} | {"sweep", "steps", "format", "out", "metrics",
                                                  "basis", "grid", "workers"}
    unknown = set(cfg) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for k, v in vars(args).items():
        if v is not None and k not in ("command", "config"):
            cfg[k] = v
    return cfg


def scenario_from(cfg: dict) -> Scenario:
    kw = {f: cfg[k] for k, f in SCENARIO_FLAGS.items() if k in cfg}
    try:
        return Scenario(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def _metrics(cfg: dict) -> tuple:
    m = cfg.get("metrics", "negativity,wigner0")
    names = tuple(m.split(",")) if isinstance(m, str) else tuple(m)
    bad = [n for n in names if n not in METRICS]
    if bad:
        raise UsageError(f"unknown metrics {bad}; choose from {METRICS}")
    return names


def _parse_sweep(text) -> tuple[str, float, float]:
    if isinstance(text, dict):
        return text["name"], float(text["start"]), float(text["stop"])
    parts = str(text).split(":")
    if len(parts) != 3:
        raise UsageError("--sweep expects NAME:START:STOP")
    try:
        return parts[0], float(parts[1]), float(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad sweep range {text!r}") from exc


def _parse_grid(text):
    if text is None:
        return None
    try:
        lo, hi, n = str(text).split(":")
        axis = np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise UsageError("--grid expects LO:HI:N") from exc
    if axis.size < 2:
        raise UsageError("grid needs at least two points")
    return axis, axis


def _emit(result: SweepResult, fmt: str, out: Optional[str], default_name: str) -> None:
    text = result.dumps(fmt)
    if out == "-" or (out is None and OUTPUT_ENV not in os.environ):
        sys.stdout.write(text)
        return
    path = Path(out) if out else default_output_dir() / f"{default_name}.{fmt}"
    write_text(path, text)
    print(f"wrote {path}", file=sys.stderr)


def cmd_run(cfg: dict) -> int:
    scn = scenario_from(cfg)
    row = evaluate(scn, _metrics(cfg))
    result = SweepResult(None, _metrics(cfg), (row,))
    fmt = cfg.get("format", "json")
    _emit(result, fmt, cfg.get("out"), f"run_{scn.scheme}")
    return EXIT_OK if row.converged else EXIT_TRUNCATION


def cmd_sweep(cfg: dict) -> int:
    if "sweep" not in cfg:
        raise UsageError("sweep needs --sweep NAME:START:STOP")
    name, start, stop = _parse_sweep(cfg["sweep"])
    base = scenario_from(cfg)
    fmt = cfg.get("format", "csv")
    try:
        spec = SweepSpec(name, start, stop, int(cfg.get("steps", 11)), base, _metrics(cfg), fmt=fmt)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    result = run_sweep(spec, workers=cfg.get("workers"))
    _emit(result, fmt, cfg.get("out"), f"sweep_{base.scheme}_{name}")
    return EXIT_OK if result.converged else EXIT_TRUNCATION


def cmd_blocks(cfg: dict) -> int:
    scn = scenario_from(cfg)
    basis = cfg.get("basis", "number")
    try:
        paths = emit_blocks(scn.scheme, scn, basis, _parse_grid(cfg.get("grid")), cfg.get("out"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.list:
        print("\n".join(check_ids()))
        return EXIT_OK
    kinds = (args.only,) if args.only else ("paper", "derived")
    try:
        report = verify_oracles(args.tolerance, args.check, kinds)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    print("\n".join(report.lines()))
    return EXIT_OK if report.ok else EXIT_VERIFY


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        cfg = merged(args)
        return {"run": cmd_run, "sweep": cmd_sweep, "blocks": cmd_blocks}[args.command](cfg)
    except UsageError as exc:
        print(f"hybrident: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncationError as exc:
        print(f"hybrident: truncation failure: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except MemoryError as exc:
        print(f"hybrident: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hybrident: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
