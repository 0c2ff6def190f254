"""Command-line entry point: ``python3 -m fwlab <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys

from . import harness
from .harness import ExperimentConfig


def _parse_set(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise SystemExit(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fwlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in harness.KINDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key-value config file ([experiment], [datum], [params])")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter")
        p.add_argument("--datum", action="append", metavar="KEY=VALUE", help="override a datum field")
        p.add_argument("--out", help="output directory (default: results)")
        p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--seedless", action="store_true", help="accepted for compatibility; nothing here is random")
        p.add_argument("--no-write", action="store_true", help="do not persist results")
    return ap


def make_config(args) -> ExperimentConfig:
    if args.config:
        base = ExperimentConfig.load(args.config)
        if base.kind != args.command:
            base = ExperimentConfig(args.command, base.datum, base.params, base.output_dir)
    else:
        base = ExperimentConfig(args.command)
    datum = harness._datum_spec({**base.datum, **_parse_set(args.datum)})
    params = {**base.params, **_parse_set(args.set)}
    return ExperimentConfig(args.command, datum, params, args.out or base.output_dir)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = make_config(args)
    fn = harness.COMMANDS[args.command]
    kw = {"write": not args.no_write}
    if args.command == "sweep":
        kw["workers"] = args.workers
    result = fn(cfg, **kw)
    print(render(args.command, result))
    return 0


def render(command: str, result) -> str:
    if command == "bounds":
        return result.table()
    if command == "run":
        return result.to_json()
    if command == "sweep":
        lines = [result.matrix_csv().rstrip()]
        lines.append(f"small-b region violations: {result.small_b_violations}")
        lines.append(f"monotonicity findings: {result.monotonicity_violations}")
        return "\n".join(lines)
    if command == "decay":
        return "\n".join(f"r={f.r:g}  predicted={f.predicted_slope:+.4f}  measured={f.slope:+.4f}" for f in result)
    return json.dumps(harness._clean(result), indent=2, default=harness._json_default)


if __name__ == "__main__":
    sys.exit(main())
