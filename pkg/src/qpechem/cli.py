"""``qpechem <scf|curve|ipea|trotter|sweep> --config PATH [--seed N] [--out PATH]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .harness import ConfigError, RunConfig

CSV_VERSION = "1"

_TABLES = {
    "curve": ("curve", harness.CURVE_HEADER, harness.run_curve),
    "trotter": ("trotter", harness.TROTTER_HEADER, harness.run_trotter),
    "sweep": ("sweep", harness.SWEEP_HEADER, harness.run_sweep),
}
_DOCS = {"scf": harness.run_scf, "ipea": harness.run_ipea}


def _plain(v):
    return v.item() if isinstance(v, np.generic) else v


def _fmt(v):
    v = _plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(kind: str, header, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# qpechem {kind} v{CSV_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_plain) + "\n"


def render(command: str, cfg: RunConfig) -> str:
    if command in _TABLES:
        kind, header, fn = _TABLES[command]
        return to_csv(kind, header, fn(cfg))
    if command in _DOCS:
        return to_json(_DOCS[command](cfg))
    raise ConfigError(f"unknown subcommand {command!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpechem", description="Minimal-basis H2 phase-estimation toolkit.")
    p.add_argument("command", choices=harness.SUBCOMMANDS)
    p.add_argument("--config", help="JSON run configuration (defaults when omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="output file (stdout when omitted)")
    p.add_argument("--axis", choices=harness.SWEEP_AXES, help="sweep axis (overrides config)")
    return p


def _error(kind: str, message: str, **extra) -> int:
    record = {"error": kind, "message": message, **extra}
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
    return 2 if kind == "config" else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = harness.with_seed(RunConfig.load(args.config), args.seed)
        if args.axis:
            cfg = RunConfig.from_dict({**cfg.to_dict(), "axis": args.axis})
        text = render(args.command, cfg)
    except ConfigError as exc:
        return _error("config", str(exc), command=args.command, config=args.config)
    except Exception as exc:  # report any failure as a record, not a traceback
        return _error(type(exc).__name__, str(exc), command=args.command)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            return _error("io", exc.strerror or str(exc), path=args.out)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
