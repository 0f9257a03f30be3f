"""Command-line front end: ``halfspace-omd {run,sweep,baseline,diag}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import DIAG_SUITES, ConfigError, load_config
from .diag import run_suites
from .runner import execute, write_outputs

EXIT_OK, EXIT_CELL_FAILURE, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="halfspace-omd",
                                 description="Active learning of sparse halfspaces by stagewise mirror descent.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run every (seed x mode) cell of the config"),
        ("sweep", "run the cartesian grid in the config's 'sweep' block"),
        ("baseline", "run the averaging baseline only"),
        ("diag", "run the invariant suites and print pass/fail per suite"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="master seed (overrides the config's 'seed')")
        if name == "diag":
            p.add_argument("--suites", default=None,
                           help="comma-separated subset of: " + ", ".join(DIAG_SUITES))
        else:
            p.add_argument("--out", required=True, metavar="DIR")
            p.add_argument("--workers", type=int, default=1, metavar="N")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _cmd_cells(args, cmd) -> int:
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    cfg = load_config(args.config, master_seed=args.seed)
    if cmd == "sweep" and not cfg.sweep:
        raise ConfigError("config field 'sweep': required for the sweep subcommand")
    modes = ["baseline"] if cmd == "baseline" else None
    cells = cfg.cells(use_sweep=cmd == "sweep", modes=modes)
    outcomes = execute(cells, cfg.fingerprint(), args.workers)
    write_outputs(args.out, outcomes, cfg)
    failed = [o.summary["cell"] for o in outcomes if o.summary["failed"]]
    print(f"{len(cells)} cells, {len(failed)} failed; results in {args.out}")
    if failed:
        print("failed cells: " + ", ".join(map(str, failed)), file=sys.stderr)
        return EXIT_CELL_FAILURE
    return EXIT_OK


def _cmd_diag(args) -> int:
    cfg = load_config(args.config, require_run_fields=False, master_seed=args.seed)
    diag_cfg = cfg.raw.get("diag", {})
    if args.suites is not None:
        names = [n.strip() for n in args.suites.split(",") if n.strip()]
    else:
        names = list(diag_cfg.get("suites", DIAG_SUITES))
    unknown = [n for n in names if n not in DIAG_SUITES]
    if unknown:
        raise ConfigError(f"config field 'diag.suites': unknown suite(s) {', '.join(unknown)}")
    if not names:
        raise ConfigError("config field 'diag.suites': no suites selected")
    results = run_suites(names, diag_cfg, cfg.master_seed)
    for r in results:
        print(r.line())
    failing = [r.name for r in results if not r.passed]
    if failing:
        print("failing suites: " + ", ".join(failing), file=sys.stderr)
        return EXIT_CELL_FAILURE
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "diag":
            return _cmd_diag(args)
        return _cmd_cells(args, args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
