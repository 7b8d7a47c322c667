"""Command line harness.

    hyperunitary verify --config suites.ini [--suite NAME] [--seed N] [--cap N] [--cache DIR] [--report PATH]
    hyperunitary catalog list

The config file has one section per suite run.  A section's ``suite`` key
names the suite (defaulting to the section name); other keys are suite options.
Keys in ``[DEFAULT]`` apply to every section.  Exit status: 0 all pass,
1 failures, 2 config error, 3 cap exceeded.
"""
from __future__ import annotations

import argparse
import configparser
import sys
import time

from . import catalog
from .subgroups import DEFAULT_CAP
from .suites import CAP, FAIL, PASS, SUITES, ConfigError, Context, Record, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAP = 0, 1, 2, 3


def load_config(path: str) -> list[tuple[str, str, dict]]:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    runs = []
    for section in parser.sections():
        cfg = dict(parser[section])
        suite = cfg.pop("suite", section)
        if suite not in SUITES:
            raise ConfigError(f"section [{section}] names unknown suite {suite!r}")
        runs.append((section, suite, cfg))
    if not runs:
        raise ConfigError("config has no suite sections")
    return runs


def format_report(runs, records_by_run) -> str:
    lines = []
    for (section, suite, cfg), records in zip(runs, records_by_run):
        echo = " ".join(f"{k}={v}" for k, v in sorted(cfg.items()))
        lines.append(f"# section={section} suite={suite} {echo}".rstrip())
        lines += [r.to_line() for r in records]
    flat = [r for recs in records_by_run for r in recs]
    lines.append("# summary")
    lines.append(f"records={len(flat)} pass={sum(r.status == PASS for r in flat)} "
                 f"fail={sum(r.status == FAIL for r in flat)} cap={sum(r.status == CAP for r in flat)}")
    for r in flat:
        if r.status != PASS:
            lines.append(f"{r.status}: {r.suite} {r.instance} {r.check}")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> list[Record]:
    return [Record.from_line(line) for line in text.splitlines() if line.startswith("{")]


def verify(args) -> int:
    try:
        runs = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.suite:
        runs = [r for r in runs if r[1] == args.suite or r[0] == args.suite]
        if not runs:
            print(f"config error: no section runs suite {args.suite!r}", file=sys.stderr)
            return EXIT_CONFIG
    results = []
    for section, suite, cfg in runs:
        try:
            seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
            cap = args.cap if args.cap is not None else int(cfg.get("cap", DEFAULT_CAP))
            workers = args.workers if args.workers is not None else int(cfg.get("workers", 1))
        except ValueError:
            print(f"config error: non-integer seed/cap/workers in [{section}]", file=sys.stderr)
            return EXIT_CONFIG
        ctx = Context(seed=seed, cap=cap, workers=workers, cache=args.cache)
        t0 = time.perf_counter()
        try:
            recs = run_suite(suite, cfg, ctx)
        except ConfigError as exc:
            print(f"config error in [{section}]: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        # timing goes to stderr only, so that the report stays reproducible
        print(f"[{section}] {suite}: {len(recs)} records in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
        results.append(recs)
    text = format_report(runs, results)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    flat = [r for recs in results for r in recs]
    if any(r.status == FAIL for r in flat):
        return EXIT_FAIL
    if any(r.status == CAP for r in flat):
        return EXIT_CAP
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyperunitary", description="Finite and localized verification harness.")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run suites from a config file")
    v.add_argument("--config", required=True)
    v.add_argument("--suite")
    v.add_argument("--seed", type=int)
    v.add_argument("--cap", type=int)
    v.add_argument("--cache")
    v.add_argument("--report")
    v.add_argument("--workers", type=int)
    c = sub.add_parser("catalog", help="catalog of ring and ideal presets")
    c.add_argument("action", choices=["list"])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "catalog":
        print("\n".join(catalog.listing()))
        return EXIT_OK
    return verify(args)


if __name__ == "__main__":
    sys.exit(main())
