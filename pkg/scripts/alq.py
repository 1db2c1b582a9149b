#!/usr/bin/env python3
"""
alq Command Line Interface

Subcommands:
    classify   run the classification and write or print the report
    count      point count of one quotient curve over F_q
    subgroups  list the Atkin-Lehner subgroups of a given order
    explain    print the replayed proof trace of one curve
    fetch      download newform data into the cache
    validate   cross-check a dataset

Exit codes: 0 success or match, 1 diff mismatch, 2 input or validation error.
"""

import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.arithmetic import prime_power
from src.atkin_lehner import canonical_label, enumerate_subgroups, generate
from src.classifier import candidate_levels, diff_report, explain, run_classification, to_markdown, write_report
from src.config import load_config
from src.exceptions import AlqError
from src.fetcher import NewformFetcher, parse_levels
from src.jacobian import excluded_degree, point_count
from src.modform_data import Dataset, dumps, load_dataset
from src.validation import validate_dataset

logger = logging.getLogger("alq")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2


def setup_logging(config: Dict, verbose: bool = False, quiet: bool = False) -> None:
    """Configure the root logger once; output goes to stderr."""
    settings = config.get("logging", {})
    level = settings.get("level", "INFO")
    if verbose:
        level = "DEBUG"
    elif quiet:
        level = "WARNING"
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO),
                        format=settings.get("format", "%(levelname)s %(name)s: %(message)s"),
                        stream=sys.stderr)


def data_dir(args: argparse.Namespace, config: Dict) -> str:
    """ALQ_DATA wins over --data, which wins over the config file."""
    return os.environ.get("ALQ_DATA") or getattr(args, "data", None) or config["data"]["dataset_dir"]


def fetch_config(args: argparse.Namespace, config: Dict) -> Dict:
    """ALQ_ENDPOINT wins over --endpoint, which wins over the config file."""
    settings = dict(config["fetch"])
    if getattr(args, "endpoint", None):
        settings["endpoint"] = args.endpoint
    if os.environ.get("ALQ_ENDPOINT"):
        settings["endpoint"] = os.environ["ALQ_ENDPOINT"]
    if getattr(args, "cache", None):
        settings["cache_dir"] = args.cache
    return settings


def load_for_classification(args: argparse.Namespace, config: Dict) -> Dataset:
    root = data_dir(args, config)
    dataset = load_dataset(root)
    if not config["fetch"].get("refresh_on_classify"):
        return dataset
    levels = candidate_levels(dataset.known, config["engine"].get("candidate_exceptions", [378]))
    fetcher = NewformFetcher(fetch_config(args, config))
    newforms = fetcher.fetch_newforms(levels, offline=args.offline, progress=not args.quiet)
    return load_dataset(root, newforms_path=newforms)


def cmd_classify(args: argparse.Namespace, config: Dict) -> int:
    dataset = load_for_classification(args, config)
    findings = validate_dataset(dataset)
    if not findings.is_empty:
        print(dumps(findings.to_dict()), end="", file=sys.stderr)
        logger.error("Dataset validation failed; not classifying")
        return EXIT_ERROR

    report = run_classification(config, dataset)
    if args.out:
        for path in write_report(report, args.out, config.get("report"), [args.format]):
            logger.info("Wrote %s", path)
    elif args.format == "md":
        print(to_markdown(report), end="")
    else:
        print(report.to_json(), end="")

    if args.diff:
        result = diff_report(report, args.diff)
        for line in result.lines:
            print(line)
        return result.exit_code
    return EXIT_OK


def cmd_count(args: argparse.Namespace, config: Dict) -> int:
    dataset = load_dataset(data_dir(args, config))
    gens = [int(d) for d in args.group.split(",") if d.strip()]
    group = generate(args.level, gens)
    p, k = prime_power(args.q)
    curve = dataset.record(canonical_label(group)) or group
    count = point_count(curve, p, k, dataset)
    d = excluded_degree(count, args.q)
    print(f"{canonical_label(group)}  #X(F_{args.q}) = {count}")
    if d >= 1:
        print(f"{count} > {d}*{args.q + 1} = {d * (args.q + 1)} => gon_Q >= {d + 1}")
    return EXIT_OK


def cmd_subgroups(args: argparse.Namespace, config: Dict) -> int:
    for group in enumerate_subgroups(args.level, args.order):
        print(canonical_label(group))
    return EXIT_OK


def cmd_explain(args: argparse.Namespace, config: Dict) -> int:
    report = run_classification(config, load_dataset(data_dir(args, config)))
    print(explain(args.label, report))
    return EXIT_OK


def cmd_fetch(args: argparse.Namespace, config: Dict) -> int:
    fetcher = NewformFetcher(fetch_config(args, config))
    path = fetcher.fetch_newforms(parse_levels(args.levels), offline=args.offline, progress=not args.quiet)
    print(path)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, config: Dict) -> int:
    report = validate_dataset(load_dataset(data_dir(args, config)))
    print(dumps(report.to_dict()), end="")
    return EXIT_OK if report.is_empty else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="alq", description="Gonality classification of Atkin-Lehner quotients")
    parser.add_argument("--config", help="configuration file (default: ALQ_CONFIG or config/config.yaml)")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify all candidate curves")
    p.add_argument("--data", help="dataset directory")
    p.add_argument("--offline", action="store_true", help="never contact the newform database")
    p.add_argument("--diff", help="expected-status file to compare against")
    p.add_argument("--format", choices=("json", "md"), default="json")
    p.add_argument("--out", help="output directory for report files")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("count", help="point count over F_q")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--group", required=True, help="comma-separated generators, e.g. 5,17")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--data", help="dataset directory")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("subgroups", help="list subgroups of a given order")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_subgroups)

    p = sub.add_parser("explain", help="proof trace of one curve")
    p.add_argument("label")
    p.add_argument("--data", help="dataset directory")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("fetch", help="download newform data")
    p.add_argument("--levels", required=True, help="A..B or a comma list")
    p.add_argument("--endpoint")
    p.add_argument("--cache")
    p.add_argument("--offline", action="store_true")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("validate", help="cross-check a dataset")
    p.add_argument("--data", help="dataset directory")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function."""
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        setup_logging(config, args.verbose, args.quiet)
        return args.func(args, config)
    except AlqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
