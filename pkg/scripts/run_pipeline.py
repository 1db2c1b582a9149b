#!/usr/bin/env python3
"""
Full Pipeline Script

This script runs the complete classification pipeline:
1. Fetch newform data (if configured)
2. Load and validate the dataset
3. Classify candidate curves
4. Write reports
5. Diff against the expected statuses
"""

import argparse
import logging
import os
import sys
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.classifier import candidate_levels, diff_report, run_classification, write_report
from src.config import load_config
from src.exceptions import AlqError
from src.fetcher import NewformFetcher
from src.modform_data import load_dataset
from src.validation import validate_dataset


def run(config: dict, offline: bool = False) -> int:
    """Run every step; returns the exit status of the final diff."""
    root = config['data']['dataset_dir']

    # Step 1: fetch
    newforms = None
    if config['fetch'].get('refresh_on_classify'):
        print("Step 1: Fetching newform data...")
        known = load_dataset(root).known
        levels = candidate_levels(known, config['engine'].get('candidate_exceptions', [378]))
        newforms = NewformFetcher(config['fetch']).fetch_newforms(levels, offline=offline, progress=True)
        print(f"✓ Newform data in {newforms}")
    else:
        print("Step 1: Using bundled newform data, skipping fetch")

    # Step 2: load and validate
    print("\nStep 2: Loading and validating dataset...")
    dataset = load_dataset(root, newforms_path=newforms)
    findings = validate_dataset(dataset)
    if not findings.is_empty:
        print("Dataset validation failed:")
        for section, entries in findings.to_dict().items():
            if section != 'checked' and entries:
                print(f"  {section}: {len(entries)}")
        return 2
    print(f"✓ Dataset consistent ({findings.checked})")

    # Step 3: classify
    print("\nStep 3: Classifying candidate curves...")
    report = run_classification(config, dataset)
    for status, count in report.summary['statuses'].items():
        print(f"  {status}: {count}")

    # Step 4: reports
    out_dir = config['data']['output_dir']
    print(f"\nStep 4: Writing reports to {out_dir}...")
    for path in write_report(report, out_dir, config['report'], config['report'].get('formats', ['json'])):
        print(f"  {path}")

    # Step 5: diff
    expected = config['data'].get('expected_statuses')
    if not expected or not os.path.exists(expected):
        print("\nStep 5: No expected-status file, skipping diff")
        return 0
    print(f"\nStep 5: Comparing with {expected}...")
    result = diff_report(report, expected)
    for line in result.lines:
        print(f"  {line}")
    print("✓ All statuses match" if result.matches else f"{len(result.lines)} differences")
    return result.exit_code


def main():
    """Main function."""
    parser = argparse.ArgumentParser(description="Run the full classification pipeline")
    parser.add_argument("--config", help="configuration file")
    parser.add_argument("--offline", action="store_true", help="serve newform data from the cache only")
    args = parser.parse_args()

    print("Atkin-Lehner Quotient Classification Pipeline")
    print("=" * 40)

    try:
        config = load_config(args.config)
        logging.basicConfig(level=config['logging']['level'], format=config['logging']['format'])
        status = run(config, offline=args.offline)
    except AlqError as e:
        print(f"Error: {e}")
        sys.exit(2)

    print("\n" + "=" * 40)
    print("Pipeline completed" + (" successfully!" if status == 0 else f" with status {status}"))
    sys.exit(status)


if __name__ == "__main__":
    main()
