"""
Simple viewer to preview the run archive in the terminal
"""

import sys
from typing import Optional

import pandas as pd

import database


def print_summary(runs: pd.DataFrame):
    """Print run counts per command and exit code"""
    if runs is None or runs.empty:
        print("No runs found.")
        return

    print("\n" + "=" * 60)
    print("SUMMARY")
    print("=" * 60)
    print(f"Total Runs: {len(runs)}")
    print("\nBreakdown by Command:")
    counts = runs.groupby("command")["exit_code"].agg(["count", lambda s: int((s == 0).sum())])
    counts.columns = ["runs", "ok"]
    for command, row in counts.sort_index().iterrows():
        print(f"  {command:20s}: {int(row['runs']):4d} runs, {int(row['ok']):4d} ok")
    print("=" * 60)


def print_violations(runs: pd.DataFrame, limit: int = 10):
    """Print the most recent runs that ended with a property violation"""
    if runs is None or runs.empty:
        return

    violations = runs[runs["exit_code"] == 1].sort_values("id", ascending=False).head(limit)
    print(f"\n{'=' * 80}")
    print(f"PROPERTY VIOLATIONS (latest {limit})")
    print(f"{'=' * 80}")
    if violations.empty:
        print("None")
        return
    print(f"{'Id':<6} {'When':<20} {'Command':<12} Arguments")
    print("-" * 80)
    for _, row in violations.iterrows():
        print(f"{row['id']:<6} {row['created_at']:<20} {row['command']:<12} {str(row['argv'])[:40]}")


def main(db_path: Optional[str] = None):
    """Main viewer function"""

    print("\n" + "=" * 60)
    print("Approximate-Group Toolkit Run Viewer")
    print("=" * 60)

    print("\nLoading runs from archive...")
    runs = database.load_runs_df(db_path)

    if runs is None or runs.empty:
        print("[ERROR] No runs found in archive")
        print("  Run 'python run_toolkit.py --archive <db> ...' first to record runs.")
        return

    print(f"[OK] Loaded {len(runs)} runs (last: {database.get_last_updated(db_path)})")

    print_summary(runs)
    print_violations(runs)

    print("\n" + "=" * 60)
    print("Data source: SQLite Database")
    print("=" * 60 + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
