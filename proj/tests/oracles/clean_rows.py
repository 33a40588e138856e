#!/usr/bin/env python3
"""Count the rows of a CSV that survive duplicate removal then dropping rows
with any empty cell. Prints {"rows": n, "columns": [...]} as JSON.

With --check FILE, exits non-zero unless FILE holds the same document.
"""
import argparse
import csv
import json
import sys


def clean_count(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [tuple(c.strip() for c in r) for r in reader if r]
    seen = []
    for r in rows:
        # numeric cells compare by value, so "1.0" and "1" are the same row
        key = tuple(float(c) if _is_number(c) else c for c in r)
        if key not in seen:
            seen.append(key)
    complete = [r for r in seen if all(c != "" for c in r)]
    return {"rows": len(complete), "columns": header}


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv")
    ap.add_argument("--check")
    args = ap.parse_args()
    result = clean_count(args.csv)
    if args.check:
        with open(args.check) as fh:
            expected = json.load(fh)
        if expected != result:
            print(f"mismatch: expected {expected}, computed {result}", file=sys.stderr)
            return 1
    print(json.dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
