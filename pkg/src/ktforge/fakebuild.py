"""Command-line stand-in for a Java build, replaying recorded tool output.

Usage: python -m ktforge.fakebuild --transcripts DIR {compile|test} TEST_FILE

The transcript for a run is DIR/<sha256 of TEST_FILE content>.json with
"compile" and "test" entries ({"exit_code": int, "output": str}) and an
optional "coverage" report, written to --coverage-out after a test run.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="ktforge.fakebuild")
    ap.add_argument("--transcripts", required=True)
    ap.add_argument("--coverage-out")
    ap.add_argument("stage", choices=["compile", "test"])
    ap.add_argument("test_file")
    args = ap.parse_args(argv)
    digest = hashlib.sha256(Path(args.test_file).read_bytes()).hexdigest()
    path = Path(args.transcripts) / f"{digest}.json"
    if not path.exists():
        print(f"fakebuild: no {args.stage} transcript for {digest}", file=sys.stderr)
        return 2
    entry = json.loads(path.read_text(encoding="utf-8"))
    step = entry.get(args.stage)
    if step is None:
        print(f"fakebuild: no {args.stage} transcript for {digest}", file=sys.stderr)
        return 2
    sys.stdout.write(step.get("output", ""))
    if args.stage == "test" and args.coverage_out and "coverage" in entry:
        out = Path(args.coverage_out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(entry["coverage"], encoding="utf-8")
    return int(step["exit_code"])


if __name__ == "__main__":
    sys.exit(main())
