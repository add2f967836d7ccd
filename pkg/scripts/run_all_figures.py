#!/usr/bin/env python3
"""Run every bundled figure scenario into ./out (heavy: hours on a laptop)."""

import sys

from epomc import experiments


def main() -> int:
    names = [f"fig{i}" for i in range(2, 10)]
    manifest = experiments.figure_manifest(names, out_dir="out")
    report = experiments.run(manifest)
    for s in report.scenarios:
        mark = "ok " if s.status == "ok" else "FAIL"
        print(f"[{mark}] {s.name}: {s.wall_time_s:.0f}s, {len(s.outputs)} artifacts")
    return 1 if report.failed else 0


if __name__ == "__main__":
    sys.exit(main())
