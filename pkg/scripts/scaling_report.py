#!/usr/bin/env python3
"""Effective time per evaluation vs number of parallel evaluations.

Uses a fixed-latency objective as a stand-in for an expensive simulation and
sweeps the harness parallelism; the curve drops until the machine's core
count and flattens beyond it.
"""

import argparse
import os
from pathlib import Path

from tetraopt import benchmark, parallel_scaling_report, with_latency


def main() -> None:
    cores = os.cpu_count() or 1
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--latency", type=float, default=0.05)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument(
        "--levels",
        type=lambda s: [int(x) for x in s.split(",")],
        default=sorted({1, 2, cores, 2 * cores, 4 * cores}),
    )
    parser.add_argument("--out", type=Path, default=Path("scaling.csv"))
    args = parser.parse_args()

    objective = with_latency(benchmark("quadratic", 2), args.latency)
    rows = parallel_scaling_report(objective, args.batch_size, args.levels)
    with open(args.out, "w") as fh:
        fh.write("parallelism,effective_time_per_eval_s\n")
        for level, effective in rows:
            fh.write(f"{level},{effective:.6f}\n")
            print(f"parallelism {level:4d}: {effective * 1e3:8.2f} ms per evaluation")
    print(f"wrote {args.out} (machine has {cores} logical cores)")


if __name__ == "__main__":
    main()
