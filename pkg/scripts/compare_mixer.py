#!/usr/bin/env python3
"""Head-to-head on the mixer surrogate: tensor-train optimizer vs GP/UCB.

Runs both optimizers for a batch of seeds under simulated evaluation
latency, prints the per-seed finals, and writes the comparison CSVs next to
this script (or to --out).
"""

import argparse
import statistics
from pathlib import Path

from tetraopt import MIXER_BOUNDS, BayesConfig, bayes_minimize, mixer_objective
from tetraopt.optimizer import SearchGrid, TetraOptConfig, tetraopt_minimize


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--latency", type=float, default=0.016)
    parser.add_argument("--parallel", type=int, default=8)
    parser.add_argument("--out", type=Path, default=Path("comparison_out"))
    args = parser.parse_args()

    objective = mixer_objective(latency_s=args.latency)
    grid = SearchGrid([(lo, hi, 5) for lo, hi in MIXER_BOUNDS])
    args.out.mkdir(parents=True, exist_ok=True)

    finals = {"tetraopt": [], "bayes": []}
    with open(args.out / "comparison.csv", "w") as fh:
        fh.write("optimizer,seed,wall_time_s,calls,best_value\n")
        for seed in range(args.seeds):
            trace = tetraopt_minimize(
                objective,
                TetraOptConfig(grid=grid, rank=4, iterations=2, seed=seed),
                max_parallel=args.parallel,
            )
            finals["tetraopt"].append(trace.best_value)
            for e in trace.events:
                fh.write(f"tetraopt,{seed},{e.wall_time_s:.6f},{e.unique_calls_so_far},{e.best_value:.17g}\n")
            print(
                f"tetraopt seed={seed}: best={trace.best_value:.5f} "
                f"calls={trace.total_calls} time={trace.total_runtime_s:.2f}s"
            )
        for seed in range(args.seeds):
            trace = bayes_minimize(objective, BayesConfig(bounds=grid.bounds, seed=seed))
            finals["bayes"].append(trace.best_value)
            for e in trace.events:
                fh.write(f"bayes,{seed},{e.wall_time_s:.6f},{e.unique_calls_so_far},{e.best_value:.17g}\n")
            print(
                f"bayes seed={seed}: best={trace.best_value:.5f} "
                f"calls={trace.total_calls} time={trace.total_runtime_s:.2f}s"
            )

    for name, values in finals.items():
        print(
            f"{name}: median {statistics.median(values):.5f} "
            f"best {min(values):.5f} worst {max(values):.5f}"
        )
    ratio = statistics.median(finals["bayes"]) / statistics.median(finals["tetraopt"])
    print(f"median-final ratio (bayes / tetraopt): {ratio:.2f}")
    print(f"wrote {args.out / 'comparison.csv'}")


if __name__ == "__main__":
    main()
