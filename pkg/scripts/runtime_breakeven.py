"""Exact labeling time against MLP train+predict time for the nine settings.

    python scripts/runtime_breakeven.py --n 1000 --out bench.csv
"""

import argparse

from incmeter.datagen import STANDARD_CONFIGS, GenConfig
from incmeter.experiments import run_bench


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--variant", default="flags-constraints")
    parser.add_argument("--out", default="bench.csv")
    args = parser.parse_args()

    configs = [GenConfig(a, f, n_instances=args.n, seed=args.seed)
               for a, f in sorted(STANDARD_CONFIGS)]
    report = run_bench(configs, variant=args.variant, seed=args.seed)
    report.to_csv(args.out)
    for r in report.rows:
        winner = "learner" if r.learner_seconds < r.solver_seconds else "solver"
        print(f"{r.config:>5}  solver {r.solver_seconds:8.2f}s  learner {r.learner_seconds:8.2f}s"
              f"  faster: {winner}")


if __name__ == "__main__":
    main()
