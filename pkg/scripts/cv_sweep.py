"""Cross-validated MAE for every model and variant on the nine dataset settings.

Writes one CSV row per (setting, target, model, variant).  The full grids
take hours on one core; ``--quick`` uses one mid-range grid point.

    python scripts/cv_sweep.py --target at --quick --out results_at.csv
"""

import argparse
import csv
import time

from incmeter.datagen import STANDARD_CONFIGS, GenConfig, generate_dataset
from incmeter.experiments import ExperimentConfig, reduced_grid, run_cv

RUNS = [
    ("ols", "plain"), ("ols", "flags"),
    ("ridge", "plain"), ("ridge", "flags"),
    ("lasso", "plain"), ("lasso", "flags"),
    ("mlp", "plain"), ("mlp", "flags"), ("mlp", "flags-constraints"),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--target", choices=("mi", "at"), default="at")
    parser.add_argument("--configs", default=",".join(f"{a}-{f}" for a, f in STANDARD_CONFIGS))
    parser.add_argument("--models", default="ols,ridge,lasso,mlp")
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--quick", action="store_true")
    parser.add_argument("--out", default="results.csv")
    args = parser.parse_args()

    models = set(args.models.split(","))
    fields = ["config", "target", "model", "variant", "mean_mae", "std_mae", "seconds"]
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for label in args.configs.split(","):
            atoms, formulas = map(int, label.split("-"))
            data = generate_dataset(GenConfig(atoms, formulas, n_instances=args.n, seed=args.seed))
            for model, variant in RUNS:
                if model not in models:
                    continue
                cfg = ExperimentConfig(
                    target=args.target, model=model, variant=variant, folds=args.folds,
                    grid=reduced_grid(model) if args.quick else None, seed=args.seed,
                )
                start = time.perf_counter()
                report = run_cv(cfg, data)
                row = {"config": label, "target": args.target, "model": model,
                       "variant": variant, "mean_mae": round(report.mean, 4),
                       "std_mae": round(report.std, 4),
                       "seconds": round(time.perf_counter() - start, 1)}
                writer.writerow(row)
                fh.flush()
                print(" ".join(f"{k}={v}" for k, v in row.items()))


if __name__ == "__main__":
    main()
