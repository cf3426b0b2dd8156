"""MAE of the MLP variants as the training set grows from 1000 to 9000 instances.

    python scripts/scalability.py --target mi --out scalability.csv
"""

import argparse

from incmeter.datagen import GenConfig
from incmeter.experiments import reduced_grid, run_scalability, write_rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--atoms", type=int, default=6)
    parser.add_argument("--max-formulas", type=int, default=10)
    parser.add_argument("--sizes", default="1000,2000,3000,4000,5000,6000,7000,8000,9000")
    parser.add_argument("--variants", default="plain,flags,flags-constraints")
    parser.add_argument("--target", choices=("mi", "at"), default="mi")
    parser.add_argument("--folds", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="scalability.csv")
    args = parser.parse_args()

    rows = run_scalability(
        GenConfig(args.atoms, args.max_formulas, seed=args.seed),
        [int(s) for s in args.sizes.split(",")],
        variants=args.variants.split(","), target=args.target,
        grid=reduced_grid("mlp"), folds=args.folds, seed=args.seed,
    )
    write_rows(rows, args.out)
    for r in rows:
        print(f"{r.size:>6} {r.variant:<18} {r.n_features:>7} features  MAE {r.mean_mae:.4f}")


if __name__ == "__main__":
    main()
