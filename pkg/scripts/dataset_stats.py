"""Label statistics of regenerated datasets next to the reported reference values.

Entropies are printed in nats and in bits; the reference values are in bits.

    python scripts/dataset_stats.py --n 1000 --seed 0 [--length-dist geometric]
"""

import argparse
import math

from incmeter.cli import REFERENCE_STATS
from incmeter.datagen import STANDARD_CONFIGS, GenConfig, generate_dataset
from incmeter.measures import dataset_stats


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--length-dist", choices=("uniform", "geometric"), default="uniform")
    args = parser.parse_args()

    bits = 1 / math.log(2)
    print(f"{'set':>5} | {'MI max':>6} {'H nat':>6} {'H bit':>6} {'ref':>5} | "
          f"{'AT max':>6} {'H nat':>6} {'H bit':>6} {'ref':>5} | {'flag':>5} {'ref':>5}")
    for atoms, formulas in sorted(STANDARD_CONFIGS):
        config = GenConfig(atoms, formulas, n_instances=args.n, seed=args.seed,
                           length_dist=args.length_dist)
        s = dataset_stats(generate_dataset(config))
        ref = REFERENCE_STATS[(atoms, formulas)]
        print(f"{config.label:>5} | {s.mi_max:>6} {s.mi_entropy:6.2f} {s.mi_entropy * bits:6.2f} "
              f"{ref[1]:5.2f} | {s.at_max:>6} {s.at_entropy:6.2f} {s.at_entropy * bits:6.2f} "
              f"{ref[3]:5.2f} | {s.flagged_consistent:>5} {ref[4]:>5}")


if __name__ == "__main__":
    main()
