"""Command line driver: ``incmeter <command> [options]``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
The default ``--seed`` can be set through ``INCMETER_SEED``.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys

import numpy as np

from . import datagen, experiments
from .datagen import STANDARD_CONFIGS, GenConfig
from .encoding import encode_dataset
from .learners import mae, predict, save_model
from .logic import KnowledgeBase, parse_formula
from .measures import dataset_stats, enumerate_mis, i_at, i_mi

# dataset characteristics reported for the nine generator settings;
# entropies are in bits (they exceed ln of the number of attainable values)
REFERENCE_STATS = {
    (3, 5): (7, 2.11, 3, 1.77, 181), (3, 10): (16, 3.42, 3, 1.29, 88),
    (3, 15): (51, 4.39, 3, 1.04, 64), (6, 5): (5, 1.82, 6, 2.33, 242),
    (6, 10): (19, 3.17, 6, 2.50, 135), (6, 15): (36, 4.28, 6, 2.27, 72),
    (9, 5): (6, 1.65, 9, 2.33, 304), (9, 10): (19, 2.92, 9, 3.08, 146),
    (9, 15): (33, 3.99, 9, 2.92, 119),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    value = os.environ.get("INCMETER_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise UsageError(f"INCMETER_SEED must be an integer, got {value!r}") from None


def _configs(text: str | None) -> list[tuple[int, int]]:
    if not text:
        return list(STANDARD_CONFIGS)
    out = []
    for part in text.split(","):
        try:
            atoms, formulas = part.strip().split("-")
            out.append((int(atoms), int(formulas)))
        except ValueError:
            raise UsageError(f"bad config {part!r}; expected ATOMS-FORMULAS like 6-10") from None
    return out


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _write_csv(rows: list[dict], out) -> None:
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        if rows:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    finally:
        if out:
            fh.close()


# --------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    config = GenConfig(
        atom_pool=args.atoms, max_formulas=args.max_formulas,
        max_literal_occurrences=args.max_lits, n_instances=args.n, seed=args.seed,
        length_dist=args.length_dist,
    )
    dataset = datagen.generate_dataset(config, workers=args.workers)
    datagen.save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} instances to {args.out}")
    return 0


def cmd_measure(args) -> int:
    if args.kb:
        texts = [t for arg in args.kb for t in arg.split(";") if t.strip()]
        kbs = [KnowledgeBase(parse_formula(t) for t in texts)]
    elif args.data:
        kbs = [inst.kb for inst in datagen.load_dataset(args.data)]
    else:
        raise UsageError("measure needs --kb or --data")
    for kb in kbs:
        mis = enumerate_mis(kb)
        print(f"i_mi={i_mi(kb, mis)} i_at={i_at(kb, mis)}")
        if args.show_mis:
            for m in mis:
                print("  {" + "; ".join(sorted(str(f) for f in m)) + "}")
    return 0


def cmd_stats(args) -> int:
    if args.data:
        sources = [(path, datagen.load_dataset(path)) for path in args.data]
    else:
        sources = []
        for atoms, formulas in _configs(args.configs):
            config = GenConfig(atoms, formulas, n_instances=args.n, seed=args.seed,
                               length_dist=args.length_dist)
            sources.append((config.label, datagen.generate_dataset(config, workers=args.workers)))
    rows = []
    for name, dataset in sources:
        s = dataset_stats(dataset)
        row = {"dataset": name, **s.as_row(),
               "mi_entropy_bits": s.mi_entropy / math.log(2),
               "at_entropy_bits": s.at_entropy / math.log(2)}
        cfg = dataset.config
        ref = REFERENCE_STATS.get((cfg.atom_pool, cfg.max_formulas)) if cfg else None
        if ref:
            row.update(zip(("ref_mi_max", "ref_mi_entropy_bits", "ref_at_max",
                            "ref_at_entropy_bits", "ref_flagged_consistent"), ref))
        rows.append(row)
    _write_csv(rows, args.out)
    return 0


def cmd_encode(args) -> int:
    dataset = datagen.load_dataset(args.data)
    variant = experiments.Variant.parse(args.variant)
    enc = encode_dataset(dataset, args.target, flags=variant is not experiments.Variant.PLAIN)
    sidecar = enc.to_csv(args.out)
    print(f"wrote {len(enc)} rows x {enc.n_features} features to {args.out} (columns in {sidecar})")
    return 0


def _params_from_args(args) -> dict:
    if args.model in ("ridge", "lasso"):
        return {"alpha": args.alpha}
    if args.model == "mlp":
        return {"learning_rate": args.lr, "weight_decay": args.weight_decay,
                "hidden_size": args.hidden}
    return {}


def cmd_train(args) -> int:
    cfg = experiments.ExperimentConfig(target=args.target, model=args.model,
                                       variant=args.variant, seed=args.seed)
    dataset = datagen.load_dataset(args.data)
    enc = encode_dataset(dataset, cfg.target, flags=cfg.flags)
    order = np.random.default_rng(args.seed).permutation(len(enc))
    n_val = max(1, int(round(args.validation_fraction * len(enc))))
    train, val = enc.subset(order[n_val:]), enc.subset(order[:n_val])
    params = _params_from_args(args)
    model = experiments.fit_model(cfg.model, params, train, val, cfg.variant, seed=args.seed)
    spec = None
    if cfg.model == "mlp":
        from .learners import TrainSpec
        spec = TrainSpec(**params, constraints=cfg.variant is experiments.Variant.FLAGS_CONSTRAINTS,
                         seed=args.seed)
    print(f"train MAE {mae(train.y, predict(model, train.X)):.4f}  "
          f"validation MAE {mae(val.y, predict(model, val.X)):.4f}")
    if args.out:
        save_model(model, args.out, spec, enc.fingerprint())
        print(f"saved {cfg.model} model to {args.out}")
    return 0


def cmd_cv(args) -> int:
    grid = experiments.reduced_grid(args.model) if args.grid == "reduced" else None
    cfg = experiments.ExperimentConfig(
        target=args.target, model=args.model, variant=args.variant, folds=args.folds,
        grid=grid, seed=args.seed, refit=args.refit,
    )
    report = experiments.run_cv(cfg, datagen.load_dataset(args.data))
    if args.out:
        report.to_csv(args.out)
    else:
        _write_csv(report.rows(), None)
    print(report.summary(), file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_bench(args) -> int:
    configs = [GenConfig(a, f, n_instances=args.n, seed=args.seed) for a, f in _configs(args.configs)]
    report = experiments.run_bench(configs, variant=args.variant, target=args.target, seed=args.seed)
    if args.out:
        report.to_csv(args.out)
    for r in report.rows:
        print(f"{r.config:>6}  solver {r.solver_seconds:8.3f}s  learner {r.learner_seconds:8.3f}s")
    return 0


def cmd_scale(args) -> int:
    base = GenConfig(args.atoms, args.max_formulas, seed=args.seed)
    rows = experiments.run_scalability(
        base, _ints(args.sizes), variants=args.variants.split(","), target=args.target,
        folds=args.folds, seed=args.seed,
    )
    if args.out:
        experiments.write_rows(rows, args.out)
    for r in rows:
        print(f"{r.size:>6}  {r.variant:<18} MAE {r.mean_mae:.4f} (std {r.std_mae:.4f})")
    return 0


# --------------------------------------------------------------------------


def build_parser(default_seed: int = 0) -> argparse.ArgumentParser:
    parser = _Parser(prog="incmeter", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, target=True, variant=False, out=True):
        p.add_argument("--seed", type=int, default=default_seed)
        if target:
            p.add_argument("--target", choices=("mi", "at"), default="at")
        if variant:
            p.add_argument("--variant", choices=("plain", "flags", "flags-constraints"),
                           default="plain")
        if out:
            p.add_argument("--out")

    p = sub.add_parser("gen", help="generate a labeled dataset (JSON Lines)")
    p.add_argument("--atoms", type=int, required=True)
    p.add_argument("--max-formulas", type=int, required=True)
    p.add_argument("--max-lits", type=int, default=10)
    p.add_argument("--length-dist", choices=("uniform", "geometric"), default="uniform")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    common(p, target=False)
    p.set_defaults(func=cmd_gen, needs_out=True)

    p = sub.add_parser("measure", help="exact I_MI and I_at of a knowledge base")
    p.add_argument("--kb", action="append",
                   help="formula(s), ';'-separated; repeat to add more")
    p.add_argument("--data", help="measure every knowledge base of a dataset file")
    p.add_argument("--show-mis", action="store_true")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("stats", help="label statistics of datasets")
    p.add_argument("--data", nargs="+", help="dataset files (default: generate)")
    p.add_argument("--configs", help="ATOMS-FORMULAS list, e.g. 3-5,6-10 (default: all nine)")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--length-dist", choices=("uniform", "geometric"), default="uniform")
    common(p, target=False)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("encode", help="export the binary feature matrix as CSV")
    p.add_argument("--data", required=True)
    common(p, variant=True)
    p.set_defaults(func=cmd_encode, needs_out=True)

    p = sub.add_parser("train", help="fit one model and save a JSON checkpoint")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=experiments.MODELS, default="mlp")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=0.002)
    p.add_argument("--weight-decay", type=float, default=0.03)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--validation-fraction", type=float, default=0.1)
    common(p, variant=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="cross-validated grid search, CSV report")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=experiments.MODELS, default="mlp")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--grid", choices=("full", "reduced"), default="full")
    p.add_argument("--refit", action="store_true")
    common(p, variant=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("bench", help="exact labeling vs MLP train+predict wall time")
    p.add_argument("--configs")
    p.add_argument("--n", type=int, default=1000)
    common(p, variant=True)
    p.set_defaults(func=cmd_bench, variant="flags-constraints")

    p = sub.add_parser("scale", help="cross-validated MAE for growing training sets")
    p.add_argument("--atoms", type=int, default=6)
    p.add_argument("--max-formulas", type=int, default=10)
    p.add_argument("--sizes", default="1000,2000,3000,4000,5000,6000,7000,8000,9000")
    p.add_argument("--variants", default="flags-constraints")
    p.add_argument("--folds", type=int, default=10)
    common(p)
    p.set_defaults(func=cmd_scale, target="mi")
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser(_default_seed())
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"incmeter: error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if getattr(args, "needs_out", False) and not args.out:
        print(f"incmeter {args.command}: error: --out is required", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as e:
        print(f"incmeter {args.command}: error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as e:
        print(f"incmeter {args.command}: data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
