"""Cross-validation, runtime benchmark and training-set-size experiments.

Cross-validation protocol: the shuffled dataset is cut into ``folds`` test
folds.  For each fold a validation set of the same size is drawn from the
remaining instances and the rest form the subtraining set.  Every grid point
is fit on the subtraining set and scored on the validation set; the best one
is applied to the test fold as is (or refit on subtrain + validation when
``refit`` is set).
"""

from __future__ import annotations

import csv
import itertools
import json
import time
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .datagen import Dataset, GenConfig, LabeledInstance, generate_dataset, generate_kbs
from .encoding import EncodedDataset, encode_dataset
from .learners import (
    ALPHA_GRID,
    HIDDEN_SIZES,
    LEARNING_RATES,
    WEIGHT_DECAYS,
    TrainSpec,
    fit_lasso,
    fit_ols,
    fit_ridge,
    mae,
    predict,
    train_mlp,
)
from .measures import Measure, measure

MODELS = ("ols", "ridge", "lasso", "mlp")


class Variant(str, Enum):
    PLAIN = "plain"
    FLAGS = "flags"
    FLAGS_CONSTRAINTS = "flags-constraints"

    @classmethod
    def parse(cls, value) -> Variant:
        if isinstance(value, cls):
            return value
        aliases = {"no_flags": "plain", "no-flags": "plain", "flags_constraints": "flags-constraints"}
        return cls(aliases.get(value, value))


def default_grid(model: str) -> list[dict]:
    if model == "ols":
        return [{}]
    if model in ("ridge", "lasso"):
        return [{"alpha": a} for a in ALPHA_GRID]
    if model == "mlp":
        return [
            {"learning_rate": lr, "weight_decay": wd, "hidden_size": h}
            for lr, wd, h in itertools.product(LEARNING_RATES, WEIGHT_DECAYS, HIDDEN_SIZES)
        ]
    raise ValueError(f"unknown model {model!r}")


def reduced_grid(model: str) -> list[dict]:
    """A single mid-range grid point per model."""
    if model == "ols":
        return [{}]
    if model in ("ridge", "lasso"):
        return [{"alpha": 1.0}]
    if model == "mlp":
        return [{"learning_rate": 0.002, "weight_decay": 0.03, "hidden_size": 64}]
    raise ValueError(f"unknown model {model!r}")


@dataclass
class ExperimentConfig:
    target: Measure = Measure.AT
    model: str = "mlp"
    variant: Variant = Variant.PLAIN
    folds: int = 10
    grid: Optional[list] = None
    seed: int = 0
    refit: bool = False
    train: dict = field(default_factory=dict)

    def __post_init__(self):
        self.target = Measure(self.target)
        self.variant = Variant.parse(self.variant)
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.variant is Variant.FLAGS_CONSTRAINTS and self.model != "mlp":
            raise ValueError("the flags-constraints variant is only defined for the MLP")
        if self.folds < 2:
            raise ValueError("need at least two folds")

    @property
    def flags(self) -> bool:
        return self.variant is not Variant.PLAIN

    @property
    def param_grid(self) -> list[dict]:
        return list(self.grid) if self.grid is not None else default_grid(self.model)

    def describe(self) -> dict:
        d = asdict(self)
        d["target"] = self.target.value
        d["variant"] = self.variant.value
        d["grid"] = self.param_grid
        return d


# --------------------------------------------------------------------------
# splitting


@dataclass(frozen=True)
class FoldSplit:
    test: np.ndarray
    validation: np.ndarray
    subtrain: np.ndarray


def fold_splits(n: int, folds: int = 10, seed: int = 0) -> list[FoldSplit]:
    """Shuffled test folds (remainder spread one per fold) with validation draws."""
    largest = -(-n // folds) if folds > 0 else n
    if folds < 2 or 2 * largest >= n:
        # each fold needs an equally large validation set and a non-empty subtrain
        raise ValueError(f"cannot make {folds} folds with validation from {n} instances")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    splits = []
    for test in np.array_split(order, folds):
        rest = np.setdiff1d(order, test, assume_unique=True)
        chosen = rng.choice(len(rest), size=len(test), replace=False)
        mask = np.zeros(len(rest), dtype=bool)
        mask[chosen] = True
        splits.append(FoldSplit(np.sort(test), np.sort(rest[mask]), np.sort(rest[~mask])))
    return splits


# --------------------------------------------------------------------------
# fitting


def run_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def fit_model(model: str, params: dict, sub: EncodedDataset, val: EncodedDataset,
              variant: Variant = Variant.PLAIN, train: Optional[dict] = None, seed: int = 0):
    """Fit one grid point; ``train`` overrides ``TrainSpec`` fields for the MLP."""
    if model == "ols":
        return fit_ols(sub.X, sub.y)
    if model == "ridge":
        return fit_ridge(sub.X, sub.y, params["alpha"])
    if model == "lasso":
        return fit_lasso(sub.X, sub.y, params["alpha"])
    spec = TrainSpec(
        **{**(train or {}), **params},
        constraints=variant is Variant.FLAGS_CONSTRAINTS,
        seed=seed,
    )
    model, history = train_mlp(sub, val, spec)
    model.history = history
    return model


FitFn = Callable[[dict, EncodedDataset, EncodedDataset, int], object]


@dataclass
class FoldResult:
    fold: int
    n_subtrain: int
    n_validation: int
    n_test: int
    params: dict
    validation_mae: float
    test_mae: float
    train_seconds: float
    predict_seconds: float


@dataclass
class CvReport:
    folds: list
    config: dict = field(default_factory=dict)

    @property
    def maes(self) -> np.ndarray:
        return np.array([f.test_mae for f in self.folds])

    @property
    def mean(self) -> float:
        return float(self.maes.mean())

    @property
    def std(self) -> float:
        # population standard deviation over the fold MAEs
        return float(self.maes.std())

    CSV_FIELDS = (
        "fold", "n_subtrain", "n_validation", "n_test", "params",
        "validation_mae", "test_mae", "train_seconds", "predict_seconds",
    )

    def rows(self) -> list[dict]:
        out = []
        for f in self.folds:
            row = asdict(f)
            row["params"] = json.dumps(f.params, sort_keys=True)
            out.append(row)
        out.append({"fold": "mean", "test_mae": self.mean})
        out.append({"fold": "std", "test_mae": self.std})
        return out

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.CSV_FIELDS)
            writer.writeheader()
            writer.writerows(self.rows())

    def summary(self) -> str:
        lines = [f"{'fold':>4}  {'val MAE':>8}  {'test MAE':>8}  params"]
        for f in self.folds:
            lines.append(
                f"{f.fold:>4}  {f.validation_mae:8.4f}  {f.test_mae:8.4f}  "
                f"{json.dumps(f.params, sort_keys=True)}"
            )
        lines.append(f"mean MAE {self.mean:.4f} (std {self.std:.4f}) over {len(self.folds)} folds")
        return "\n".join(lines)


def run_cv(cfg: ExperimentConfig, data, fit_fn: Optional[FitFn] = None) -> CvReport:
    """Cross-validated grid search; ``data`` is a ``Dataset`` or an ``EncodedDataset``.

    ``fit_fn(params, subtrain, validation, seed)`` replaces the built-in
    model fitting, e.g. to plug in a reference predictor.
    """
    if isinstance(data, EncodedDataset):
        enc = data
        if enc.target is not cfg.target:
            raise ValueError(f"encoded for target {enc.target.value}, config asks {cfg.target.value}")
        if cfg.flags and enc.schema.width == 0:
            raise ValueError(f"variant {cfg.variant.value} needs flag columns")
    else:
        enc = encode_dataset(data, cfg.target, flags=cfg.flags)
    builtin = fit_fn is None
    if builtin:
        def fit_fn(params, sub, val, seed, train=cfg.train):
            return fit_model(cfg.model, params, sub, val, cfg.variant, train, seed)

    results = []
    for k, split in enumerate(fold_splits(len(enc), cfg.folds, cfg.seed)):
        sub, val, test = enc.subset(split.subtrain), enc.subset(split.validation), enc.subset(split.test)
        best = None
        start = time.perf_counter()
        for g, params in enumerate(cfg.param_grid):
            model = fit_fn(params, sub, val, run_seed(cfg.seed, k, g))
            score = mae(val.y, predict(model, val.X))
            if best is None or score < best[0]:
                best = (score, g, params, model)
        score, g, params, model = best
        if cfg.refit:
            both = enc.subset(np.concatenate([split.subtrain, split.validation]))
            if builtin and cfg.model == "mlp":
                # validation is now training data: rerun for the selected epoch count
                epochs = model.history.best_epoch + 1
                train = {**cfg.train, "max_epochs": epochs, "patience": epochs + 1,
                         "restore_best": False}
                model = fit_fn(params, both, val, run_seed(cfg.seed, k, g), train)
            else:
                model = fit_fn(params, both, val, run_seed(cfg.seed, k, g))
        train_seconds = time.perf_counter() - start
        start = time.perf_counter()
        pred = predict(model, test.X)
        predict_seconds = time.perf_counter() - start
        results.append(FoldResult(
            fold=k,
            n_subtrain=len(split.subtrain),
            n_validation=len(split.validation),
            n_test=len(split.test),
            params=dict(params),
            validation_mae=float(score),
            test_mae=mae(test.y, pred),
            train_seconds=train_seconds,
            predict_seconds=predict_seconds,
        ))
    return CvReport(results, cfg.describe())


# --------------------------------------------------------------------------
# runtime benchmark


@dataclass
class BenchRow:
    config: str
    atoms: int
    max_formulas: int
    n_instances: int
    solver_seconds: float
    encode_seconds: float
    train_seconds: float
    predict_seconds: float

    @property
    def learner_seconds(self) -> float:
        return self.encode_seconds + self.train_seconds + self.predict_seconds


@dataclass
class BenchReport:
    rows: list = field(default_factory=list)

    CSV_FIELDS = (
        "config", "atoms", "max_formulas", "n_instances", "solver_seconds",
        "learner_seconds", "encode_seconds", "train_seconds", "predict_seconds",
    )

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.CSV_FIELDS)
            writer.writeheader()
            for r in self.rows:
                writer.writerow({**asdict(r), "learner_seconds": r.learner_seconds})


def run_bench(configs: Sequence[GenConfig], variant="flags-constraints",
              target=Measure.AT, params: Optional[dict] = None, seed: int = 0,
              validation_fraction: float = 0.1) -> BenchReport:
    """Time exact labeling against training an MLP once and predicting every instance.

    Knowledge bases are generated outside the timed regions.
    """
    variant = Variant.parse(variant)
    target = Measure(target)
    params = params if params is not None else reduced_grid("mlp")[0]
    report = BenchReport()
    for config in configs:
        kbs = generate_kbs(config)

        start = time.perf_counter()
        labels = [measure(kb) for kb in kbs]
        solver_seconds = time.perf_counter() - start
        dataset = Dataset(config, [LabeledInstance(kb, mi, at) for kb, (mi, at) in zip(kbs, labels)])

        start = time.perf_counter()
        enc = encode_dataset(dataset, target, flags=variant is not Variant.PLAIN)
        encode_seconds = time.perf_counter() - start

        rng = np.random.default_rng(run_seed(seed, config.atom_pool, config.max_formulas))
        order = rng.permutation(len(enc))
        n_val = max(1, int(round(validation_fraction * len(enc))))
        start = time.perf_counter()
        model = fit_model("mlp", params, enc.subset(order[n_val:]), enc.subset(order[:n_val]),
                          variant, seed=seed)
        train_seconds = time.perf_counter() - start
        start = time.perf_counter()
        predict(model, enc.X)
        predict_seconds = time.perf_counter() - start
        report.rows.append(BenchRow(
            config=config.label, atoms=config.atom_pool, max_formulas=config.max_formulas,
            n_instances=len(kbs), solver_seconds=solver_seconds, encode_seconds=encode_seconds,
            train_seconds=train_seconds, predict_seconds=predict_seconds,
        ))
    return report


# --------------------------------------------------------------------------
# training-set size sweep


@dataclass
class ScaleRow:
    size: int
    variant: str
    model: str
    n_features: int
    mean_mae: float
    std_mae: float


def run_scalability(base: GenConfig, sizes: Sequence[int], variants=("flags-constraints",),
                    target=Measure.MI, model: str = "mlp", grid: Optional[list] = None,
                    folds: int = 10, seed: int = 0, train: Optional[dict] = None,
                    pool: Optional[Dataset] = None) -> list[ScaleRow]:
    """Cross-validated MAE on growing prefixes of one generated pool."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    if not sizes:
        return []
    if pool is None:
        pool = generate_dataset(replace(base, n_instances=sizes[-1]))
    if len(pool) < sizes[-1]:
        raise ValueError(f"pool has {len(pool)} instances, need {sizes[-1]}")
    rows = []
    for size in sizes:
        data = pool.head(size)
        for v in variants:
            cfg = ExperimentConfig(
                target=target, model=model, variant=v, folds=folds,
                grid=grid if grid is not None else reduced_grid(model),
                seed=seed, train=dict(train or {}),
            )
            enc = encode_dataset(data, cfg.target, flags=cfg.flags)
            report = run_cv(cfg, enc)
            rows.append(ScaleRow(size, cfg.variant.value, model, enc.n_features, report.mean, report.std))
    return rows


def write_rows(rows: Sequence, path) -> None:
    """CSV with one column per dataclass field."""
    rows = list(rows)
    with Path(path).open("w", newline="") as fh:
        if not rows:
            return
        writer = csv.DictWriter(fh, fieldnames=list(asdict(rows[0])))
        writer.writeheader()
        writer.writerows(asdict(r) for r in rows)
