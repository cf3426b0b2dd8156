"""Seeded generation of random knowledge bases and labeled datasets.

Formulas follow ``phi ::= l | phi & phi | phi | phi`` over a pool of atoms
named ``a, b, c, ...``.  Instance ``i`` of a dataset is drawn from its own
random stream seeded by ``(seed, i)``, so a dataset of ``n`` instances is a
prefix of any larger dataset with the same configuration.
"""

from __future__ import annotations

import json
import string
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .logic import And, FormulaSyntaxError, KnowledgeBase, Lit, Or, parse_formula
from .measures import Measure, measure


class DatasetFormatError(ValueError):
    """A dataset file is malformed or its labels fail verification."""


@dataclass(frozen=True)
class GenConfig:
    atom_pool: int = 3
    max_formulas: int = 5
    max_literal_occurrences: int = 10
    n_instances: int = 1000
    seed: int = 0
    negation_prob: float = 0.5
    and_prob: float = 0.5
    max_rejections: int = 100
    # "uniform" draws the literal count from 1..max; "geometric" draws it
    # from a geometric law with success probability length_p, capped at max
    length_dist: str = "uniform"
    length_p: float = 0.35

    def __post_init__(self):
        for name in ("atom_pool", "max_formulas", "max_literal_occurrences", "n_instances"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.atom_pool > 26:
            raise ValueError("atom pools are named a..z; at most 26 atoms")
        if self.length_dist not in ("uniform", "geometric"):
            raise ValueError(f"unknown length_dist {self.length_dist!r}")
        if not 0 < self.length_p <= 1:
            raise ValueError("length_p must lie in (0, 1]")

    @property
    def atoms(self) -> list[str]:
        return atom_names(self.atom_pool)

    @property
    def label(self) -> str:
        return f"{self.atom_pool}-{self.max_formulas}"


# the nine settings of atoms x formula bounds
STANDARD_CONFIGS = tuple(
    (atoms, formulas) for formulas in (5, 10, 15) for atoms in (3, 6, 9)
)


def atom_names(n: int) -> list[str]:
    return list(string.ascii_lowercase[:n])


@dataclass(frozen=True)
class LabeledInstance:
    kb: KnowledgeBase
    label_mi: int
    label_at: int

    @classmethod
    def from_kb(cls, kb: KnowledgeBase) -> LabeledInstance:
        mi, at = measure(kb)
        return cls(kb, mi, at)

    def label(self, target) -> int:
        return self.label_mi if Measure(target) is Measure.MI else self.label_at


@dataclass
class Dataset:
    config: Optional[GenConfig]
    instances: list[LabeledInstance] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.instances)

    def __iter__(self):
        return iter(self.instances)

    def head(self, n: int) -> Dataset:
        config = None
        if self.config is not None:
            config = GenConfig(**{**asdict(self.config), "n_instances": n})
        return Dataset(config, self.instances[:n])


# --------------------------------------------------------------------------
# sampling


@lru_cache(maxsize=None)
def _catalan(n: int) -> int:
    if n <= 1:
        return 1
    return sum(_catalan(i) * _catalan(n - 1 - i) for i in range(n))


def _random_tree(rng: np.random.Generator, leaves: list, and_prob: float):
    # left subtree size weighted by the number of shapes it allows, which
    # makes every binary tree shape with len(leaves) leaves equally likely
    k = len(leaves)
    if k == 1:
        return leaves[0]
    weights = np.array(
        [_catalan(i - 1) * _catalan(k - i - 1) for i in range(1, k)], dtype=float
    )
    left = 1 + int(rng.choice(k - 1, p=weights / weights.sum()))
    node = And if rng.random() < and_prob else Or
    return node((
        _random_tree(rng, leaves[:left], and_prob),
        _random_tree(rng, leaves[left:], and_prob),
    ))


def generate_formula(
    rng: np.random.Generator,
    atoms: list[str],
    max_lits: int = 10,
    negation_prob: float = 0.5,
    and_prob: float = 0.5,
    length_dist: str = "uniform",
    length_p: float = 0.35,
):
    """Random formula with between 1 and ``max_lits`` literal occurrences."""
    if not atoms:
        raise ValueError("empty atom pool")
    if length_dist == "uniform":
        k = int(rng.integers(1, max_lits + 1))
    else:
        k = min(int(rng.geometric(length_p)), max_lits)
    leaves = [
        Lit(atoms[int(rng.integers(len(atoms)))], bool(rng.random() < negation_prob))
        for _ in range(k)
    ]
    return _random_tree(rng, leaves, and_prob)


def generate_kb(rng: np.random.Generator, config: GenConfig) -> KnowledgeBase:
    target = int(rng.integers(1, config.max_formulas + 1))
    atoms = config.atoms
    chosen: dict = {}
    rejections = 0
    while len(chosen) < target and rejections < config.max_rejections:
        f = generate_formula(
            rng, atoms, config.max_literal_occurrences,
            config.negation_prob, config.and_prob, config.length_dist, config.length_p,
        )
        if f in chosen:
            rejections += 1
        else:
            chosen[f] = None
            rejections = 0
    return KnowledgeBase(chosen)


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([index, seed])


def _make_instance(args) -> LabeledInstance:
    config, index = args
    return LabeledInstance.from_kb(generate_kb(instance_rng(config.seed, index), config))


def generate_kbs(config: GenConfig, start: int = 0) -> list[KnowledgeBase]:
    """Unlabeled knowledge bases ``start .. n_instances-1`` of ``config``."""
    return [
        generate_kb(instance_rng(config.seed, i), config)
        for i in range(start, config.n_instances)
    ]


def generate_dataset(config: GenConfig, workers: int = 1) -> Dataset:
    """Generate and exactly label ``config.n_instances`` knowledge bases."""
    jobs = [(config, i) for i in range(config.n_instances)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            instances = list(pool.map(_make_instance, jobs, chunksize=64))
    else:
        instances = [_make_instance(job) for job in jobs]
    return Dataset(config, instances)


# --------------------------------------------------------------------------
# JSON Lines files


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def save_dataset(dataset: Dataset, path) -> None:
    """Write one JSON object per instance; the generator config goes to a sidecar."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for inst in dataset.instances:
            row = {"kb": inst.kb.to_strings(), "i_mi": inst.label_mi, "i_at": inst.label_at}
            fh.write(json.dumps(row) + "\n")
    meta = _meta_path(path)
    if dataset.config is not None:
        meta.write_text(json.dumps(asdict(dataset.config), indent=2) + "\n")
    elif meta.exists():
        meta.unlink()


def _parse_line(line: str, lineno: int, verify: bool) -> LabeledInstance:
    try:
        row = json.loads(line)
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"line {lineno}: invalid JSON ({e.msg})") from None
    if not isinstance(row, dict):
        raise DatasetFormatError(f"line {lineno}: expected a JSON object")
    for key in ("kb", "i_mi", "i_at"):
        if key not in row:
            raise DatasetFormatError(f"line {lineno}: missing field {key!r}")
    if not isinstance(row["kb"], list) or not all(isinstance(s, str) for s in row["kb"]):
        raise DatasetFormatError(f"line {lineno}: field 'kb' must be a list of strings")
    for key in ("i_mi", "i_at"):
        if not isinstance(row[key], int) or isinstance(row[key], bool) or row[key] < 0:
            raise DatasetFormatError(f"line {lineno}: field {key!r} must be a non-negative integer")
    try:
        kb = KnowledgeBase(parse_formula(s) for s in row["kb"])
    except FormulaSyntaxError as e:
        raise DatasetFormatError(f"line {lineno}: {e}") from None
    if verify:
        mi, at = measure(kb)
        if (mi, at) != (row["i_mi"], row["i_at"]):
            raise DatasetFormatError(
                f"line {lineno}: labels (i_mi={row['i_mi']}, i_at={row['i_at']}) "
                f"do not match recomputed (i_mi={mi}, i_at={at})"
            )
    return LabeledInstance(kb, row["i_mi"], row["i_at"])


def load_dataset(path, verify: bool = False) -> Dataset:
    path = Path(path)
    instances = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                instances.append(_parse_line(line, lineno, verify))
    config = None
    meta = _meta_path(path)
    if meta.exists():
        config = GenConfig(**json.loads(meta.read_text()))
        if config.n_instances != len(instances):
            raise DatasetFormatError(
                f"{path}: {len(instances)} instances but the sidecar config says "
                f"{config.n_instances}"
            )
    return Dataset(config, instances)


def iter_kbs(datasets: Iterable) -> Iterable[KnowledgeBase]:
    for d in datasets:
        for inst in getattr(d, "instances", d):
            yield getattr(inst, "kb", inst)
