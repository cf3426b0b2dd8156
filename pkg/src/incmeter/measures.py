"""Exact inconsistency measures over minimal inconsistent subsets.

``i_mi`` counts the minimal inconsistent subsets of a knowledge base and
``i_at`` counts the atoms that occur in problematic formulas (members of at
least one minimal inconsistent subset).
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Sequence

from .logic import (
    DEFAULT_ATOM_CAP,
    KnowledgeBase,
    atoms_of,
    check_atom_cap,
    interpretations,
    model_mask,
    satisfies,
    serialize_formula,
)

if TYPE_CHECKING:
    from .datagen import Dataset

BRUTEFORCE_MAX_FORMULAS = 16

MisSet = tuple  # tuple[frozenset[Formula], ...]


class Measure(str, Enum):
    MI = "mi"
    AT = "at"


def _mis_key(subset) -> tuple:
    return len(subset), tuple(sorted(serialize_formula(f) for f in subset))


def _sorted_mis(found) -> MisSet:
    return tuple(sorted((frozenset(m) for m in found), key=_mis_key))


def enumerate_mis(kb: KnowledgeBase, cap: int = DEFAULT_ATOM_CAP) -> MisSet:
    """All minimal inconsistent subsets of ``kb``.

    Subsets are visited by ascending size.  A subset that contains an already
    found MIS is skipped; any other inconsistent subset must be minimal, since
    all of its proper subsets were visited earlier and found consistent.
    """
    formulas = kb.formulas
    atoms = sorted(atoms_of(formulas))
    check_atom_cap(atoms, cap)
    masks = [model_mask(f, atoms) for f in formulas]
    full = (1 << (1 << len(atoms))) - 1

    found_bits: list[int] = []
    for size in range(1, len(formulas) + 1):
        for combo in itertools.combinations(range(len(formulas)), size):
            bits = 0
            for i in combo:
                bits |= 1 << i
            if any(b & bits == b for b in found_bits):
                continue
            models = full
            for i in combo:
                models &= masks[i]
                if not models:
                    break
            if not models:
                found_bits.append(bits)
    return _sorted_mis(
        [formulas[i] for i in range(len(formulas)) if b >> i & 1] for b in found_bits
    )


def enumerate_mis_bruteforce(kb: KnowledgeBase) -> MisSet:
    """Reference enumeration: every inconsistent subset, then filter by minimality.

    Model sets come from evaluating each formula in each interpretation with
    ``satisfies``; intended as a test oracle for small inputs.
    """
    formulas = kb.formulas
    if len(formulas) > BRUTEFORCE_MAX_FORMULAS:
        raise ValueError(
            f"brute force limited to {BRUTEFORCE_MAX_FORMULAS} formulas, got {len(formulas)}"
        )
    atoms = sorted(atoms_of(formulas))
    worlds = list(interpretations(atoms))
    models = [
        frozenset(k for k, w in enumerate(worlds) if satisfies(w, f)) for f in formulas
    ]
    everything = frozenset(range(len(worlds)))

    inconsistent = []
    for size in range(1, len(formulas) + 1):
        for combo in itertools.combinations(range(len(formulas)), size):
            common = everything.intersection(*(models[i] for i in combo))
            if not common:
                inconsistent.append(frozenset(combo))
    minimal = [s for s in inconsistent if not any(t < s for t in inconsistent)]
    return _sorted_mis([formulas[i] for i in s] for s in minimal)


def problematic(kb: KnowledgeBase, mis: MisSet | None = None) -> set:
    if mis is None:
        mis = enumerate_mis(kb)
    out: set = set()
    for m in mis:
        out |= m
    return out


def i_mi(kb: KnowledgeBase, mis: MisSet | None = None) -> int:
    return len(enumerate_mis(kb) if mis is None else mis)


def i_at(kb: KnowledgeBase, mis: MisSet | None = None) -> int:
    return len(atoms_of(problematic(kb, mis)))


def measure(kb: KnowledgeBase) -> tuple[int, int]:
    """``(i_mi, i_at)`` from a single MIS enumeration."""
    mis = enumerate_mis(kb)
    return i_mi(kb, mis), i_at(kb, mis)


def value_entropy(values: Sequence[float]) -> float:
    """Natural-log entropy of the empirical distribution of ``values``."""
    values = list(values)
    if not values:
        raise ValueError("entropy of an empty sequence")
    n = len(values)
    h = 0.0
    for count in Counter(values).values():
        p = count / n
        h -= p * math.log(p)
    # -0.0 for a single unique value
    return h + 0.0


@dataclass(frozen=True)
class DatasetStats:
    n: int
    mi_max: int
    mi_min: int
    mi_entropy: float
    at_max: int
    at_min: int
    at_entropy: float
    flagged_consistent: int

    FIELDS = (
        "n", "mi_max", "mi_min", "mi_entropy",
        "at_max", "at_min", "at_entropy", "flagged_consistent",
    )

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in self.FIELDS}


def dataset_stats(dataset: Dataset | Iterable) -> DatasetStats:
    """Label range, label entropy and consistency-flag count for a labeled dataset."""
    from .encoding import consistency_flag

    instances = list(getattr(dataset, "instances", dataset))
    if not instances:
        raise ValueError("statistics of an empty dataset")
    mi = [inst.label_mi for inst in instances]
    at = [inst.label_at for inst in instances]
    return DatasetStats(
        n=len(instances),
        mi_max=max(mi),
        mi_min=min(mi),
        mi_entropy=value_entropy(mi),
        at_max=max(at),
        at_min=min(at),
        at_entropy=value_entropy(at),
        flagged_consistent=sum(consistency_flag(inst.kb) for inst in instances),
    )
