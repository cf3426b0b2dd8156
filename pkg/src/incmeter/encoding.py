"""Bag-of-formulas feature vectors with optional symbolic flag columns.

Column layout of an encoded dataset::

    f0 .. f{n-1}        one bit per vocabulary formula
    consistent          no atom occurs both positively and negatively
    upper_bound_<x>     one-hot over |atoms(K)|, only for the AT target
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .datagen import Dataset, iter_kbs
from .logic import KnowledgeBase, atoms_of, literals, serialize_formula
from .measures import Measure


class UnknownFormulaError(KeyError):
    """A knowledge base contains a formula that is not in the vocabulary."""


@dataclass(frozen=True)
class Vocabulary:
    entries: tuple
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {s: i for i, s in enumerate(self.entries)}
        if len(index) != len(self.entries):
            raise ValueError("vocabulary entries must be distinct")
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, text) -> bool:
        return text in self.index


def build_vocabulary(*sources) -> Vocabulary:
    """Distinct canonical formula strings in first-occurrence order.

    Each source may be a ``Dataset`` or any iterable of knowledge bases.
    """
    seen: dict[str, None] = {}
    for kb in iter_kbs(sources):
        for f in kb:
            seen.setdefault(serialize_formula(f), None)
    return Vocabulary(tuple(seen))


def consistency_flag(kb: KnowledgeBase) -> int:
    """1 if no atom occurs both as ``a`` and as ``!a`` anywhere in ``kb``.

    Such a knowledge base is satisfied by making every literal true; the flag
    is sound for consistency but not complete.
    """
    polarity: dict[str, bool] = {}
    for f in kb:
        for lit in literals(f):
            seen = polarity.setdefault(lit.atom, lit.negated)
            if seen != lit.negated:
                return 0
    return 1


@dataclass(frozen=True)
class FlagSchema:
    consistent: bool = False
    upper_bound: tuple = ()

    @property
    def names(self) -> list[str]:
        out = ["consistent"] if self.consistent else []
        return out + [f"upper_bound_{x}" for x in self.upper_bound]

    @property
    def width(self) -> int:
        return len(self.names)

    def values(self, kb: KnowledgeBase) -> dict[str, int]:
        out = {}
        if self.consistent:
            out["consistent"] = consistency_flag(kb)
        if self.upper_bound:
            n_atoms = len(atoms_of(kb))
            for x in self.upper_bound:
                out[f"upper_bound_{x}"] = int(x == n_atoms)
        return out


@dataclass
class FeatureVector:
    kb_bits: np.ndarray
    flags: dict

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.kb_bits, np.array(list(self.flags.values()), dtype=np.uint8)])


def _columns(kb: KnowledgeBase, vocab: Vocabulary) -> list[int]:
    cols = []
    for f in kb:
        text = serialize_formula(f)
        try:
            cols.append(vocab.index[text])
        except KeyError:
            raise UnknownFormulaError(f"formula not in vocabulary: {text}") from None
    return cols


def encode_kb(kb: KnowledgeBase, vocab: Vocabulary, schema: FlagSchema = FlagSchema()) -> FeatureVector:
    bits = np.zeros(len(vocab), dtype=np.uint8)
    bits[_columns(kb, vocab)] = 1
    return FeatureVector(bits, schema.values(kb))


@dataclass
class EncodedDataset:
    vocabulary: Vocabulary
    X: sp.csr_matrix
    y: np.ndarray
    target: Measure
    schema: FlagSchema

    def __post_init__(self):
        if self.X.shape[0] != len(self.y):
            raise ValueError("row count and label count differ")
        if self.X.shape[1] != len(self.vocabulary) + self.schema.width:
            raise ValueError("column count does not match vocabulary and flag schema")
        if self.schema.upper_bound and self.target is not Measure.AT:
            raise ValueError("upper bound flags are only defined for the AT target")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def column_names(self) -> list[str]:
        return [f"f{j}" for j in range(len(self.vocabulary))] + self.schema.names

    def heuristic_columns(self) -> list[tuple[str, np.ndarray]]:
        """Flag column indices grouped by heuristic, as used by the constraint loss."""
        base = len(self.vocabulary)
        out = []
        if self.schema.consistent:
            out.append(("consistent", np.array([base])))
            base += 1
        if self.schema.upper_bound:
            out.append(("upper_bound", base + np.arange(len(self.schema.upper_bound))))
        return out

    def row(self, i: int) -> FeatureVector:
        dense = self.X[i].toarray().ravel().astype(np.uint8)
        n = len(self.vocabulary)
        return FeatureVector(dense[:n], dict(zip(self.schema.names, dense[n:].tolist())))

    def subset(self, idx) -> EncodedDataset:
        idx = np.asarray(idx)
        return EncodedDataset(self.vocabulary, self.X[idx], self.y[idx], self.target, self.schema)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for entry in self.vocabulary.entries:
            h.update(entry.encode() + b"\n")
        h.update(b"--\n")
        for name in self.schema.names:
            h.update(name.encode() + b"\n")
        return h.hexdigest()[:16]

    def to_csv(self, path) -> Path:
        """Write the matrix as CSV and the column-to-formula mapping as a sidecar JSON."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names + ["label"])
            X = self.X.tocsr()
            for i in range(X.shape[0]):
                row = X[i].toarray().ravel().astype(int).tolist()
                label = self.y[i]
                writer.writerow(row + [int(label) if float(label).is_integer() else label])
        sidecar = path.with_name(path.name + ".vocab.json")
        sidecar.write_text(json.dumps({
            "target": self.target.value,
            "columns": {f"f{j}": s for j, s in enumerate(self.vocabulary.entries)},
            "flags": self.schema.names,
            "fingerprint": self.fingerprint(),
        }, indent=2) + "\n")
        return sidecar


def encode_dataset(
    dataset: Dataset,
    target,
    flags: bool = False,
    vocabulary: Optional[Vocabulary] = None,
    consistent: Optional[bool] = None,
    upper_bound: Optional[bool] = None,
) -> EncodedDataset:
    """Encode every instance of ``dataset`` against one vocabulary and flag schema.

    ``flags`` switches on the consistency flag, plus the upper-bound family
    when the target is AT.  ``consistent``/``upper_bound`` override either
    family individually.
    """
    target = Measure(target)
    if vocabulary is None:
        vocabulary = build_vocabulary(dataset)
    use_consistent = flags if consistent is None else consistent
    use_bound = (flags and target is Measure.AT) if upper_bound is None else upper_bound
    if use_bound and target is not Measure.AT:
        raise ValueError("upper bound flags are only defined for the AT target")

    instances = list(dataset)
    bounds = ()
    if use_bound:
        bounds = tuple(sorted({len(atoms_of(inst.kb)) for inst in instances}))
    schema = FlagSchema(bool(use_consistent), bounds)

    X = _matrix((inst.kb for inst in instances), vocabulary, schema)
    y = np.array([inst.label(target) for inst in instances], dtype=float)
    return EncodedDataset(vocabulary, X, y, target, schema)


def encode_kbs(kbs: Iterable[KnowledgeBase], like: EncodedDataset) -> sp.csr_matrix:
    """Encode unlabeled knowledge bases with the columns of an existing encoding."""
    return _matrix(kbs, like.vocabulary, like.schema)


def _matrix(kbs: Iterable[KnowledgeBase], vocab: Vocabulary, schema: FlagSchema) -> sp.csr_matrix:
    n_vocab = len(vocab)
    indptr, cols = [0], []
    for kb in kbs:
        cols.extend(_columns(kb, vocab))
        cols.extend(n_vocab + j for j, v in enumerate(schema.values(kb).values()) if v)
        indptr.append(len(cols))
    X = sp.csr_matrix(
        (np.ones(len(cols)), np.array(cols, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(indptr) - 1, n_vocab + schema.width),
    )
    X.sort_indices()
    return X
