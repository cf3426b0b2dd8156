"""Exact and learned inconsistency measurement for propositional knowledge bases."""

from .datagen import Dataset, GenConfig, LabeledInstance, generate_dataset, load_dataset, save_dataset
from .encoding import EncodedDataset, consistency_flag, encode_dataset
from .logic import KnowledgeBase, is_consistent, parse_formula, serialize_formula
from .measures import Measure, dataset_stats, enumerate_mis, i_at, i_mi, measure, value_entropy

__all__ = [
    "Dataset", "GenConfig", "LabeledInstance", "generate_dataset", "load_dataset", "save_dataset",
    "EncodedDataset", "consistency_flag", "encode_dataset",
    "KnowledgeBase", "is_consistent", "parse_formula", "serialize_formula",
    "Measure", "dataset_stats", "enumerate_mis", "i_at", "i_mi", "measure", "value_entropy",
]
