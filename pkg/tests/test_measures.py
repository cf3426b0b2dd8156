import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incmeter.datagen import Dataset, LabeledInstance
from incmeter.logic import KnowledgeBase, atoms_of, is_consistent, parse_formula
from incmeter.measures import (
    Measure,
    dataset_stats,
    enumerate_mis,
    enumerate_mis_bruteforce,
    i_at,
    i_mi,
    measure,
    problematic,
    value_entropy,
)
from kbs import K1, K2, NINE_ATOM, SIX
from strategies import formulas, knowledge_bases


def as_sets(mis):
    return {frozenset(str(f) for f in m) for m in mis}


def test_worked_examples():
    assert i_mi(K1) == 1 and i_at(K1) == 1
    assert i_mi(K2) == 2
    assert as_sets(enumerate_mis(K2)) == {
        frozenset({"a", "!a"}), frozenset({"a", "!a | b", "!b & c"}),
    }
    assert i_at(K2) == 3
    assert as_sets(enumerate_mis(SIX)) == {frozenset({"b", "!b"}), frozenset({"c", "!c"})}
    assert {str(f) for f in problematic(SIX)} == {"b", "!b", "c", "!c"}
    assert i_at(SIX) == 2
    assert i_mi(NINE_ATOM) == 5


def test_nine_atom_example_against_bruteforce():
    assert enumerate_mis(NINE_ATOM) == enumerate_mis_bruteforce(NINE_ATOM)
    assert i_at(NINE_ATOM) == 7


def test_empty_and_single_formula():
    assert enumerate_mis(KnowledgeBase()) == ()
    assert measure(KnowledgeBase(["a & !a"])) == (1, 1)
    assert measure(KnowledgeBase(["a | !a"])) == (0, 0)


def test_mis_order_is_canonical():
    mis = enumerate_mis(K2)
    assert [len(m) for m in mis] == [2, 3]
    assert mis == enumerate_mis(KnowledgeBase(reversed(K2.formulas)))


@settings(max_examples=150)
@given(knowledge_bases(max_formulas=7))
def test_enumeration_matches_bruteforce(kb):
    assert enumerate_mis(kb) == enumerate_mis_bruteforce(kb)


@given(knowledge_bases(max_formulas=6))
def test_every_mis_is_minimal_and_inconsistent(kb):
    for m in enumerate_mis(kb):
        assert not is_consistent(m)
        for f in m:
            assert is_consistent(m - {f})


@given(knowledge_bases(max_formulas=6))
def test_mis_exists_iff_inconsistent(kb):
    assert (i_mi(kb) == 0) == is_consistent(kb)
    assert (i_at(kb) == 0) == is_consistent(kb)


@given(knowledge_bases(max_formulas=6))
def test_at_bounded_by_signature(kb):
    assert i_at(kb) <= len(atoms_of(kb))


@given(knowledge_bases(max_formulas=5), formulas())
def test_monotone_under_additions(kb, f):
    bigger = kb.union(f)
    assert i_mi(bigger) >= i_mi(kb)
    assert i_at(bigger) >= i_at(kb)


@given(knowledge_bases(atoms="abc", max_formulas=5), formulas(atoms="xyz"))
def test_formula_over_fresh_atoms_changes_nothing(kb, f):
    # a formula sharing no atom with the rest can only be in an MIS alone
    if is_consistent([f]):
        assert measure(kb.union(f)) == measure(kb)


def test_bruteforce_size_guard():
    kb = KnowledgeBase(f"x{i}" for i in range(17))
    with pytest.raises(ValueError):
        enumerate_mis_bruteforce(kb)


# --- statistics -----------------------------------------------------------


def test_entropy_hand_values():
    assert value_entropy([0, 1]) == pytest.approx(math.log(2), abs=1e-9)
    assert value_entropy([3, 3, 3]) == 0.0
    assert value_entropy([0, 0, 1, 2]) == pytest.approx(1.5 * math.log(2), abs=1e-9)
    with pytest.raises(ValueError):
        value_entropy([])


@given(st.lists(st.integers(0, 8), min_size=1, max_size=50))
def test_entropy_bounds(values):
    h = value_entropy(values)
    assert -1e-12 <= h <= math.log(len(set(values))) + 1e-12


def test_dataset_stats_fields():
    kbs = [K1, K2, SIX, KnowledgeBase(["a", "b & c"]), KnowledgeBase(["!a | b"])]
    ds = Dataset(None, [LabeledInstance.from_kb(kb) for kb in kbs])
    s = dataset_stats(ds)
    assert s.n == 5
    assert (s.mi_max, s.mi_min) == (2, 0)
    assert (s.at_max, s.at_min) == (3, 0)
    # {a, b & c} and {!a | b} have no complementary literals
    assert s.flagged_consistent == 2
    assert s.mi_entropy == pytest.approx(value_entropy([1, 2, 2, 0, 0]))
    row = s.as_row()
    assert set(row) >= {"mi_max", "mi_min", "mi_entropy", "at_max", "at_min",
                        "at_entropy", "flagged_consistent"}


def test_measure_enum_values():
    assert Measure("mi") is Measure.MI and Measure("at") is Measure.AT
