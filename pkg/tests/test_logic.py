import itertools

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from incmeter.logic import (
    And,
    AtomCapExceeded,
    FormulaSyntaxError,
    KnowledgeBase,
    Lit,
    MissingAtomError,
    Or,
    atoms_of,
    conj,
    disj,
    interpretations,
    is_consistent,
    literals,
    model_mask,
    parse_formula,
    satisfies,
    serialize_formula,
)
from strategies import formulas, knowledge_bases

a, b, c = Lit("a"), Lit("b"), Lit("c")


def to_sympy(f):
    if isinstance(f, Lit):
        s = sympy.Symbol(f.atom)
        return ~s if f.negated else s
    parts = [to_sympy(x) for x in f.children]
    return sympy.And(*parts) if isinstance(f, And) else sympy.Or(*parts)


# --- syntax ---------------------------------------------------------------


def test_precedence_and_flattening():
    f = parse_formula("a & !b | c")
    assert f == Or((And((a, ~b)), c))
    assert parse_formula("a & (b & c)") == And((a, b, c))
    assert parse_formula("((a))") == a
    assert conj(a) == a and disj(a, disj(b, c)) == Or((a, b, c))


def test_compound_needs_two_children():
    with pytest.raises(ValueError):
        And((a,))


@pytest.mark.parametrize(
    "text",
    ["", "a &", "& a", "(a | b", "a b", "!(a & b)", "!!a", "a # b", "A", "a | )"],
)
def test_malformed_text_is_rejected(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


def test_error_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("a & b $")
    assert info.value.position == 6


@given(formulas())
def test_serialize_parse_roundtrip(f):
    text = serialize_formula(f)
    assert parse_formula(text) == f
    assert serialize_formula(parse_formula(text)) == text


@given(formulas())
def test_literal_order_is_textual(f):
    text = serialize_formula(f).replace("(", "").replace(")", "")
    tokens = [t for t in text.replace("&", " ").replace("|", " ").split()]
    assert [serialize_formula(x) for x in literals(f)] == tokens


# --- knowledge bases ---------------------------------------------------------


def test_kb_deduplicates_and_keeps_order():
    kb = KnowledgeBase(["b", "a", "b", "a & c", "(a & c)"])
    assert kb.to_strings() == ["b", "a", "a & c"]
    assert len(kb) == 3 and "a" in kb and parse_formula("c & a") not in kb
    assert kb == KnowledgeBase.parse(["b", "a", "a & c"])
    assert kb.union(a, ~c).to_strings() == ["b", "a", "a & c", "!c"]


# --- semantics ---------------------------------------------------------------


def test_satisfies_requires_every_atom():
    with pytest.raises(MissingAtomError):
        satisfies({"a": 1}, parse_formula("a & b"))
    assert satisfies({"a": 1, "b": 0}, parse_formula("a & !b"))
    assert satisfies({"a": 1, "b": 0}, [a, ~b])


def test_interpretations_cover_all_assignments():
    ws = list(interpretations(["a", "b", "c"]))
    assert len(ws) == 8
    assert len({tuple(sorted(w.items())) for w in ws}) == 8


@given(formulas())
def test_model_mask_agrees_with_satisfies(f):
    atoms = sorted(atoms_of(f))
    mask = model_mask(f, atoms)
    for k in range(1 << len(atoms)):
        # bit i of k gives the value of atoms[i]
        w = {x: k >> i & 1 for i, x in enumerate(atoms)}
        assert bool(mask >> k & 1) == satisfies(w, f)


@given(knowledge_bases())
def test_consistency_matches_independent_sat_oracle(kb):
    expected = bool(sympy.satisfiable(sympy.And(*[to_sympy(f) for f in kb]))) if len(kb) else True
    assert is_consistent(kb) == expected


@given(knowledge_bases(max_formulas=4))
def test_consistency_matches_model_enumeration(kb):
    atoms = sorted(atoms_of(kb))
    brute = any(satisfies(w, kb) for w in interpretations(atoms))
    assert is_consistent(kb) == brute


def test_classic_cases():
    assert is_consistent([])
    assert not is_consistent([a, ~a])
    assert not is_consistent([parse_formula("a & !a")])
    assert is_consistent([parse_formula("a | !a")])
    assert not is_consistent(KnowledgeBase(["a | b", "!a", "!b"]))


def test_atom_cap():
    names = ["x" + str(i) for i in range(6)]
    f = conj(*(Lit(n) for n in names))
    with pytest.raises(AtomCapExceeded):
        is_consistent([f], cap=5)
    assert is_consistent([f], cap=6)


@given(st.lists(st.sampled_from("abc"), min_size=1, max_size=3, unique=True))
def test_conjunction_of_distinct_literals_is_consistent(atoms):
    signs = itertools.cycle([True, False])
    assert is_consistent([conj(*(Lit(x, s) for x, s in zip(atoms, signs)))] if len(atoms) > 1
                         else [Lit(atoms[0])])
