"""Propositional formulas built from literals with ``&`` and ``|``.

Negation is only allowed directly on atoms, so every formula is a tree of
literals joined by conjunctions and disjunctions.  Trees are immutable and
same-operator nesting is flattened when a node is built, which makes the
canonical text form (``serialize_formula``) a faithful identity for formulas.

Surface syntax::

    disj := conj ('|' conj)*
    conj := unit ('&' unit)*
    unit := ['!'] atom | '(' disj ')'
"""

from __future__ import annotations

import functools
import itertools
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union

DEFAULT_ATOM_CAP = 24

_ATOM_RE = re.compile(r"[a-z][a-z0-9_]*")


class FormulaSyntaxError(ValueError):
    """Raised for text that does not follow the formula grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class MissingAtomError(KeyError):
    """An interpretation does not assign a value to an atom it is asked about."""


class AtomCapExceeded(ValueError):
    """Model enumeration would visit more than ``2**cap`` interpretations."""


@dataclass(frozen=True)
class Lit:
    atom: str
    negated: bool = False

    def __post_init__(self):
        if not isinstance(self.atom, str) or not _ATOM_RE.fullmatch(self.atom):
            raise ValueError(f"invalid atom name: {self.atom!r}")

    def __invert__(self) -> Lit:
        return Lit(self.atom, not self.negated)

    def __str__(self) -> str:
        return serialize_formula(self)


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", _flatten(And, self.children))

    def __str__(self) -> str:
        return serialize_formula(self)


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", _flatten(Or, self.children))

    def __str__(self) -> str:
        return serialize_formula(self)


Formula = Union[Lit, And, Or]


def _flatten(kind, children) -> tuple:
    flat = []
    for child in children:
        if isinstance(child, kind):
            flat.extend(child.children)
        elif isinstance(child, (Lit, And, Or)):
            flat.append(child)
        else:
            raise TypeError(f"not a formula: {child!r}")
    if len(flat) < 2:
        raise ValueError(f"{kind.__name__} needs at least two children")
    return tuple(flat)


def conj(*children: Formula) -> Formula:
    """Conjunction of ``children``; a single child is returned as is."""
    return children[0] if len(children) == 1 else And(children)


def disj(*children: Formula) -> Formula:
    """Disjunction of ``children``; a single child is returned as is."""
    return children[0] if len(children) == 1 else Or(children)


# --------------------------------------------------------------------------
# text form


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos, n = 0, len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            return tokens
        m = _ATOM_RE.match(text, pos)
        if m:
            tokens.append((m.group(), pos))
            pos = m.end()
        elif text[pos] in "!&|()":
            tokens.append((text[pos], pos))
            pos += 1
        else:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else len(self.text)

    def take(self):
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        if not self.tokens:
            raise FormulaSyntaxError("empty formula", 0)
        f = self.disj()
        if self.peek() is not None:
            raise FormulaSyntaxError(f"unexpected token {self.peek()!r}", self.pos())
        return f

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return disj(*parts)

    def conj(self) -> Formula:
        parts = [self.unit()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unit())
        return conj(*parts)

    def unit(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            inner = self.disj()
            if self.peek() != ")":
                raise FormulaSyntaxError("expected ')'", self.pos())
            self.take()
            return inner
        if tok == "!":
            self.take()
            if self.peek() == "(":
                raise FormulaSyntaxError("negation of compound", self.pos())
            return ~self.atom()
        return self.atom()

    def atom(self) -> Lit:
        tok = self.peek()
        if tok is None:
            raise FormulaSyntaxError("unexpected end of input", self.pos())
        if not _ATOM_RE.fullmatch(tok):
            raise FormulaSyntaxError(f"expected atom, got {tok!r}", self.pos())
        self.take()
        return Lit(tok)


def parse_formula(text: str) -> Formula:
    """Parse ``text`` into a flattened formula tree.

    ``&`` binds tighter than ``|`` and ``!`` may only precede an atom.

    >>> serialize_formula(parse_formula("a & !b | c"))
    'a & !b | c'
    """
    return _Parser(text).parse()


def serialize_formula(f: Formula) -> str:
    if isinstance(f, Lit):
        return "!" + f.atom if f.negated else f.atom
    sep = " & " if isinstance(f, And) else " | "
    parts = []
    for child in f.children:
        s = serialize_formula(child)
        # flattening guarantees a compound child has the other operator
        parts.append(s if isinstance(child, Lit) else f"({s})")
    return sep.join(parts)


def literals(f: Formula) -> Iterator[Lit]:
    """Literal occurrences of ``f`` from left to right."""
    if isinstance(f, Lit):
        yield f
    else:
        for child in f.children:
            yield from literals(child)


# --------------------------------------------------------------------------
# knowledge bases


class KnowledgeBase:
    """An insertion-ordered set of formulas.

    Duplicates (equal canonical text) are dropped, keeping the first one.
    """

    __slots__ = ("_formulas", "_set")

    def __init__(self, formulas: Iterable[Formula | str] = ()):
        seen: dict[Formula, None] = {}
        for f in formulas:
            if isinstance(f, str):
                f = parse_formula(f)
            seen.setdefault(f, None)
        self._formulas = tuple(seen)
        self._set = frozenset(self._formulas)

    @classmethod
    def parse(cls, texts: Iterable[str]) -> KnowledgeBase:
        return cls(parse_formula(t) for t in texts)

    @property
    def formulas(self) -> tuple:
        return self._formulas

    def __iter__(self):
        return iter(self._formulas)

    def __len__(self) -> int:
        return len(self._formulas)

    def __contains__(self, f) -> bool:
        if isinstance(f, str):
            f = parse_formula(f)
        return f in self._set

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return self._formulas == other._formulas

    def __hash__(self) -> int:
        return hash(self._formulas)

    def union(self, *formulas: Formula) -> KnowledgeBase:
        return KnowledgeBase(self._formulas + formulas)

    def to_strings(self) -> list[str]:
        return [serialize_formula(f) for f in self._formulas]

    def __repr__(self) -> str:
        return "KnowledgeBase({" + "; ".join(self.to_strings()) + "})"


def atoms_of(x) -> set[str]:
    """Atoms occurring in a formula, a knowledge base or any iterable of formulas."""
    if isinstance(x, (Lit, And, Or)):
        return {lit.atom for lit in literals(x)}
    out: set[str] = set()
    for f in x:
        out.update(lit.atom for lit in literals(f))
    return out


# --------------------------------------------------------------------------
# semantics


Interpretation = Mapping[str, int]


def _holds(w: Interpretation, f: Formula) -> bool:
    if isinstance(f, Lit):
        try:
            value = bool(w[f.atom])
        except KeyError:
            raise MissingAtomError(f.atom) from None
        return value != f.negated
    if isinstance(f, And):
        return all(_holds(w, c) for c in f.children)
    return any(_holds(w, c) for c in f.children)


def satisfies(w: Interpretation, f) -> bool:
    """Whether ``w`` is a model of a formula, or of every formula in a collection.

    Every atom occurring in ``f`` must be assigned, even if short-circuiting
    would not need it.
    """
    missing = atoms_of(f) - set(w)
    if missing:
        raise MissingAtomError(min(missing))
    if isinstance(f, (Lit, And, Or)):
        return _holds(w, f)
    return all(_holds(w, g) for g in f)


def interpretations(atoms: Iterable[str]) -> Iterator[dict[str, int]]:
    """All ``2**n`` assignments over ``atoms`` (sorted), in binary counting order."""
    names = sorted(atoms)
    for bits in itertools.product((0, 1), repeat=len(names)):
        yield dict(zip(names, bits))


def model_mask(f: Formula, atoms: list[str]) -> int:
    """Truth table of ``f`` over ``atoms`` packed into an integer.

    Bit ``k`` is set iff ``f`` holds in interpretation ``k``, where atom
    ``atoms[i]`` is true in interpretation ``k`` iff bit ``i`` of ``k`` is set.
    All interpretations are evaluated at once with bitwise operations.
    """
    n = len(atoms)
    full = (1 << (1 << n)) - 1
    pos = {a: i for i, a in enumerate(atoms)}
    return _mask(f, pos, n, full)


@functools.lru_cache(maxsize=None)
def _atom_mask(i: int, n: int) -> int:
    # interpretations k with bit i set: blocks of 2**i zeros then 2**i ones
    block = ((1 << (1 << i)) - 1) << (1 << i)
    period = 1 << (i + 1)
    mask = 0
    for start in range(0, 1 << n, period):
        mask |= block << start
    return mask


def _mask(f: Formula, pos: dict, n: int, full: int) -> int:
    if isinstance(f, Lit):
        if f.atom not in pos:
            raise MissingAtomError(f.atom)
        m = _atom_mask(pos[f.atom], n)
        return full ^ m if f.negated else m
    if isinstance(f, And):
        out = full
        for c in f.children:
            out &= _mask(c, pos, n, full)
        return out
    out = 0
    for c in f.children:
        out |= _mask(c, pos, n, full)
    return out


def check_atom_cap(atoms, cap: int = DEFAULT_ATOM_CAP) -> None:
    if len(atoms) > cap:
        raise AtomCapExceeded(
            f"{len(atoms)} atoms exceed the enumeration cap of {cap}"
        )


def is_consistent(formulas: Iterable[Formula], cap: int = DEFAULT_ATOM_CAP) -> bool:
    """Whether some interpretation over the occurring atoms satisfies every formula.

    Enumerates all interpretations (bit-parallel) and stops as soon as the
    running conjunction has no model left.  The empty set is consistent.
    """
    formulas = list(formulas)
    atoms = sorted(atoms_of(formulas))
    check_atom_cap(atoms, cap)
    n = len(atoms)
    full = (1 << (1 << n)) - 1
    pos = {a: i for i, a in enumerate(atoms)}
    models = full
    for f in formulas:
        models &= _mask(f, pos, n, full)
        if not models:
            return False
    return True
