"""Formula AST for the bimodal language with ◇ (vertical) and ∃ (horizontal).

Concrete syntax:

    formula := impl
    impl    := or ("->" impl)?
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := ("~" | "<>" | "[]" | "E" | "A")* primary
    primary := atom | "true" | "false" | "(" formula ")"
    atom    := "p" digit*

`->` is right-associative, `|` and `&` associate to the left and unary
operators bind tightest. Box and Forall are separate constructors; model
checking treats them as ~<>~ and ~E~.
"""

import random
import re
from dataclasses import dataclass
from typing import Dict, Iterator, List, Sequence, Tuple

from src.errors import FormulaError, FormulaSyntaxError


@dataclass(frozen=True)
class Formula:
    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Dia(Formula):
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    body: Formula


UNARY = (Not, Dia, Box, Exists, Forall)
BINARY = (And, Or, Implies)

_UNARY_SYMBOL = {Not: "~", Dia: "<>", Box: "[]", Exists: "E", Forall: "A"}
_BINARY_SYMBOL = {Implies: "->", Or: "|", And: "&"}
_PRECEDENCE = {Implies: 0, Or: 1, And: 2}


def children(phi: Formula) -> Tuple[Formula, ...]:
    """Immediate subformulas, left to right."""
    if isinstance(phi, UNARY):
        return (phi.body,)
    if isinstance(phi, BINARY):
        return (phi.left, phi.right)
    return ()


# -------------------------------
# Printing
# -------------------------------


def to_text(phi: Formula) -> str:
    """Render a formula in the concrete syntax with minimal parentheses."""
    return _render(phi, 0)


def _render(phi: Formula, min_prec: int) -> str:
    if isinstance(phi, Var):
        return phi.name
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bottom):
        return "false"
    if isinstance(phi, UNARY):
        return _UNARY_SYMBOL[type(phi)] + _render(phi.body, 3)

    prec = _PRECEDENCE[type(phi)]
    if isinstance(phi, Implies):
        text = f"{_render(phi.left, 1)} -> {_render(phi.right, 0)}"
    else:
        text = f"{_render(phi.left, prec)} {_BINARY_SYMBOL[type(phi)]} {_render(phi.right, prec + 1)}"
    if prec < min_prec:
        return f"({text})"
    return text


# -------------------------------
# Parsing
# -------------------------------


_TOKEN_RE = re.compile(
    r"""
    (?P<IMP>->)
    |(?P<OR>\|)
    |(?P<AND>&)
    |(?P<NOT>~)
    |(?P<DIA><>)
    |(?P<BOX>\[\])
    |(?P<TRUE>true\b)
    |(?P<FALSE>false\b)
    |(?P<ATOM>p[0-9]*)
    |(?P<EX>E)
    |(?P<ALL>A)
    |(?P<LPAR>\()
    |(?P<RPAR>\))
    """,
    re.VERBOSE,
)

_UNARY_TOKENS = {"NOT": Not, "DIA": Dia, "BOX": Box, "EX": Exists, "ALL": Forall}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise FormulaSyntaxError(f"Unexpected character {text[pos]!r}", _byte_offset(text, pos))
        tokens.append(_Token(match.lastgroup, match.group(), _byte_offset(text, pos)))
        pos = match.end()
    tokens.append(_Token("END", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, kind: str) -> _Token:
        token = self.peek()
        if token.kind != kind:
            wanted = "end of input" if kind == "END" else repr(kind)
            found = "end of input" if token.kind == "END" else repr(token.text)
            raise FormulaSyntaxError(f"Expected {wanted}, found {found}", token.offset)
        return self.advance()

    def impl(self) -> Formula:
        left = self.disj()
        if self.peek().kind == "IMP":
            self.advance()
            return Implies(left, self.impl())
        return left

    def disj(self) -> Formula:
        node = self.conj()
        while self.peek().kind == "OR":
            self.advance()
            node = Or(node, self.conj())
        return node

    def conj(self) -> Formula:
        node = self.unary()
        while self.peek().kind == "AND":
            self.advance()
            node = And(node, self.unary())
        return node

    def unary(self) -> Formula:
        ops = []
        while self.peek().kind in _UNARY_TOKENS:
            ops.append(_UNARY_TOKENS[self.advance().kind])
        node = self.primary()
        for op in reversed(ops):
            node = op(node)
        return node

    def primary(self) -> Formula:
        token = self.advance()
        if token.kind == "ATOM":
            return Var(token.text)
        if token.kind == "TRUE":
            return Top()
        if token.kind == "FALSE":
            return Bottom()
        if token.kind == "LPAR":
            node = self.impl()
            self.expect("RPAR")
            return node
        found = "end of input" if token.kind == "END" else repr(token.text)
        raise FormulaSyntaxError(f"Expected a formula, found {found}", token.offset)


def parse(text: str) -> Formula:
    """Parse concrete syntax into a Formula.

    Args:
        text: Formula text, e.g. "<>Ep -> E<>p"

    Returns:
        The unique AST for the text

    Raises:
        FormulaSyntaxError: With the byte offset of the offending token
    """
    parser = _Parser(_tokenize(text))
    phi = parser.impl()
    parser.expect("END")
    return phi


# -------------------------------
# Subformulas and variables
# -------------------------------


class SubformulaSet:
    """Subformulas of a formula in post-order insertion order."""

    def __init__(self, root: Formula):
        self.root = root
        seen: Dict[Formula, None] = {}
        _collect(root, seen)
        self.items: Tuple[Formula, ...] = tuple(seen)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __contains__(self, phi: object) -> bool:
        return phi in self.items

    @property
    def size(self) -> int:
        return len(self.items)

    def of_kind(self, kind: type) -> Tuple[Formula, ...]:
        return tuple(phi for phi in self.items if isinstance(phi, kind))


def _collect(phi: Formula, seen: Dict[Formula, None]) -> None:
    if phi in seen:
        return
    for child in children(phi):
        _collect(child, seen)
    seen[phi] = None


def subformulas(phi: Formula) -> SubformulaSet:
    """Subformulas of phi, children before parents, without repeats."""
    return SubformulaSet(phi)


def _variable_key(name: str) -> Tuple[int, int]:
    suffix = name[1:]
    return (1, int(suffix)) if suffix else (0, 0)


def variables(phi: Formula) -> Tuple[str, ...]:
    """Variables of phi in natural order: p, p1, p2, ..., p10."""
    names = {sub.name for sub in subformulas(phi) if isinstance(sub, Var)}
    return tuple(sorted(names, key=_variable_key))


# -------------------------------
# Translations
# -------------------------------


def boxplus_translate(phi: Formula) -> Formula:
    """Reflexive-box translation: []a becomes a' & []a', <>a becomes a' | <>a'."""
    if isinstance(phi, (Var, Top, Bottom)):
        return phi
    if isinstance(phi, Box):
        body = boxplus_translate(phi.body)
        return And(body, Box(body))
    if isinstance(phi, Dia):
        body = boxplus_translate(phi.body)
        return Or(body, Dia(body))
    if isinstance(phi, UNARY):
        return type(phi)(boxplus_translate(phi.body))
    return type(phi)(boxplus_translate(phi.left), boxplus_translate(phi.right))


def expand_abbreviations(phi: Formula) -> Formula:
    """Rewrite Box and Forall into ~<>~ and ~E~, leaving everything else intact."""
    if isinstance(phi, (Var, Top, Bottom)):
        return phi
    if isinstance(phi, Box):
        return Not(Dia(Not(expand_abbreviations(phi.body))))
    if isinstance(phi, Forall):
        return Not(Exists(Not(expand_abbreviations(phi.body))))
    if isinstance(phi, UNARY):
        return type(phi)(expand_abbreviations(phi.body))
    return type(phi)(expand_abbreviations(phi.left), expand_abbreviations(phi.right))


# -------------------------------
# Named formulas
# -------------------------------


def mk_bd(n: int) -> Formula:
    """Depth formula bd_n over fresh variables p1..pn."""
    if n < 1:
        raise FormulaError(f"bd_n needs n >= 1, got {n}")
    phi: Formula = Implies(Dia(Box(Var("p1"))), Var("p1"))
    for i in range(2, n + 1):
        p = Var(f"p{i}")
        phi = Implies(Dia(And(Box(p), Not(phi))), p)
    return phi


def mk_height(n: int) -> Formula:
    """~<>^n true: no R-path of n steps starts here."""
    if n < 1:
        raise FormulaError(f"height_n needs n >= 1, got {n}")
    phi: Formula = Top()
    for _ in range(n):
        phi = Dia(phi)
    return Not(phi)


def _casari() -> Formula:
    p = Var("p")
    box_all_p = Box(Forall(p))
    return Implies(
        Box(Forall(Implies(Box(Implies(Box(p), box_all_p)), box_all_p))),
        box_all_p,
    )


NAMED_FORMULAS = {
    "com_l": lambda: Implies(Exists(Dia(Var("p"))), Dia(Exists(Var("p")))),
    "com_r": lambda: Implies(Dia(Exists(Var("p"))), Exists(Dia(Var("p")))),
    "casari": _casari,
}

_INDEXED_NAMES = {"bd": mk_bd, "height": mk_height}
_NAME_RE = re.compile(r"(?<![a-z0-9_])(com_l|com_r|casari|(?:bd|height)_[0-9]+)(?![A-Za-z0-9_])")


def mk_named(name: str) -> Formula:
    """Build com_l, com_r or casari."""
    try:
        return NAMED_FORMULAS[name]()
    except KeyError:
        raise FormulaError(f"Unknown named formula: {name!r}", name=name)


def resolve_named(name: str) -> Formula:
    """Resolve com_l, com_r, casari, bd_k or height_k."""
    if name in NAMED_FORMULAS:
        return mk_named(name)
    stem, _, index = name.rpartition("_")
    if stem in _INDEXED_NAMES and index.isdigit():
        return _INDEXED_NAMES[stem](int(index))
    raise FormulaError(f"Unknown named formula: {name!r}", name=name)


def expand_named(text: str) -> str:
    """Replace named-formula tokens in text by their parenthesized definitions."""
    return _NAME_RE.sub(lambda m: f"({to_text(resolve_named(m.group(1)))})", text)


def parse_with_names(text: str) -> Formula:
    """Parse text in which named formulas may appear wherever a formula may."""
    return parse(expand_named(text))


# -------------------------------
# Random formulas
# -------------------------------


def random_formula(rng: random.Random, depth: int, names: Sequence[str] = ("p",)) -> Formula:
    """Draw a formula of AST depth at most `depth` from a seeded generator."""
    if depth <= 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.08:
            return Top()
        if roll < 0.16:
            return Bottom()
        return Var(rng.choice(list(names)))
    if rng.random() < 0.55:
        op = rng.choice(UNARY)
        return op(random_formula(rng, depth - 1, names))
    op = rng.choice(BINARY)
    return op(random_formula(rng, depth - 1, names), random_formula(rng, depth - 1, names))
