"""Syntax of fuzzy probabilistic concepts and first-order formulas.

Concepts::

    C ::= q | A | C - q | ~C | C & C | C | C | <r> C

Formulas add ``A(x)``, ``x = y``, ``E x. phi`` (maximum over states) and
``P x y. phi`` (expectation over the successors ``y`` of ``x``; written
``P<s> x y. phi`` for a role other than ``r``).  ``C + q`` is accepted as
sugar for ``~(~C - q)``, i.e. truncated addition.

Precedence, tightest first: postfix ``- q``/``+ q``; prefix ``~``, ``<r>``;
``&``; ``|``.  A binder's body extends as far to the right as possible.

Nodes are immutable dataclasses.  Synthesized concepts share subtrees, so
everything that walks a tree memoizes on node identity instead of hashing.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

from .errors import ParseError
from .model import DEFAULT_ROLE, fmt

# -- AST -----------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if not 0 <= self.value <= 1:
            raise ValueError(f"truth constant {self.value} outside [0,1]")


@dataclass(frozen=True)
class Atom:
    """Atomic concept ``A``."""

    name: str


@dataclass(frozen=True)
class AtomAt:
    """Atomic formula ``A(x)``."""

    name: str
    var: str


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class TruncSub:
    child: "Node"
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))
        if not 0 <= self.value <= 1:
            raise ValueError(f"truncation constant {self.value} outside [0,1]")


@dataclass(frozen=True)
class Neg:
    child: "Node"


@dataclass(frozen=True)
class And:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Or:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Dia:
    """``<role> C``: expected value of ``C`` over successors."""

    role: str
    child: "Node"


@dataclass(frozen=True)
class Exists:
    var: str
    child: "Node"


@dataclass(frozen=True)
class DiaBind:
    """``P x y. phi``: expectation of ``phi`` over successors ``y`` of ``x``."""

    role: str
    at: str
    bound: str
    child: "Node"


Node = Union[Const, Atom, AtomAt, Eq, TruncSub, Neg, And, Or, Dia, Exists, DiaBind]
Concept = Node
Formula = Node

_CONCEPT_KINDS = (Const, Atom, TruncSub, Neg, And, Or, Dia)
_FORMULA_KINDS = (Const, AtomAt, Eq, TruncSub, Neg, And, Or, Exists, DiaBind)


def trunc_add(child: Node, q) -> Node:
    """Truncated addition ``min(child + q, 1)`` as ``~(~child - q)``."""
    return Neg(TruncSub(Neg(child), Fraction(q)))


def conj(items: Sequence[Node]) -> Node:
    it = iter(items)
    acc = next(it)
    for c in it:
        acc = And(acc, c)
    return acc


def disj(items: Sequence[Node]) -> Node:
    it = iter(items)
    acc = next(it)
    for c in it:
        acc = Or(acc, c)
    return acc


def children(node: Node) -> tuple[Node, ...]:
    if isinstance(node, (And, Or)):
        return (node.left, node.right)
    if isinstance(node, (TruncSub, Neg, Dia, Exists, DiaBind)):
        return (node.child,)
    return ()


def walk(node: Node) -> Iterator[Node]:
    """Each distinct node object once (post-order)."""
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(node, False)]
    while stack:
        n, done = stack.pop()
        if done:
            yield n
            continue
        if id(n) in seen:
            continue
        seen.add(id(n))
        stack.append((n, True))
        for c in reversed(children(n)):
            stack.append((c, False))


def is_concept(node: Node) -> bool:
    return all(isinstance(n, _CONCEPT_KINDS) for n in walk(node))


def is_formula(node: Node) -> bool:
    return all(isinstance(n, _FORMULA_KINDS) for n in walk(node))


def dag_size(node: Node) -> int:
    """Number of distinct node objects."""
    return sum(1 for _ in walk(node))


def tree_size(node: Node) -> int:
    """Number of nodes of the fully unshared tree."""
    size: dict[int, int] = {}
    for n in walk(node):
        size[id(n)] = 1 + sum(size[id(c)] for c in children(n))
    return size[id(node)]


def rank(node: Node) -> int:
    """Nesting depth of diamonds and atoms (concepts); binders and atoms for formulas."""
    memo: dict[int, int] = {}
    for n in walk(node):
        if isinstance(n, (Const, Eq)):
            r = 0
        elif isinstance(n, (Atom, AtomAt)):
            r = 1
        elif isinstance(n, (Dia, Exists, DiaBind)):
            r = 1 + memo[id(n.child)]
        else:
            r = max(memo[id(c)] for c in children(n))
        memo[id(n)] = r
    return memo[id(node)]


qrank = rank


def atoms_of(node: Node) -> set[str]:
    return {n.name for n in walk(node) if isinstance(n, (Atom, AtomAt))}


def roles_of(node: Node) -> set[str]:
    return {n.role for n in walk(node) if isinstance(n, (Dia, DiaBind))}


def free_vars(node: Node) -> frozenset[str]:
    memo: dict[int, frozenset[str]] = {}
    for n in walk(node):
        if isinstance(n, AtomAt):
            fv = frozenset({n.var})
        elif isinstance(n, Eq):
            fv = frozenset({n.left, n.right})
        elif isinstance(n, Exists):
            fv = memo[id(n.child)] - {n.var}
        elif isinstance(n, DiaBind):
            fv = (memo[id(n.child)] - {n.bound}) | {n.at}
        else:
            fv = frozenset().union(*(memo[id(c)] for c in children(n)))
        memo[id(n)] = fv
    return memo[id(node)]


def standard_translation(concept: Node, x: str = "x", y: str = "y") -> Node:
    """First-order translation with free variable ``x``, alternating ``x``/``y``
    as the bound successor variable."""
    memo: dict[tuple[int, str], Node] = {}

    def other(v: str) -> str:
        return y if v == x else x

    def st(n: Node, v: str) -> Node:
        key = (id(n), v)
        if key in memo:
            return memo[key]
        if isinstance(n, Const):
            out = n
        elif isinstance(n, Atom):
            out = AtomAt(n.name, v)
        elif isinstance(n, TruncSub):
            out = TruncSub(st(n.child, v), n.value)
        elif isinstance(n, Neg):
            out = Neg(st(n.child, v))
        elif isinstance(n, And):
            out = And(st(n.left, v), st(n.right, v))
        elif isinstance(n, Or):
            out = Or(st(n.left, v), st(n.right, v))
        elif isinstance(n, Dia):
            w = other(v)
            out = DiaBind(n.role, v, w, st(n.child, w))
        else:
            raise TypeError(f"not a concept node: {type(n).__name__}")
        memo[key] = out
        return out

    return st(concept, x)


# -- printing ------------------------------------------------------------------

_OR, _AND, _PREFIX, _POSTFIX, _PRIMARY = 1, 2, 3, 4, 5


def _level(n: Node) -> int:
    if isinstance(n, Or):
        return _OR
    if isinstance(n, And):
        return _AND
    if isinstance(n, (Neg, Dia)):
        return _PREFIX
    if isinstance(n, (Exists, DiaBind)):
        return 0  # binders are parenthesized everywhere except at the top
    if isinstance(n, TruncSub):
        return _POSTFIX
    return _PRIMARY


def to_text(node: Node) -> str:
    """Render in the concrete grammar; ``parse(to_text(n)) == n``."""
    out: list[str] = []

    def emit(n: Node, min_level: int) -> None:
        if _level(n) < min_level:
            out.append("(")
            emit(n, 0)
            out.append(")")
            return
        if isinstance(n, Const):
            out.append(fmt(n.value))
        elif isinstance(n, Atom):
            out.append(n.name)
        elif isinstance(n, AtomAt):
            out.append(f"{n.name}({n.var})")
        elif isinstance(n, Eq):
            out.append(f"{n.left} = {n.right}")
        elif isinstance(n, TruncSub):
            emit(n.child, _POSTFIX)
            out.append(f" - {fmt(n.value)}")
        elif isinstance(n, Neg):
            out.append("~")
            emit(n.child, _PREFIX)
        elif isinstance(n, Dia):
            out.append(f"<{n.role}> ")
            emit(n.child, _PREFIX)
        elif isinstance(n, And):
            emit(n.left, _AND)
            out.append(" & ")
            emit(n.right, _PREFIX)
        elif isinstance(n, Or):
            emit(n.left, _OR)
            out.append(" | ")
            emit(n.right, _AND)
        elif isinstance(n, Exists):
            out.append(f"E {n.var}. ")
            emit(n.child, 0)
        elif isinstance(n, DiaBind):
            role = "" if n.role == DEFAULT_ROLE else f"<{n.role}>"
            out.append(f"P{role} {n.at} {n.bound}. ")
            emit(n.child, 0)
        else:
            raise TypeError(f"unknown node {n!r}")

    emit(node, 0)
    return "".join(out)


# -- parsing -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<rat>\d+(?:\s*/\s*\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[()~&|\-+<>.=]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, formula: bool):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.formula = formula

    def peek(self, k: int = 0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, value: str | None = None, what: str | None = None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            exp = what or (repr(value) if value else kind)
            got = tok[1] or "end of input"
            raise ParseError(f"expected {exp}, got {got!r}", tok[2], exp)
        return self.advance()

    def parse(self) -> Node:
        node = self.parse_or()
        tok = self.peek()
        if tok[0] != "eof":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2], "end of input")
        return node

    def parse_or(self) -> Node:
        node = self.parse_and()
        while self.peek()[:2] == ("sym", "|"):
            self.advance()
            node = Or(node, self.parse_and())
        return node

    def parse_and(self) -> Node:
        node = self.parse_prefix()
        while self.peek()[:2] == ("sym", "&"):
            self.advance()
            node = And(node, self.parse_prefix())
        return node

    def rational(self) -> Fraction:
        tok = self.expect("rat", what="rational constant")
        q = Fraction(tok[1].replace(" ", ""))
        if q > 1:
            raise ParseError(f"constant {tok[1]} outside [0,1]", tok[2], "rational in [0,1]")
        return q

    def variable(self) -> str:
        tok = self.expect("ident", what="variable")
        if not tok[1][0].islower():
            raise ParseError(f"variable names are lowercase, got {tok[1]!r}", tok[2], "variable")
        return tok[1]

    def is_binder(self) -> bool:
        kind, val, _ = self.peek()
        if not self.formula or kind != "ident":
            return False
        if val == "E":
            return self.peek(1)[0] == "ident" and self.peek(2)[:2] == ("sym", ".")
        if val == "P":
            if self.peek(1)[:2] == ("sym", "<"):
                return True
            return (
                self.peek(1)[0] == "ident"
                and self.peek(2)[0] == "ident"
                and self.peek(3)[:2] == ("sym", ".")
            )
        return False

    def parse_prefix(self) -> Node:
        kind, val, pos = self.peek()
        if (kind, val) == ("sym", "~"):
            self.advance()
            return Neg(self.parse_prefix())
        if (kind, val) == ("sym", "<") and not self.formula:
            self.advance()
            role = self.expect("ident", what="role name")[1]
            self.expect("sym", ">")
            return Dia(role, self.parse_prefix())
        if self.is_binder():
            self.advance()
            if val == "E":
                var = self.variable()
                self.expect("sym", ".")
                return Exists(var, self.parse_or())
            role = DEFAULT_ROLE
            if self.peek()[:2] == ("sym", "<"):
                self.advance()
                role = self.expect("ident", what="role name")[1]
                self.expect("sym", ">")
            at = self.variable()
            bound = self.variable()
            self.expect("sym", ".")
            return DiaBind(role, at, bound, self.parse_or())
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        node = self.parse_primary()
        while self.peek()[0] == "sym" and self.peek()[1] in "-+":
            op = self.advance()[1]
            q = self.rational()
            node = TruncSub(node, q) if op == "-" else trunc_add(node, q)
        return node

    def parse_primary(self) -> Node:
        kind, val, pos = self.peek()
        if kind == "rat":
            return Const(self.rational())
        if (kind, val) == ("sym", "("):
            self.advance()
            node = self.parse_or()
            self.expect("sym", ")")
            return node
        if kind == "ident":
            self.advance()
            if val[0].isupper():
                if self.formula:
                    self.expect("sym", "(")
                    var = self.variable()
                    self.expect("sym", ")")
                    return AtomAt(val, var)
                return Atom(val)
            if self.formula:
                self.expect("sym", "=")
                return Eq(val, self.variable())
            raise ParseError(f"atom names are capitalized, got {val!r}", pos, "atom")
        got = val or "end of input"
        raise ParseError(f"unexpected {got!r}", pos, "expression")


def parse_concept(text: str) -> Node:
    return _Parser(text, formula=False).parse()


def parse_formula(text: str) -> Node:
    return _Parser(text, formula=True).parse()


# -- JSON (DAG with shared subtrees) ---------------------------------------------


def to_json(node: Node) -> dict:
    """Stable JSON form: a node table in post-order; children are indices."""
    index: dict[int, int] = {}
    table = []
    for n in walk(node):
        entry: dict = {"kind": type(n).__name__}
        if isinstance(n, (Const, TruncSub)):
            entry["value"] = fmt(n.value)
        if isinstance(n, (Atom, AtomAt)):
            entry["name"] = n.name
        if isinstance(n, AtomAt):
            entry["var"] = n.var
        if isinstance(n, Eq):
            entry["vars"] = [n.left, n.right]
        if isinstance(n, (Dia, DiaBind)):
            entry["role"] = n.role
        if isinstance(n, Exists):
            entry["var"] = n.var
        if isinstance(n, DiaBind):
            entry["vars"] = [n.at, n.bound]
        kids = children(n)
        if kids:
            entry["children"] = [index[id(c)] for c in kids]
        index[id(n)] = len(table)
        table.append(entry)
    return {"nodes": table, "root": index[id(node)]}


def from_json(data: dict) -> Node:
    built: list[Node] = []
    for entry in data["nodes"]:
        kind = entry["kind"]
        kids = [built[i] for i in entry.get("children", [])]
        if kind == "Const":
            n = Const(Fraction(entry["value"]))
        elif kind == "Atom":
            n = Atom(entry["name"])
        elif kind == "AtomAt":
            n = AtomAt(entry["name"], entry["var"])
        elif kind == "Eq":
            n = Eq(*entry["vars"])
        elif kind == "TruncSub":
            n = TruncSub(kids[0], Fraction(entry["value"]))
        elif kind == "Neg":
            n = Neg(kids[0])
        elif kind == "And":
            n = And(*kids)
        elif kind == "Or":
            n = Or(*kids)
        elif kind == "Dia":
            n = Dia(entry["role"], kids[0])
        elif kind == "Exists":
            n = Exists(entry["var"], kids[0])
        elif kind == "DiaBind":
            n = DiaBind(entry["role"], entry["vars"][0], entry["vars"][1], kids[0])
        else:
            raise ParseError(f"unknown node kind {kind!r}")
        built.append(n)
    return built[data["root"]]


# -- enumeration and sampling ------------------------------------------------------


def enumerate_concepts(
    max_rank: int,
    max_size: int,
    grid: Sequence,
    atoms: Sequence[str] = ("A",),
    roles: Sequence[str] = (DEFAULT_ROLE,),
) -> Iterator[Node]:
    """Every concept with rank <= ``max_rank`` and at most ``max_size`` nodes,
    using constants from ``grid``; ``&``/``|`` arguments in canonical order.

    Concepts are produced in order of increasing size.
    """
    grid = sorted({Fraction(q) for q in grid})
    if any(not 0 <= q <= 1 for q in grid):
        raise ValueError("constant grid must lie in [0,1]")
    # by_size[s] = list of (text key, rank, concept)
    by_size: list[list[tuple[str, int, Node]]] = [[]]

    def add(bucket, node, r):
        if r <= max_rank:
            bucket.append((to_text(node), r, node))

    for size in range(1, max_size + 1):
        bucket: list[tuple[str, int, Node]] = []
        if size == 1:
            for q in grid:
                add(bucket, Const(q), 0)
            for a in sorted(atoms):
                add(bucket, Atom(a), 1)
        else:
            for _, r, c in by_size[size - 1]:
                add(bucket, Neg(c), r)
                for q in grid:
                    add(bucket, TruncSub(c, q), r)
                for role in roles:
                    add(bucket, Dia(role, c), r + 1)
            for ls in range(1, size - 1):
                rs = size - 1 - ls
                if ls > rs:
                    break
                # canonical argument order: smaller size first, then by text
                for lk, lr, lc in by_size[ls]:
                    for rk, rr, rc in by_size[rs]:
                        if ls == rs and lk > rk:
                            continue
                        add(bucket, And(lc, rc), max(lr, rr))
                        add(bucket, Or(lc, rc), max(lr, rr))
        by_size.append(bucket)
        for _, _, c in bucket:
            yield c


def random_concept(
    rng: random.Random,
    max_rank: int,
    atoms: Sequence[str] = ("A",),
    roles: Sequence[str] = (DEFAULT_ROLE,),
    max_depth: int = 6,
    denom_bound: int = 12,
) -> Node:
    """Random concept of rank <= ``max_rank``."""

    def const() -> Const:
        den = rng.randint(1, denom_bound)
        return Const(Fraction(rng.randint(0, den), den))

    def gen(rk: int, depth: int) -> Node:
        leaf_weight = 3 if depth <= 0 else 1
        options = ["const"] * leaf_weight
        if rk >= 1:
            options += ["atom"] * leaf_weight
        if depth > 0:
            options += ["neg", "sub", "and", "or"]
            if rk >= 1:
                options += ["dia", "dia"]
        kind = rng.choice(options)
        if kind == "const":
            return const()
        if kind == "atom":
            return Atom(rng.choice(list(atoms)))
        if kind == "neg":
            return Neg(gen(rk, depth - 1))
        if kind == "sub":
            return TruncSub(gen(rk, depth - 1), const().value)
        if kind == "and":
            return And(gen(rk, depth - 1), gen(rk, depth - 1))
        if kind == "or":
            return Or(gen(rk, depth - 1), gen(rk, depth - 1))
        return Dia(rng.choice(list(roles)), gen(rk - 1, depth - 1))

    return gen(max_rank, max_depth)
