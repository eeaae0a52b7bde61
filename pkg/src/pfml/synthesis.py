"""Exact distinguishing concepts and reconstruction of non-expansive functions.

On a finite model every function ``f`` that is non-expansive for ``d_n`` is
the exact value of some concept of rank <= ``n``:

* for two states ``x, y`` and targets ``tx >= ty`` take a concept ``D`` with
  ``D(x) - D(y) = d_n(x, y)`` (negate ``D`` if needed); then
  ``((D - D(y)) & (tx - ty)) + ty`` is ``tx`` at ``x`` and ``ty`` at ``y``;
* the max over ``x`` of the min over ``y`` of these pairwise interpolants
  equals ``f`` on the whole domain.

Distinguishing concepts themselves are built by recursion on depth: an atom,
the blocking detector ``<r> 1``, or the diamond of the reconstruction of an
optimal potential for the successor rows under ``d_{n-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import NotNonexpansive
from .lp import solve_kantorovich_max
from .metrics import LOGICAL_WITNESS, DistanceTable, wasserstein_chain
from .model import DEFAULT_ROLE, ONE, ZERO, Model, fmt
from .semantics import eval_concept
from .syntax import And, Atom, Const, Dia, Neg, Node, TruncSub, conj, disj, rank, to_json, to_text, trunc_add, tree_size

DEFAULT_TEXT_CEILING = 200_000


@dataclass
class WitnessCertificate:
    pair: tuple[str, str]
    depth: int
    concept: Node
    achieved: Fraction
    claimed: Fraction

    @property
    def valid(self) -> bool:
        return self.achieved == self.claimed

    @property
    def sound(self) -> bool:
        return self.achieved <= self.claimed

    def to_json(self, text_ceiling: int = DEFAULT_TEXT_CEILING) -> dict:
        size = tree_size(self.concept)
        return {
            "pair": list(self.pair),
            "depth": self.depth,
            "concept": to_text(self.concept) if size <= text_ceiling else None,
            "concept_dag": to_json(self.concept),
            "tree_size": size,
            "rank": rank(self.concept),
            "achieved": fmt(self.achieved),
            "target": fmt(self.claimed),
            "valid": self.valid,
        }


class Synthesizer:
    """One synthesis session on a fixed model.

    Memoizes distance tables, witnesses per ``(depth, pair)`` and concept
    valuations, so emitted concepts share subtrees.
    """

    def __init__(self, model: Model, role: str = DEFAULT_ROLE):
        self.model = model
        self.role = role
        self._chain: list[DistanceTable] = wasserstein_chain(model, 0, role)
        self._witness: dict[tuple[int, str, str], tuple[Node, Fraction]] = {}
        self._values: dict[int, dict] = {}
        self._alive: list[Node] = []  # keeps ids in _values valid
        self._interp: dict[tuple, Node] = {}
        self._one = Const(ONE)

    # -- helpers
    def distances(self, n: int) -> DistanceTable:
        if len(self._chain) <= n:
            self._chain = wasserstein_chain(self.model, n, self.role)
        return self._chain[n]

    def values(self, concept: Node) -> dict:
        if id(concept) not in self._values:
            self._alive.append(concept)
        return eval_concept(self.model, concept, self._values)

    # -- operations
    def pairwise_interpolant(self, n: int, x: str, y: str, tx, ty) -> Node:
        """Concept of rank <= n taking value ``tx`` at ``x`` and ``ty`` at ``y``."""
        tx, ty = Fraction(tx), Fraction(ty)
        if x == y:
            if tx != ty:
                raise NotNonexpansive(f"different targets at the same state {x!r}")
            return Const(tx)
        if tx == ty:
            return Const(tx)
        if tx < ty:
            x, y, tx, ty = y, x, ty, tx
        key = (n, x, y, tx, ty)
        if key in self._interp:
            return self._interp[key]
        d, _ = self.witness(n, x, y)
        v = self.values(d)
        dx, dy = v[x], v[y]
        if dx < dy:
            d = Neg(d)
            dx, dy = ONE - dx, ONE - dy
        if tx - ty > dx - dy:
            raise NotNonexpansive(
                f"|f({x}) - f({y})| = {fmt(tx - ty)} exceeds d_{n}({x},{y}) = {fmt(dx - dy)}"
            )
        g = TruncSub(d, dy) if dy else d
        gap = tx - ty
        if gap < dx - dy:
            g = And(g, Const(gap))
        if ty:
            g = trunc_add(g, ty)
        self._interp[key] = g
        return g

    def reconstruct_function(self, n: int, f: Mapping[str, Fraction], domain: Iterable[str] | None = None) -> Node:
        """Concept of rank <= n equal to ``f`` on ``domain`` (default: dom(f))."""
        domain = list(f if domain is None else domain)
        for s in domain:
            self.model.check_state(s)
        table = self.distances(n)
        for x in domain:
            for y in domain:
                if abs(f[x] - f[y]) > table[x, y]:
                    raise NotNonexpansive(
                        f"|f({x}) - f({y})| = {fmt(abs(f[x] - f[y]))} > d_{n} = {fmt(table[x, y])}"
                    )
        if len({f[s] for s in domain}) <= 1:
            return Const(f[domain[0]] if domain else ZERO)
        disjuncts: dict[int, Node] = {}
        for x in domain:
            conjuncts = {}
            for y in domain:
                if y != x:
                    g = self.pairwise_interpolant(n, x, y, f[x], f[y])
                    conjuncts.setdefault(id(g), g)
            c = conj(list(conjuncts.values()))
            disjuncts.setdefault(id(c), c)
        return disj(list(disjuncts.values()))

    def witness(self, n: int, a: str, b: str) -> tuple[Node, Fraction]:
        """Concept of rank <= n and the gap |C(a) - C(b)| it achieves."""
        key = (n, a, b)
        hit = self._witness.get(key)
        if hit is not None:
            return hit
        m = self.model
        if n == 0 or a == b:
            result = (Const(ZERO), ZERO)
        else:
            ra, rb = m.row(a, self.role), m.row(b, self.role)
            candidates: list[Node] = []
            if bool(ra) != bool(rb):
                candidates.append(Dia(self.role, self._one))
            elif ra and rb:
                ground = self.distances(n - 1)
                _, potential = solve_kantorovich_max(ground, ra, rb)
                inner = self.reconstruct_function(n - 1, potential)
                candidates.append(Dia(self.role, inner))
            candidates.extend(Atom(name) for name in m.atom_names)
            best = None
            for c in candidates:
                v = self.values(c)
                gap = abs(v[a] - v[b])
                if best is None or gap > best[1]:
                    best = (c, gap)
            result = best if best is not None else (Const(ZERO), ZERO)
        self._witness[key] = result
        self._witness[(n, b, a)] = result
        return result

    def certificate(self, n: int, a: str, b: str) -> WitnessCertificate:
        self.model.check_state(a)
        self.model.check_state(b)
        concept, achieved = self.witness(n, a, b)
        return WitnessCertificate((a, b), n, concept, achieved, self.distances(n)[a, b])

    def table(self, n: int) -> DistanceTable:
        states = self.model.states
        values, witnesses = {}, {}
        for a in states:
            for b in states:
                concept, gap = self.witness(n, a, b)
                values[a, b] = gap
                if a != b:
                    witnesses[a, b] = concept
        return DistanceTable(n, LOGICAL_WITNESS, states, values, witnesses)


def pairwise_interpolant(model: Model, n: int, x: str, y: str, tx, ty, role: str = DEFAULT_ROLE) -> Node:
    return Synthesizer(model, role).pairwise_interpolant(n, x, y, tx, ty)


def reconstruct_function(
    model: Model, n: int, f: Mapping[str, Fraction], domain: Iterable[str] | None = None, role: str = DEFAULT_ROLE
) -> Node:
    return Synthesizer(model, role).reconstruct_function(n, f, domain)


def synthesize_witness(model: Model, n: int, a: str, b: str, role: str = DEFAULT_ROLE) -> WitnessCertificate:
    return Synthesizer(model, role).certificate(n, a, b)


def logical_witness_table(model: Model, n: int, role: str = DEFAULT_ROLE) -> DistanceTable:
    return Synthesizer(model, role).table(n)
