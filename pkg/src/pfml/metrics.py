"""Depth-n behavioural distances on a finite model.

Three independent engines compute the same chain ``d_0 <= d_1 <= ...``:

* ``wasserstein`` -- lift the previous stage by the transport minimum
  (simplex on couplings);
* ``kantorovich`` -- lift by the potential maximum (simplex on the dual);
* ``game`` (in :mod:`pfml.game`) -- value recursion of the bounded
  bisimulation game over vertices of the transportation polytope, with no
  pivoting at all.

The two lifting engines share the stage rule ``d_{k+1}(a, b) = max(atom deviation,
lifted d_k(row_a, row_b))`` where a blocking row is at distance 1 from any
distribution and 0 from another blocking row.  States of different models
are compared in their disjoint union (:func:`cross_distance`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .lp import solve_kantorovich_max, solve_transport_min
from .model import DEFAULT_ROLE, ONE, ZERO, Model, disjoint_union, fmt, restrict
from .semantics import eval_concept, eval_formula
from .syntax import Node, enumerate_concepts, to_text

WASSERSTEIN = "wasserstein"
KANTOROVICH = "kantorovich"
GAME = "game"
LOGICAL_WITNESS = "logical-witness"
LOGICAL_LB = "logical-lb"
METHODS = (WASSERSTEIN, KANTOROVICH, GAME, LOGICAL_WITNESS, LOGICAL_LB)


@dataclass
class DistanceTable:
    """Pairwise distances at one depth.  ``values`` holds both orientations."""

    depth: int
    method: str
    states: tuple[str, ...]
    values: dict[tuple[str, str], Fraction]
    witnesses: dict[tuple[str, str], object] = field(default_factory=dict)

    def __getitem__(self, pair: tuple[str, str]) -> Fraction:
        return self.values[pair]

    def __call__(self, a: str, b: str) -> Fraction:
        return self.values[a, b]

    def pairs(self) -> list[tuple[str, str]]:
        """Unordered pairs ``(a, b)`` with ``a`` before ``b`` in state order."""
        return list(itertools.combinations(self.states, 2))

    def same_values(self, other: "DistanceTable") -> bool:
        return self.values == other.values

    def axiom_violations(self) -> list[str]:
        """Pseudometric axioms, checked exhaustively."""
        out = []
        d = self.values
        for a in self.states:
            if d[a, a] != 0:
                out.append(f"d({a},{a}) = {fmt(d[a, a])} != 0")
        for a, b in itertools.product(self.states, repeat=2):
            if d[a, b] != d[b, a]:
                out.append(f"asymmetric at ({a},{b})")
            if not ZERO <= d[a, b] <= ONE:
                out.append(f"d({a},{b}) outside [0,1]")
        for a, b, c in itertools.product(self.states, repeat=3):
            if d[a, c] > d[a, b] + d[b, c]:
                out.append(f"triangle fails for ({a},{b},{c})")
        return out

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "method": self.method,
            "values": [
                {"pair": [a, b], "value": fmt(self.values[a, b])} for a, b in self.pairs()
            ],
        }


def zero_table(model: Model, method: str) -> DistanceTable:
    values = {(a, b): ZERO for a in model.states for b in model.states}
    return DistanceTable(0, method, model.states, values)


def _lift_chain(model: Model, n: int, method: str, solver, role: str) -> list[DistanceTable]:
    chain = [zero_table(model, method)]
    states = model.states
    for depth in range(1, n + 1):
        prev = chain[-1].values
        ground = lambda x, y, prev=prev: prev[x, y]
        values = {(a, a): ZERO for a in states}
        witnesses = {}
        for a, b in itertools.combinations(states, 2):
            ra, rb = model.row(a, role), model.row(b, role)
            if not ra and not rb:
                lifted = ZERO
            elif not ra or not rb:
                lifted = ONE
            else:
                lifted, wit = solver(ground, ra, rb)
                witnesses[a, b] = wit
            v = max(model.atom_deviation(a, b), lifted)
            values[a, b] = values[b, a] = v
        chain.append(DistanceTable(depth, method, states, values, witnesses))
    return chain


def wasserstein_chain(model: Model, n: int, role: str = DEFAULT_ROLE) -> list[DistanceTable]:
    """Tables for depths ``0..n`` via the transport minimum; witnesses are couplings."""
    return _lift_chain(model, n, WASSERSTEIN, solve_transport_min, role)


def kantorovich_chain(model: Model, n: int, role: str = DEFAULT_ROLE) -> list[DistanceTable]:
    """Tables for depths ``0..n`` via the potential maximum; witnesses are potentials."""
    return _lift_chain(model, n, KANTOROVICH, solve_kantorovich_max, role)


def wasserstein_table(model: Model, n: int, role: str = DEFAULT_ROLE) -> DistanceTable:
    return wasserstein_chain(model, n, role)[-1]


def kantorovich_table(model: Model, n: int, role: str = DEFAULT_ROLE) -> DistanceTable:
    return kantorovich_chain(model, n, role)[-1]


def distance_chain(model: Model, n: int, method: str = WASSERSTEIN, role: str = DEFAULT_ROLE):
    if method == WASSERSTEIN:
        return wasserstein_chain(model, n, role)
    if method == KANTOROVICH:
        return kantorovich_chain(model, n, role)
    if method == GAME:
        from .game import game_chain

        return game_chain(model, n, role)
    raise ValueError(f"no chain engine for method {method!r}")


def pair_distance(model: Model, n: int, a: str, b: str, method: str = WASSERSTEIN, role: str = DEFAULT_ROLE) -> Fraction:
    """d_n(a, b) computed top-down, touching only the pairs the recursion needs.

    Meant for large models (unravellings, unions) where a full table is wasteful.
    """
    model.check_state(a)
    model.check_state(b)
    if method == GAME:
        from .game import GameSolver

        return GameSolver(model, role).value(n, a, b)
    solver = {WASSERSTEIN: solve_transport_min, KANTOROVICH: solve_kantorovich_max}[method]
    memo: dict[tuple[int, str, str], Fraction] = {}

    def dist(k: int, x: str, y: str) -> Fraction:
        if k == 0 or x == y:
            return ZERO
        key = (k, x, y) if x <= y else (k, y, x)
        hit = memo.get(key)
        if hit is not None:
            return hit
        rx, ry = model.row(x, role), model.row(y, role)
        if not rx and not ry:
            lifted = ZERO
        elif not rx or not ry:
            lifted = ONE
        else:
            lifted = solver(lambda u, v: dist(k - 1, u, v), rx, ry)[0]
        out = max(model.atom_deviation(x, y), lifted)
        memo[key] = out
        return out

    return dist(n, a, b)


def cross_distance(
    m: Model, a: str, other: Model, b: str, n: int, method: str = WASSERSTEIN, role: str = DEFAULT_ROLE
) -> Fraction:
    """d_n between ``a`` in ``m`` and ``b`` in ``other`` (via their disjoint union)."""
    m.check_state(a)
    other.check_state(b)
    union, (left, right) = disjoint_union([m, other])
    return pair_distance(union, n, left[a], right[b], method, role)


def stabilized(chain: Sequence[DistanceTable]) -> bool:
    """Whether the last two stages agree on all pairs.  Heuristic only: it
    says nothing certain about the unbounded-depth distance."""
    return len(chain) >= 2 and chain[-1].values == chain[-2].values


# -- logical lower bound by enumeration ------------------------------------------

DEFAULT_GRID = (Fraction(0), Fraction(1, 2), Fraction(1))


def logical_lb_table(
    model: Model,
    n: int,
    budget: int = 2000,
    grid: Iterable = DEFAULT_GRID,
    max_size: int = 7,
    role: str = DEFAULT_ROLE,
) -> DistanceTable:
    """Per pair the largest gap |C(a) - C(b)| over the first ``budget``
    enumerated concepts of rank <= ``n``; witnesses are the maximizing
    concepts.  A sound lower bound on ``d_n``."""
    states = model.states
    values = {(a, b): ZERO for a in states for b in states}
    witnesses: dict = {}
    concepts = enumerate_concepts(n, max_size, list(grid), model.atom_names, (role,))
    for c in itertools.islice(concepts, budget):
        v = eval_concept(model, c)
        for a, b in itertools.combinations(states, 2):
            gap = abs(v[a] - v[b])
            if gap > values[a, b]:
                values[a, b] = values[b, a] = gap
                witnesses[a, b] = c
    return DistanceTable(n, LOGICAL_LB, states, values, witnesses)


# -- locality ----------------------------------------------------------------------


@dataclass(frozen=True)
class LocalityResult:
    full: Fraction
    restricted: Fraction

    @property
    def equal(self) -> bool:
        return self.full == self.restricted


def locality_check(model: Model, a: str, formula: Node, k: int, var: str | None = None) -> LocalityResult:
    """Evaluate a one-free-variable formula at ``a`` in the model and in its
    radius-``k`` restriction around ``a``."""
    from .syntax import free_vars

    fv = free_vars(formula)
    if var is None:
        if len(fv) > 1:
            raise ValueError(f"formula has several free variables: {sorted(fv)}")
        var = next(iter(fv), "x")
    env = {var: a}
    local = restrict(model, a, k)
    return LocalityResult(eval_formula(model, formula, env), eval_formula(local, formula, env))


def describe_witness(witness) -> object:
    """JSON-friendly form of a coupling, potential or concept witness."""
    if witness is None:
        return None
    if isinstance(witness, dict):
        items = []
        for k, v in witness.items():
            key = list(k) if isinstance(k, tuple) else k
            items.append({"at": key, "value": fmt(v)})
        return items
    return to_text(witness)
