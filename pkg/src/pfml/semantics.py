"""Exact Zadeh-style evaluation of concepts and formulas on finite models."""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .errors import UnboundVariable, UnknownAtom, UnknownRole
from .model import DEFAULT_ROLE, ONE, ZERO, Model
from .syntax import (
    And,
    Atom,
    AtomAt,
    Const,
    Dia,
    DiaBind,
    Eq,
    Exists,
    Neg,
    Node,
    Or,
    TruncSub,
    free_vars,
    walk,
)

Valuation = dict  # state -> Fraction


def apply_diamond(model: Model, f: Mapping[str, Fraction], role: str = DEFAULT_ROLE) -> Valuation:
    """(<>f)(a) = sum over successors a' of r_a(a') * f(a'); 0 at blocking states."""
    if role not in model.roles:
        raise UnknownRole(f"unknown role {role!r}")
    rows = model.roles[role]
    return {
        s: sum((p * f[t] for t, p in rows.get(s, {}).items()), ZERO)
        for s in model.states
    }


def _check_names(model: Model, node: Node) -> None:
    for n in walk(node):
        if isinstance(n, (Atom, AtomAt)) and n.name not in model.atoms:
            raise UnknownAtom(f"unknown atom {n.name!r}")
        if isinstance(n, (Dia, DiaBind)) and n.role not in model.roles:
            raise UnknownRole(f"unknown role {n.role!r}")


def eval_concept(model: Model, concept: Node, memo: dict | None = None) -> Valuation:
    """Valuation of ``concept`` at every state.

    ``memo`` (node id -> valuation) may be shared between calls on the same
    model as long as the nodes it refers to stay alive.
    """
    memo = {} if memo is None else memo
    if id(concept) in memo:
        return memo[id(concept)]
    _check_names(model, concept)
    states = model.states
    for n in walk(concept):
        if id(n) in memo:
            continue
        if isinstance(n, Const):
            v = dict.fromkeys(states, n.value)
        elif isinstance(n, Atom):
            v = dict(model.atoms[n.name])
        elif isinstance(n, TruncSub):
            c = memo[id(n.child)]
            v = {s: max(c[s] - n.value, ZERO) for s in states}
        elif isinstance(n, Neg):
            c = memo[id(n.child)]
            v = {s: ONE - c[s] for s in states}
        elif isinstance(n, And):
            l, r = memo[id(n.left)], memo[id(n.right)]
            v = {s: min(l[s], r[s]) for s in states}
        elif isinstance(n, Or):
            l, r = memo[id(n.left)], memo[id(n.right)]
            v = {s: max(l[s], r[s]) for s in states}
        elif isinstance(n, Dia):
            v = apply_diamond(model, memo[id(n.child)], n.role)
        else:
            raise TypeError(f"{type(n).__name__} is not a concept node")
        memo[id(n)] = v
    return memo[id(concept)]


def eval_concept_at(model: Model, concept: Node, state: str) -> Fraction:
    model.check_state(state)
    return eval_concept(model, concept)[state]


def eval_formula(model: Model, formula: Node, env: Mapping[str, str] | None = None) -> Fraction:
    """Truth value of ``formula`` under ``env`` (variable -> state).

    Existential quantifiers take the maximum over all states; ``P x y.``
    averages over the successors of ``env[x]``, giving 0 when it is blocking.
    """
    env = dict(env or {})
    _check_names(model, formula)
    missing = free_vars(formula) - set(env)
    if missing:
        raise UnboundVariable(f"unbound variable(s): {', '.join(sorted(missing))}")
    for s in env.values():
        model.check_state(s)
    # memo key: (node id, assignment of the node's free variables)
    fv_memo: dict[int, tuple[str, ...]] = {
        id(n): tuple(sorted(free_vars(n))) for n in walk(formula)
    }
    memo: dict[tuple, Fraction] = {}

    def ev(n: Node, env: dict[str, str]) -> Fraction:
        key = (id(n),) + tuple(env[v] for v in fv_memo[id(n)])
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(n, Const):
            out = n.value
        elif isinstance(n, AtomAt):
            out = model.atoms[n.name][env[n.var]]
        elif isinstance(n, Eq):
            out = ONE if env[n.left] == env[n.right] else ZERO
        elif isinstance(n, TruncSub):
            out = max(ev(n.child, env) - n.value, ZERO)
        elif isinstance(n, Neg):
            out = ONE - ev(n.child, env)
        elif isinstance(n, And):
            out = min(ev(n.left, env), ev(n.right, env))
        elif isinstance(n, Or):
            out = max(ev(n.left, env), ev(n.right, env))
        elif isinstance(n, Exists):
            out = max(ev(n.child, {**env, n.var: s}) for s in model.states)
        elif isinstance(n, DiaBind):
            row = model.roles[n.role].get(env[n.at], {})
            out = sum((p * ev(n.child, {**env, n.bound: t}) for t, p in row.items()), ZERO)
        else:
            raise TypeError(f"{type(n).__name__} is not a formula node")
        memo[key] = out
        return out

    return ev(formula, env)


def sup_distance(f: Mapping[str, Fraction], g: Mapping[str, Fraction]) -> Fraction:
    """Supremum distance between two valuations on the same states."""
    return max((abs(f[s] - g[s]) for s in f), default=ZERO)
