"""Finite probabilistic fuzzy models.

A model has an ordered set of named states, fuzzy atomic concepts
(state -> value in [0, 1]) and one or more roles.  Each role assigns every
state a *successor row*: either the zero function (the state is blocking
for that role) or a probability mass function over states.  All numbers are
:class:`fractions.Fraction`.

The on-disk format is JSON::

    {"states": ["a", "b", "c"],
     "atoms": {"A": {"a": "3/10", "b": "1", "c": "0"}},
     "roles": {"r": {"a": {"b": "1/2", "c": "1/2"}, "b": {}, "c": {"c": "1"}}}}

Rationals are written as strings ``"p/q"`` or integer strings.  Omitted atom
entries default to 0 and omitted rows are blocking.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import (
    LengthMismatch,
    ModelError,
    ParseError,
    RowSumInvalid,
    UnknownState,
    UnknownTarget,
    ValueOutOfRange,
)

DEFAULT_ROLE = "r"

ZERO = Fraction(0)
ONE = Fraction(1)

_RATIONAL_RE = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer string, an ``int`` or a ``Fraction``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"not a rational: {value!r}")
    m = _RATIONAL_RE.match(value)
    if m is None:
        raise ValueError(f"not a rational: {value!r}")
    num, den = m.groups()
    if den is not None and int(den) == 0:
        raise ValueError(f"zero denominator: {value!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def fmt(q: Fraction) -> str:
    """Canonical text for a rational: ``"p/q"`` or ``"p"`` when integral."""
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Violation:
    kind: str  # RowSumInvalid | ValueOutOfRange | UnknownTarget
    location: str
    message: str
    value: Fraction | None = None

    def __str__(self) -> str:
        return f"{self.kind} at {self.location}: {self.message}"


@dataclass(frozen=True, eq=True)
class Model:
    """A validated model.  Treat every mapping as read-only."""

    states: tuple[str, ...]
    atoms: Mapping[str, Mapping[str, Fraction]]
    roles: Mapping[str, Mapping[str, Mapping[str, Fraction]]]
    _index: Mapping[str, int] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.states)})

    @property
    def atom_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.atoms))

    @property
    def role_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.roles))

    def __contains__(self, state: str) -> bool:
        return state in self._index

    def check_state(self, state: str) -> str:
        if state not in self._index:
            raise UnknownState(f"unknown state {state!r}")
        return state

    def atom(self, name: str, state: str) -> Fraction:
        return self.atoms[name][state]

    def row(self, state: str, role: str = DEFAULT_ROLE) -> Mapping[str, Fraction]:
        """Successor row of ``state``; an empty mapping means blocking."""
        from .errors import UnknownRole

        try:
            rows = self.roles[role]
        except KeyError:
            raise UnknownRole(f"unknown role {role!r}") from None
        return rows.get(state, {})

    def is_blocking(self, state: str, role: str = DEFAULT_ROLE) -> bool:
        return not self.row(state, role)

    def atom_deviation(self, a: str, b: str, other: "Model | None" = None) -> Fraction:
        """max over atoms of |A(a) - A(b)|, with ``b`` read in ``other`` if given."""
        other = self if other is None else other
        names = set(self.atoms) | set(other.atoms)
        dev = ZERO
        for name in names:
            va = self.atoms.get(name, {}).get(a, ZERO)
            vb = other.atoms.get(name, {}).get(b, ZERO)
            dev = max(dev, abs(va - vb))
        return dev

    def to_raw(self) -> dict:
        """Serialize to the JSON-compatible raw form (canonical ordering)."""
        return {
            "states": list(self.states),
            "atoms": {
                name: {s: fmt(self.atoms[name][s]) for s in self.states}
                for name in sorted(self.atoms)
            },
            "roles": {
                role: {
                    s: {t: fmt(p) for t, p in _ordered(self.roles[role].get(s, {}), self._index)}
                    for s in self.states
                }
                for role in sorted(self.roles)
            },
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_raw(), indent=indent)

    def digest(self) -> str:
        canonical = json.dumps(self.to_raw(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _ordered(row: Mapping[str, Fraction], index: Mapping[str, int]):
    return sorted(row.items(), key=lambda kv: index[kv[0]])


def find_violations(raw: Mapping) -> tuple[list[Violation], dict]:
    """Check raw model data; return the violations and the parsed parts.

    Structural problems (missing ``states``, unparsable rationals, ...) raise
    :class:`ModelError` immediately since no meaningful model can be built.
    """
    if not isinstance(raw, Mapping):
        raise ModelError("model must be a JSON object")
    states = raw.get("states")
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ModelError("'states' must be a list of strings")
    if len(set(states)) != len(states):
        raise ModelError("duplicate state identifiers")
    if not states:
        raise ModelError("a model needs at least one state")
    known = set(states)
    violations: list[Violation] = []

    def rational(value, where):
        try:
            return parse_rational(value)
        except ValueError as exc:
            raise ModelError(f"{where}: {exc}") from None

    atoms: dict[str, dict[str, Fraction]] = {}
    raw_atoms = raw.get("atoms", {}) or {}
    if not isinstance(raw_atoms, Mapping):
        raise ModelError("'atoms' must be an object")
    for name, values in raw_atoms.items():
        if not isinstance(values, Mapping):
            raise ModelError(f"atom {name!r} must map states to values")
        col = {s: ZERO for s in states}
        for s, v in values.items():
            where = f"atoms.{name}.{s}"
            q = rational(v, where)
            if s not in known:
                violations.append(Violation("UnknownTarget", where, f"unknown state {s!r}"))
                continue
            if not ZERO <= q <= ONE:
                violations.append(Violation("ValueOutOfRange", where, f"{fmt(q)} not in [0,1]", q))
            col[s] = q
        atoms[name] = col

    roles: dict[str, dict[str, dict[str, Fraction]]] = {}
    raw_roles = raw.get("roles", {}) or {}
    if not isinstance(raw_roles, Mapping):
        raise ModelError("'roles' must be an object")
    for role, rows in raw_roles.items():
        if not isinstance(rows, Mapping):
            raise ModelError(f"role {role!r} must map states to rows")
        table: dict[str, dict[str, Fraction]] = {}
        for s, row in rows.items():
            if s not in known:
                violations.append(
                    Violation("UnknownTarget", f"roles.{role}.{s}", f"row for unknown state {s!r}")
                )
                continue
            if not isinstance(row, Mapping):
                raise ModelError(f"roles.{role}.{s} must be an object")
            parsed: dict[str, Fraction] = {}
            total = ZERO
            for t, p in row.items():
                where = f"roles.{role}.{s}.{t}"
                q = rational(p, where)
                if t not in known:
                    violations.append(Violation("UnknownTarget", where, f"unknown target {t!r}"))
                    continue
                if not ZERO <= q <= ONE:
                    violations.append(Violation("ValueOutOfRange", where, f"{fmt(q)} not in [0,1]", q))
                    continue
                total += q
                if q:
                    parsed[t] = q
            if total not in (ZERO, ONE):
                violations.append(
                    Violation(
                        "RowSumInvalid",
                        f"roles.{role}.{s}",
                        f"row of {s!r} sums to {fmt(total)}, expected 0 or 1",
                        total,
                    )
                )
            table[s] = parsed
        roles[role] = {s: table.get(s, {}) for s in states}
    return violations, {"states": tuple(states), "atoms": atoms, "roles": roles}


_VIOLATION_ERRORS = {
    "RowSumInvalid": RowSumInvalid,
    "ValueOutOfRange": ValueOutOfRange,
    "UnknownTarget": UnknownTarget,
}


def validate_model(raw: Mapping) -> Model:
    """Validate raw model data and return the canonical :class:`Model`.

    On failure raises the error class of the first violation; the full list
    is available as ``exc.violations``.
    """
    violations, parts = find_violations(raw)
    if violations:
        first = violations[0]
        raise _VIOLATION_ERRORS[first.kind](
            "; ".join(str(v) for v in violations), violations
        )
    return Model(parts["states"], parts["atoms"], parts["roles"])


def loads_model(text: str) -> Model:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", exc.pos)
    return validate_model(raw)


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def save_model(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model.to_json())
        fh.write("\n")


def make_model(states: Sequence[str], atoms: Mapping | None = None, roles: Mapping | None = None) -> Model:
    """Convenience constructor from Python values (strings or Fractions)."""
    raw = {
        "states": list(states),
        "atoms": {k: {s: v for s, v in col.items()} for k, col in (atoms or {}).items()},
        "roles": {k: {s: dict(row) for s, row in rows.items()} for k, rows in (roles or {}).items()},
    }
    return validate_model(raw)


# -- structural transforms ---------------------------------------------------


def disjoint_union(models: Sequence[Model]) -> tuple[Model, list[dict[str, str]]]:
    """Tagged disjoint union; state ``s`` of the k-th model becomes ``"s#k"``.

    Returns the union and one injection map per input model.
    """
    if not models:
        raise ValueError("disjoint_union needs at least one model")
    injections = [{s: f"{s}#{k}" for s in m.states} for k, m in enumerate(models)]
    states = tuple(inj[s] for m, inj in zip(models, injections) for s in m.states)
    atom_names = sorted({name for m in models for name in m.atoms})
    role_names = sorted({role for m in models for role in m.roles})
    atoms = {
        name: {
            inj[s]: m.atoms.get(name, {}).get(s, ZERO)
            for m, inj in zip(models, injections)
            for s in m.states
        }
        for name in atom_names
    }
    roles = {}
    for role in role_names:
        rows = {}
        for m, inj in zip(models, injections):
            table = m.roles.get(role, {})
            for s in m.states:
                rows[inj[s]] = {inj[t]: p for t, p in table.get(s, {}).items()}
        roles[role] = rows
    return Model(states, atoms, roles), injections


def gaifman_neighbours(model: Model) -> dict[str, set[str]]:
    """Undirected support graph over all roles (self-loops dropped)."""
    adj: dict[str, set[str]] = {s: set() for s in model.states}
    for rows in model.roles.values():
        for s, row in rows.items():
            for t in row:
                if t != s:
                    adj[s].add(t)
                    adj[t].add(s)
    return adj


def gaifman_distances(model: Model, a: str) -> dict[str, int]:
    """BFS distances from ``a``; unreachable states are absent."""
    model.check_state(a)
    adj = gaifman_neighbours(model)
    dist = {a: 0}
    queue = deque([a])
    while queue:
        s = queue.popleft()
        for t in sorted(adj[s], key=model._index.__getitem__):
            if t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return dist


def gaifman_distance(model: Model, a: str, b: str) -> int | float:
    """Gaifman graph distance, ``math.inf`` when ``b`` is unreachable."""
    model.check_state(b)
    return gaifman_distances(model, a).get(b, float("inf"))


def restrict(model: Model, a: str, k: int) -> Model:
    """Restriction to the radius-``k`` Gaifman ball around ``a``.

    States at distance exactly ``k`` become blocking for every role.
    """
    if k < 0:
        raise ValueError("radius must be non-negative")
    dist = gaifman_distances(model, a)
    keep = tuple(s for s in model.states if s in dist and dist[s] <= k)
    atoms = {name: {s: col[s] for s in keep} for name, col in model.atoms.items()}
    roles = {}
    for role, rows in model.roles.items():
        roles[role] = {
            s: (dict(rows.get(s, {})) if dist[s] < k else {})
            for s in keep
        }
    return Model(keep, atoms, roles)


def unravel(model: Model, a: str, k: int, sep: str = ".") -> tuple[Model, str]:
    """Unravelling from ``a`` truncated at depth ``k``.

    States are the paths ``a = s0, s1, ..., sj`` (``j <= k``) along positive
    transitions of any role, named by joining state names with ``sep``.  Atom
    values and rows follow the last state; paths of length ``k`` are blocking.
    """
    model.check_state(a)
    if k < 0:
        raise ValueError("depth must be non-negative")
    paths: list[tuple[str, ...]] = []
    frontier = [(a,)]
    for depth in range(k + 1):
        paths.extend(frontier)
        if depth == k:
            break
        nxt = []
        for p in frontier:
            succ = set()
            for rows in model.roles.values():
                succ.update(rows.get(p[-1], {}))
            for t in sorted(succ, key=model._index.__getitem__):
                nxt.append(p + (t,))
        frontier = nxt
    name = {p: sep.join(p) for p in paths}
    if len(set(name.values())) != len(paths):
        raise ValueError(f"state names clash under separator {sep!r}")
    states = tuple(name[p] for p in paths)
    atoms = {n: {name[p]: col[p[-1]] for p in paths} for n, col in model.atoms.items()}
    roles = {}
    for role, rows in model.roles.items():
        roles[role] = {
            name[p]: (
                {name[p + (t,)]: q for t, q in rows.get(p[-1], {}).items()}
                if len(p) <= k
                else {}
            )
            for p in paths
        }
    return Model(states, atoms, roles), name[(a,)]


def is_partial_isomorphism(
    m: Model, n: Model, left: Sequence[str], right: Sequence[str]
) -> bool:
    """Whether the tuples ``left`` (in ``m``) and ``right`` (in ``n``) match on
    equality pattern, atom values and transition probabilities of every role."""
    if len(left) != len(right):
        raise LengthMismatch(f"tuple lengths differ: {len(left)} vs {len(right)}")
    for s in left:
        m.check_state(s)
    for s in right:
        n.check_state(s)
    idx = range(len(left))
    for i in idx:
        for j in idx:
            if (left[i] == left[j]) != (right[i] == right[j]):
                return False
    for name in set(m.atoms) | set(n.atoms):
        for a, b in zip(left, right):
            if m.atoms.get(name, {}).get(a, ZERO) != n.atoms.get(name, {}).get(b, ZERO):
                return False
    for role in set(m.roles) | set(n.roles):
        mr, nr = m.roles.get(role, {}), n.roles.get(role, {})
        for i in idx:
            for j in idx:
                p = mr.get(left[i], {}).get(left[j], ZERO)
                q = nr.get(right[i], {}).get(right[j], ZERO)
                if p != q:
                    return False
    return True


# -- random generation ---------------------------------------------------------


def random_distribution(rng: random.Random, targets: Sequence[str], denom_bound: int) -> dict[str, Fraction]:
    """Random pmf over a subset of ``targets`` with denominator <= ``denom_bound``."""
    q = rng.randint(1, denom_bound)
    k = rng.randint(1, min(len(targets), q))
    support = rng.sample(list(targets), k)
    cuts = sorted(rng.sample(range(1, q), k - 1)) if k > 1 else []
    parts = [b - a for a, b in zip([0] + cuts, cuts + [q])]
    return {t: Fraction(p, q) for t, p in zip(support, parts)}


def random_model(
    rng: random.Random,
    size_bound: int = 5,
    denom_bound: int = 12,
    atom_names: Iterable[str] = ("A", "B"),
    blocking_probability: Fraction = Fraction(1, 4),
) -> Model:
    """Random model drawn with ``rng`` (a :class:`random.Random`, i.e. MT19937).

    Draw order is part of the contract so that seeds reproduce fixtures:
    state count, number of atoms, atom values state by state, then per
    state a blocking coin followed by its distribution.
    """
    n = rng.randint(2, size_bound) if size_bound >= 2 else 1
    states = [f"s{i}" for i in range(n)]
    names = list(atom_names)
    names = names[: rng.randint(1, len(names))]
    atoms = {}
    for name in names:
        col = {}
        for s in states:
            den = rng.randint(1, denom_bound)
            col[s] = Fraction(rng.randint(0, den), den)
        atoms[name] = col
    rows = {}
    for s in states:
        if rng.random() < blocking_probability:
            rows[s] = {}
        else:
            rows[s] = random_distribution(rng, states, denom_bound)
    return Model(tuple(states), atoms, {DEFAULT_ROLE: rows})


def random_models(count: int, size_bound: int, denom_bound: int, seed: int) -> list[Model]:
    rng = random.Random(seed)
    return [random_model(rng, size_bound, denom_bound) for _ in range(count)]
