"""Invariant suites run over fixture or random models.

Each suite takes a model, a depth and a seeded ``random.Random`` and returns
``None`` on success or a description of the first counterexample.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .game import game_chain
from .lp import (
    expectation,
    is_coupling,
    is_nonexpansive,
    solve_kantorovich_max,
    solve_transport_min,
    weak_duality_holds,
)
from .metrics import cross_distance, kantorovich_chain, wasserstein_chain
from .model import DEFAULT_ROLE, Model, disjoint_union, fmt, restrict, unravel
from .semantics import apply_diamond, eval_concept, eval_formula, sup_distance
from .synthesis import Synthesizer
from .syntax import random_concept, rank, standard_translation, to_text

SAMPLES = 200


def random_valuation(rng: random.Random, states: Sequence[str], denom_bound: int = 12) -> dict:
    out = {}
    for s in states:
        den = rng.randint(1, denom_bound)
        out[s] = Fraction(rng.randint(0, den), den)
    return out


def check_duality(model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE) -> str | None:
    """Primal transport value equals dual potential value at every stage."""
    chain = wasserstein_chain(model, max(depth - 1, 0), role)
    for table in chain:
        for a, b in itertools.combinations(model.states, 2):
            ra, rb = model.row(a, role), model.row(b, role)
            if not ra or not rb:
                continue
            primal, mu = solve_transport_min(table, ra, rb)
            dual, f = solve_kantorovich_max(table, ra, rb)
            where = f"depth {table.depth + 1}, pair ({a},{b})"
            if not is_coupling(mu, ra, rb):
                return f"{where}: coupling has wrong marginals"
            if not is_nonexpansive(f, table) or any(not 0 <= v <= 1 for v in f.values()):
                return f"{where}: potential infeasible"
            if not weak_duality_holds(table, ra, rb, mu, f):
                return f"{where}: weak duality violated"
            if expectation(mu, table) != primal:
                return f"{where}: coupling cost differs from reported optimum"
            if primal != dual:
                return f"{where}: primal {fmt(primal)} != dual {fmt(dual)}"
    return None


def check_coincidence(model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE) -> str | None:
    """Wasserstein, Kantorovich, game and witness distances agree exactly."""
    w = wasserstein_chain(model, depth, role)
    k = kantorovich_chain(model, depth, role)
    g = game_chain(model, depth, role)
    synth = Synthesizer(model, role)
    for n in range(depth + 1):
        lw = synth.table(n)
        for a, b in itertools.combinations(model.states, 2):
            vals = (w[n][a, b], k[n][a, b], g[n][a, b], lw[a, b])
            if len(set(vals)) != 1:
                shown = ", ".join(fmt(v) for v in vals)
                return f"depth {n}, pair ({a},{b}): W/K/G/L = {shown}"
            if a != b and rank(lw.witnesses[a, b]) > n:
                return f"depth {n}, pair ({a},{b}): witness rank exceeds depth"
    return None


def check_monotone(model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE) -> str | None:
    """d_n <= d_{n+1} pointwise, and every table is a pseudometric."""
    chain = wasserstein_chain(model, depth, role)
    for table in chain:
        bad = table.axiom_violations()
        if bad:
            return f"depth {table.depth}: {bad[0]}"
    for lo, hi in zip(chain, chain[1:]):
        for pair, v in lo.values.items():
            if v > hi[pair]:
                return f"d_{lo.depth}{pair} = {fmt(v)} > d_{hi.depth} = {fmt(hi[pair])}"
    return None


def check_nonexpansive(
    model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE, samples: int = SAMPLES
) -> str | None:
    """The diamond is non-expansive in sup norm, and rank-n concepts are
    non-expansive for d_n."""
    for _ in range(samples):
        f = random_valuation(rng, model.states)
        g = random_valuation(rng, model.states)
        lhs = sup_distance(apply_diamond(model, f, role), apply_diamond(model, g, role))
        if lhs > sup_distance(f, g):
            return f"||<>f - <>g|| = {fmt(lhs)} > ||f - g|| for f={f}, g={g}"
    table = wasserstein_chain(model, depth, role)[-1]
    for _ in range(samples):
        c = random_concept(rng, depth, model.atom_names, (role,))
        v = eval_concept(model, c)
        for a, b in itertools.combinations(model.states, 2):
            if abs(v[a] - v[b]) > table[a, b]:
                return f"{to_text(c)} separates ({a},{b}) by more than d_{depth}"
    return None


def check_locality(
    model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE, samples: int = 100
) -> str | None:
    """Standard translations of rank-k concepts are k-local."""
    for _ in range(samples):
        c = random_concept(rng, depth, model.atom_names, (role,))
        k = rank(c)
        phi = standard_translation(c)
        for a in model.states:
            local = restrict(model, a, k)
            full = eval_formula(model, phi, {"x": a})
            part = eval_formula(local, phi, {"x": a})
            if full != part:
                return f"{to_text(c)} at {a}: {fmt(full)} vs {fmt(part)} in radius {k}"
    return None


def check_translation(
    model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE, samples: int = SAMPLES
) -> str | None:
    """C(a) = ST_x(C)(a) on sampled concepts."""
    for _ in range(samples):
        c = random_concept(rng, depth, model.atom_names, (role,))
        phi = standard_translation(c)
        v = eval_concept(model, c)
        for a in model.states:
            if v[a] != eval_formula(model, phi, {"x": a}):
                return f"{to_text(c)} at {a}"
    return None


def check_restrict(model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE) -> str | None:
    """d_k(a, a in the radius-k restriction) = 0."""
    for a in model.states:
        for k in range(depth + 1):
            d = cross_distance(model, a, restrict(model, a, k), a, k, role=role)
            if d != 0:
                return f"d_{k}({a}, restricted {a}) = {fmt(d)}"
    return None


def check_unravel(model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE) -> str | None:
    """d_n(a, root of the depth-k unravelling) = 0 for n <= k."""
    for a in model.states:
        for k in range(depth + 1):
            tree, root = unravel(model, a, k)
            for n in range(k + 1):
                d = cross_distance(model, a, tree, root, n, role=role)
                if d != 0:
                    return f"d_{n}({a}, root of unravel({a},{k})) = {fmt(d)}"
    return None


def check_union(model: Model, depth: int, rng: random.Random, role: str = DEFAULT_ROLE) -> str | None:
    """States are at distance 0 from their copies in a disjoint union."""
    union, (inj, _) = disjoint_union([model, model])
    for a in model.states:
        for n in range(depth + 1):
            d = cross_distance(model, a, union, inj[a], n, role=role)
            if d != 0:
                return f"d_{n}({a}, {inj[a]}) = {fmt(d)}"
    return None


SUITES: dict[str, Callable] = {
    "duality": check_duality,
    "coincidence": check_coincidence,
    "monotone": check_monotone,
    "nonexpansive": check_nonexpansive,
    "locality": check_locality,
    "translation": check_translation,
    "restrict": check_restrict,
    "unravel": check_unravel,
    "union": check_union,
}


@dataclass
class SuiteResult:
    name: str
    total: int = 0
    passed: int = 0
    first_failure: str | None = None
    failures: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "total": self.total,
            "ok": self.ok,
            "first_failure": self.first_failure,
        }


def run_suites(models: Sequence[Model], names: Sequence[str], depth: int, seed: int = 0) -> list[SuiteResult]:
    """Run each named suite over ``models`` in order; deterministic in ``seed``."""
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s): {', '.join(unknown)}")
    results = []
    for name in names:
        res = SuiteResult(name)
        for i, model in enumerate(models):
            rng = random.Random(f"{seed}:{name}:{i}")
            failure = SUITES[name](model, depth, rng)
            res.total += 1
            if failure is None:
                res.passed += 1
            else:
                res.failures.append(i)
                if res.first_failure is None:
                    res.first_failure = f"model {i}: {failure}"
        results.append(res)
    return results
