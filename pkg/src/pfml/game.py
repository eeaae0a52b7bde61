"""The bounded epsilon-bisimulation game.

Configurations are ``(a, b, eps)`` with a number of rounds left.  Before
each round the winning condition ``|A(a) - A(b)| <= eps`` (all atoms) must
hold or Spoiler wins.  Duplicator then wins outright if ``eps >= 1`` or both
states are blocking; Spoiler wins if exactly one is.  Otherwise Duplicator
announces a coupling ``mu`` of the two successor rows and a deviation split
``eps'`` with ``E_mu(eps') <= eps``, and Spoiler picks a pair with positive
``mu`` mass, which becomes the next configuration.  A 0-round game is a
Duplicator win.

The value recursion minimizes over vertices of the transportation polytope
(:func:`pfml.lp.min_over_vertices`), never calling the simplex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction


from .errors import IncompleteStrategy
from .lp import enumerate_transport_vertices, expectation, is_coupling, min_over_vertices
from .metrics import GAME, DistanceTable
from .model import DEFAULT_ROLE, ONE, ZERO, Model, fmt

Config = tuple  # (a, b, eps, rounds_left)


class GameSolver:
    """Memoized game values ``G_k(a, b)`` and optimal couplings."""

    def __init__(self, model: Model, role: str = DEFAULT_ROLE):
        self.model = model
        self.role = role
        self._values: dict[tuple[int, str, str], Fraction] = {}
        self._moves: dict[tuple[int, str, str], dict] = {}

    def value(self, k: int, a: str, b: str) -> Fraction:
        key = (k, a, b)
        hit = self._values.get(key)
        if hit is not None:
            return hit
        m = self.model
        if k == 0:
            v = ZERO
        else:
            dev = m.atom_deviation(a, b)
            ra, rb = m.row(a, self.role), m.row(b, self.role)
            if not ra and not rb:
                v = dev
            elif not ra or not rb:
                v = ONE
            else:
                best, mu = min_over_vertices(lambda x, y: self.value(k - 1, x, y), ra, rb)
                self._moves[key] = mu
                v = max(dev, best)
        self._values[key] = v
        return v

    def best_coupling(self, k: int, a: str, b: str) -> dict | None:
        self.value(k, a, b)
        return self._moves.get((k, a, b))

    def table(self, k: int) -> DistanceTable:
        states = self.model.states
        values = {(a, b): self.value(k, a, b) for a in states for b in states}
        witnesses = {
            (a, b): self._moves[k, a, b]
            for a, b in itertools.combinations(states, 2)
            if (k, a, b) in self._moves
        }
        return DistanceTable(k, GAME, states, values, witnesses)


def game_chain(model: Model, n: int, role: str = DEFAULT_ROLE) -> list[DistanceTable]:
    solver = GameSolver(model, role)
    return [solver.table(k) for k in range(n + 1)]


def game_table(model: Model, n: int, role: str = DEFAULT_ROLE) -> DistanceTable:
    return GameSolver(model, role).table(n)


def game_value(model: Model, n: int, a: str, b: str, role: str = DEFAULT_ROLE) -> Fraction:
    model.check_state(a)
    model.check_state(b)
    return GameSolver(model, role).value(n, a, b)


# -- strategies ----------------------------------------------------------------------


@dataclass
class DuplicatorStrategy:
    """Positional strategy: ``(a, b, rounds_left) -> (mu, eps_split)``."""

    rounds: int
    start: tuple[str, str]
    eps: Fraction
    moves: dict[tuple[str, str, int], tuple[dict, dict]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "player": "duplicator",
            "rounds": self.rounds,
            "start": list(self.start),
            "eps": fmt(self.eps),
            "moves": [
                {
                    "at": [a, b, k],
                    "coupling": [{"pair": list(p), "mass": fmt(v)} for p, v in mu.items()],
                    "split": [{"pair": list(p), "eps": fmt(v)} for p, v in split.items()],
                }
                for (a, b, k), (mu, split) in self.moves.items()
            ],
        }


@dataclass
class SpoilerStrategy:
    """Responds to Duplicator's announced move by picking a successor pair.

    The response is computed lazily: against ``(mu, eps_split)`` it picks the
    ``mu``-positive pair maximizing ``child value - eps_split`` (first in
    coupling order on ties).
    """

    rounds: int
    start: tuple[str, str]
    eps: Fraction
    solver: GameSolver

    def choose(self, a: str, b: str, k: int, mu: dict, split: dict) -> tuple[str, str]:
        best = None
        for pair, mass in mu.items():
            if mass <= 0:
                continue
            gain = self.solver.value(k - 1, *pair) - split.get(pair, ZERO)
            if best is None or gain > best[0]:
                best = (gain, pair)
        return best[1]

    def to_json(self) -> dict:
        return {
            "player": "spoiler",
            "rounds": self.rounds,
            "start": list(self.start),
            "eps": fmt(self.eps),
            "rule": "pick the positive pair maximizing child value minus allotted deviation",
        }


def extract_strategy(
    model: Model, n: int, a: str, b: str, eps, role: str = DEFAULT_ROLE
) -> DuplicatorStrategy | SpoilerStrategy:
    """A winning strategy for whichever player wins ``G_n(a, b, eps)``."""
    model.check_state(a)
    model.check_state(b)
    eps = Fraction(eps)
    solver = GameSolver(model, role)
    if eps < solver.value(n, a, b):
        return SpoilerStrategy(n, (a, b), eps, solver)
    strat = DuplicatorStrategy(n, (a, b), eps)
    stack = [(a, b, n)]
    while stack:
        x, y, k = stack.pop()
        if k == 0 or (x, y, k) in strat.moves:
            continue
        mu = solver.best_coupling(k, x, y)
        if mu is None:  # blocking on at least one side: no move to make
            continue
        split = {p: solver.value(k - 1, *p) for p in mu}
        strat.moves[x, y, k] = (mu, split)
        for p in mu:
            stack.append((p[0], p[1], k - 1))
    return strat


# -- verification -------------------------------------------------------------------


@dataclass
class Verdict:
    ok: bool
    trace: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _immediate(model: Model, role: str, a: str, b: str, eps: Fraction, k: int) -> str | None:
    """'D' or 'S' when the configuration is decided before any move, else None."""
    if k == 0:
        return "D"
    dev = model.atom_deviation(a, b)
    if dev > eps:
        return "S"
    if eps >= 1:
        return "D"
    ba, bb = model.is_blocking(a, role), model.is_blocking(b, role)
    if ba and bb:
        return "D"
    if ba or bb:
        return "S"
    return None


def _describe(model, role, a, b, eps, k) -> str:
    dev = model.atom_deviation(a, b)
    return f"({a},{b},eps={fmt(eps)},rounds={k},atom deviation={fmt(dev)})"


def verify_duplicator(
    model: Model, strategy: DuplicatorStrategy, eps=None, role: str = DEFAULT_ROLE
) -> Verdict:
    """Replay the strategy against every Spoiler choice.

    ``eps`` overrides the strategy's starting deviation.  Raises
    :class:`IncompleteStrategy` if a reachable configuration has no move.
    """
    eps = strategy.eps if eps is None else Fraction(eps)
    memo: dict[Config, Verdict] = {}

    def play(a, b, e, k) -> Verdict:
        key = (a, b, e, k)
        if key in memo:
            return memo[key]
        here = _describe(model, role, a, b, e, k)
        decided = _immediate(model, role, a, b, e, k)
        if decided == "D":
            out = Verdict(True)
        elif decided == "S":
            reason = "winning condition breached" if model.atom_deviation(a, b) > e else "exactly one state blocking"
            out = Verdict(False, [f"{here}: {reason}"])
        else:
            move = strategy.moves.get((a, b, k))
            if move is None:
                raise IncompleteStrategy(f"no Duplicator move at {here}")
            mu, split = move
            if not is_coupling(mu, model.row(a, role), model.row(b, role)):
                out = Verdict(False, [f"{here}: announced measure is not a coupling"])
            elif any(not ZERO <= split.get(p, ZERO) <= ONE for p in mu):
                out = Verdict(False, [f"{here}: deviation split outside [0,1]"])
            else:
                spent = expectation(mu, lambda x, y: split.get((x, y), ZERO))
                if spent > e:
                    out = Verdict(False, [f"{here}: E_mu(eps') = {fmt(spent)} > eps"])
                else:
                    out = Verdict(True)
                    for p, mass in mu.items():
                        if mass <= 0:
                            continue
                        sub = play(p[0], p[1], split.get(p, ZERO), k - 1)
                        if not sub:
                            out = Verdict(False, [f"{here}: Spoiler picks {p}"] + sub.trace)
                            break
        memo[key] = out
        return out

    return play(strategy.start[0], strategy.start[1], eps, strategy.rounds)


def _adversary_moves(solver: GameSolver, a: str, b: str, eps: Fraction, k: int, max_couplings: int):
    """Finite family of legal Duplicator moves used to test Spoiler strategies.

    Couplings: the polytope vertices (at most ``max_couplings``) and their
    barycenter.  Splits per coupling: the child values scaled down to budget,
    all budget on one pair, child values on all but one pair with the rest of
    the budget there, and the zero split.
    """
    m, role = solver.model, solver.role
    ra, rb = m.row(a, role), m.row(b, role)
    verts = enumerate_transport_vertices(ra, rb)[:max_couplings]
    couplings = list(verts)
    if len(verts) > 1:
        bary: dict = {}
        for mu in verts:
            for p, v in mu.items():
                bary[p] = bary.get(p, ZERO) + v / len(verts)
        couplings.append(bary)
    for mu in couplings:
        child = {p: solver.value(k - 1, *p) for p in mu}
        spent = expectation(mu, lambda x, y: child[x, y])
        splits = [{p: ZERO for p in mu}]
        if spent > 0:
            scale = min(ONE, eps / spent)
            splits.append({p: child[p] * scale for p in mu})
        for p, mass in mu.items():
            splits.append({q: (min(ONE, eps / mass) if q == p else ZERO) for q in mu})
            rest = spent - mass * child[p]
            if rest <= eps:
                split = dict(child)
                split[p] = min(ONE, (eps - rest) / mass)
                splits.append(split)
        for split in splits:
            if expectation(mu, lambda x, y: split[x, y]) <= eps:
                yield mu, split


def verify_spoiler(
    model: Model, strategy: SpoilerStrategy, eps=None, role: str = DEFAULT_ROLE, max_couplings: int = 64
) -> Verdict:
    """Replay the Spoiler strategy against a finite family of Duplicator moves
    (see :func:`_adversary_moves`); fails if any reachable play is a Duplicator win."""
    eps = strategy.eps if eps is None else Fraction(eps)
    solver = strategy.solver
    memo: dict[Config, Verdict] = {}

    def play(a, b, e, k) -> Verdict:
        key = (a, b, e, k)
        if key in memo:
            return memo[key]
        here = _describe(model, role, a, b, e, k)
        decided = _immediate(model, role, a, b, e, k)
        if decided == "S":
            out = Verdict(True)
        elif decided == "D":
            out = Verdict(False, [f"{here}: Duplicator wins"])
        else:
            out = Verdict(True)
            for mu, split in _adversary_moves(solver, a, b, e, k, max_couplings):
                p = strategy.choose(a, b, k, mu, split)
                if mu.get(p, ZERO) <= 0:
                    out = Verdict(False, [f"{here}: Spoiler picked {p} outside the coupling support"])
                    break
                sub = play(p[0], p[1], split[p], k - 1)
                if not sub:
                    out = Verdict(False, [f"{here}: Spoiler picks {p} against eps'={fmt(split[p])}"] + sub.trace)
                    break
        memo[key] = out
        return out

    return play(strategy.start[0], strategy.start[1], eps, strategy.rounds)


def verify_strategy(model: Model, strategy, eps=None, role: str = DEFAULT_ROLE) -> Verdict:
    if isinstance(strategy, DuplicatorStrategy):
        return verify_duplicator(model, strategy, eps, role)
    return verify_spoiler(model, strategy, eps, role)
