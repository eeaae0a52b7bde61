"""Exact rational linear programming for discrete optimal transport.

``linprog`` is a dense two-phase tableau simplex over ``Fraction`` with
Bland's rule, so it terminates and returns exact optima.  On top of it sit
the two liftings of a ground pseudometric to distributions: the transport
(Wasserstein) minimum over couplings and the potential (Kantorovich)
maximum over non-expansive functions.  ``enumerate_transport_vertices`` lists
the vertices of the transportation polytope without any pivoting and serves
as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Callable, Hashable, Mapping, Sequence

from .errors import MarginalInvalid, SupportTooLarge

ZERO = Fraction(0)
ONE = Fraction(1)

Distribution = Mapping[Hashable, Fraction]
Coupling = dict  # (x, y) -> Fraction, positive entries only
Cost = Callable[[Hashable, Hashable], Fraction]


class LPError(ArithmeticError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


@dataclass
class LPResult:
    value: Fraction
    x: list[Fraction]


def _pivot(tab: list[list[Fraction]], obj: list[Fraction], basis: list[int], r: int, c: int) -> None:
    row = tab[r]
    p = row[c]
    if p != 1:
        inv = 1 / p
        row[:] = [v * inv for v in row]
    for i, other in enumerate(tab):
        if i != r:
            f = other[c]
            if f:
                other[:] = [a - f * b for a, b in zip(other, row)]
    f = obj[c]
    if f:
        obj[:] = [a - f * b for a, b in zip(obj, row)]
    basis[r] = c


def _simplex(tab, obj, basis, allowed: int) -> None:
    """Minimize; ``obj`` holds reduced costs with ``-z`` in the last slot.

    Only columns ``< allowed`` may enter.  Bland's rule on both choices.
    """
    while True:
        enter = next((j for j in range(allowed) if obj[j] < 0), None)
        if enter is None:
            return
        best = None
        for i, row in enumerate(tab):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise Unbounded("objective unbounded below")
        _pivot(tab, obj, basis, best[1], enter)


def linprog(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
) -> LPResult:
    """Minimize ``c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``, ``x >= 0``.

    All inputs are converted to ``Fraction``; the result is exact.
    """
    n = len(c)
    c = [Fraction(v) for v in c]
    rows: list[tuple[list[Fraction], Fraction, str]] = []
    for a, b in zip(A_ub, b_ub):
        rows.append(([Fraction(v) for v in a], Fraction(b), "ub"))
    for a, b in zip(A_eq, b_eq):
        rows.append(([Fraction(v) for v in a], Fraction(b), "eq"))
    n_slack = sum(1 for r in rows if r[2] == "ub")
    # column layout: [original n | slacks | artificials] + rhs
    tab: list[list[Fraction]] = []
    basis: list[int] = []
    art_rows = []
    slack_col = n
    for a, b, kind in rows:
        row = a + [ZERO] * n_slack
        if kind == "ub":
            row[slack_col] = ONE
            if b < 0:
                row = [-v for v in row]
                b = -b
                art_rows.append(len(tab))
                basis.append(-1)
            else:
                basis.append(slack_col)
            slack_col += 1
        else:
            if b < 0:
                row = [-v for v in row]
                b = -b
            art_rows.append(len(tab))
            basis.append(-1)
        tab.append(row + [b])
    n_art = len(art_rows)
    width = n + n_slack + n_art
    for i, row in enumerate(tab):
        rhs = row.pop()
        row.extend([ZERO] * n_art)
        row.append(rhs)
    for k, i in enumerate(art_rows):
        col = n + n_slack + k
        tab[i][col] = ONE
        basis[i] = col

    if n_art:
        obj = [ZERO] * (width + 1)
        for k in range(n_art):
            obj[n + n_slack + k] = ONE
        for i in art_rows:
            obj = [o - v for o, v in zip(obj, tab[i])]
        _simplex(tab, obj, basis, width)
        if obj[-1] != 0:
            raise Infeasible("constraints are infeasible")
        # drive zero-level artificials out of the basis, dropping redundant rows
        first_art = n + n_slack
        i = 0
        while i < len(tab):
            if basis[i] >= first_art:
                col = next((j for j in range(first_art) if tab[i][j] != 0), None)
                if col is None:
                    del tab[i]
                    del basis[i]
                    continue
                _pivot(tab, obj, basis, i, col)
            i += 1
        for row in tab:
            del row[first_art:width]
        width = first_art

    obj = [ZERO] * (width + 1)
    for j in range(n):
        obj[j] = c[j]
    for i, j in enumerate(basis):
        f = obj[j]
        if f:
            obj = [o - f * v for o, v in zip(obj, tab[i])]
    _simplex(tab, obj, basis, width)
    x = [ZERO] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = tab[i][-1]
    value = sum((cj * xj for cj, xj in zip(c, x)), ZERO)
    return LPResult(value, x)


# -- distributions ---------------------------------------------------------------


def check_distribution(pi: Distribution, name: str = "distribution") -> None:
    total = ZERO
    for point, p in pi.items():
        if not isinstance(p, Fraction) and not isinstance(p, int):
            raise MarginalInvalid(f"{name}: non-rational mass {p!r} at {point!r}")
        if p <= 0:
            raise MarginalInvalid(f"{name}: non-positive mass {p} at {point!r}")
        total += p
    if total != 1:
        raise MarginalInvalid(f"{name}: total mass {total}, expected 1")


def _cost_fn(ground) -> Cost:
    if callable(ground):
        return ground
    return lambda x, y: ground[x, y]


def coupling_marginals(coupling: Mapping) -> tuple[dict, dict]:
    left: dict = {}
    right: dict = {}
    for (x, y), p in coupling.items():
        left[x] = left.get(x, ZERO) + p
        right[y] = right.get(y, ZERO) + p
    return left, right


def is_coupling(coupling: Mapping, pi1: Distribution, pi2: Distribution) -> bool:
    if any(p < 0 for p in coupling.values()):
        return False
    left, right = coupling_marginals({k: v for k, v in coupling.items() if v})
    return left == {k: v for k, v in pi1.items() if v} and right == {k: v for k, v in pi2.items() if v}


def expectation(coupling: Mapping, values) -> Fraction:
    """E_mu(values) for ``values`` a callable or mapping on pairs."""
    fn = _cost_fn(values)
    return sum((p * fn(x, y) for (x, y), p in coupling.items()), ZERO)


def solve_transport_min(ground, pi1: Distribution, pi2: Distribution) -> tuple[Fraction, Coupling]:
    """Minimum expected ground cost over couplings of ``pi1`` and ``pi2``.

    ``ground`` is a callable ``(x, y) -> Fraction`` or a mapping on pairs.
    Returns the exact optimum and an optimal coupling.
    """
    check_distribution(pi1, "first marginal")
    check_distribution(pi2, "second marginal")
    cost = _cost_fn(ground)
    xs, ys = list(pi1), list(pi2)
    pairs = [(x, y) for x in xs for y in ys]
    c = [cost(x, y) for x, y in pairs]
    A_eq, b_eq = [], []
    for i, x in enumerate(xs):
        A_eq.append([ONE if k // len(ys) == i else ZERO for k in range(len(pairs))])
        b_eq.append(pi1[x])
    # the last column constraint is implied by the others
    for j, y in enumerate(ys[:-1]):
        A_eq.append([ONE if k % len(ys) == j else ZERO for k in range(len(pairs))])
        b_eq.append(pi2[y])
    res = linprog(c, A_eq=A_eq, b_eq=b_eq)
    coupling = {pair: v for pair, v in zip(pairs, res.x) if v}
    return res.value, coupling


def solve_kantorovich_max(ground, pi1: Distribution, pi2: Distribution) -> tuple[Fraction, dict]:
    """Maximum of |E_pi1(f) - E_pi2(f)| over non-expansive ``f`` into [0, 1].

    Variables are the values of ``f`` on the union of the supports.  Both
    sign orientations are solved; the returned potential is oriented so that
    ``E_pi1(f) - E_pi2(f)`` equals the returned value.
    """
    check_distribution(pi1, "first marginal")
    check_distribution(pi2, "second marginal")
    cost = _cost_fn(ground)
    points = list(dict.fromkeys(list(pi1) + list(pi2)))
    k = len(points)
    A_ub, b_ub = [], []
    for i, x in enumerate(points):
        for j, y in enumerate(points):
            if i != j:
                row = [ZERO] * k
                row[i], row[j] = ONE, -ONE
                A_ub.append(row)
                b_ub.append(cost(x, y))
        row = [ZERO] * k
        row[i] = ONE
        A_ub.append(row)
        b_ub.append(ONE)
    gap = [pi1.get(z, ZERO) - pi2.get(z, ZERO) for z in points]
    best = None
    for sign in (1, -1):
        res = linprog([-sign * g for g in gap], A_ub=A_ub, b_ub=b_ub)
        value = -res.value
        if best is None or value > best[0]:
            f = dict(zip(points, res.x))
            if sign == -1:
                f = {z: ONE - v for z, v in f.items()}
            best = (value, f)
    return best


def extend_potential(f: Mapping, ground, points: Sequence) -> dict:
    """Truncated McShane extension z -> min(1, min_x f(x) + d(x, z)).

    Agrees with ``f`` on its domain when ``f`` is non-expansive and stays
    non-expansive on ``points``.
    """
    cost = _cost_fn(ground)
    return {z: min([ONE] + [fx + cost(x, z) for x, fx in f.items()]) for z in points}


def is_nonexpansive(f: Mapping, ground) -> bool:
    cost = _cost_fn(ground)
    return all(abs(f[x] - f[y]) <= cost(x, y) for x in f for y in f)


def weak_duality_holds(ground, pi1: Distribution, pi2: Distribution, coupling: Mapping, f: Mapping) -> bool:
    """E_pi1(f) - E_pi2(f) <= E_mu(d) for a feasible potential and coupling."""
    gap = sum((p * f[x] for x, p in pi1.items()), ZERO) - sum((p * f[y] for y, p in pi2.items()), ZERO)
    return gap <= expectation(coupling, ground)


def lift_with_blocking(ground, row1: Distribution, row2: Distribution, solver=solve_transport_min) -> Fraction:
    """Lifted distance where the zero row (blocking state) is at distance 1
    from every distribution and 0 from itself."""
    if not row1 and not row2:
        return ZERO
    if not row1 or not row2:
        return ONE
    return solver(ground, row1, row2)[0]


# -- vertex enumeration ------------------------------------------------------------

DEFAULT_VERTEX_BOUND = 5


def enumerate_transport_vertices(
    pi1: Distribution, pi2: Distribution, bound: int = DEFAULT_VERTEX_BOUND
) -> list[Coupling]:
    """All vertices of the transportation polytope of ``pi1`` and ``pi2``.

    Every vertex has a forest as support, and a forest has a leaf line whose
    single cell carries min(remaining row mass, remaining column mass).  So
    the vertices are exactly what is obtained by repeatedly saturating some
    cell and deleting the exhausted line(s); each such choice sequence yields
    a forest support, hence a vertex.  Results are deduplicated by value.
    """
    check_distribution(pi1, "first marginal")
    check_distribution(pi2, "second marginal")
    xs, ys = list(pi1), list(pi2)
    if len(xs) > bound or len(ys) > bound:
        raise SupportTooLarge(f"supports {len(xs)}x{len(ys)} exceed bound {bound}")
    memo: dict[tuple, frozenset] = {}

    def rec(a: tuple, b: tuple) -> frozenset:
        key = (a, b)
        hit = memo.get(key)
        if hit is not None:
            return hit
        rows = [i for i, v in enumerate(a) if v]
        if not rows:
            return frozenset([frozenset()])
        cols = [j for j, v in enumerate(b) if v]
        out = set()
        for i in rows:
            for j in cols:
                v = min(a[i], b[j])
                na = a[:i] + (a[i] - v,) + a[i + 1:]
                nb = b[:j] + (b[j] - v,) + b[j + 1:]
                cell = ((i, j), v)
                for rest in rec(na, nb):
                    out.add(rest | {cell})
        result = frozenset(out)
        memo[key] = result
        return result

    vertices = rec(tuple(pi1[x] for x in xs), tuple(pi2[y] for y in ys))
    out = [{(xs[i], ys[j]): v for (i, j), v in sorted(vert)} for vert in vertices]
    out.sort(key=lambda mu: sorted((str(k), v) for k, v in mu.items()))
    return out


def min_over_vertices(
    ground, pi1: Distribution, pi2: Distribution, bound: int = DEFAULT_VERTEX_BOUND
) -> tuple[Fraction, Coupling]:
    """Minimum of E_mu(ground) over the vertices of the transportation polytope.

    Runs the same cell-saturation recursion as
    :func:`enumerate_transport_vertices`, but folds the objective in and
    memoizes on the remaining marginals instead of materializing every vertex.
    Masses and costs are scaled to integers.  No pivoting is involved.
    """
    check_distribution(pi1, "first marginal")
    check_distribution(pi2, "second marginal")
    xs, ys = list(pi1), list(pi2)
    if len(xs) > bound or len(ys) > bound:
        raise SupportTooLarge(f"supports {len(xs)}x{len(ys)} exceed bound {bound}")
    cost = _cost_fn(ground)
    fc = [[Fraction(cost(x, y)) for y in ys] for x in xs]
    mass_scale = _lcm_den(list(pi1.values()) + list(pi2.values()))
    cost_scale = _lcm_den([v for row in fc for v in row])
    ic = [[int(v * cost_scale) for v in row] for row in fc]
    a0 = tuple(int(pi1[x] * mass_scale) for x in xs)
    b0 = tuple(int(pi2[y] * mass_scale) for y in ys)
    memo: dict[tuple, tuple[int, tuple | None]] = {}

    def rec(a: tuple, b: tuple) -> int:
        key = (a, b)
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        rows = [i for i, v in enumerate(a) if v]
        if not rows:
            memo[key] = (0, None)
            return 0
        cols = [j for j, v in enumerate(b) if v]
        best, arg = None, None
        for i in rows:
            ai = a[i]
            for j in cols:
                v = ai if ai < b[j] else b[j]
                na = a[:i] + (ai - v,) + a[i + 1:]
                nb = b[:j] + (b[j] - v,) + b[j + 1:]
                total = v * ic[i][j] + rec(na, nb)
                if best is None or total < best:
                    best, arg = total, (i, j, v, na, nb)
        memo[key] = (best, arg)
        return best

    best = rec(a0, b0)
    coupling: Coupling = {}
    a, b = a0, b0
    while True:
        arg = memo[(a, b)][1]
        if arg is None:
            break
        i, j, v, a, b = arg
        coupling[(xs[i], ys[j])] = Fraction(v, mass_scale)
    return Fraction(best, mass_scale * cost_scale), coupling


def _lcm_den(values) -> int:
    out = 1
    for v in values:
        out = lcm(out, Fraction(v).denominator)
    return out
