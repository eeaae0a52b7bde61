from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from pfml import fixtures
from pfml.game import game_chain, game_value
from pfml.metrics import (
    GAME,
    KANTOROVICH,
    WASSERSTEIN,
    cross_distance,
    describe_witness,
    kantorovich_chain,
    kantorovich_table,
    locality_check,
    logical_lb_table,
    pair_distance,
    stabilized,
    wasserstein_chain,
    wasserstein_table,
)
from pfml.errors import SupportTooLarge
from pfml.model import disjoint_union, make_model, restrict, unravel
from pfml.semantics import eval_concept
from pfml.syntax import Const, parse_concept, parse_formula, rank, standard_translation, to_text

from strategies import models

HALF = F(1, 2)


class TestWasserstein:
    def test_m1_depth_one(self, m1):
        t = wasserstein_table(m1, 1)
        assert (t("a", "b"), t("a", "c"), t("b", "c")) == (1, F(3, 10), 1)

    def test_m1_depth_two(self, m1):
        t = wasserstein_table(m1, 2)
        assert t("a", "c") == HALF
        assert t.witnesses["a", "c"] == {("b", "c"): HALF, ("c", "c"): HALF}

    def test_depth_zero(self, m2):
        assert all(v == 0 for v in wasserstein_table(m2, 0).values.values())

    def test_m2(self, m2):
        # p, q differ on B by 1/12; their rows move 1/6 mass between s and t (d_1 = 1)
        assert wasserstein_table(m2, 1)("p", "q") == F(1, 12)
        assert wasserstein_table(m2, 2)("p", "q") == F(1, 6)
        # coupling of p's row with s's row is forced: 2/3 of the mass on (t, s)
        assert wasserstein_table(m2, 2)("p", "s") == F(2, 3)

    def test_bisimilar_fixture(self, m3):
        for t in wasserstein_chain(m3, 4):
            assert all(v == 0 for v in t.values.values())


class TestKantorovich:
    def test_m1_equal_to_wasserstein(self, m1):
        w, k = wasserstein_chain(m1, 4), kantorovich_chain(m1, 4)
        assert all(x.values == y.values for x, y in zip(w, k))

    def test_m1_witness_potential(self, m1):
        f = kantorovich_table(m1, 2).witnesses["a", "c"]
        assert {f["b"], f["c"]} == {F(0), F(1)}

    def test_depth_zero(self, m1):
        assert all(v == 0 for v in kantorovich_table(m1, 0).values.values())


class TestGame:
    def test_examples(self, m1):
        assert game_value(m1, 2, "a", "c") == HALF
        assert game_value(m1, 1, "b", "c") == 1
        assert game_value(m1, 0, "a", "b") == 0

    def test_support_bound(self):
        states = [f"s{i}" for i in range(6)]
        row = {s: "1/6" for s in states}
        m = make_model(states, {}, {"r": {s: row for s in states}})
        with pytest.raises(SupportTooLarge):
            game_value(m, 2, "s0", "s1")

    @pytest.mark.parametrize("name", ["m1", "m2", "m3"])
    def test_fixtures_agree(self, name):
        m = fixtures.load(name)
        for g, w in zip(game_chain(m, 4), wasserstein_chain(m, 4)):
            assert g.values == w.values


@given(models())
def test_three_engines_agree(m):
    for w, k, g in zip(wasserstein_chain(m, 3), kantorovich_chain(m, 3), game_chain(m, 3)):
        assert w.values == k.values == g.values


@given(models(size_bound=6))
def test_monotone_and_pseudometric(m):
    chain = wasserstein_chain(m, 5)
    for t in chain:
        assert t.axiom_violations() == []
    for lo, hi in zip(chain, chain[1:]):
        assert all(lo[p] <= hi[p] for p in lo.values)


@given(models(size_bound=5), st.data())
def test_pair_distance_matches_table(m, data):
    n = data.draw(st.integers(0, 3))
    a = data.draw(st.sampled_from(m.states))
    b = data.draw(st.sampled_from(m.states))
    t = wasserstein_table(m, n)
    for method in (WASSERSTEIN, KANTOROVICH, GAME):
        assert pair_distance(m, n, a, b, method) == t(a, b)


class TestTransforms:
    def test_restriction_tightness(self, m1):
        r = restrict(m1, "a", 1)
        assert cross_distance(m1, "a", r, "a", 1) == 0
        assert cross_distance(m1, "a", r, "a", 2) == HALF

    def test_unravelling_tightness(self, m1):
        tree, root = unravel(m1, "a", 2)
        for n in range(3):
            assert cross_distance(m1, "a", tree, root, n) == 0
        for method in (WASSERSTEIN, KANTOROVICH, GAME):
            assert cross_distance(m1, "a", tree, root, 3, method) == HALF

    @given(models(size_bound=4), st.integers(0, 3), st.data())
    def test_restriction_is_invisible_at_radius_depth(self, m, k, data):
        a = data.draw(st.sampled_from(m.states))
        assert cross_distance(m, a, restrict(m, a, k), a, k) == 0

    @given(models(size_bound=4), st.integers(0, 3), st.data())
    def test_unravelling_is_invisible_up_to_depth(self, m, k, data):
        a = data.draw(st.sampled_from(m.states))
        tree, root = unravel(m, a, k)
        assert all(cross_distance(m, a, tree, root, n) == 0 for n in range(k + 1))

    @given(models(size_bound=4))
    def test_union_copies(self, m):
        u, (inj, _) = disjoint_union([m, m])
        assert all(cross_distance(m, a, u, inj[a], 3) == 0 for a in m.states)


class TestLogicalLowerBound:
    def test_m1_depth_one(self, m1):
        t = logical_lb_table(m1, 1)
        assert t("a", "c") == F(3, 10)
        assert to_text(t.witnesses["a", "c"]) == "A"
        assert t("b", "c") == 1
        # A and the blocking detector <r> 1 both separate b from c by 1
        v = eval_concept(m1, t.witnesses["b", "c"])
        assert abs(v["b"] - v["c"]) == 1
        v = eval_concept(m1, parse_concept("<r> 1"))
        assert abs(v["b"] - v["c"]) == 1

    @given(models(size_bound=4))
    def test_sound(self, m):
        lb, w = logical_lb_table(m, 2, budget=300), wasserstein_table(m, 2)
        assert all(lb[p] <= w[p] for p in w.values)
        for p, c in lb.witnesses.items():
            assert rank(c) <= 2


class TestLocality:
    def test_rank_two_concept_is_local(self, m1):
        res = locality_check(m1, "a", standard_translation(parse_concept("<r> A")), 2)
        assert (res.full, res.restricted, res.equal) == (HALF, HALF, True)

    def test_unrestricted_exists_is_not_local(self, m1):
        res = locality_check(m1, "c", parse_formula("E y. A(y)"), 1)
        assert (res.full, res.restricted, res.equal) == (1, F(3, 10), False)

    @pytest.mark.parametrize("k", [0, 1, 3])
    def test_constant(self, m1, k):
        res = locality_check(m1, "b", Const(F(1, 4)), k)
        assert (res.full, res.restricted, res.equal) == (F(1, 4), F(1, 4), True)

    def test_several_free_variables(self, m1):
        with pytest.raises(ValueError):
            locality_check(m1, "a", parse_formula("x = y"), 1)


def test_stabilization_flag(m1, m3):
    assert not stabilized(wasserstein_chain(m1, 2))
    assert stabilized(wasserstein_chain(m1, 3))
    assert not stabilized(wasserstein_chain(m1, 0))


def test_table_json(m1):
    data = wasserstein_table(m1, 2).to_json()
    assert data["method"] == "wasserstein"
    assert {"pair": ["a", "c"], "value": "1/2"} in data["values"]
    assert describe_witness({("b", "c"): HALF}) == [{"at": ["b", "c"], "value": "1/2"}]
