import itertools
import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from pfml import fixtures
from pfml.errors import IncompleteStrategy
from pfml.game import (
    DuplicatorStrategy,
    GameSolver,
    SpoilerStrategy,
    extract_strategy,
    verify_duplicator,
    verify_spoiler,
    verify_strategy,
)
from pfml.metrics import wasserstein_table

from strategies import models

HALF = F(1, 2)


class TestExtraction:
    def test_duplicator_at_value(self, m1):
        s = extract_strategy(m1, 2, "a", "c", HALF)
        assert isinstance(s, DuplicatorStrategy)
        mu, split = s.moves["a", "c", 2]
        assert mu == {("b", "c"): HALF, ("c", "c"): HALF}
        assert split == {("b", "c"): 1, ("c", "c"): 0}
        assert verify_strategy(m1, s)

    def test_spoiler_below_value(self, m1):
        s = extract_strategy(m1, 2, "a", "c", F(1, 4))
        assert isinstance(s, SpoilerStrategy)
        assert verify_strategy(m1, s)

    def test_zero_rounds(self, m1):
        s = extract_strategy(m1, 0, "a", "b", 0)
        assert isinstance(s, DuplicatorStrategy)
        assert s.moves == {}
        assert verify_strategy(m1, s)

    def test_json(self, m1):
        data = extract_strategy(m1, 2, "a", "c", HALF).to_json()
        assert data["eps"] == "1/2"
        json.dumps(data)
        assert extract_strategy(m1, 2, "a", "c", 0).to_json()["player"] == "spoiler"


class TestVerification:
    def test_duplicator_fails_below_value(self, m1):
        s = extract_strategy(m1, 2, "a", "c", HALF)
        verdict = verify_duplicator(m1, s, eps=F(1, 4))
        assert not verdict
        assert verdict.trace
        assert any("breached" in line or "> eps" in line for line in verdict.trace)

    def test_missing_move(self, m1):
        s = DuplicatorStrategy(2, ("a", "c"), HALF)
        with pytest.raises(IncompleteStrategy):
            verify_duplicator(m1, s)

    def test_illegal_coupling_rejected(self, m1):
        s = DuplicatorStrategy(2, ("a", "c"), F(1))
        s.moves["a", "c", 2] = ({("b", "c"): F(1)}, {("b", "c"): F(0)})
        assert not verify_duplicator(m1, s, eps=HALF)

    def test_spoiler_fails_at_value(self, m1):
        s = extract_strategy(m1, 2, "a", "c", F(1, 4))
        assert not verify_spoiler(m1, s, eps=HALF)

    def test_blocking_mismatch_is_immediate(self, m1):
        s = extract_strategy(m1, 1, "b", "c", F(99, 100))
        assert isinstance(s, SpoilerStrategy)
        assert verify_spoiler(m1, s)

    def test_spoiler_choice_has_positive_mass(self, m1):
        solver = GameSolver(m1)
        s = SpoilerStrategy(2, ("a", "c"), F(0), solver)
        mu = {("b", "c"): HALF, ("c", "c"): HALF, ("b", "b"): F(0)}
        assert s.choose("a", "c", 2, mu, {}) == ("b", "c")


@pytest.mark.parametrize("name", ["m1", "m2", "m3"])
def test_strategies_on_fixtures(name):
    m = fixtures.load(name)
    for n in range(4):
        table = wasserstein_table(m, n)
        for a, b in itertools.combinations(m.states, 2):
            d = table(a, b)
            dup = extract_strategy(m, n, a, b, d)
            assert isinstance(dup, DuplicatorStrategy)
            assert verify_strategy(m, dup)
            if d > 0:
                for eps in (d - F(1, 100), F(0)):
                    if eps >= 0:
                        sp = extract_strategy(m, n, a, b, eps)
                        assert isinstance(sp, SpoilerStrategy)
                        assert verify_strategy(m, sp)


@settings(max_examples=25)
@given(models(size_bound=4))
def test_strategies_on_random_models(m):
    for a, b in itertools.combinations(m.states, 2):
        d = GameSolver(m).value(2, a, b)
        assert verify_strategy(m, extract_strategy(m, 2, a, b, d))
        if d > 0:
            assert verify_strategy(m, extract_strategy(m, 2, a, b, d / 2))
