import itertools
import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from pfml import fixtures
from pfml.errors import NotNonexpansive
from pfml.lp import solve_kantorovich_max
from pfml.metrics import wasserstein_table
from pfml.semantics import apply_diamond, eval_concept
from pfml.synthesis import Synthesizer, logical_witness_table, pairwise_interpolant, reconstruct_function, synthesize_witness
from pfml.syntax import And, Atom, Const, TruncSub, from_json, parse_concept, rank, to_text, trunc_add

from strategies import models

HALF = F(1, 2)


class TestInterpolant:
    def test_same_state(self, m1):
        assert pairwise_interpolant(m1, 1, "a", "a", HALF, HALF) == Const(HALF)

    def test_equal_targets(self, m1):
        g = pairwise_interpolant(m1, 1, "a", "b", F(1, 3), F(1, 3))
        assert g == Const(F(1, 3)) and rank(g) == 0

    def test_m1_pair_b_c(self, m1):
        g = pairwise_interpolant(m1, 1, "b", "c", F(1), F(1, 4))
        v = eval_concept(m1, g)
        assert (v["b"], v["c"]) == (1, F(1, 4))
        assert rank(g) <= 1

    def test_hand_built_form_with_atom(self, m1):
        g = trunc_add(And(TruncSub(Atom("A"), F(0)), Const(F(3, 4))), F(1, 4))
        v = eval_concept(m1, g)
        assert (v["b"], v["c"]) == (1, F(1, 4))

    def test_rejects_expansive_targets(self, m1):
        with pytest.raises(NotNonexpansive):
            pairwise_interpolant(m1, 1, "a", "c", F(1), F(0))
        with pytest.raises(NotNonexpansive):
            pairwise_interpolant(m1, 1, "a", "a", F(1), F(0))


class TestReconstruct:
    def test_constant(self, m1):
        c = reconstruct_function(m1, 2, {"a": HALF, "b": HALF, "c": HALF})
        assert eval_concept(m1, c) == {"a": HALF, "b": HALF, "c": HALF}

    def test_atom_valuation(self, m1):
        f = {"a": F(3, 10), "b": F(1), "c": F(0)}
        c = reconstruct_function(m1, 1, f)
        assert eval_concept(m1, c) == f
        assert rank(c) <= 1

    def test_kantorovich_potential(self, m1):
        d1 = wasserstein_table(m1, 1)
        _, f = solve_kantorovich_max(d1, m1.row("a"), m1.row("c"))
        c = reconstruct_function(m1, 1, f)
        v = eval_concept(m1, c)
        assert all(v[s] == f[s] for s in f)

    def test_domain_subset(self, m1):
        c = reconstruct_function(m1, 1, {"b": F(1, 5), "c": F(4, 5), "a": F(1)}, domain=["b", "c"])
        v = eval_concept(m1, c)
        assert (v["b"], v["c"]) == (F(1, 5), F(4, 5))

    def test_rejects_expansive(self, m1):
        with pytest.raises(NotNonexpansive):
            reconstruct_function(m1, 1, {"a": F(0), "c": F(1)})

    @settings(max_examples=40)
    @given(models(size_bound=4), st.data())
    def test_random_nonexpansive_targets(self, m, data):
        n = data.draw(st.integers(0, 3))
        table = wasserstein_table(m, n)
        # scale a witness valuation into a non-expansive target
        s = Synthesizer(m)
        a, b = data.draw(st.sampled_from(list(itertools.product(m.states, repeat=2))))
        concept, _ = s.witness(n, a, b)
        scale = data.draw(st.sampled_from([F(1), HALF, F(1, 3)]))
        f = {x: v * scale for x, v in s.values(concept).items()}
        for x, y in itertools.combinations(m.states, 2):
            assert abs(f[x] - f[y]) <= table(x, y)
        c = s.reconstruct_function(n, f)
        assert eval_concept(m, c) == f
        assert rank(c) <= n


class TestWitness:
    def test_m1_depth_two(self, m1):
        cert = synthesize_witness(m1, 2, "a", "c")
        assert cert.valid and cert.achieved == HALF
        assert rank(cert.concept) <= 2

    def test_m1_blocking_detector(self, m1):
        cert = synthesize_witness(m1, 1, "b", "c")
        assert to_text(cert.concept) == "<r> 1"
        assert cert.achieved == 1 and cert.valid

    def test_reflexive(self, m1):
        cert = synthesize_witness(m1, 3, "a", "a")
        assert cert.concept == Const(F(0))
        assert cert.achieved == 0 and cert.valid

    def test_certificate_json(self, m1):
        data = synthesize_witness(m1, 2, "a", "c").to_json()
        assert data["achieved"] == data["target"] == "1/2"
        assert data["valid"] is True
        assert parse_concept(data["concept"]) == from_json(data["concept_dag"])
        json.dumps(data)

    def test_off_support_values_are_irrelevant(self, m2):
        # the potential lives on the supports of the two rows; perturbing the
        # reconstructed valuation elsewhere does not move the diamond at p, q
        d1 = wasserstein_table(m2, 1)
        _, f = solve_kantorovich_max(d1, m2.row("p"), m2.row("q"))
        assert set(f) == {"s", "t"}
        s = Synthesizer(m2)
        full = s.values(s.reconstruct_function(1, f))
        base = apply_diamond(m2, full)
        for other in ({"p": F(0), "q": F(1)}, {"p": F(1), "q": F(0)}):
            moved = apply_diamond(m2, dict(full, **other))
            assert (moved["p"], moved["q"]) == (base["p"], base["q"])


@pytest.mark.parametrize("name", ["m1", "m2", "m3"])
def test_fixture_tables_match(name):
    m = fixtures.load(name)
    for n in range(5):
        assert logical_witness_table(m, n).values == wasserstein_table(m, n).values


@settings(max_examples=40)
@given(models())
def test_witnesses_exact_on_random_models(m):
    s = Synthesizer(m)
    for n in range(4):
        table = wasserstein_table(m, n)
        for a, b in itertools.combinations(m.states, 2):
            cert = s.certificate(n, a, b)
            assert cert.sound
            assert cert.valid, (n, a, b)
            assert rank(cert.concept) <= n
            v = eval_concept(m, cert.concept)
            assert abs(v[a] - v[b]) == table(a, b)
