import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaudit.engine import (
    abduce,
    counterfactual_query,
    evaluate,
    exogenous_prior,
    marginal,
    observational_contexts,
)
from cfaudit.errors import InconsistentEvidence, UnknownVariable
from cfaudit.oracle import joint_table, oracle_counterfactual, random_audit_model, random_model, random_query
from cfaudit.scm import CausalModel, Const, Ref, Roles, StructuralFunction, submodel

from helpers import chain_model, coin_model, endo, exo, xor_model

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_evaluate_identity():
    assert evaluate(coin_model(), {"U": "heads"}) == {"U": "heads", "V": "heads"}


def test_evaluate_chain():
    assert evaluate(chain_model(), {"U": "w"})["P"] == "one"


# (U1, U2, U3) -> (V, W), worked out by hand from V = U1 xor U2, W = U3 if V == 1 else 0
XOR_TABLE = {
    ("0", "0", "0"): ("0", "0"),
    ("0", "0", "1"): ("0", "0"),
    ("0", "1", "0"): ("1", "0"),
    ("0", "1", "1"): ("1", "1"),
    ("1", "0", "0"): ("1", "0"),
    ("1", "0", "1"): ("1", "1"),
    ("1", "1", "0"): ("0", "0"),
    ("1", "1", "1"): ("0", "0"),
}


def test_evaluate_matches_hand_table_over_all_u():
    m = xor_model()
    for u, (v, w) in XOR_TABLE.items():
        out = evaluate(m, dict(zip(("U1", "U2", "U3"), u)))
        assert (out["V"], out["W"]) == (v, w)


def test_xor_marginal_matches_hand_enumeration():
    # P(V, W): (0,0) = .3375+.0375+.1125+.0125, (1,0) = .1125+.3375, (1,1) = .0125+.0375
    dist = marginal(xor_model(), ["V", "W"])
    expected = {("0", "0"): 0.5, ("0", "1"): 0.0, ("1", "0"): 0.45, ("1", "1"): 0.05}
    for key, p in expected.items():
        assert dist[key] == pytest.approx(p, abs=1e-12)


def test_abduce_without_evidence_is_the_prior():
    m = xor_model()
    post = abduce(m, {})
    prior = dict(exogenous_prior(m))
    assert len(post) == len(prior)
    for values, p in post.support:
        assert p == pytest.approx(prior[values], abs=1e-15)


def test_abduce_inverts_identity_mechanism():
    post = abduce(coin_model(), {"V": "heads"})
    assert list(post) == [({"U": "heads"}, 1.0)]


def test_abduce_rejects_impossible_evidence():
    u, pu = exo("U", ["a", "b"], [0.5, 0.5])
    m = CausalModel("const", (u, endo("V", ["x", "y"])), (pu,), (StructuralFunction("V", (), Const("x")),))
    with pytest.raises(InconsistentEvidence):
        abduce(m, {"V": "y"})


def test_xor_counterfactual_by_hand():
    m = xor_model()
    # W = 1 leaves u in {011 (.0125), 101 (.0375)}; normalized .25 / .75
    post = abduce(m, {"W": "1"})
    assert post.probability({"U1": "0", "U2": "1", "U3": "1"}) == pytest.approx(0.25)
    assert post.probability({"U1": "1", "U2": "0", "U3": "1"}) == pytest.approx(0.75)
    d = counterfactual_query(m, {"W": "1"}, {"V": "0"}, ["W", "U1"])
    assert d[("0", "1")] == pytest.approx(0.75)
    assert d[("0", "0")] == pytest.approx(0.25)
    assert d[("1", "0")] == 0.0


def test_consistency_point_mass_on_factual_values():
    m = chain_model()
    d = counterfactual_query(m, {"A": "w"}, {"A": "w"}, ["A", "P"])
    assert d[("w", "one")] == 1.0


def test_no_evidence_no_intervention_is_observational_marginal():
    m = chain_model()
    d = counterfactual_query(m, {}, {}, ["P"])
    assert d["one"] == pytest.approx(0.3)
    assert d["zero"] == pytest.approx(0.7)


def test_scenario_2_counterfactual_shifts_to_lower_score(corpus_models):
    m = corpus_models["scenario_2"]
    ev = {"profile": "p", "skin_color": "w"}
    d = counterfactual_query(m, ev, {"skin_color": "b"}, ["similarity_pred"])
    factual = counterfactual_query(m, ev, {}, ["similarity_pred"])
    # oracle-computed: the whole mass moves from high to low
    assert factual.vector() == [1.0, 0.0]
    assert d.vector() == [0.0, 1.0]
    assert d.max_deviation(oracle_counterfactual(m, ev, {"skin_color": "b"}, ["similarity_pred"])) == 0.0


def test_query_errors():
    m = chain_model()
    with pytest.raises(UnknownVariable):
        counterfactual_query(m, {}, {}, ["nope"])
    with pytest.raises(InconsistentEvidence):
        counterfactual_query(m, {"A": "w", "P": "zero"}, {}, ["P"])


def test_contexts_with_constant_feature():
    u, pu = exo("U", ["a", "b", "c"], [0.5, 0.5, 0.0])
    m = CausalModel(
        "k",
        (u, endo("A", ["a", "b", "c"]), endo("X", ["x"]), endo("P", ["p"]), endo("Y", ["y"])),
        (pu,),
        (
            StructuralFunction("A", ("U",), Ref("U")),
            StructuralFunction("X", (), Const("x")),
            StructuralFunction("P", (), Const("p")),
            StructuralFunction("Y", (), Const("y")),
        ),
        Roles("A", ("X",), "P", "Y"),
    )
    ctx = observational_contexts(m)
    assert [(c.x, c.a) for c in ctx] == [(("x",), "a"), (("x",), "b")]


def test_independent_binary_contexts_sum_to_one():
    ua, pa = exo("UA", ["a0", "a1"], [0.3, 0.7])
    ux, px = exo("UX", ["x0", "x1"], [0.6, 0.4])
    m = CausalModel(
        "ind",
        (ua, ux, endo("A", ["a0", "a1"]), endo("X", ["x0", "x1"])),
        (pa, px),
        (StructuralFunction("A", ("UA",), Ref("UA")), StructuralFunction("X", ("UX",), Ref("UX"))),
        Roles("A", ("X",)),
    )
    ctx = observational_contexts(m)
    assert len(ctx) == 4
    assert math.fsum(c.probability for c in ctx) == pytest.approx(1.0, abs=1e-12)
    assert ctx[0].probability == pytest.approx(0.18)


def _oracle_contexts(model):
    mass = {}
    for row in joint_table(model):
        key = (tuple(row.values[f] for f in model.roles.features), row.values[model.roles.protected])
        mass[key] = mass.get(key, Fraction(0)) + row.probability
    return {k: float(v) for k, v in mass.items() if v > 0}


def test_structure_b_contexts_match_oracle(corpus_models):
    m = corpus_models["structure_b"]
    ctx = observational_contexts(m)
    expected = _oracle_contexts(m)
    assert {(c.x, c.a) for c in ctx} == set(expected)
    for c in ctx:
        assert c.probability == pytest.approx(expected[(c.x, c.a)], abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_engine_matches_oracle(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    ev, do, q = random_query(rng, m)
    try:
        expected = oracle_counterfactual(m, ev, do, q)
    except InconsistentEvidence:
        with pytest.raises(InconsistentEvidence):
            counterfactual_query(m, ev, do, q)
        return
    assert counterfactual_query(m, ev, do, q).max_deviation(expected) <= 1e-9


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_consistency_under_factual_intervention(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    u = {n: rng.choice(m.domain(n)) for n in m.exogenous}
    factual = evaluate(m, u)
    chosen = [v for v in m.endogenous if rng.random() < 0.5]
    sub = submodel(m, {v: factual[v] for v in chosen})
    assert evaluate(sub, u) == factual


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_posterior_is_normalized_within_prior_support(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    ev, _, _ = random_query(rng, m)
    try:
        post = abduce(m, ev)
    except InconsistentEvidence:
        return
    assert post.total() == pytest.approx(1.0, abs=1e-9)
    prior_support = {values for values, _ in exogenous_prior(m)}
    assert all(values in prior_support and p >= 0 for values, p in post.support)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_marginal_coherence(seed):
    rng = random.Random(seed)
    m = random_model(rng)
    q = [v.name for v in m.variables if rng.random() < 0.5] or [m.variables[-1].name]
    direct = {}
    for values, p in exogenous_prior(m):
        out = evaluate(m, dict(zip(m.exogenous, values)))
        key = tuple(out[v] for v in q)
        direct[key] = direct.get(key, 0.0) + p
    d = counterfactual_query(m, {}, {}, q)
    for key, p in d.rows():
        assert p == pytest.approx(direct.get(key, 0.0), abs=1e-12)


def test_results_are_bit_identical_across_runs():
    rng = random.Random(3)
    m = random_audit_model(rng)
    ev, do, q = random_query(rng, m)
    try:
        first = counterfactual_query(m, ev, do, q)
    except InconsistentEvidence:
        first = None
    for _ in range(3):
        try:
            again = counterfactual_query(m, ev, do, q)
        except InconsistentEvidence:
            again = None
        assert again == first
