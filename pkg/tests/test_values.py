import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import chain_model, lit, random_models
from oracles import straight_value
from valgraph import (
    Literal,
    NotAChildError,
    build_model,
    evaluate_values,
    expected_value,
    explain_value,
    impact,
)
from valgraph.errors import RewardError
from valgraph.scenarios import random_scenario
from valgraph.world import replace_cpt, tabular_cpt

FLU = lit("Flu=true")
CHAIN_REWARDS = {lit("C=true"): 10.0}


def test_miriam_values(miriam):
    v = evaluate_values(miriam.model, miriam.rewards)
    assert v[lit("Flu=true")] == -10.0
    assert v[lit("Flu=false")] == 0.0
    assert v[lit("Vaccinated=true")] == pytest.approx(4.0, abs=1e-12)
    assert v[lit("Vaccinated=false")] == pytest.approx(-4.0, abs=1e-12)


def test_immune_value_is_intrinsic_only(immune):
    v = evaluate_values(immune.model, immune.rewards)
    assert v[lit("Vaccinated=true")] == 0.0
    assert v[lit("Vaccinated=false")] == 0.0


def test_chain_values():
    v = evaluate_values(chain_model(), CHAIN_REWARDS)
    assert v[lit("C=true")] == 10.0
    assert v[lit("B=true")] == pytest.approx(6.0, abs=1e-12)
    assert v[lit("B=false")] == pytest.approx(-6.0, abs=1e-12)
    assert v[lit("A=true")] == pytest.approx(9.6, abs=1e-12)


def test_generalize_values(generalize):
    v = evaluate_values(generalize.model, generalize.rewards)
    assert v[lit("Vaccinated=true")] == pytest.approx(3.75, abs=1e-12)
    assert v[lit("HandWash=true")] == pytest.approx(1.75, abs=1e-12)


def test_impact_and_expected_value(miriam, immune):
    v = evaluate_values(miriam.model, miriam.rewards)
    assert expected_value(miriam.model, v, lit("Vaccinated=true"), "Flu") == pytest.approx(-1.0, abs=1e-12)
    assert expected_value(miriam.model, v, lit("Vaccinated=false"), "Flu") == pytest.approx(-5.0, abs=1e-12)
    assert impact(miriam.model, v, lit("Vaccinated=true"), "Flu") == pytest.approx(4.0, abs=1e-12)
    vi = evaluate_values(immune.model, immune.rewards)
    assert impact(immune.model, vi, lit("Vaccinated=true"), "Flu") == 0.0


def test_chain_impact_amplifies_leaf_gap():
    c = chain_model()
    v = evaluate_values(c, CHAIN_REWARDS)
    assert impact(c, v, lit("A=true"), "B") == pytest.approx(9.6, abs=1e-12)
    # the leaf-level expected-value gap is only 10 * (0.74 - 0.26) = 4.8
    from valgraph import interventional_prob
    gap = 10 * (interventional_prob(c, lit("C=true"), lit("A=true"))
                - interventional_prob(c, lit("C=true"), lit("A=false")))
    assert gap == pytest.approx(4.8, abs=1e-12)


@pytest.mark.parametrize("c", [-3.0, 0.0, 2.5, 7.0])
def test_expected_value_of_constant_child(miriam, c):
    values = {lit("Flu=true"): c, lit("Flu=false"): c}
    for o in (lit("Vaccinated=true"), lit("Vaccinated=false")):
        assert expected_value(miriam.model, values, o, "Flu") == pytest.approx(c, abs=1e-12)


def test_not_a_child(miriam):
    v = evaluate_values(miriam.model, miriam.rewards)
    with pytest.raises(NotAChildError):
        impact(miriam.model, v, lit("Flu=true"), "Vaccinated")
    with pytest.raises(NotAChildError):
        impact(chain_model(), evaluate_values(chain_model(), {}), lit("A=true"), "C")


def test_explain_examples(miriam):
    e = explain_value(miriam.model, miriam.rewards, lit("Vaccinated=true"))
    assert e.intrinsic == 0 and e.contributions[0][0] == "Flu"
    assert e.contributions[0][1] == pytest.approx(4.0) and e.total == pytest.approx(4.0)
    e = explain_value(miriam.model, miriam.rewards, lit("Flu=true"))
    assert (e.intrinsic, e.contributions, e.total) == (-10.0, (), -10.0)
    e = explain_value(chain_model(), CHAIN_REWARDS, lit("A=true"))
    assert e.intrinsic == 0 and [c for c, _ in e.contributions] == ["B"]
    assert e.contributions[0][1] == pytest.approx(9.6) and e.total == pytest.approx(9.6)


def test_rewards_on_actions_are_allowed(miriam):
    rewards = dict(miriam.rewards)
    rewards[lit("Vaccinated=true")] = -1.5  # the jab stings
    v = evaluate_values(miriam.model, rewards)
    assert v[lit("Vaccinated=true")] == pytest.approx(2.5, abs=1e-12)


def test_bad_rewards(miriam):
    with pytest.raises(RewardError):
        evaluate_values(miriam.model, {FLU: float("inf")})
    with pytest.raises(Exception):
        evaluate_values(miriam.model, {lit("Nope=true"): 1.0})


# -- invariants ------------------------------------------------------------------

MODELS = random_models(100)


@pytest.mark.parametrize("idx", range(100))
def test_leaf_identity_and_antisymmetry(idx):
    model, rewards, _ = MODELS[idx]
    v = evaluate_values(model, rewards)
    for var in model.variables:
        for o in (Literal(var, True), Literal(var, False)):
            r = rewards.get(o, 0.0)
            if not model.children[var]:
                assert v[o] == r
            assert (v[o] - r) == pytest.approx(-(v[~o] - rewards.get(~o, 0.0)), abs=1e-9)


@pytest.mark.parametrize("idx", range(100))
def test_linearity_and_additivity(idx):
    model, rewards, _ = MODELS[idx]
    base = evaluate_values(model, rewards)
    for c in (-2.0, 0.0, 3.0):
        scaled = evaluate_values(model, {k: c * r for k, r in rewards.items()})
        for o in base:
            assert scaled[o] == pytest.approx(c * base[o], abs=1e-9 * max(1.0, abs(c)))
    other = random_scenario(len(model.variables), idx + 1000).rewards
    other = {k: r for k, r in other.items()}
    both = {k: rewards.get(k, 0.0) + other.get(k, 0.0) for k in set(rewards) | set(other)}
    v_other, v_both = evaluate_values(model, other), evaluate_values(model, both)
    for o in base:
        assert v_both[o] == pytest.approx(base[o] + v_other[o], abs=1e-9)


@pytest.mark.parametrize("idx", range(100))
def test_decomposition_consistency(idx):
    model, rewards, _ = MODELS[idx]
    v = evaluate_values(model, rewards)
    for o in model.literals():
        e = explain_value(model, rewards, o)
        assert e.total == v[o]
        assert e.intrinsic + sum(a for _, a in e.contributions) == pytest.approx(e.total, abs=1e-9)
        assert [c for c, _ in e.contributions] == list(model.children[o.variable])


@pytest.mark.parametrize("idx", range(100))
def test_oracle_equivalence(idx):
    model, rewards, _ = MODELS[idx]
    v = evaluate_values(model, rewards)
    memo = {}
    for o in model.literals():
        assert abs(v[o] - straight_value(model, rewards, o.variable, o.polarity, memo)) <= 1e-12


def test_null_impact_when_children_ignore_the_variable():
    m = build_model({"variables": [
        {"name": "O", "cpt": tabular_cpt([], [0.3])},
        {"name": "P", "cpt": tabular_cpt([], [0.6])},
        {"name": "X", "parents": ["O", "P"], "cpt": tabular_cpt(["O", "P"], [0.2, 0.9, 0.2, 0.9])},
    ]})
    rewards = {lit("X=true"): 5.0, lit("O=true"): 1.25}
    v = evaluate_values(m, rewards)
    assert v[lit("O=true")] == 1.25 and v[lit("O=false")] == 0.0
    assert v[lit("P=true")] != 0.0


def _reaches_avoiding(m, src, dst, blocked):
    stack, seen = [src], set()
    while stack:
        node = stack.pop()
        if node == dst:
            return True
        for c in m.children[node]:
            if c != blocked and c not in seen:
                seen.add(c)
                stack.append(c)
    return False


def _descendants(m, v):
    out, stack = set(), list(m.children[v])
    while stack:
        c = stack.pop()
        if c not in out:
            out.add(c)
            stack.extend(m.children[c])
    return out


def cpt_can_move_value(m, a, var):
    """Whether the CPT of ``a`` can enter V(var=.) at all.

    V(var) reads P(y | do(z)) for every z in var and its descendants and every
    child y of z; that probability depends on a's CPT iff a != z and a reaches
    y without passing through z.
    """
    for z in {var} | _descendants(m, var):
        for y in m.children[z]:
            if a != z and _reaches_avoiding(m, a, y, z):
                return True
    return False


@pytest.mark.parametrize("seed", range(40))
def test_value_ignores_cpts_cut_off_by_surgery(seed):
    model, rewards, _ = random_scenario(6, seed)
    rng = np.random.default_rng(seed)
    base = evaluate_values(model, rewards)
    checked = 0
    for var in model.variables:
        for a in model.variables:
            if cpt_can_move_value(model, a, var):
                continue
            mutated = replace_cpt(model, a, rng.random(2 ** len(model.parents[a])).round(3))
            after = evaluate_values(mutated, rewards)
            for pol in (True, False):
                assert abs(after[Literal(var, pol)] - base[Literal(var, pol)]) <= 1e-12
            checked += 1
    assert checked > 0


def test_own_and_ancestor_cpts_never_matter_on_a_chain():
    c = chain_model()
    base = evaluate_values(c, CHAIN_REWARDS)
    assert evaluate_values(replace_cpt(c, "A", [0.05]), CHAIN_REWARDS)[lit("A=true")] == base[lit("A=true")]
    for var, probs in (("A", [0.9]), ("B", [0.3, 0.6])):
        after = evaluate_values(replace_cpt(c, var, probs), CHAIN_REWARDS)
        assert after[lit("B=true")] == base[lit("B=true")]
        assert after[lit("B=false")] == base[lit("B=false")]


def test_own_cpt_matters_with_a_shortcut_edge():
    # O -> Z -> Y and O -> Y: V(Z) marginalises O's prior, and V(O) inherits V(Z).
    def model(po):
        return build_model({"variables": [
            {"name": "O", "cpt": tabular_cpt([], [po])},
            {"name": "Z", "parents": ["O"], "cpt": tabular_cpt(["O"], [0.7, 0.2])},
            {"name": "Y", "parents": ["O", "Z"], "cpt": tabular_cpt(["O", "Z"], [0.9, 0.5, 0.6, 0.1])},
        ]})
    rewards = {lit("Y=true"): 10.0}
    a = evaluate_values(model(0.5), rewards)[lit("O=true")]
    b = evaluate_values(model(0.1), rewards)[lit("O=true")]
    # V(Z=true) = 10 * sum_o P(o) (P(Y|o,Z) - P(Y|o,~Z)) = 10 * (0.4 P(O) + 0.5 (1 - P(O)))
    vz = lambda po: 10 * (0.4 * po + 0.5 * (1 - po))
    expected = lambda po: (2 * vz(po) * (0.7 - 0.2)) + 10 * (0.9 * 0.7 + 0.5 * 0.3 - 0.6 * 0.2 - 0.1 * 0.8)
    assert a == pytest.approx(expected(0.5), abs=1e-12)
    assert b == pytest.approx(expected(0.1), abs=1e-12)
    assert a != b


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(-50, 50), st.floats(-50, 50))
def test_linearity_hypothesis(seed, c1, c2):
    model, rewards, _ = random_scenario(4, seed)
    other = random_scenario(4, seed + 1).rewards
    mix = {k: c1 * rewards.get(k, 0.0) + c2 * other.get(k, 0.0) for k in set(rewards) | set(other)}
    va, vb, vm = (evaluate_values(model, r) for r in (rewards, other, mix))
    scale = max(1.0, abs(c1), abs(c2))
    for o in vm:
        assert vm[o] == pytest.approx(c1 * va[o] + c2 * vb[o], abs=1e-9 * scale * 100)
