import json

import pytest

from conftest import lit
from valgraph import builtin_scenario, evaluate_values
from valgraph.errors import (
    CptError,
    CycleError,
    ObservationError,
    ParseError,
    UnknownScenarioError,
    UnknownVariableError,
)
from valgraph.fileio import (
    emit_bundle,
    emit_model,
    emit_observations,
    inference_problem,
    parse_model,
    parse_observations,
)
from valgraph.inference import ChoiceObservation, ValueReport

BUILTINS = ["miriam", "immune", "chain", "generalize"]


def miriam_doc():
    model, rewards, _ = builtin_scenario("miriam")
    return json.loads(emit_model(model, rewards))


def dump(doc):
    return json.dumps(doc)


# -- round trips ---------------------------------------------------------------


@pytest.mark.parametrize("name", BUILTINS)
def test_builtin_round_trip(name):
    model, rewards, obs = builtin_scenario(name)
    text = emit_model(model, rewards)
    m2, r2 = parse_model(text)
    assert (m2, r2) == (model, rewards)
    assert emit_model(m2, r2) == text
    otext = emit_observations(obs)
    o2 = parse_observations(otext, model)
    assert o2 == obs
    assert emit_observations(o2) == otext


@pytest.mark.parametrize("seed", range(100))
def test_random_round_trip(seed):
    model, rewards, obs = builtin_scenario(f"random-{1 + seed % 8}", seed=seed)
    text = emit_model(model, rewards)
    m2, r2 = parse_model(text)
    assert m2 == model and r2 == rewards
    assert emit_model(m2, r2) == text
    assert emit_observations(parse_observations(emit_observations(obs), model)) == emit_observations(obs)


def test_emission_is_canonical():
    text = emit_model(*builtin_scenario("chain")[:2])
    assert text.endswith("}\n")
    doc = json.loads(text)
    assert json.dumps(doc, sort_keys=True, indent=2) + "\n" == text
    assert doc["format_version"] == 1


def test_key_order_and_whitespace_do_not_matter():
    doc = miriam_doc()
    shuffled = json.dumps(dict(reversed(list(doc.items()))), separators=(",", ":"))
    assert emit_model(*parse_model(shuffled)) == emit_model(*parse_model(dump(doc)))


def test_float_formatting_twelve_digits():
    doc = miriam_doc()
    doc["rewards"]["Flu=true"] = -10.123456789012345
    model, rewards = parse_model(dump(doc))
    assert json.loads(emit_model(model, rewards))["rewards"]["Flu=true"] == -10.1234567890


def test_bundle_reads_as_both():
    model, rewards, obs = builtin_scenario("generalize")
    text = emit_bundle(model, rewards, obs)
    assert parse_model(text) == (model, rewards)
    assert parse_observations(text, model) == obs


def test_parsed_miriam_values():
    model, rewards = parse_model(emit_model(*builtin_scenario("miriam")[:2]))
    assert evaluate_values(model, rewards)[lit("Vaccinated=true")] == pytest.approx(4.0, abs=1e-12)


# -- model errors ------------------------------------------------------------------


def test_p_true_out_of_range():
    doc = miriam_doc()
    doc["variables"][1]["cpt"][0]["p_true"] = 1.2
    with pytest.raises(CptError, match="Flu"):
        parse_model(dump(doc))


def test_reward_key_without_polarity():
    doc = miriam_doc()
    doc["rewards"] = {"Flu": -10}
    with pytest.raises(ParseError) as info:
        parse_model(dump(doc))
    assert info.value.path == "rewards.Flu"


def test_reward_on_unknown_variable():
    doc = miriam_doc()
    doc["rewards"] = {"Rain=true": 1}
    with pytest.raises(UnknownVariableError):
        parse_model(dump(doc))


def test_invalid_json_reports_position():
    with pytest.raises(ParseError) as info:
        parse_model('{\n  "format_version": 1,\n  "variables": [,]\n}')
    assert info.value.line == 3 and info.value.column is not None
    assert "line 3" in str(info.value)


@pytest.mark.parametrize("version", [None, 0, 2, "1"])
def test_format_version_required(version):
    doc = miriam_doc()
    if version is None:
        del doc["format_version"]
    else:
        doc["format_version"] = version
    with pytest.raises(ParseError):
        parse_model(dump(doc))


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["variables"][0].update(colour="red"),
    lambda d: d.update(variables={}),
    lambda d: d["rewards"].update({"Flu=true": "bad"}),
    lambda d: d["rewards"].update({"Flu=true": True}),
    lambda d: d.update(controllable="Vaccinated"),
])
def test_schema_errors(mutate):
    doc = miriam_doc()
    mutate(doc)
    with pytest.raises(ParseError):
        parse_model(dump(doc))


def test_cycle_in_file():
    doc = miriam_doc()
    doc["variables"][0]["parents"] = ["Flu"]
    doc["variables"][0]["cpt"] = [{"given": {"Flu": True}, "p_true": 0.5},
                                  {"given": {"Flu": False}, "p_true": 0.5}]
    with pytest.raises(CycleError):
        parse_model(dump(doc))


def test_top_level_must_be_object():
    with pytest.raises(ParseError):
        parse_model("[1, 2]")


# -- observation files ---------------------------------------------------------------


def obs_doc(*records, **inference):
    return dump({"format_version": 1, "inference": inference, "observations": list(records)})


def test_observation_defaults():
    model = builtin_scenario("generalize").model
    text = obs_doc(
        {"type": "choice", "options": ["Vaccinated=true", "Vaccinated=false"], "chosen": "Vaccinated=true"},
        {"type": "value_report", "literal": "HandWash=true", "reported": 1.5},
        free=["Flu=true"], beta=2.0, sigma=0.5,
    )
    obs = parse_observations(text, model)
    choice, report = obs.observations
    assert isinstance(choice, ChoiceObservation) and choice.beta == 2.0
    assert isinstance(report, ValueReport) and report.sigma == 0.5
    assert obs.free == (lit("Flu=true"),)
    assert (obs.prior.mean, obs.prior.sd) == (0.0, 5.0)


def test_observation_unknown_literal():
    model = builtin_scenario("miriam").model
    with pytest.raises(UnknownVariableError):
        parse_observations(obs_doc({"type": "value_report", "literal": "Rain=true", "reported": 1}), model)
    with pytest.raises(UnknownVariableError):
        parse_observations(obs_doc(free=["Rain=true"]), model)


@pytest.mark.parametrize("record", [
    {"type": "vote"},
    {"type": "value_report", "literal": "Flu", "reported": 1},
    {"type": "value_report", "literal": "Flu=true", "reported": 1, "weight": 2},
    {"type": "choice", "options": "Vaccinated=true", "chosen": "Vaccinated=true"},
])
def test_observation_schema_errors(record):
    with pytest.raises(ParseError):
        parse_observations(obs_doc(record), builtin_scenario("miriam").model)


def test_observation_domain_errors():
    model = builtin_scenario("miriam").model
    with pytest.raises(ObservationError):
        parse_observations(obs_doc({"type": "choice", "options": ["Vaccinated=true"],
                                    "chosen": "Vaccinated=true"}), model)
    with pytest.raises(ObservationError):
        parse_observations(obs_doc({"type": "value_report", "literal": "Flu=true",
                                    "reported": 1, "sigma": 0}), model)


def test_baseline_overrides_round_trip():
    model = builtin_scenario("generalize").model
    text = obs_doc(free=["Flu=true"], baseline={"free": ["Vaccinated=true", "Vaccinated=false"],
                                                 "fixed": {"Flu=true": -1.0}})
    obs = parse_observations(text, model)
    assert obs.baseline_free == (lit("Vaccinated=true"), lit("Vaccinated=false"))
    assert obs.baseline_fixed == {lit("Flu=true"): -1.0}
    assert parse_observations(emit_observations(obs), model) == obs


def test_free_literal_reward_is_dropped():
    model, rewards, obs = builtin_scenario("generalize")
    assert lit("Flu=true") in rewards
    problem = inference_problem(model, rewards, obs)
    assert lit("Flu=true") not in problem.fixed_rewards


# -- scenarios -----------------------------------------------------------------------------


def test_builtin_values():
    model, rewards, _ = builtin_scenario("miriam")
    assert evaluate_values(model, rewards)[lit("Vaccinated=true")] == pytest.approx(4.0, abs=1e-12)
    model, rewards, _ = builtin_scenario("immune")
    assert evaluate_values(model, rewards)[lit("Vaccinated=true")] == 0.0
    model, rewards, _ = builtin_scenario("chain")
    assert evaluate_values(model, rewards)[lit("A=true")] == pytest.approx(9.6, abs=1e-12)
    model, rewards, _ = builtin_scenario("generalize")
    v = evaluate_values(model, rewards)
    assert v[lit("Vaccinated=true")] == pytest.approx(3.75, abs=1e-12)
    assert v[lit("HandWash=true")] == pytest.approx(1.75, abs=1e-12)


def test_random_scenarios_are_seeded():
    a, b = builtin_scenario("random-3", seed=7), builtin_scenario("random-3", seed=7)
    assert a == b
    assert emit_bundle(*a) == emit_bundle(*b)
    assert builtin_scenario("random-3", seed=8).model != a.model


def test_random_scenario_shape():
    for k in range(1, 9):
        model, rewards, obs = builtin_scenario(f"random-{k}", seed=k)
        assert model.variables == tuple(f"X{i}" for i in range(1, k + 1))
        assert all(len(model.parents[v]) <= 3 for v in model.variables)
        assert set(model.controllable) == {v for v in model.variables if not model.parents[v]}


@pytest.mark.parametrize("name", ["nope", "random-0", "random-9", "random-x", "Miriam"])
def test_unknown_scenario(name):
    with pytest.raises(UnknownScenarioError):
        builtin_scenario(name)


def test_generalize_choice_count():
    assert len(builtin_scenario("generalize", choices=10).observations.observations) == 10
    assert builtin_scenario("generalize", choices=0).observations.observations == ()
