"""Built-in scenarios used by the tests, the docs and ``scenario emit``."""

from __future__ import annotations

import dataclasses
import random
import re
from typing import NamedTuple

from .errors import UnknownScenarioError
from .fileio import ObservationFile
from .inference import ChoiceObservation, GaussianPrior, ValueReport
from .world import Literal, WorldModel, build_model, tabular_cpt

NAMES = ("miriam", "immune", "chain", "generalize", "random-k")
MAX_RANDOM_VARS = 8


class Scenario(NamedTuple):
    model: WorldModel
    rewards: dict[Literal, float]
    observations: ObservationFile


def _var(name, parents, probs):
    return {"name": name, "parents": list(parents), "cpt": tabular_cpt(parents, probs)}


def vaccination_choice() -> ChoiceObservation:
    return ChoiceObservation((Literal("Vaccinated", True), Literal("Vaccinated", False)),
                             Literal("Vaccinated", True))


def miriam(flu_given_vaccinated=(0.1, 0.5)) -> Scenario:
    model = build_model({
        "variables": [
            _var("Vaccinated", [], [0.5]),
            _var("Flu", ["Vaccinated"], list(flu_given_vaccinated)),
        ],
        "controllable": ["Vaccinated"],
    })
    obs = ObservationFile(observations=(vaccination_choice(),), free=(Literal("Flu", True),))
    return Scenario(model, {Literal("Flu", True): -10.0}, obs)


def immune() -> Scenario:
    # The choice says nothing about r(Flu=true) when vaccination cannot change Flu,
    # so a stated aversion is what pins it down.
    model, rewards, obs = miriam(flu_given_vaccinated=(0.0, 0.0))
    report = ValueReport(Literal("Flu", True), -10.0, 1.0)
    return Scenario(model, rewards, dataclasses.replace(obs, observations=obs.observations + (report,)))


def chain() -> Scenario:
    model = build_model({
        "variables": [
            _var("A", [], [0.5]),
            _var("B", ["A"], [0.9, 0.1]),
            _var("C", ["B"], [0.8, 0.2]),
        ],
        "controllable": ["A"],
    })
    choice = ChoiceObservation((Literal("A", True), Literal("A", False)), Literal("A", True))
    obs = ObservationFile(observations=(choice,), free=(Literal("C", True),))
    return Scenario(model, {Literal("C", True): 10.0}, obs)


def generalize(choices: int = 5) -> Scenario:
    """Vaccination and hand-washing both protect against flu.

    The reward on ``Flu=true`` is free in the observation file; the model file
    keeps -10 as the ground truth for forward evaluation.
    """
    model = build_model({
        "variables": [
            _var("Vaccinated", [], [0.5]),
            _var("HandWash", [], [0.5]),
            _var("Flu", ["Vaccinated", "HandWash"], [0.05, 0.15, 0.35, 0.60]),
        ],
        "controllable": ["Vaccinated", "HandWash"],
    })
    obs = ObservationFile(observations=(vaccination_choice(),) * choices, free=(Literal("Flu", True),),
                          prior=GaussianPrior(0.0, 5.0))
    return Scenario(model, {Literal("Flu", True): -10.0}, obs)


def random_scenario(k: int, seed: int = 0, max_parents: int = 3) -> Scenario:
    """Seeded random DAG over ``X1..Xk`` with random CPTs and rewards.

    Probabilities have 3 decimals and rewards 2, so files round-trip exactly.
    """
    if not 1 <= k <= MAX_RANDOM_VARS:
        raise UnknownScenarioError(f"random scenarios take 1..{MAX_RANDOM_VARS} variables, got {k}")
    rng = random.Random(f"valgraph-random-{k}-{seed}")
    names = [f"X{i + 1}" for i in range(k)]
    variables = []
    for i, name in enumerate(names):
        n_par = rng.randint(0, min(i, max_parents))
        parents = sorted(rng.sample(names[:i], n_par), key=names.index)
        probs = [round(rng.random(), 3) for _ in range(2 ** n_par)]
        variables.append(_var(name, parents, probs))
    roots = [v["name"] for v in variables if not v["parents"]]
    model = build_model({"variables": variables, "controllable": roots})
    rewards = {}
    for lit in model.literals():
        if rng.random() < 0.5:
            rewards[lit] = round(rng.uniform(-10, 10), 2)
    return Scenario(model, rewards, ObservationFile())


def builtin_scenario(name: str, seed: int = 0, choices: int = 5) -> Scenario:
    """Look up a scenario by name: miriam, immune, chain, generalize or random-K."""
    if name == "miriam":
        return miriam()
    if name == "immune":
        return immune()
    if name == "chain":
        return chain()
    if name == "generalize":
        return generalize(choices)
    match = re.fullmatch(r"random-(\d+)", name)
    if match:
        return random_scenario(int(match.group(1)), seed)
    raise UnknownScenarioError(f"unknown scenario {name!r}; choose from {', '.join(NAMES)}")
