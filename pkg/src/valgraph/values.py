"""Total subjective value from intrinsic rewards.

The value of a literal is its intrinsic reward plus, for every direct child of
its variable, the difference in expected child value between intervening on the
literal and intervening on its complement::

    V(o) = r(o) + sum_x [ EV(do(o), x) - EV(do(not o), x) ]
    EV(do(o), x) = V(x) P(x | do(o)) + V(not x) P(not x | do(o))

Children are evaluated first (reverse topological order), so a value is
inherited down a whole causal chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import NotAChildError, RewardError
from .world import Literal, WorldModel, interventional_prob, topological_order

RewardTable = Mapping[Literal, float]
ValueTable = dict[Literal, float]


def check_rewards(model: WorldModel, rewards: RewardTable) -> None:
    for lit, r in rewards.items():
        if not isinstance(lit, Literal):
            raise RewardError(f"reward keys must be Literals, got {lit!r}")
        model.require(lit.variable)
        if isinstance(r, bool) or not isinstance(r, (int, float)) or not math.isfinite(r):
            raise RewardError(f"reward for {lit} must be a finite number, got {r!r}")


def expected_value(model: WorldModel, values: Mapping[Literal, float], o: Literal, x: str) -> float:
    """Expected value of child ``x`` under ``do(o)``."""
    _check_child(model, o, x)
    p = interventional_prob(model, Literal(x, True), o)
    return values[Literal(x, True)] * p + values[Literal(x, False)] * (1.0 - p)


def impact(model: WorldModel, values: Mapping[Literal, float], o: Literal, x: str) -> float:
    """How much making ``o`` true, rather than false, raises the expected value of ``x``."""
    return expected_value(model, values, o, x) - expected_value(model, values, o.complement(), x)


def _check_child(model: WorldModel, o: Literal, x: str) -> None:
    model.require(o.variable)
    model.require(x)
    if o.variable not in model.parents[x]:
        raise NotAChildError(f"{x} is not a direct child of {o.variable}")


def evaluate_values(model: WorldModel, rewards: RewardTable) -> ValueTable:
    """V for all 2n literals."""
    check_rewards(model, rewards)
    values: ValueTable = {}
    for var in reversed(topological_order(model)):
        for pol in (True, False):
            o = Literal(var, pol)
            total = float(rewards.get(o, 0.0))
            for child in model.children[var]:
                total += impact(model, values, o, child)
            values[o] = total
    return {lit: values[lit] for lit in model.literals()}


@dataclass(frozen=True)
class ValueExplanation:
    """Why a literal has its value: intrinsic part plus one term per child."""

    literal: Literal
    intrinsic: float
    contributions: tuple[tuple[str, float], ...]
    total: float


def explain_value(model: WorldModel, rewards: RewardTable, o: Literal) -> ValueExplanation:
    model.require(o.variable)
    values = evaluate_values(model, rewards)
    intrinsic = float(rewards.get(o, 0.0))
    contributions = tuple((x, impact(model, values, o, x)) for x in model.children[o.variable])
    return ValueExplanation(o, intrinsic, contributions, values[o])
