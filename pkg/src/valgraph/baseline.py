"""Flat-utility baseline: one independent utility per literal, no world model.

It sees the same observations as the generative learner but explains them with
a utility attached directly to each observed literal. Utilities of literals no
observation mentions stay at their prior, which is what the generalization gap
report measures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, ObservationError, UnknownVariableError
from .inference import (
    ChoiceObservation,
    GaussianPrior,
    GridAxis,
    GridPosterior,
    InferenceProblem,
    MHConfig,
    Observation,
    Posterior,
    PosteriorSamples,
    PredictiveSummary,
    ValueReport,
    _as_vector,
    _broadcast_prior,
    gaussian_summary,
    mh_sample,
    grid_from_log_density,
    observations_log_likelihood,
    predict_value,
    prior_predictive,
    random_walk_metropolis,
    summarize,
)
from .world import Literal, WorldModel


@dataclass(frozen=True)
class FlatProblem:
    literals: frozenset[Literal]
    free: tuple[Literal, ...]
    fixed: Mapping[Literal, float]
    prior: tuple[GaussianPrior, ...] | GaussianPrior | Mapping = GaussianPrior()
    observations: tuple[Observation, ...] = ()

    def __post_init__(self):
        free = tuple(self.free)
        object.__setattr__(self, "literals", frozenset(self.literals))
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "prior", _broadcast_prior(free, self.prior))
        if len(set(free)) != len(free):
            raise ConfigError("free literals must be distinct")
        if set(free) & set(self.fixed):
            raise ConfigError("a literal cannot be both free and fixed")
        for lit in (*free, *self.fixed):
            if lit not in self.literals:
                raise UnknownVariableError(f"{lit} is not among the literals in play")
        for obs in self.observations:
            if not isinstance(obs, (ValueReport, ChoiceObservation)):
                raise ObservationError(f"not an observation: {obs!r}")
            for lit in obs.literals():
                if lit not in self.literals:
                    raise UnknownVariableError(f"observation mentions {lit}, which is not in play")

    def utilities(self, u_free) -> dict[Literal, float]:
        table = {lit: 0.0 for lit in self.literals}
        table.update(self.fixed)
        table.update(zip(self.free, _as_vector(self.free, u_free)))
        return table

    def observed(self) -> set[Literal]:
        return {lit for obs in self.observations for lit in obs.literals()}


def flat_problem_for(model: WorldModel, observations: Sequence[Observation],
                     prior: GaussianPrior | Mapping = GaussianPrior(),
                     free: Sequence[Literal] | None = None,
                     fixed: Mapping[Literal, float] | None = None) -> FlatProblem:
    """Flat problem over a model's literals.

    By default each variable's true literal gets a free utility and its false
    literal is pinned at 0; only differences matter for a choice between them.
    """
    lits = model.literals()
    if free is None:
        free = [lit for lit in lits if lit.polarity]
    if fixed is None:
        fixed = {lit: 0.0 for lit in lits if lit not in set(free)}
    return FlatProblem(frozenset(lits), tuple(free), dict(fixed), prior, tuple(observations))


def baseline_log_likelihood(problem: FlatProblem, u_free) -> float:
    u = problem.utilities(u_free)
    return observations_log_likelihood(problem.observations, u.__getitem__)


def baseline_log_posterior(problem: FlatProblem, u_free) -> float:
    vec = _as_vector(problem.free, u_free)
    return (baseline_log_likelihood(problem, vec)
            + sum(p.logpdf(x) for p, x in zip(problem.prior, vec)))


def baseline_posterior(problem: FlatProblem, config: MHConfig | None = None, seed: int = 0) -> PosteriorSamples:
    config = config or MHConfig()
    x0 = [p.mean for p in problem.prior]
    draws, rate = random_walk_metropolis(lambda x: baseline_log_posterior(problem, x), x0, config, seed)
    return PosteriorSamples(problem.free, draws, seed, config, rate)


def baseline_grid_posterior(problem: FlatProblem, grid: Sequence[GridAxis] | GridAxis) -> GridPosterior:
    if isinstance(grid, GridAxis):
        grid = [grid] * len(problem.free)
    return grid_from_log_density(problem.free, grid, lambda x: baseline_log_posterior(problem, x))


def baseline_prior_predictive(problem: FlatProblem, target: Literal) -> PredictiveSummary:
    if target not in problem.literals:
        raise UnknownVariableError(f"{target} is not among the literals in play")
    if target in problem.free:
        p = problem.prior[problem.free.index(target)]
        return gaussian_summary(target, p.mean, p.sd)
    return gaussian_summary(target, float(problem.utilities([p.mean for p in problem.prior])[target]), 0.0)


def baseline_predict(problem: FlatProblem, posterior: Posterior, target: Literal) -> PredictiveSummary:
    """Posterior predictive of u(target).

    A free literal that no observation mentions has a constant likelihood in its
    coordinate, so its posterior is its prior; that case is answered exactly.
    """
    if target not in problem.literals:
        raise UnknownVariableError(f"{target} is not among the literals in play")
    if target in problem.free and target not in problem.observed():
        return baseline_prior_predictive(problem, target)
    values = np.array([problem.utilities(pt)[target] for pt in posterior.points])
    return summarize(target, values, posterior.weights)


# -- the gap ------------------------------------------------------------------


def prior_divergence(posterior: PredictiveSummary, prior: PredictiveSummary) -> float:
    """(d_mean^2 + d_sd^2) / prior variance; 0 when the prior is a point."""
    var = prior.sd ** 2
    if var == 0:
        return 0.0
    return ((posterior.mean - prior.mean) ** 2 + (posterior.sd - prior.sd) ** 2) / var


@dataclass(frozen=True)
class GapReport:
    target: Literal
    generative: PredictiveSummary
    baseline: PredictiveSummary
    baseline_prior_divergence: float
    generative_prior_divergence: float
    generative_prior: PredictiveSummary
    baseline_prior: PredictiveSummary


def generalization_gap(generative: InferenceProblem, flat: FlatProblem, target: Literal,
                       config: MHConfig | None = None, seed: int = 0) -> GapReport:
    """Compare how far each learner's prediction for ``target`` moves off its prior.

    Both sides run Metropolis with the same config and seed. A side whose
    likelihood cannot depend on the target reports its prior exactly.
    """
    if generative.observations != flat.observations:
        raise ConfigError("generative and flat problems must share the observation stream")
    gen_prior = prior_predictive(generative, target)
    flat_prior = baseline_prior_predictive(flat, target)

    if generative.observations and generative.free:
        gen = predict_value(generative, mh_sample(generative, config, seed), target)
    else:
        gen = gen_prior

    if target in flat.free and target not in flat.observed():
        base = flat_prior
    else:
        base = baseline_predict(flat, baseline_posterior(flat, config, seed), target)

    return GapReport(
        target=target,
        generative=gen,
        baseline=base,
        baseline_prior_divergence=prior_divergence(base, flat_prior),
        generative_prior_divergence=prior_divergence(gen, gen_prior),
        generative_prior=gen_prior,
        baseline_prior=flat_prior,
    )

