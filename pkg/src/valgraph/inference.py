"""Posterior inference over unknown intrinsic rewards.

Observations are either noisy value reports (Gaussian around the true value of
a literal) or softmax-rational choices among intervention options. The
posterior over the free rewards is explored with random-walk Metropolis or, for
up to three free rewards, evaluated exactly on a grid. Either posterior can be
pushed through the value engine to predict the value of any literal, including
ones no observation mentions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .errors import ConfigError, GridTooLargeError, ObservationError
from .values import check_rewards, evaluate_values
from .world import Literal, WorldModel

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
MAX_GRID_POINTS = 1_000_000
MAX_GRID_DIMS = 3


def _finite(x) -> bool:
    return not isinstance(x, bool) and isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True)
class GaussianPrior:
    mean: float = 0.0
    sd: float = 5.0

    def __post_init__(self):
        if not _finite(self.mean):
            raise ConfigError(f"prior mean must be finite, got {self.mean!r}")
        if not _finite(self.sd) or self.sd <= 0:
            raise ConfigError(f"prior sd must be positive, got {self.sd!r}")

    def logpdf(self, x: float) -> float:
        z = (x - self.mean) / self.sd
        return -0.5 * z * z - math.log(self.sd) - _HALF_LOG_2PI


@dataclass(frozen=True)
class ValueReport:
    """A stated valuation of ``literal``, Gaussian around its true value."""

    literal: Literal
    reported: float
    sigma: float = 1.0

    def __post_init__(self):
        if not _finite(self.reported):
            raise ObservationError(f"reported value must be finite, got {self.reported!r}")
        if not _finite(self.sigma) or self.sigma <= 0:
            raise ObservationError(f"sigma must be positive, got {self.sigma!r}")

    def literals(self) -> tuple[Literal, ...]:
        return (self.literal,)


@dataclass(frozen=True)
class ChoiceObservation:
    """``chosen`` was picked from ``options`` with softmax rationality ``beta``."""

    options: tuple[Literal, ...]
    chosen: Literal
    beta: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "options", tuple(self.options))
        if len(self.options) < 2:
            raise ObservationError("a choice needs at least two options")
        if len(set(self.options)) != len(self.options):
            raise ObservationError(f"choice options must be distinct: {[str(o) for o in self.options]}")
        if self.chosen not in self.options:
            raise ObservationError(f"chosen {self.chosen} is not among the options")
        if not _finite(self.beta) or self.beta <= 0:
            raise ObservationError(f"beta must be positive, got {self.beta!r}")

    def literals(self) -> tuple[Literal, ...]:
        return self.options


Observation = Union[ValueReport, ChoiceObservation]


def choice_probabilities(values: Sequence[float], beta: float) -> np.ndarray:
    """Softmax of ``beta * values``, shifted by the max for stability."""
    u = beta * np.asarray(values, dtype=float)
    w = np.exp(u - u.max())
    return w / w.sum()


def choice_log_prob(obs: ChoiceObservation, value_of: Callable[[Literal], float]) -> float:
    u = [obs.beta * value_of(o) for o in obs.options]
    top = max(u)
    chosen = obs.beta * value_of(obs.chosen)
    return chosen - top - math.log(sum(math.exp(x - top) for x in u))


def observations_log_likelihood(observations: Sequence[Observation],
                                value_of: Callable[[Literal], float]) -> float:
    """Sum of per-observation log-likelihoods given a value lookup."""
    total = 0.0
    for obs in observations:
        if isinstance(obs, ValueReport):
            z = (obs.reported - value_of(obs.literal)) / obs.sigma
            total += -0.5 * z * z - math.log(obs.sigma) - _HALF_LOG_2PI
        else:
            total += choice_log_prob(obs, value_of)
    return total


def _broadcast_prior(free: tuple[Literal, ...], prior) -> tuple[GaussianPrior, ...]:
    if isinstance(prior, GaussianPrior):
        return (prior,) * len(free)
    if isinstance(prior, Mapping):
        return tuple(prior.get(lit, GaussianPrior()) for lit in free)
    prior = tuple(prior)
    if len(prior) != len(free):
        raise ConfigError(f"{len(free)} free literals but {len(prior)} priors")
    return prior


@dataclass(frozen=True)
class InferenceProblem:
    model: WorldModel
    fixed_rewards: Mapping[Literal, float]
    free: tuple[Literal, ...]
    prior: tuple[GaussianPrior, ...] | GaussianPrior | Mapping = GaussianPrior()
    observations: tuple[Observation, ...] = ()

    def __post_init__(self):
        free = tuple(self.free)
        object.__setattr__(self, "free", free)
        object.__setattr__(self, "observations", tuple(self.observations))
        object.__setattr__(self, "prior", _broadcast_prior(free, self.prior))
        if len(set(free)) != len(free):
            raise ConfigError("free literals must be distinct")
        for lit in free:
            self.model.require(lit.variable)
        overlap = set(free) & set(self.fixed_rewards)
        if overlap:
            raise ConfigError(f"literals both free and fixed: {sorted(map(str, overlap))}")
        check_rewards(self.model, self.fixed_rewards)
        validate_observations(self.model, self.observations)

    def rewards(self, r_free) -> dict[Literal, float]:
        """Full reward table with the free literals set to ``r_free``."""
        table = dict(self.fixed_rewards)
        table.update(zip(self.free, _as_vector(self.free, r_free)))
        return table


def validate_observations(model: WorldModel, observations: Sequence[Observation]) -> None:
    for obs in observations:
        if not isinstance(obs, (ValueReport, ChoiceObservation)):
            raise ObservationError(f"not an observation: {obs!r}")
        for lit in obs.literals():
            model.require(lit.variable)
        if isinstance(obs, ChoiceObservation):
            for lit in obs.options:
                if lit.variable not in model.controllable:
                    raise ObservationError(f"choice option {lit} is not on a controllable variable")


def _as_vector(free: Sequence[Literal], r_free) -> list[float]:
    if isinstance(r_free, Mapping):
        vec = [r_free[lit] for lit in free]
    else:
        vec = [float(x) for x in r_free]
    if len(vec) != len(free):
        raise ConfigError(f"expected {len(free)} free reward values, got {len(vec)}")
    if not all(math.isfinite(x) for x in vec):
        raise ConfigError("free reward values must be finite")
    return [float(x) for x in vec]


def log_likelihood(problem: InferenceProblem, r_free) -> float:
    values = evaluate_values(problem.model, problem.rewards(r_free))
    return observations_log_likelihood(problem.observations, values.__getitem__)


def log_prior(problem: InferenceProblem, r_free) -> float:
    vec = _as_vector(problem.free, r_free)
    return sum(p.logpdf(x) for p, x in zip(problem.prior, vec))


def log_posterior(problem: InferenceProblem, r_free) -> float:
    """Unnormalised log posterior density of the free rewards."""
    return log_likelihood(problem, r_free) + log_prior(problem, r_free)


# -- sampling -----------------------------------------------------------------


@dataclass(frozen=True)
class MHConfig:
    samples: int = 10_000
    burn_in: int = 2_000
    step_size: float = 7.5

    def __post_init__(self):
        if isinstance(self.samples, bool) or not isinstance(self.samples, int) or self.samples < 1000:
            raise ConfigError(f"samples must be an integer >= 1000, got {self.samples!r}")
        if (isinstance(self.burn_in, bool) or not isinstance(self.burn_in, int)
                or not 0 <= self.burn_in < self.samples):
            raise ConfigError(f"burn_in must satisfy 0 <= burn_in < samples, got {self.burn_in!r}")
        if not _finite(self.step_size) or self.step_size <= 0:
            raise ConfigError(f"step_size must be positive, got {self.step_size!r}")


@dataclass(frozen=True)
class PosteriorSamples:
    """Retained Metropolis draws, one row per draw, one column per free literal."""

    free: tuple[Literal, ...]
    draws: np.ndarray
    seed: int
    config: MHConfig
    acceptance_rate: float

    @property
    def points(self) -> np.ndarray:
        return self.draws

    @property
    def weights(self) -> np.ndarray:
        n = len(self.draws)
        return np.full(n, 1.0 / n)

    def mean(self) -> np.ndarray:
        return self.draws.mean(axis=0)

    def sd(self) -> np.ndarray:
        return self.draws.std(axis=0)

    def prob_negative(self) -> np.ndarray:
        return (self.draws < 0).mean(axis=0)


def make_rng(seed: int) -> np.random.Generator:
    # SeedSequence rejects negative entropy; keep the sign as a second word.
    return np.random.default_rng(np.random.SeedSequence([abs(int(seed)), int(seed < 0)]))


def random_walk_metropolis(log_density: Callable[[np.ndarray], float], x0: Sequence[float],
                           config: MHConfig, seed: int) -> tuple[np.ndarray, float]:
    """Gaussian random-walk Metropolis; returns (retained draws, acceptance rate)."""
    rng = make_rng(seed)
    x = np.array(x0, dtype=float)
    d = len(x)
    lp = log_density(x)
    if not math.isfinite(lp):
        raise ConfigError("log density is not finite at the initial point")
    kept = np.empty((config.samples - config.burn_in, d))
    accepted = 0
    for i in range(config.samples):
        proposal = x + config.step_size * rng.standard_normal(d)
        lp_new = log_density(proposal)
        if math.log(rng.random()) < lp_new - lp:
            x, lp = proposal, lp_new
            accepted += 1
        if i >= config.burn_in:
            kept[i - config.burn_in] = x
    return kept, accepted / config.samples


def mh_sample(problem: InferenceProblem, config: MHConfig | None = None, seed: int = 0) -> PosteriorSamples:
    """Sample the reward posterior, starting at the prior means."""
    config = config or MHConfig()
    x0 = [p.mean for p in problem.prior]
    draws, rate = random_walk_metropolis(lambda x: log_posterior(problem, x), x0, config, seed)
    return PosteriorSamples(problem.free, draws, seed, config, rate)


# -- grid oracle ----------------------------------------------------------------


@dataclass(frozen=True)
class GridAxis:
    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (_finite(self.lo) and _finite(self.hi)) or self.hi < self.lo:
            raise ConfigError(f"grid needs finite lo <= hi, got {self.lo}:{self.hi}")
        if not _finite(self.step) or self.step <= 0:
            raise ConfigError(f"grid step must be positive, got {self.step!r}")

    def __len__(self) -> int:
        return int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1

    def points(self) -> np.ndarray:
        return self.lo + self.step * np.arange(len(self))

    @classmethod
    def parse(cls, text: str) -> GridAxis:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be LO:HI:STEP, got {text!r}")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"grid must be LO:HI:STEP, got {text!r}") from None
        return cls(lo, hi, step)


@dataclass(frozen=True)
class GridPosterior:
    """Normalised posterior mass on a product grid (first coordinate slowest)."""

    free: tuple[Literal, ...]
    axes: tuple[np.ndarray, ...]
    points: np.ndarray
    mass: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.mass

    def mean(self) -> np.ndarray:
        return self.mass @ self.points

    def sd(self) -> np.ndarray:
        dev = self.points - self.mean()
        return np.sqrt(self.mass @ (dev * dev))

    def prob_negative(self) -> np.ndarray:
        return self.mass @ (self.points < 0)

    def mode(self) -> np.ndarray:
        # argmax returns the first maximum: lowest grid index wins ties
        return self.points[int(np.argmax(self.mass))]

    def marginal(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        shape = tuple(len(a) for a in self.axes)
        other = tuple(j for j in range(len(shape)) if j != i)
        return self.axes[i], self.mass.reshape(shape).sum(axis=other)


def point_mass(free: Sequence[Literal], point: Sequence[float] = ()) -> GridPosterior:
    """A posterior concentrated on one parameter value."""
    free = tuple(free)
    pt = np.array([float(x) for x in point], dtype=float).reshape(1, len(free))
    return GridPosterior(free, tuple(np.array([x]) for x in pt[0]), pt, np.array([1.0]))


def grid_from_log_density(free: Sequence[Literal], axes: Sequence[GridAxis],
                          log_density: Callable[[np.ndarray], float]) -> GridPosterior:
    free = tuple(free)
    axes = tuple(axes)
    if len(axes) != len(free):
        raise ConfigError(f"{len(free)} free literals but {len(axes)} grid axes")
    if len(free) > MAX_GRID_DIMS:
        raise GridTooLargeError(f"grid posterior supports at most {MAX_GRID_DIMS} free literals, got {len(free)}")
    size = math.prod(len(a) for a in axes)
    if size > MAX_GRID_POINTS:
        raise GridTooLargeError(f"grid has {size} points; the limit is {MAX_GRID_POINTS}")
    coords = tuple(a.points() for a in axes)
    points = np.array(list(itertools.product(*coords)), dtype=float).reshape(size, len(free))
    logp = np.array([log_density(p) for p in points])
    top = logp.max()
    if not math.isfinite(top):
        raise ConfigError("log posterior is not finite anywhere on the grid")
    mass = np.exp(logp - top)
    mass /= mass.sum()
    return GridPosterior(free, coords, points, mass)


def grid_posterior(problem: InferenceProblem, grid: Sequence[GridAxis] | GridAxis) -> GridPosterior:
    """Exact posterior on a grid; a single axis is reused for every free literal."""
    if isinstance(grid, GridAxis):
        grid = [grid] * len(problem.free)
    return grid_from_log_density(problem.free, grid, lambda x: log_posterior(problem, x))


# -- prediction -----------------------------------------------------------------


@dataclass(frozen=True)
class PredictiveSummary:
    target: Literal
    mean: float
    sd: float
    quantiles: tuple[float, float, float]
    prob_positive: float


@dataclass(frozen=True)
class WeightedDraws:
    """Parameter draws read back from elsewhere, e.g. a samples CSV."""

    free: tuple[Literal, ...]
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def uniform(cls, free: Sequence[Literal], draws: np.ndarray) -> WeightedDraws:
        draws = np.asarray(draws, dtype=float)
        return cls(tuple(free), draws, np.full(len(draws), 1.0 / len(draws)))


Posterior = Union[PosteriorSamples, GridPosterior, WeightedDraws]


def weighted_quantile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Inverted-CDF quantile: smallest value whose cumulative weight reaches q."""
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(cum, q * cum[-1] - 1e-12, side="left"))
    return float(values[order][min(k, len(values) - 1)])


def summarize(target: Literal, values: np.ndarray, weights: np.ndarray) -> PredictiveSummary:
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if len(values) == 1:
        v = float(values[0])
        return PredictiveSummary(target, v, 0.0, (v, v, v), 1.0 if v > 0 else 0.0)
    weights = weights / weights.sum()
    mean = float(weights @ values)
    sd = float(math.sqrt(max(weights @ (values - mean) ** 2, 0.0)))
    qs = tuple(weighted_quantile(values, weights, q) for q in (0.05, 0.5, 0.95))
    prob_positive = float(min(1.0, weights @ (values > 0)))
    return PredictiveSummary(target, mean, sd, qs, prob_positive)


def predict_value(problem: InferenceProblem, posterior: Posterior, target: Literal) -> PredictiveSummary:
    """Posterior predictive of V(target)."""
    problem.model.require(target.variable)
    cache: dict[tuple, float] = {}
    out = np.empty(len(posterior.points))
    for i, point in enumerate(posterior.points):
        key = tuple(point)
        if key not in cache:
            cache[key] = evaluate_values(problem.model, problem.rewards(point))[target]
        out[i] = cache[key]
    return summarize(target, out, posterior.weights)


def gaussian_summary(target: Literal, mean: float, sd: float) -> PredictiveSummary:
    if sd == 0:
        return PredictiveSummary(target, mean, 0.0, (mean, mean, mean), 1.0 if mean > 0 else 0.0)
    dist = NormalDist(mean, sd)
    qs = tuple(dist.inv_cdf(q) for q in (0.05, 0.5, 0.95))
    return PredictiveSummary(target, mean, sd, qs, 1.0 - dist.cdf(0.0))


def value_sensitivity(problem: InferenceProblem, target: Literal) -> tuple[float, np.ndarray]:
    """V(target) at the prior means and its gradient in the free rewards.

    Values are affine in rewards, so unit perturbations give the gradient exactly
    (up to rounding).
    """
    base_point = [p.mean for p in problem.prior]
    base = evaluate_values(problem.model, problem.rewards(base_point))[target]
    grad = np.zeros(len(problem.free))
    for i in range(len(problem.free)):
        bumped = list(base_point)
        bumped[i] += 1.0
        grad[i] = evaluate_values(problem.model, problem.rewards(bumped))[target] - base
    return base, grad


def prior_predictive(problem: InferenceProblem, target: Literal) -> PredictiveSummary:
    """Exact pushforward of the Gaussian reward prior through V(target)."""
    problem.model.require(target.variable)
    base, grad = value_sensitivity(problem, target)
    sds = np.array([p.sd for p in problem.prior])
    return gaussian_summary(target, base, float(math.sqrt(np.sum((grad * sds) ** 2))))
