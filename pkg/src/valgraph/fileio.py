"""JSON model and observation files.

A model document::

    {"format_version": 1,
     "variables": [{"name": "Flu", "parents": ["Vaccinated"],
                    "cpt": [{"given": {"Vaccinated": true}, "p_true": 0.1}, ...]}, ...],
     "rewards": {"Flu=true": -10.0},
     "controllable": ["Vaccinated"]}

An observation document carries ``inference`` and ``observations`` keys. Both
may live in one file; each parser ignores the other's keys. Emission is
canonical: sorted keys, CPT rows in canonical order, numbers rounded to 12
significant digits.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .baseline import FlatProblem, flat_problem_for
from .errors import ParseError
from .inference import ChoiceObservation, GaussianPrior, InferenceProblem, Observation, ValueReport
from .world import Literal, WorldModel, build_model, model_description

FORMAT_VERSION = 1
MODEL_KEYS = {"variables", "rewards", "controllable"}
OBS_KEYS = {"inference", "observations"}
TOP_KEYS = {"format_version"} | MODEL_KEYS | OBS_KEYS


@dataclass(frozen=True)
class ObservationFile:
    observations: tuple[Observation, ...] = ()
    free: tuple[Literal, ...] = ()
    prior: GaussianPrior = GaussianPrior()
    beta: float = 1.0
    sigma: float = 1.0
    baseline_free: tuple[Literal, ...] | None = None
    baseline_fixed: Mapping[Literal, float] | None = None


def _num(x: float) -> float:
    return float(f"{float(x):.12g}")


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object")
    unknown = set(doc) - TOP_KEYS
    if unknown:
        raise ParseError(f"unknown top-level keys {sorted(unknown)}")
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"format_version must be {FORMAT_VERSION}, got {doc.get('format_version')!r}",
                         path="format_version")
    return doc


def _literal(text: Any, path: str) -> Literal:
    try:
        return Literal.parse(text)
    except ParseError as exc:
        raise ParseError(str(exc), path=path) from None


def _number(x: Any, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ParseError(f"expected a finite number, got {x!r}", path=path)
    return float(x)


def _expect(value: Any, kind: type, path: str):
    if not isinstance(value, kind):
        raise ParseError(f"expected {kind.__name__}, got {type(value).__name__}", path=path)
    return value


def parse_model(text: str) -> tuple[WorldModel, dict[Literal, float]]:
    """Parse a model document into a validated model and its reward table."""
    doc = _load(text)
    variables = _expect(doc.get("variables"), list, "variables")
    for i, entry in enumerate(variables):
        _expect(entry, dict, f"variables[{i}]")
        extra = set(entry) - {"name", "parents", "cpt"}
        if extra:
            raise ParseError(f"unknown keys {sorted(extra)}", path=f"variables[{i}]")
        _expect(entry.get("parents", []), list, f"variables[{i}].parents")
        for j, row in enumerate(_expect(entry.get("cpt", []), list, f"variables[{i}].cpt")):
            _expect(row, dict, f"variables[{i}].cpt[{j}]")
            _expect(row.get("given", {}), dict, f"variables[{i}].cpt[{j}].given")
    controllable = _expect(doc.get("controllable", []), list, "controllable")
    model = build_model({"variables": variables, "controllable": controllable})
    rewards = {}
    for key, value in _expect(doc.get("rewards", {}), dict, "rewards").items():
        lit = _literal(key, f"rewards.{key}")
        model.require(lit.variable)
        rewards[lit] = _number(value, f"rewards.{key}")
    return model, rewards


def model_document(model: WorldModel, rewards: Mapping[Literal, float]) -> dict:
    desc = model_description(model)
    for entry in desc["variables"]:
        for row in entry["cpt"]:
            row["p_true"] = _num(row["p_true"])
    return {
        "format_version": FORMAT_VERSION,
        "variables": desc["variables"],
        "rewards": {str(lit): _num(r) for lit, r in rewards.items()},
        "controllable": desc["controllable"],
    }


def _dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def emit_model(model: WorldModel, rewards: Mapping[Literal, float]) -> str:
    return _dumps(model_document(model, rewards))


def _parse_observation(rec: Any, path: str, beta: float, sigma: float) -> Observation:
    _expect(rec, dict, path)
    kind = rec.get("type")
    if kind == "value_report":
        extra = set(rec) - {"type", "literal", "reported", "sigma"}
        if extra:
            raise ParseError(f"unknown keys {sorted(extra)}", path=path)
        return ValueReport(
            _literal(rec.get("literal"), f"{path}.literal"),
            _number(rec.get("reported"), f"{path}.reported"),
            _number(rec.get("sigma", sigma), f"{path}.sigma"),
        )
    if kind == "choice":
        extra = set(rec) - {"type", "options", "chosen", "beta"}
        if extra:
            raise ParseError(f"unknown keys {sorted(extra)}", path=path)
        options = _expect(rec.get("options"), list, f"{path}.options")
        return ChoiceObservation(
            tuple(_literal(o, f"{path}.options[{k}]") for k, o in enumerate(options)),
            _literal(rec.get("chosen"), f"{path}.chosen"),
            _number(rec.get("beta", beta), f"{path}.beta"),
        )
    raise ParseError(f"observation type must be 'value_report' or 'choice', got {kind!r}", path=f"{path}.type")


def parse_observations(text: str, model: WorldModel) -> ObservationFile:
    """Parse an observation document and resolve its literals against ``model``."""
    doc = _load(text)
    inf = _expect(doc.get("inference", {}), dict, "inference")
    extra = set(inf) - {"free", "prior", "beta", "sigma", "baseline"}
    if extra:
        raise ParseError(f"unknown keys {sorted(extra)}", path="inference")
    free = tuple(_literal(s, f"inference.free[{i}]")
                 for i, s in enumerate(_expect(inf.get("free", []), list, "inference.free")))
    prior_doc = _expect(inf.get("prior", {}), dict, "inference.prior")
    prior = GaussianPrior(_number(prior_doc.get("mean", 0.0), "inference.prior.mean"),
                          _number(prior_doc.get("sd", 5.0), "inference.prior.sd"))
    beta = _number(inf.get("beta", 1.0), "inference.beta")
    sigma = _number(inf.get("sigma", 1.0), "inference.sigma")
    baseline_free = baseline_fixed = None
    if "baseline" in inf:
        b = _expect(inf["baseline"], dict, "inference.baseline")
        if "free" in b:
            baseline_free = tuple(_literal(s, f"inference.baseline.free[{i}]")
                                  for i, s in enumerate(_expect(b["free"], list, "inference.baseline.free")))
        if "fixed" in b:
            baseline_fixed = {_literal(k, f"inference.baseline.fixed.{k}"): _number(v, f"inference.baseline.fixed.{k}")
                              for k, v in _expect(b["fixed"], dict, "inference.baseline.fixed").items()}
    records = _expect(doc.get("observations", []), list, "observations")
    observations = tuple(_parse_observation(r, f"observations[{i}]", beta, sigma) for i, r in enumerate(records))
    for lit in (*free, *(baseline_free or ()), *(baseline_fixed or {})):
        model.require(lit.variable)
    for obs in observations:
        for lit in obs.literals():
            model.require(lit.variable)
    return ObservationFile(observations, free, prior, beta, sigma, baseline_free, baseline_fixed)


def observation_document(obs: ObservationFile) -> dict:
    records = []
    for o in obs.observations:
        if isinstance(o, ValueReport):
            records.append({"type": "value_report", "literal": str(o.literal),
                            "reported": _num(o.reported), "sigma": _num(o.sigma)})
        else:
            records.append({"type": "choice", "options": [str(x) for x in o.options],
                            "chosen": str(o.chosen), "beta": _num(o.beta)})
    inference: dict[str, Any] = {
        "free": [str(x) for x in obs.free],
        "prior": {"mean": _num(obs.prior.mean), "sd": _num(obs.prior.sd)},
        "beta": _num(obs.beta),
        "sigma": _num(obs.sigma),
    }
    if obs.baseline_free is not None or obs.baseline_fixed is not None:
        inference["baseline"] = {}
        if obs.baseline_free is not None:
            inference["baseline"]["free"] = [str(x) for x in obs.baseline_free]
        if obs.baseline_fixed is not None:
            inference["baseline"]["fixed"] = {str(k): _num(v) for k, v in obs.baseline_fixed.items()}
    return {"format_version": FORMAT_VERSION, "inference": inference, "observations": records}


def emit_observations(obs: ObservationFile) -> str:
    return _dumps(observation_document(obs))


def emit_bundle(model: WorldModel, rewards: Mapping[Literal, float], obs: ObservationFile) -> str:
    """Model and observations in one document, readable by both parsers."""
    doc = model_document(model, rewards)
    doc.update(observation_document(obs))
    return _dumps(doc)


def inference_problem(model: WorldModel, rewards: Mapping[Literal, float], obs: ObservationFile) -> InferenceProblem:
    """Generative problem; rewards on free literals are dropped from the fixed table."""
    fixed = {lit: r for lit, r in rewards.items() if lit not in set(obs.free)}
    return InferenceProblem(model, fixed, obs.free, obs.prior, obs.observations)


def flat_problem(model: WorldModel, obs: ObservationFile) -> FlatProblem:
    return flat_problem_for(model, obs.observations, obs.prior, obs.baseline_free, obs.baseline_fixed)
