"""Binary causal world models and exact (interventional) queries.

A :class:`WorldModel` is a Bayesian network over binary variables. Queries are
answered by full enumeration of the joint, vectorised with numpy. Interventions
are graph surgery: ``do(X=x)`` drops the incoming edges of ``X`` and pins it.
"""

from __future__ import annotations

import heapq
import itertools
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    CptError,
    CycleError,
    IncompleteAssignmentError,
    ModelError,
    ModelTooLargeError,
    ParseError,
    SameVariableError,
    UnknownVariableError,
)

DEFAULT_MAX_VARS = 20
MAX_VARS_ENV = "VALGRAPH_MAX_VARS"


def enumeration_cap() -> int:
    """Largest model (in variables) that exact enumeration will accept."""
    raw = os.environ.get(MAX_VARS_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_VARS
    try:
        cap = int(raw)
    except ValueError:
        raise ModelError(f"{MAX_VARS_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ModelError(f"{MAX_VARS_ENV} must be positive, got {cap}")
    return cap


@dataclass(frozen=True, order=True)
class Literal:
    """A variable fixed to a polarity; the unit that carries value."""

    variable: str
    polarity: bool

    def complement(self) -> Literal:
        return Literal(self.variable, not self.polarity)

    __invert__ = complement

    def __str__(self) -> str:
        return f"{self.variable}={'true' if self.polarity else 'false'}"

    @classmethod
    def parse(cls, text: str) -> Literal:
        """Parse ``Name=true`` / ``Name=false``."""
        if not isinstance(text, str):
            raise ParseError(f"literal must be a string, got {text!r}")
        name, sep, pol = text.rpartition("=")
        if not sep or not name or pol not in ("true", "false"):
            raise ParseError(f"malformed literal {text!r}; expected Name=true or Name=false")
        return cls(name, pol == "true")


def as_literal(value: Literal | str) -> Literal:
    return value if isinstance(value, Literal) else Literal.parse(value)


def parent_assignments(n_parents: int) -> list[tuple[bool, ...]]:
    """All parent assignments in canonical order (true before false, first parent slowest)."""
    return list(itertools.product((True, False), repeat=n_parents))


@dataclass(frozen=True)
class CptRow:
    given: tuple[tuple[str, bool], ...]
    p_true: float

    def __post_init__(self):
        p = self.p_true
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not math.isfinite(p):
            raise CptError(f"p_true must be a finite number, got {p!r}")
        if not 0.0 <= p <= 1.0:
            raise CptError(f"p_true={p!r} outside [0, 1]")


@dataclass(frozen=True)
class WorldModel:
    """Validated causal network. Treat as immutable; use :func:`build_model`."""

    variables: tuple[str, ...]
    parents: Mapping[str, tuple[str, ...]]
    cpts: Mapping[str, tuple[CptRow, ...]]
    controllable: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        seen = set()
        for name in self.variables:
            if not isinstance(name, str) or not name:
                raise ModelError(f"variable names must be nonempty strings, got {name!r}")
            if "=" in name or "," in name or name != name.strip():
                raise ModelError(f"variable name {name!r} may not contain '=', ',' or edge whitespace")
            if name in seen:
                raise ModelError(f"duplicate variable {name!r}")
            seen.add(name)
        if set(self.parents) != seen or set(self.cpts) != seen:
            missing = seen.symmetric_difference(self.parents) | seen.symmetric_difference(self.cpts)
            raise UnknownVariableError(f"parents/cpts keys disagree with variables: {sorted(missing)}")
        for name in self.variables:
            ps = self.parents[name]
            for p in ps:
                if p not in seen:
                    raise UnknownVariableError(f"{name}: unknown parent {p!r}")
            if len(set(ps)) != len(ps):
                raise ModelError(f"{name}: repeated parent")
        for name in self.controllable:
            if name not in seen:
                raise UnknownVariableError(f"unknown controllable variable {name!r}")
        self._check_acyclic()
        for name in self.variables:
            self._check_cpt(name)
        # canonical rows, so equal tables compare equal however they were written
        object.__setattr__(self, "parents", {v: tuple(self.parents[v]) for v in self.variables})
        object.__setattr__(self, "cpts", {v: self._canonical_rows(v) for v in self.variables})

    def _canonical_rows(self, name: str) -> tuple[CptRow, ...]:
        ps = self.parents[name]
        by_key = {tuple(dict(r.given)[p] for p in ps): r.p_true for r in self.cpts[name]}
        return tuple(CptRow(tuple(zip(ps, key)), by_key[key]) for key in parent_assignments(len(ps)))

    def _check_acyclic(self) -> None:
        state: dict[str, int] = {}

        def visit(node: str, path: list[str]) -> None:
            state[node] = 1
            for p in self.parents[node]:
                if state.get(p) == 1:
                    cyc = path[path.index(p):] + [p] if p in path else [node, p]
                    raise CycleError(f"cycle through {' <- '.join(cyc)}")
                if p not in state:
                    visit(p, path + [p])
            state[node] = 2

        for v in self.variables:
            if v not in state:
                visit(v, [v])

    def _check_cpt(self, name: str) -> None:
        ps = self.parents[name]
        rows = self.cpts[name]
        keys = set()
        for row in rows:
            given = dict(row.given)
            if len(given) != len(row.given) or set(given) != set(ps):
                raise CptError(f"{name}: row given {dict(row.given)} does not assign exactly the parents {list(ps)}")
            if not all(isinstance(b, bool) for b in given.values()):
                raise CptError(f"{name}: row given values must be booleans")
            key = tuple(given[p] for p in ps)
            if key in keys:
                raise CptError(f"{name}: duplicate row for {given}")
            keys.add(key)
        if len(keys) != 2 ** len(ps):
            raise CptError(f"{name}: expected {2 ** len(ps)} CPT rows, got {len(keys)}")

    # -- derived, cached views ------------------------------------------------

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.variables)}

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        """Direct children per variable, in declaration order."""
        kids: dict[str, list[str]] = {v: [] for v in self.variables}
        for v in self.variables:
            for p in self.parents[v]:
                kids[p].append(v)
        return {v: tuple(k) for v, k in kids.items()}

    @cached_property
    def tables(self) -> dict[str, np.ndarray]:
        """P(var=true | parents) as a flat array in canonical parent order."""
        out = {}
        for v in self.variables:
            ps = self.parents[v]
            by_key = {tuple(dict(r.given)[p] for p in ps): float(r.p_true) for r in self.cpts[v]}
            out[v] = np.array([by_key[k] for k in parent_assignments(len(ps))], dtype=float)
        return out

    @cached_property
    def _marginal_cache(self) -> dict[Literal, dict[str, float]]:
        return {}

    def p_true(self, variable: str, given: Mapping[str, bool]) -> float:
        ps = self.parents[variable]
        return float(self.tables[variable][_row_index(tuple(given[p] for p in ps))])

    def literals(self) -> list[Literal]:
        """All 2n literals, declaration order, true first."""
        return [Literal(v, pol) for v in self.variables for pol in (True, False)]

    def require(self, variable: str) -> None:
        if variable not in self.parents:
            raise UnknownVariableError(f"unknown variable {variable!r}")


def _row_index(key: Sequence[bool]) -> int:
    idx = 0
    for b in key:
        idx = (idx << 1) | (0 if b else 1)
    return idx


def tabular_cpt(parents: Sequence[str], probs: Sequence[float]) -> list[dict]:
    """Raw CPT rows from probabilities listed in canonical parent order."""
    keys = parent_assignments(len(parents))
    if len(probs) != len(keys):
        raise CptError(f"expected {len(keys)} probabilities for parents {list(parents)}, got {len(probs)}")
    return [{"given": dict(zip(parents, k)), "p_true": p} for k, p in zip(keys, probs)]


def build_model(desc: Mapping) -> WorldModel:
    """Build a validated model from a raw description.

    ``desc`` has ``variables`` (a list of ``{"name", "parents", "cpt"}`` where
    each CPT row is ``{"given": {parent: bool}, "p_true": float}``) and an
    optional ``controllable`` list. Roots need one row with an empty ``given``.
    """
    try:
        entries = list(desc["variables"])
    except (KeyError, TypeError):
        raise ModelError("model description needs a 'variables' list") from None
    names: list[str] = []
    parents: dict[str, tuple[str, ...]] = {}
    cpts: dict[str, tuple[CptRow, ...]] = {}
    for entry in entries:
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise ModelError(f"variable entry without a valid name: {entry!r}")
        if name in parents:
            raise ModelError(f"duplicate variable {name!r}")
        ps = tuple(entry.get("parents", ()))
        rows = []
        for raw in entry.get("cpt", ()):
            if not isinstance(raw, Mapping) or "p_true" not in raw:
                raise CptError(f"{name}: CPT row must be a mapping with 'p_true', got {raw!r}")
            given = raw.get("given", {}) or {}
            try:
                rows.append(CptRow(tuple(given.items()), raw["p_true"]))
            except CptError as exc:
                raise CptError(f"{name}: {exc}") from None
        names.append(name)
        parents[name] = ps
        cpts[name] = tuple(rows)
    return WorldModel(
        variables=tuple(names),
        parents=parents,
        cpts=cpts,
        controllable=frozenset(desc.get("controllable", ())),
    )


def topological_order(model: WorldModel) -> list[str]:
    """Parents before children; among ready variables, declaration order wins."""
    indeg = {v: len(model.parents[v]) for v in model.variables}
    ready = [model.index[v] for v in model.variables if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = model.variables[heapq.heappop(ready)]
        order.append(v)
        for c in model.children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, model.index[c])
    return order


def all_assignments(model: WorldModel) -> Iterator[dict[str, bool]]:
    for bits in itertools.product((True, False), repeat=len(model.variables)):
        yield dict(zip(model.variables, bits))


def joint_probability(model: WorldModel, a: Mapping[str, bool]) -> float:
    for name in a:
        model.require(name)
    missing = [v for v in model.variables if v not in a]
    if missing:
        raise IncompleteAssignmentError(f"assignment misses {missing}")
    prob = 1.0
    for v in model.variables:
        p = model.p_true(v, a)
        prob *= p if a[v] else 1.0 - p
    return prob


def do_surgery(model: WorldModel, intervention: Literal) -> WorldModel:
    """Cut the incoming edges of the intervened variable and pin its value."""
    var = intervention.variable
    model.require(var)
    parents = dict(model.parents)
    cpts = dict(model.cpts)
    parents[var] = ()
    cpts[var] = (CptRow((), 1.0 if intervention.polarity else 0.0),)
    return WorldModel(model.variables, parents, cpts, model.controllable)


def _check_size(model: WorldModel, max_vars: int | None) -> None:
    cap = enumeration_cap() if max_vars is None else max_vars
    if len(model.variables) > cap:
        raise ModelTooLargeError(
            f"{len(model.variables)} variables exceeds the enumeration cap of {cap} "
            f"(set {MAX_VARS_ENV} to raise it)")


def joint_table(model: WorldModel, max_vars: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Every total assignment (rows of a bool matrix) with its probability."""
    _check_size(model, max_vars)
    n = len(model.variables)
    codes = np.arange(2 ** n, dtype=np.int64)
    # column j is true when bit (n-1-j) is 0, so row 0 is all-true
    states = ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1) == 0
    probs = np.ones(2 ** n)
    for j, v in enumerate(model.variables):
        ps = model.parents[v]
        idx = np.zeros(2 ** n, dtype=np.int64)
        for p in ps:
            idx = (idx << 1) | (~states[:, model.index[p]]).astype(np.int64)
        pt = model.tables[v][idx]
        probs *= np.where(states[:, j], pt, 1.0 - pt)
    return states, probs


def interventional_marginals(model: WorldModel, intervention: Literal,
                             max_vars: int | None = None) -> dict[str, float]:
    """P(v=true | do(intervention)) for every variable v."""
    model.require(intervention.variable)
    cache = model._marginal_cache
    if max_vars is None and intervention in cache:
        return cache[intervention]
    states, probs = joint_table(do_surgery(model, intervention), max_vars)
    out = {v: float(probs[states[:, j]].sum()) for j, v in enumerate(model.variables)}
    if max_vars is None:
        cache[intervention] = out
    return out


def interventional_prob(model: WorldModel, target: Literal, intervention: Literal,
                        max_vars: int | None = None) -> float:
    """P(target | do(intervention)), exact."""
    model.require(target.variable)
    model.require(intervention.variable)
    if target.variable == intervention.variable:
        raise SameVariableError(f"target and intervention share variable {target.variable!r}")
    p = interventional_marginals(model, intervention, max_vars)[target.variable]
    return p if target.polarity else 1.0 - p


def model_description(model: WorldModel) -> dict:
    """Inverse of :func:`build_model`: a raw description with canonical row order."""
    variables = []
    for v in model.variables:
        ps = model.parents[v]
        variables.append({
            "name": v,
            "parents": list(ps),
            "cpt": tabular_cpt(ps, model.tables[v].tolist()),
        })
    return {
        "variables": variables,
        "controllable": [v for v in model.variables if v in model.controllable],
    }


def replace_cpt(model: WorldModel, variable: str, probs: Iterable[float]) -> WorldModel:
    """Copy of ``model`` with one variable's CPT replaced (canonical row order)."""
    model.require(variable)
    desc = model_description(model)
    for entry in desc["variables"]:
        if entry["name"] == variable:
            entry["cpt"] = tabular_cpt(entry["parents"], list(probs))
    return build_model(desc)
