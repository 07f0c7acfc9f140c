"""Exact inference over the joint exogenous domain.

Every probability is obtained by enumerating the exogenous assignments with
positive prior mass, pushing each through the structural functions in
topological order, and summing in a fixed order.  Nothing is sampled.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InconsistentEvidence, MissingRole, ValueOutsideDomain
from .scm import CausalModel, check_assignment, ensure_valid, submodel

# round-off below this is treated as zero probability
EPS_SUPPORT = 1e-15


@dataclass(frozen=True)
class ExogenousPosterior:
    """P(u | evidence) as (assignment, probability) pairs in enumeration order."""

    variables: tuple[str, ...]
    support: tuple[tuple[tuple[str, ...], float], ...]

    def __iter__(self) -> Iterator[tuple[dict[str, str], float]]:
        for values, p in self.support:
            yield dict(zip(self.variables, values)), p

    def __len__(self) -> int:
        return len(self.support)

    def probability(self, u: Mapping[str, str]) -> float:
        key = tuple(u[v] for v in self.variables)
        for values, p in self.support:
            if values == key:
                return p
        return 0.0

    def total(self) -> float:
        return math.fsum(p for _, p in self.support)


@dataclass(frozen=True)
class Distribution:
    """Joint distribution of ``variables``; value tuples absent from ``table`` have probability 0."""

    variables: tuple[str, ...]
    domains: tuple[tuple[str, ...], ...]
    table: Mapping[tuple[str, ...], float]

    def __getitem__(self, values) -> float:
        if not isinstance(values, tuple):
            values = (values,)
        return self.table.get(values, 0.0)

    def rows(self) -> list[tuple[tuple[str, ...], float]]:
        """Every value tuple of the product domain in canonical domain order."""
        return [(key, self.table.get(key, 0.0)) for key in itertools.product(*self.domains)]

    def vector(self) -> list[float]:
        return [p for _, p in self.rows()]

    def max_deviation(self, other: "Distribution") -> float:
        if self.variables != other.variables:
            raise ValueError("distributions are over different variables")
        return max((abs(a - b) for a, b in zip(self.vector(), other.vector())), default=0.0)

    def total_variation(self, other: "Distribution") -> float:
        return 0.5 * math.fsum(abs(a - b) for a, b in zip(self.vector(), other.vector()))


def exogenous_prior(model: CausalModel) -> Iterator[tuple[tuple[str, ...], float]]:
    """Yield every exogenous value tuple with positive prior mass and that mass."""
    names = model.exogenous
    domains = [model.domain(n) for n in names]
    probs = [model.prior(n).probabilities for n in names]
    for idx in itertools.product(*(range(len(d)) for d in domains)):
        p = 1.0
        for probs_i, k in zip(probs, idx):
            p *= probs_i[k]
        if p > 0.0:
            yield tuple(d[k] for d, k in zip(domains, idx)), p


def _evaluate(model: CausalModel, u: Mapping[str, str]) -> dict[str, str]:
    values = dict(u)
    for name in model.topological_order:
        values[name] = model.function(name)(values)
    return values


def evaluate(model: CausalModel, u: Mapping[str, str]) -> dict[str, str]:
    """Solve every endogenous variable for the exogenous assignment ``u``."""
    ensure_valid(model)
    exo = model.exogenous
    missing = [n for n in exo if n not in u]
    if missing:
        raise ValueError(f"exogenous assignment is missing {', '.join(missing)}")
    for n in u:
        if model.decl(n).kind != "exogenous":
            raise ValueError(f"{n} is not exogenous")
    for n in exo:
        if u[n] not in model.domain(n):
            raise ValueOutsideDomain(n, u[n], model.domain(n))
    return _evaluate(model, {n: u[n] for n in exo})


def _consistent(values: Mapping[str, str], evidence: Mapping[str, str]) -> bool:
    return all(values[k] == v for k, v in evidence.items())


def _abduce(model: CausalModel, evidence: Mapping[str, str]) -> ExogenousPosterior:
    names = model.exogenous
    kept = []
    for values, p in exogenous_prior(model):
        if _consistent(_evaluate(model, dict(zip(names, values))), evidence):
            kept.append((values, p))
    total = math.fsum(p for _, p in kept)
    if total <= 0.0:
        raise InconsistentEvidence(evidence)
    return ExogenousPosterior(names, tuple((values, p / total) for values, p in kept))


def abduce(model: CausalModel, evidence: Mapping[str, str]) -> ExogenousPosterior:
    """Condition the exogenous prior on endogenous ``evidence``."""
    ensure_valid(model)
    return _abduce(model, check_assignment(model, evidence, "evidence"))


def counterfactual_query(
    model: CausalModel,
    evidence: Mapping[str, str],
    intervention: Mapping[str, str],
    query_vars: Sequence[str],
) -> Distribution:
    """P(query_vars under do(intervention) | evidence) by abduction, action, prediction."""
    ensure_valid(model)
    evidence = check_assignment(model, evidence, "evidence")
    query = tuple(query_vars)
    for q in query:
        model.decl(q)
    posterior = _abduce(model, evidence)
    acted = submodel(model, intervention)
    table: dict[tuple[str, ...], float] = {}
    for u, p in posterior:
        values = _evaluate(acted, u)
        key = tuple(values[q] for q in query)
        table[key] = table.get(key, 0.0) + p
    return Distribution(query, tuple(model.domain(q) for q in query), table)


@dataclass(frozen=True)
class Context:
    """An observed context: feature values ``x`` (aligned with ``features``) and protected value ``a``."""

    features: tuple[str, ...]
    x: tuple[str, ...]
    protected: str
    a: str
    probability: float

    @property
    def evidence(self) -> dict[str, str]:
        ev = dict(zip(self.features, self.x))
        ev[self.protected] = self.a
        return ev

    def label(self) -> str:
        parts = [f"{f}={v}" for f, v in zip(self.features, self.x)]
        parts.append(f"{self.protected}={self.a}")
        return ", ".join(parts)


def require_roles(model: CausalModel, *roles: str) -> None:
    for role in roles:
        if getattr(model.roles, role) is None:
            raise MissingRole(f"model {model.name} declares no {role} variable")


def observational_contexts(model: CausalModel) -> list[Context]:
    """Every (x, a) with strictly positive observational probability, in canonical domain order."""
    ensure_valid(model)
    require_roles(model, "protected")
    features = model.roles.features
    protected = model.roles.protected
    names = model.exogenous
    mass: dict[tuple[tuple[str, ...], str], float] = {}
    for values, p in exogenous_prior(model):
        solved = _evaluate(model, dict(zip(names, values)))
        key = (tuple(solved[f] for f in features), solved[protected])
        mass[key] = mass.get(key, 0.0) + p
    order = [
        {v: i for i, v in enumerate(model.domain(n))} for n in (*features, protected)
    ]

    def rank(key):
        x, a = key
        return tuple(o[v] for o, v in zip(order, (*x, a)))

    return [
        Context(features, x, protected, a, p)
        for (x, a), p in sorted(mass.items(), key=lambda kv: rank(kv[0]))
        if p > EPS_SUPPORT
    ]


def marginal(model: CausalModel, query_vars: Iterable[str]) -> Distribution:
    return counterfactual_query(model, {}, {}, list(query_vars))
