"""Brute-force reference semantics and seeded random model generators.

The oracle materializes the full joint table (one row per exogenous
assignment in prior support), filters it by evidence, and re-solves every
surviving row under the intervention.  It shares only the structural-function
evaluator with the engine: variables are solved by memo-free recursion on
parents, interventions are applied during that recursion rather than by
building a submodel, and all arithmetic is exact (``fractions.Fraction``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Optional, Sequence

from .engine import Distribution
from .errors import InconsistentEvidence
from .scm import (
    ENDOGENOUS,
    EXOGENOUS,
    CausalModel,
    ExogenousPrior,
    Roles,
    StructuralFunction,
    Table,
    VariableDecl,
    check_assignment,
    ensure_valid,
)


def _solve(model: CausalModel, name: str, u: Mapping[str, str], do: Mapping[str, str]) -> str:
    if name in do:
        return do[name]
    if model.decl(name).exogenous:
        return u[name]
    fn = model.function(name)
    env = {p: _solve(model, p, u, do) for p in fn.parents}
    return fn(env)


def solve_all(model: CausalModel, u: Mapping[str, str], do: Mapping[str, str] = {}) -> dict[str, str]:
    return {v.name: _solve(model, v.name, u, do) for v in model.variables}


@dataclass(frozen=True)
class JointRow:
    u: dict[str, str]
    values: dict[str, str]
    probability: Fraction


def joint_table(model: CausalModel) -> list[JointRow]:
    ensure_valid(model)
    exo = [v for v in model.variables if v.exogenous]
    rows = []
    for combo in product(*(range(len(v.domain)) for v in exo)):
        p = Fraction(1)
        for v, k in zip(exo, combo):
            p *= Fraction(model.prior(v.name).probabilities[k])
        if p == 0:
            continue
        u = {v.name: v.domain[k] for v, k in zip(exo, combo)}
        rows.append(JointRow(u, solve_all(model, u), p))
    return rows


def oracle_counterfactual(
    model: CausalModel,
    evidence: Mapping[str, str],
    intervention: Mapping[str, str],
    query_vars: Sequence[str],
) -> Distribution:
    evidence = check_assignment(model, evidence, "evidence")
    intervention = check_assignment(model, intervention)
    query = tuple(query_vars)
    for q in query:
        model.decl(q)
    rows = [r for r in joint_table(model) if all(r.values[k] == v for k, v in evidence.items())]
    total = sum((r.probability for r in rows), Fraction(0))
    if total == 0:
        raise InconsistentEvidence(evidence)
    exact: dict[tuple[str, ...], Fraction] = {}
    for r in rows:
        key = tuple(_solve(model, q, r.u, intervention) for q in query)
        exact[key] = exact.get(key, Fraction(0)) + r.probability / total
    table = {k: float(v) for k, v in exact.items()}
    return Distribution(query, tuple(model.domain(q) for q in query), table)


def oracle_effect_magnitude(model: CausalModel, outcome: str, evidence, a: str, a_prime: str) -> float:
    """Total variation between the outcome under A=a and A=a' given evidence, in exact arithmetic."""
    protected = model.roles.protected
    p = oracle_counterfactual(model, evidence, {protected: a}, [outcome])
    q = oracle_counterfactual(model, evidence, {protected: a_prime}, [outcome])
    diff = sum(abs(Fraction(p[y]) - Fraction(q[y])) for y in model.domain(outcome))
    return float(diff / 2)


# --------------------------------------------------------------------------
# random models
# --------------------------------------------------------------------------


def _simplex(rng: random.Random, k: int) -> tuple[float, ...]:
    weights = [rng.expovariate(1.0) for _ in range(k)]
    total = sum(weights)
    probs = [w / total for w in weights]
    # push the rounding residue into the largest entry so the sum is 1 to within an ulp
    probs[probs.index(max(probs))] += 1.0 - sum(probs)
    return tuple(probs)


def _domain(rng: random.Random, max_domain: int) -> tuple[str, ...]:
    return tuple(f"v{i}" for i in range(rng.randint(2, max_domain)))


def _random_table(rng: random.Random, model_domains, parents, domain) -> Table:
    keys = product(*(model_domains[p] for p in parents))
    return Table(tuple((key, rng.choice(domain)) for key in keys))


def random_model(
    rng: random.Random,
    min_vars: int = 2,
    max_vars: int = 6,
    max_domain: int = 3,
    edge_prob: float = 0.5,
) -> CausalModel:
    """A valid role-free model over a random topological order.

    The first variable is always exogenous; later variables are exogenous
    with probability 1/3.  Each endogenous variable reads every earlier
    variable with probability ``edge_prob``; its function is a total table.
    """
    n = rng.randint(min_vars, max_vars)
    variables, priors, functions = [], [], []
    domains: dict[str, tuple[str, ...]] = {}
    for i in range(n):
        exogenous = i == 0 or rng.random() < 1 / 3
        name = f"U{i}" if exogenous else f"V{i}"
        domain = _domain(rng, max_domain)
        domains[name] = domain
        variables.append(VariableDecl(name, domain, EXOGENOUS if exogenous else ENDOGENOUS))
        if exogenous:
            priors.append(ExogenousPrior(name, _simplex(rng, len(domain))))
        else:
            parents = tuple(v.name for v in variables[:-1] if rng.random() < edge_prob)
            functions.append(StructuralFunction(name, parents, _random_table(rng, domains, parents, domain)))
    return CausalModel(f"random{rng.randrange(10**9)}", tuple(variables), tuple(priors), tuple(functions))


def random_audit_model(
    rng: random.Random,
    max_domain: int = 3,
    edge_prob: float = 0.5,
    a_reaches_target: Optional[bool] = None,
) -> CausalModel:
    """A random model with protected attribute, features, predictor and target.

    With ``a_reaches_target=False`` the target is never a descendant of the
    protected attribute.  ``None`` leaves it to chance.
    """
    variables, priors, functions = [], [], []
    domains: dict[str, tuple[str, ...]] = {}

    def add(name, kind, parents=()):
        domain = _domain(rng, max_domain)
        domains[name] = domain
        variables.append(VariableDecl(name, domain, kind))
        if kind == EXOGENOUS:
            priors.append(ExogenousPrior(name, _simplex(rng, len(domain))))
        else:
            functions.append(StructuralFunction(name, tuple(parents), _random_table(rng, domains, parents, domain)))

    def pick(pool):
        return [p for p in pool if rng.random() < edge_prob]

    n_exo = rng.randint(1, 3)
    latents = [f"U{i}" for i in range(n_exo)]
    for u in latents:
        add(u, EXOGENOUS)
    add("A", ENDOGENOUS, pick(latents) or [rng.choice(latents)])
    downstream_of_a = {"A"}
    features = []
    for i in range(rng.randint(0, 2)):
        name = f"X{i}"
        parents = pick(latents + ["A"] + features)
        add(name, ENDOGENOUS, parents)
        if downstream_of_a.intersection(parents):
            downstream_of_a.add(name)
        features.append(name)
    add("P", ENDOGENOUS, pick(["A"] + features))
    pool = latents + ["A"] + features
    if a_reaches_target is False:
        pool = [p for p in pool if p not in downstream_of_a]
    parents = pick(pool)
    if a_reaches_target and not downstream_of_a.intersection(parents):
        parents = [p for p in pool if p in parents or p == "A"]
    add("Y", ENDOGENOUS, parents)
    roles = Roles("A", tuple(features), "P", "Y")
    return CausalModel(
        f"audit{rng.randrange(10**9)}", tuple(variables), tuple(priors), tuple(functions), roles
    )


def random_query(rng: random.Random, model: CausalModel):
    """Random (evidence, intervention, query_vars) over a model's variables."""
    endo = list(model.endogenous)
    evidence = {v: rng.choice(model.domain(v)) for v in endo if rng.random() < 0.4}
    intervention = {v: rng.choice(model.domain(v)) for v in endo if rng.random() < 0.3}
    names = [v.name for v in model.variables]
    query = [v for v in names if rng.random() < 0.5] or [rng.choice(names)]
    return evidence, intervention, query
