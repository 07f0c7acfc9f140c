"""Actual causal effects of the protected attribute and the fairness verdicts built on them.

The effect of ``A = a`` on an outcome in context ``(x, a)`` against a
counterfactual value ``a'`` is the per-value difference

    P(outcome_a = y | x, a) - P(outcome_a' = y | x, a)

and its magnitude is the total variation distance between the two
distributions.  All criteria compare magnitudes, and all of them quantify over
every positive-probability context and every ``a' != a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union

from .engine import Context, counterfactual_query, observational_contexts, require_roles
from .errors import UnknownValue
from .scm import CausalModel, ensure_valid

DEFAULT_TOLERANCE = 1e-9


class Criterion(str, Enum):
    COUNTERFACTUAL = "counterfactual_fairness"
    CAUSAL_RELEVANCE = "causal_relevance_fairness"
    STRICT_CAUSAL_RELEVANCE = "strict_causal_relevance_fairness"
    WRONGFUL = "wrongful_discrimination"


ALL_CRITERIA = tuple(Criterion)


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"


@dataclass(frozen=True)
class EffectReport:
    context: Context
    a_prime: str
    outcome: str
    values: tuple[str, ...]
    signed: tuple[float, ...]
    magnitude: float

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.values, self.signed))


@dataclass(frozen=True)
class ContextEffects:
    """Everything the criteria need for one (context, a') pair."""

    context: Context
    a_prime: str
    predictor: EffectReport
    target: EffectReport
    # TV between the observed predictor distribution and its counterfactual under a'
    differential: float


@dataclass(frozen=True)
class Witness:
    context: Context
    a_prime: str
    evidence: Mapping[str, float]


@dataclass(frozen=True)
class AuditReport:
    criterion: Criterion
    witnesses: tuple[Witness, ...]
    tolerance: float

    @property
    def verdict(self) -> Verdict:
        return Verdict.VIOLATED if self.witnesses else Verdict.SATISFIED

    @property
    def satisfied(self) -> bool:
        return not self.witnesses


ContextLike = Union[Context, tuple]


def _as_context(model: CausalModel, context: ContextLike) -> Context:
    if isinstance(context, Context):
        return context
    x, a = context
    features = model.roles.features
    if isinstance(x, Mapping):
        x = tuple(x[f] for f in features)
    return Context(features, tuple(x), model.roles.protected, a, float("nan"))


def _effect(model, outcome, ctx, a_prime, factual=None, counter=None) -> EffectReport:
    evidence = ctx.evidence
    if factual is None:
        factual = counterfactual_query(model, evidence, {ctx.protected: ctx.a}, [outcome])
    if counter is None:
        counter = counterfactual_query(model, evidence, {ctx.protected: a_prime}, [outcome])
    values = model.domain(outcome)
    signed = tuple(factual[y] - counter[y] for y in values)
    magnitude = 0.5 * math.fsum(abs(d) for d in signed)
    return EffectReport(ctx, a_prime, outcome, values, signed, magnitude)


def actual_effect(model: CausalModel, outcome: str, context: ContextLike, a_prime: str) -> EffectReport:
    """Effect of setting the protected attribute to its factual value rather than ``a_prime``."""
    ensure_valid(model)
    require_roles(model, "protected")
    ctx = _as_context(model, context)
    model.decl(outcome)
    domain = model.domain(ctx.protected)
    if a_prime not in domain:
        raise UnknownValue(ctx.protected, a_prime, domain)
    if ctx.a not in domain:
        raise UnknownValue(ctx.protected, ctx.a, domain)
    if a_prime == ctx.a:
        raise ValueError("counterfactual value must differ from the factual one")
    return _effect(model, outcome, ctx, a_prime)


def compute_effects(model: CausalModel) -> list[ContextEffects]:
    """Predictor and target effects for every positive context and every a' != a.

    Each distinct counterfactual query is evaluated once; the factual branch is
    shared across the a' values of a context.
    """
    ensure_valid(model)
    require_roles(model, "protected", "predictor", "target")
    protected = model.roles.protected
    predictor = model.roles.predictor
    target = model.roles.target
    out = []
    for ctx in observational_contexts(model):
        ev = ctx.evidence
        fact_pred = counterfactual_query(model, ev, {protected: ctx.a}, [predictor])
        fact_target = counterfactual_query(model, ev, {protected: ctx.a}, [target])
        observed = counterfactual_query(model, ev, {}, [predictor])
        for a_prime in model.domain(protected):
            if a_prime == ctx.a:
                continue
            counter = counterfactual_query(model, ev, {protected: a_prime}, [predictor])
            pred = _effect(model, predictor, ctx, a_prime, fact_pred, counter)
            targ = _effect(model, target, ctx, a_prime, fact_target)
            out.append(ContextEffects(ctx, a_prime, pred, targ, observed.total_variation(counter)))
    return out


def _evidence(e: ContextEffects) -> dict[str, float]:
    return {
        "predictor_effect": e.predictor.magnitude,
        "target_effect": e.target.magnitude,
        "differential_treatment": e.differential,
    }


def _violates(criterion: Criterion, e: ContextEffects, tol: float) -> bool:
    pred = e.predictor.magnitude
    targ = e.target.magnitude
    if criterion is Criterion.COUNTERFACTUAL:
        return pred > tol
    # the weak relevance test and the wrongfulness condition share this expression
    excess = pred - targ
    if criterion is Criterion.CAUSAL_RELEVANCE:
        return excess > tol
    if criterion is Criterion.STRICT_CAUSAL_RELEVANCE:
        return abs(pred - targ) > tol
    if criterion is Criterion.WRONGFUL:
        differential = e.differential > tol
        explanatory = pred > tol
        wrongful = excess > tol
        return differential and explanatory and wrongful
    raise ValueError(f"unknown criterion {criterion!r}")


def judge(criterion: Criterion, effects: Sequence[ContextEffects], tolerance: float = DEFAULT_TOLERANCE) -> AuditReport:
    criterion = Criterion(criterion)
    witnesses = tuple(
        Witness(e.context, e.a_prime, _evidence(e)) for e in effects if _violates(criterion, e, tolerance)
    )
    return AuditReport(criterion, witnesses, tolerance)


def check_counterfactual_fairness(model: CausalModel, tolerance: float = DEFAULT_TOLERANCE) -> AuditReport:
    return judge(Criterion.COUNTERFACTUAL, compute_effects(model), tolerance)


def check_causal_relevance_fairness(
    model: CausalModel, tolerance: float = DEFAULT_TOLERANCE, strict: bool = False
) -> AuditReport:
    criterion = Criterion.STRICT_CAUSAL_RELEVANCE if strict else Criterion.CAUSAL_RELEVANCE
    return judge(criterion, compute_effects(model), tolerance)


def check_wrongful_discrimination(model: CausalModel, tolerance: float = DEFAULT_TOLERANCE) -> AuditReport:
    return judge(Criterion.WRONGFUL, compute_effects(model), tolerance)


@dataclass(frozen=True)
class Audit:
    model: CausalModel
    tolerance: float
    effects: tuple[ContextEffects, ...]
    reports: tuple[AuditReport, ...] = field(default=())

    def report(self, criterion) -> AuditReport:
        criterion = Criterion(criterion)
        for r in self.reports:
            if r.criterion is criterion:
                return r
        raise KeyError(criterion)


def run_audit(
    model: CausalModel,
    tolerance: float = DEFAULT_TOLERANCE,
    criteria: Optional[Iterable] = None,
) -> Audit:
    effects = tuple(compute_effects(model))
    chosen = ALL_CRITERIA if criteria is None else tuple(Criterion(c) for c in criteria)
    return Audit(model, tolerance, effects, tuple(judge(c, effects, tolerance) for c in chosen))


def full_audit(model: CausalModel, tolerance: float = DEFAULT_TOLERANCE) -> list[AuditReport]:
    """Reports for all four criteria from one shared set of effect computations."""
    return list(run_audit(model, tolerance).reports)
