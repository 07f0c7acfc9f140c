"""Exact counterfactual inference for finite structural causal models, and
fairness audits (counterfactual fairness, causal relevance fairness, wrongful
discrimination) built on it."""

from .dsl import Diagnostic, DslError, ModelDocument, load, parse, serialize
from .engine import (
    Context,
    Distribution,
    ExogenousPosterior,
    abduce,
    counterfactual_query,
    evaluate,
    observational_contexts,
)
from .errors import (
    CausalModelError,
    InconsistentEvidence,
    InvalidModel,
    MissingRole,
    UnknownValue,
    UnknownVariable,
    ValueOutsideDomain,
)
from .fairness import (
    DEFAULT_TOLERANCE,
    AuditReport,
    Criterion,
    EffectReport,
    Verdict,
    actual_effect,
    check_causal_relevance_fairness,
    check_counterfactual_fairness,
    check_wrongful_discrimination,
    full_audit,
    run_audit,
)
from .scm import CausalModel, submodel, validate

__version__ = "0.1.0"
