"""Finite discrete structural causal models.

A model is a set of exogenous variables with independent priors, a set of
endogenous variables each computed by a structural function of declared
parents, and optional role designations (protected attribute, features,
predictor, target) used by the fairness audits.

Models are immutable; ``validate`` reports every broken invariant as a list of
:class:`Issue` records instead of raising.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from graphlib import CycleError, TopologicalSorter
from typing import Iterator, Mapping, Optional, Union

from .errors import InvalidModel, NotIntervenable, UnknownVariable, ValueOutsideDomain

EPS_NORM = 1e-9

EXOGENOUS = "exogenous"
ENDOGENOUS = "endogenous"


# --------------------------------------------------------------------------
# expression trees
# --------------------------------------------------------------------------


class MissingRow(LookupError):
    """A table has no row (and no default) for the given parent values."""


@dataclass(frozen=True)
class Const:
    value: str

    def evaluate(self, env: Mapping[str, str], parents: tuple[str, ...]) -> str:
        return self.value

    def references(self) -> Iterator[str]:
        return iter(())


@dataclass(frozen=True)
class Ref:
    name: str

    def evaluate(self, env, parents):
        return env[self.name]

    def references(self):
        yield self.name


@dataclass(frozen=True)
class IfEq:
    """``if <variable> == <value> then <then> else <orelse>``."""

    variable: str
    value: str
    then: "Expr"
    orelse: "Expr"

    def evaluate(self, env, parents):
        branch = self.then if env[self.variable] == self.value else self.orelse
        return branch.evaluate(env, parents)

    def references(self):
        yield self.variable
        yield from self.then.references()
        yield from self.orelse.references()


@dataclass(frozen=True)
class Table:
    """Lookup table keyed by the value tuple of the enclosing function's parents."""

    rows: tuple[tuple[tuple[str, ...], str], ...]
    default: Optional[str] = None

    @cached_property
    def _index(self) -> dict[tuple[str, ...], str]:
        return dict(self.rows)

    def evaluate(self, env, parents):
        key = tuple(env[p] for p in parents)
        try:
            return self._index[key]
        except KeyError:
            if self.default is None:
                raise MissingRow(key) from None
            return self.default

    def references(self):
        return iter(())


Expr = Union[Const, Ref, IfEq, Table]


def iter_nodes(expr: Expr) -> Iterator[Expr]:
    yield expr
    if isinstance(expr, IfEq):
        yield from iter_nodes(expr.then)
        yield from iter_nodes(expr.orelse)


# --------------------------------------------------------------------------
# declarations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class VariableDecl:
    name: str
    domain: tuple[str, ...]
    kind: str = ENDOGENOUS

    @property
    def exogenous(self) -> bool:
        return self.kind == EXOGENOUS


@dataclass(frozen=True)
class ExogenousPrior:
    variable: str
    probabilities: tuple[float, ...]


@dataclass(frozen=True)
class StructuralFunction:
    target: str
    parents: tuple[str, ...]
    body: Expr

    def __call__(self, env: Mapping[str, str]) -> str:
        return self.body.evaluate(env, self.parents)


@dataclass(frozen=True)
class Roles:
    protected: Optional[str] = None
    features: tuple[str, ...] = ()
    predictor: Optional[str] = None
    target: Optional[str] = None

    @property
    def declared(self) -> bool:
        return bool(self.protected or self.features or self.predictor or self.target)


@dataclass(frozen=True)
class Issue:
    """One violated invariant. ``part`` says which declaration is at fault."""

    code: str
    variable: Optional[str]
    message: str
    part: str = "decl"

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class ValidationResult:
    issues: tuple[Issue, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class CausalModel:
    name: str
    variables: tuple[VariableDecl, ...]
    priors: tuple[ExogenousPrior, ...]
    functions: tuple[StructuralFunction, ...]
    roles: Roles = field(default_factory=Roles)

    @cached_property
    def _decls(self) -> dict[str, VariableDecl]:
        return {v.name: v for v in self.variables}

    @cached_property
    def _functions(self) -> dict[str, StructuralFunction]:
        return {f.target: f for f in self.functions}

    @cached_property
    def _priors(self) -> dict[str, ExogenousPrior]:
        return {p.variable: p for p in self.priors}

    def __contains__(self, name: str) -> bool:
        return name in self._decls

    def decl(self, name: str) -> VariableDecl:
        try:
            return self._decls[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def domain(self, name: str) -> tuple[str, ...]:
        return self.decl(name).domain

    def function(self, name: str) -> StructuralFunction:
        try:
            return self._functions[name]
        except KeyError:
            raise UnknownVariable(name) from None

    def prior(self, name: str) -> ExogenousPrior:
        try:
            return self._priors[name]
        except KeyError:
            raise UnknownVariable(name) from None

    @property
    def exogenous(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.exogenous)

    @property
    def endogenous(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if not v.exogenous)

    @cached_property
    def topological_order(self) -> tuple[str, ...]:
        """Endogenous variables ordered so that parents come first.

        Ties are broken by declaration order so the order is reproducible.
        """
        endo = set(self.endogenous)
        position = {name: i for i, name in enumerate(self.endogenous)}
        sorter = TopologicalSorter(
            {f.target: [p for p in f.parents if p in endo] for f in self.functions}
        )
        sorter.prepare()
        order: list[str] = []
        while sorter.is_active():
            ready = sorted(sorter.get_ready(), key=position.__getitem__)
            order.extend(ready)
            sorter.done(*ready)
        return tuple(order)

    def children(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {v.name: set() for v in self.variables}
        for f in self.functions:
            for p in f.parents:
                out.setdefault(p, set()).add(f.target)
        return out

    def descendants(self, name: str) -> set[str]:
        """Variables reachable from ``name`` by a directed path (excluding itself)."""
        kids = self.children()
        seen: set[str] = set()
        stack = [name]
        while stack:
            for child in kids.get(stack.pop(), ()):
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return seen

    def ancestors(self, name: str) -> set[str]:
        seen: set[str] = set()
        stack = [name]
        while stack:
            fn = self._functions.get(stack.pop())
            if fn is None:
                continue
            for p in fn.parents:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    @cached_property
    def validation(self) -> ValidationResult:
        return validate(self)


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _check_variables(model: CausalModel, issues: list[Issue]) -> None:
    seen: set[str] = set()
    for v in model.variables:
        if v.name in seen:
            issues.append(Issue("duplicate-variable", v.name, f"duplicate variable {v.name}"))
        seen.add(v.name)
        if v.kind not in (EXOGENOUS, ENDOGENOUS):
            issues.append(Issue("bad-kind", v.name, f"variable {v.name} has unknown kind {v.kind!r}"))
        if not v.domain:
            issues.append(Issue("empty-domain", v.name, f"domain of {v.name} is empty", "domain"))
        dupes = sorted({x for x in v.domain if v.domain.count(x) > 1})
        if dupes:
            issues.append(
                Issue(
                    "duplicate-value",
                    v.name,
                    f"domain of {v.name} repeats {', '.join(dupes)}",
                    "domain",
                )
            )


def _check_priors(model: CausalModel, issues: list[Issue]) -> None:
    counts: dict[str, int] = {}
    for prior in model.priors:
        counts[prior.variable] = counts.get(prior.variable, 0) + 1
        name = prior.variable
        if name not in model:
            issues.append(Issue("unknown-variable", name, f"prior for undeclared variable {name}", "prior"))
            continue
        decl = model.decl(name)
        if not decl.exogenous:
            issues.append(Issue("prior-on-endogenous", name, f"endogenous {name} cannot have a prior", "prior"))
            continue
        probs = prior.probabilities
        if len(probs) != len(decl.domain):
            issues.append(
                Issue(
                    "prior-length",
                    name,
                    f"prior of {name} has {len(probs)} entries for a domain of size {len(decl.domain)}",
                    "prior",
                )
            )
        if any(not math.isfinite(p) or p < 0 for p in probs):
            issues.append(Issue("prior-negative", name, f"prior of {name} has a negative or non-finite entry", "prior"))
            continue
        total = math.fsum(probs)
        if abs(total - 1.0) > EPS_NORM:
            issues.append(Issue("prior-sum", name, f"prior not normalized (sum {_fmt(total)})", "prior"))
    for name in model.exogenous:
        n = counts.get(name, 0)
        if n == 0:
            issues.append(Issue("missing-prior", name, f"exogenous {name} has no prior", "prior"))
        elif n > 1:
            issues.append(Issue("duplicate-prior", name, f"exogenous {name} has {n} priors", "prior"))


def _check_function(model: CausalModel, fn: StructuralFunction, issues: list[Issue]) -> None:
    name = fn.target
    bad = False
    for p in fn.parents:
        if p not in model:
            issues.append(Issue("unknown-parent", name, f"{name} reads undeclared variable {p}", "fn"))
            bad = True
        elif p == name:
            issues.append(Issue("self-parent", name, f"cycle: {name}↔{name}", "fn"))
            bad = True
    if len(set(fn.parents)) != len(fn.parents):
        issues.append(Issue("duplicate-parent", name, f"{name} lists a parent twice", "fn"))
        bad = True
    for node in iter_nodes(fn.body):
        for ref in node.references():
            if ref not in fn.parents:
                issues.append(Issue("undeclared-parent", name, f"{name} reads {ref}, which is not among its parents", "fn"))
                bad = True
        if isinstance(node, IfEq) and node.variable in model and node.value not in model.domain(node.variable):
            issues.append(
                Issue("test-value", name, f"{name} compares {node.variable} with {node.value}, outside its domain", "fn")
            )
        if isinstance(node, Table):
            for key, _ in node.rows:
                if len(key) != len(fn.parents):
                    issues.append(
                        Issue("table-arity", name, f"table row {key} of {name} does not match {len(fn.parents)} parents", "fn")
                    )
                    bad = True
    if bad:
        return
    # totality by exhaustive evaluation over the parent product domain
    domain = set(model.domain(name))
    parent_domains = [model.domain(p) for p in fn.parents]
    for combo in itertools.product(*parent_domains):
        env = dict(zip(fn.parents, combo))
        try:
            out = fn(env)
        except MissingRow:
            shown = ", ".join(combo)
            issues.append(Issue("not-total", name, f"function of {name} is not total: no row for ({shown})", "fn"))
            return
        if out not in domain:
            issues.append(
                Issue("value-outside-domain", name, f"function of {name} yields {out}, outside its domain", "fn")
            )
            return


def _check_acyclic(model: CausalModel, issues: list[Issue]) -> None:
    endo = set(model.endogenous)
    graph = {
        f.target: [p for p in f.parents if p in endo and p != f.target]
        for f in model.functions
        if f.target in endo
    }
    try:
        TopologicalSorter(graph).prepare()
    except CycleError as exc:
        # graphlib lists each node as a parent of the next; start at the earliest declared
        cycle = list(exc.args[1])[:-1]
        position = {name: i for i, name in enumerate(model.endogenous)}
        first = min(range(len(cycle)), key=lambda i: position.get(cycle[i], 0))
        cycle = cycle[first:] + cycle[:first]
        if len(cycle) == 2:
            text = f"{cycle[0]}↔{cycle[1]}"
        else:
            text = "→".join(cycle + cycle[:1])
        issues.append(Issue("cycle", cycle[0], f"cycle: {text}", "fn"))


def _check_roles(model: CausalModel, issues: list[Issue]) -> None:
    roles = model.roles
    if not roles.declared:
        return
    named = [("protected", roles.protected), ("predictor", roles.predictor), ("target", roles.target)]
    named += [("feature", f) for f in roles.features]
    for role, name in named:
        if name is None:
            continue
        if name not in model:
            issues.append(Issue("unknown-role", name, f"{role} {name} is not a declared variable", "role"))
        elif model.decl(name).exogenous:
            issues.append(Issue("exogenous-role", name, f"{role} {name} must be endogenous", "role"))
    present = [n for _, n in named if n is not None]
    for n in sorted({n for n in present if present.count(n) > 1}):
        issues.append(Issue("role-clash", n, f"{n} holds more than one role", "role"))
    pred = roles.predictor
    if pred is None or pred not in model or model.decl(pred).exogenous or pred not in model._functions:
        return
    allowed = set(roles.features)
    if roles.protected:
        allowed.add(roles.protected)
    for p in model.function(pred).parents:
        if p not in model:
            continue
        if model.decl(p).exogenous:
            issues.append(Issue("predictor-latent", pred, f"predictor {pred} reads exogenous {p}", "role"))
        elif p not in allowed:
            issues.append(
                Issue("predictor-hidden", pred, f"predictor {pred} reads {p}, which is neither a feature nor the protected attribute", "role")
            )


def validate(model: CausalModel) -> ValidationResult:
    issues: list[Issue] = []
    _check_variables(model, issues)
    _check_priors(model, issues)
    counts: dict[str, int] = {}
    for fn in model.functions:
        counts[fn.target] = counts.get(fn.target, 0) + 1
        if fn.target not in model:
            issues.append(Issue("unknown-variable", fn.target, f"function for undeclared variable {fn.target}", "fn"))
        elif model.decl(fn.target).exogenous:
            issues.append(Issue("fn-on-exogenous", fn.target, f"exogenous {fn.target} cannot have a function", "fn"))
        else:
            _check_function(model, fn, issues)
    for name in model.endogenous:
        n = counts.get(name, 0)
        if n == 0:
            issues.append(Issue("missing-fn", name, f"endogenous {name} has no function", "fn"))
        elif n > 1:
            issues.append(Issue("duplicate-fn", name, f"endogenous {name} has {n} functions", "fn"))
    _check_acyclic(model, issues)
    _check_roles(model, issues)
    return ValidationResult(tuple(issues))


def ensure_valid(model: CausalModel) -> CausalModel:
    result = model.validation
    if not result.ok:
        raise InvalidModel(result.issues)
    return model


# --------------------------------------------------------------------------
# interventions
# --------------------------------------------------------------------------


def check_assignment(model: CausalModel, assignment: Mapping[str, str], what: str = "intervention") -> dict[str, str]:
    """Check that every key is an endogenous variable and every value in its domain."""
    out = {}
    for name, value in assignment.items():
        decl = model.decl(name)
        if decl.exogenous:
            raise NotIntervenable(f"{what} on exogenous variable {name!r} is not allowed")
        if value not in decl.domain:
            raise ValueOutsideDomain(name, value, decl.domain)
        out[name] = value
    return out


def submodel(model: CausalModel, intervention: Mapping[str, str]) -> CausalModel:
    """Replace the function of every intervened variable by its assigned constant."""
    assignment = check_assignment(model, intervention)
    if not assignment:
        return model
    functions = tuple(
        StructuralFunction(f.target, (), Const(assignment[f.target])) if f.target in assignment else f
        for f in model.functions
    )
    return replace(model, functions=functions)
