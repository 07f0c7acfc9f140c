"""Textual model language (``.scm.txt``).

Example::

    model coin {
      exogenous U { domain {heads, tails} prior {1/2, 1/2} }
      variable V { domain {heads, tails} fn U }
    }

Declarations inside the model block:

* ``exogenous <id> { domain {...} prior {...} }``
* ``variable <id> { domain {...} [parents {...}] fn <expr> }``
* ``protected <id>``, ``feature <id>`` (repeatable), ``predictor <id>``, ``target <id>``

Expressions are a value literal, a variable reference, ``if <id> == <value>
then <expr> else <expr>``, or ``table { (<v>, ...) -> <value>; ... default ->
<value> }``.  Table keys follow the order of the ``parents`` clause, which is
required when a table is used and otherwise inferred from the references in
the expression.  A bare identifier is a reference when it names a declared
variable and a value literal otherwise, so value names may not coincide with
variable names.  ``#`` starts a comment; commas inside braces are optional.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .scm import (
    ENDOGENOUS,
    EXOGENOUS,
    EPS_NORM,
    CausalModel,
    Const,
    ExogenousPrior,
    Expr,
    IfEq,
    Ref,
    Roles,
    StructuralFunction,
    Table,
    VariableDecl,
    validate,
)

KEYWORDS = frozenset(
    "model exogenous variable domain prior parents fn if then else table default "
    "protected feature predictor target".split()
)
ROLE_KEYWORDS = ("protected", "feature", "predictor", "target")

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<number>[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)
  | (?P<punct>->|==|[{}(),;/])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int
    column: int

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    line: int
    column: int
    length: int
    offset: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: Span


@dataclass
class ModelDocument:
    source: str
    model: CausalModel
    spans: dict[tuple[str, str], Span] = field(default_factory=dict)
    warnings: list[Diagnostic] = field(default_factory=list)


class DslError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


class _Abort(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


def _diag(span: Span, message: str, severity: str = "error") -> Diagnostic:
    return Diagnostic(severity, message, span.line, span.column, span.length, span.start)


def _span_at(text: str, start: int, end: int) -> Span:
    line = text.count("\n", 0, start) + 1
    column = start - (text.rfind("\n", 0, start) + 1) + 1
    return Span(start, end, line, column)


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            raise _Abort(_diag(_span_at(text, pos, pos + 1), f"unexpected character {text[pos]!r}"))
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), _span_at(text, pos, m.end())))
        pos = m.end()
    tokens.append(Token("eof", "", _span_at(text, n, n)))
    return tokens


# --------------------------------------------------------------------------
# syntax
# --------------------------------------------------------------------------

# unresolved expression nodes; identifiers are resolved once all names are known
@dataclass
class _Name:
    text: str
    span: Span


@dataclass
class _If:
    var: _Name
    value: _Name
    then: object
    orelse: object


@dataclass
class _Table:
    rows: list  # (list[_Name], _Name)
    default: Optional[_Name]
    span: Span


@dataclass
class _VarDecl:
    kind: str
    name: _Name
    span: Span
    domain: Optional[list[_Name]] = None
    domain_span: Optional[Span] = None
    prior: Optional[list[tuple[float, Span]]] = None
    prior_span: Optional[Span] = None
    parents: Optional[list[_Name]] = None
    parents_span: Optional[Span] = None
    fn: object = None
    fn_span: Optional[Span] = None


@dataclass
class _RoleDecl:
    role: str
    name: _Name
    span: Span


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise _Abort(_diag(tok.span, message))

    def describe(self, tok: Token) -> str:
        return "end of file" if tok.kind == "eof" else repr(tok.text)

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("punct", "ident") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}, found {self.describe(self.tok)}")
        return self.advance()

    def ident(self, what: str) -> _Name:
        tok = self.tok
        if tok.kind != "ident":
            self.fail(f"expected {what}, found {self.describe(tok)}")
        if tok.text in KEYWORDS:
            self.fail(f"{tok.text!r} is a reserved word and cannot be used as {what}")
        self.advance()
        return _Name(tok.text, tok.span)

    def join(self, first: Span, last: Span) -> Span:
        return Span(first.start, last.end, first.line, first.column)

    def document(self):
        if self.tok.kind == "eof":
            self.fail("no model declaration")
        self.expect("model")
        name = self.ident("a model name")
        self.expect("{")
        decls: list[Union[_VarDecl, _RoleDecl]] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("unclosed model block: expected '}'")
            decls.append(self.declaration())
        self.expect("}")
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.describe(self.tok)} after the model block")
        return name, decls

    def declaration(self):
        tok = self.tok
        if self.at("exogenous") or self.at("variable"):
            return self.variable()
        if tok.kind == "ident" and tok.text in ROLE_KEYWORDS:
            self.advance()
            name = self.ident(f"a {tok.text} variable name")
            return _RoleDecl(tok.text, name, self.join(tok.span, name.span))
        self.fail(f"expected a declaration, found {self.describe(tok)}")

    def braced(self, item):
        open_ = self.expect("{")
        items = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail("expected '}'")
            items.append(item())
            if self.at(","):
                self.advance()
        close = self.expect("}")
        return items, self.join(open_.span, close.span)

    def variable(self) -> _VarDecl:
        head = self.advance()
        kind = EXOGENOUS if head.text == "exogenous" else ENDOGENOUS
        decl = _VarDecl(kind, self.ident("a variable name"), head.span)
        self.expect("{")
        while not self.at("}"):
            tok = self.tok
            if self.at("domain"):
                self.advance()
                if decl.domain is not None:
                    self.fail("domain given twice", tok)
                decl.domain, span = self.braced(lambda: self.ident("a domain value"))
                decl.domain_span = self.join(tok.span, span)
            elif self.at("prior") and kind == EXOGENOUS:
                self.advance()
                if decl.prior is not None:
                    self.fail("prior given twice", tok)
                decl.prior, span = self.braced(self.probability)
                decl.prior_span = self.join(tok.span, span)
            elif self.at("parents") and kind == ENDOGENOUS:
                self.advance()
                if decl.parents is not None:
                    self.fail("parents given twice", tok)
                decl.parents, span = self.braced(lambda: self.ident("a parent name"))
                decl.parents_span = self.join(tok.span, span)
            elif self.at("fn") and kind == ENDOGENOUS:
                self.advance()
                if decl.fn is not None:
                    self.fail("fn given twice", tok)
                decl.fn = self.expression()
                decl.fn_span = self.join(tok.span, self.tokens[self.i - 1].span)
            else:
                allowed = "domain, prior" if kind == EXOGENOUS else "domain, parents, fn"
                self.fail(f"expected one of {allowed} or '}}', found {self.describe(tok)}")
        close = self.expect("}")
        decl.span = self.join(head.span, close.span)
        return decl

    def probability(self) -> tuple[float, Span]:
        tok = self.tok
        if tok.kind != "number":
            self.fail(f"expected a probability, found {self.describe(tok)}")
        self.advance()
        if self.at("/"):
            self.advance()
            den = self.tok
            if den.kind != "number":
                self.fail(f"expected a denominator, found {self.describe(den)}")
            self.advance()
            span = self.join(tok.span, den.span)
            try:
                value = Fraction(tok.text) / Fraction(den.text)
            except (ZeroDivisionError, ValueError):
                raise _Abort(_diag(span, "invalid rational probability")) from None
            return float(value), span
        value = float(tok.text)
        if not math.isfinite(value):
            self.fail("probability is not finite", tok)
        return value, tok.span

    def expression(self):
        tok = self.tok
        if self.at("if"):
            self.advance()
            var = self.ident("a variable name")
            self.expect("==")
            value = self.ident("a value")
            self.expect("then")
            then = self.expression()
            self.expect("else")
            orelse = self.expression()
            return _If(var, value, then, orelse)
        if self.at("table"):
            self.advance()
            self.expect("{")
            rows = []
            default = None
            while not self.at("}"):
                row_tok = self.tok
                if self.at("default"):
                    self.advance()
                    self.expect("->")
                    if default is not None:
                        self.fail("table has two default rows", row_tok)
                    default = self.ident("a value")
                elif self.at("("):
                    self.advance()
                    key = []
                    while not self.at(")"):
                        key.append(self.ident("a key value"))
                        if not self.at(")"):
                            self.expect(",")
                    self.expect(")")
                    self.expect("->")
                    rows.append((key, self.ident("a value")))
                else:
                    self.fail(f"expected a table row, found {self.describe(row_tok)}")
                if self.at(";"):
                    self.advance()
                elif not self.at("}"):
                    self.fail(f"expected ';' or '}}', found {self.describe(self.tok)}")
            close = self.expect("}")
            return _Table(rows, default, self.join(tok.span, close.span))
        return self.ident("an expression")


# --------------------------------------------------------------------------
# semantics
# --------------------------------------------------------------------------


class _Builder:
    def __init__(self, text: str, model_name: _Name, decls):
        self.text = text
        self.model_name = model_name
        self.decls = decls
        self.errors: list[Diagnostic] = []
        self.warnings: list[Diagnostic] = []
        self.spans: dict[tuple[str, str], Span] = {("model", model_name.text): model_name.span}

    def error(self, span: Span, message: str):
        self.errors.append(_diag(span, message))

    def resolve(self, node, names: set[str]) -> Expr:
        if isinstance(node, _Name):
            return Ref(node.text) if node.text in names else Const(node.text)
        if isinstance(node, _If):
            return IfEq(
                node.var.text, node.value.text, self.resolve(node.then, names), self.resolve(node.orelse, names)
            )
        rows = tuple((tuple(k.text for k in key), out.text) for key, out in node.rows)
        return Table(rows, node.default.text if node.default else None)

    def refs_in_order(self, node, names: set[str], out: list[str]):
        if isinstance(node, _Name):
            if node.text in names and node.text not in out:
                out.append(node.text)
        elif isinstance(node, _If):
            if node.var.text not in out:
                out.append(node.var.text)
            self.refs_in_order(node.then, names, out)
            self.refs_in_order(node.orelse, names, out)

    def has_table(self, node) -> bool:
        if isinstance(node, _Table):
            return True
        if isinstance(node, _If):
            return self.has_table(node.then) or self.has_table(node.orelse)
        return False

    def build(self) -> Optional[CausalModel]:
        var_decls = [d for d in self.decls if isinstance(d, _VarDecl)]
        role_decls = [d for d in self.decls if isinstance(d, _RoleDecl)]
        names: set[str] = set()
        unique = []
        for d in var_decls:
            if d.name.text in names:
                self.error(d.name.span, f"variable {d.name.text} is declared twice")
                continue
            names.add(d.name.text)
            unique.append(d)
            self.spans[(d.kind, d.name.text)] = d.span
            if d.domain_span:
                self.spans[("domain", d.name.text)] = d.domain_span
            if d.prior_span:
                self.spans[("prior", d.name.text)] = d.prior_span
            if d.fn_span:
                self.spans[("fn", d.name.text)] = d.fn_span

        variables, priors, functions = [], [], []
        for d in unique:
            name = d.name.text
            if d.domain is None:
                self.error(d.name.span, f"{d.kind} {name} has no domain")
                continue
            for v in d.domain:
                if v.text in names:
                    self.error(v.span, f"value {v.text} of {name} clashes with a variable name")
            domain = tuple(v.text for v in d.domain)
            variables.append(VariableDecl(name, domain, d.kind))
            if d.kind == EXOGENOUS:
                if d.prior is None:
                    self.error(d.name.span, f"exogenous {name} has no prior")
                    continue
                probs = tuple(p for p, _ in d.prior)
                total = math.fsum(probs)
                if len(probs) == len(domain) and abs(total - 1.0) > EPS_NORM:
                    self.error(d.prior_span, f"prior sums to {total:.12g}, not 1")
                priors.append(ExogenousPrior(name, probs))
            else:
                if d.fn is None:
                    self.error(d.name.span, f"variable {name} has no fn")
                    continue
                if d.parents is not None:
                    parents = tuple(p.text for p in d.parents)
                    for p in d.parents:
                        if p.text not in names:
                            self.error(p.span, f"unknown parent {p.text} of {name}")
                else:
                    if self.has_table(d.fn):
                        self.error(d.fn_span, f"the table in {name} needs a parents clause")
                        continue
                    found: list[str] = []
                    self.refs_in_order(d.fn, names, found)
                    parents = tuple(found)
                    for p in found:
                        if p not in names:
                            self.error(d.fn_span, f"{name} tests unknown variable {p}")
                functions.append(StructuralFunction(name, parents, self.resolve(d.fn, names)))

        roles: dict[str, object] = {"features": []}
        for r in role_decls:
            self.spans[(r.role, r.name.text)] = r.span
            if r.role == "feature":
                if r.name.text in roles["features"]:
                    self.error(r.span, f"feature {r.name.text} is declared twice")
                roles["features"].append(r.name.text)
            elif r.role in roles:
                self.error(r.span, f"model declares more than one {r.role}")
            else:
                roles[r.role] = r.name.text
        roles["features"] = tuple(roles["features"])

        for name in names:
            kind = next(d.kind for d in unique if d.name.text == name)
            if kind == EXOGENOUS and not any(name in f.parents for f in functions):
                self.warnings.append(_diag(self.spans[(EXOGENOUS, name)], f"exogenous {name} is never read", "warning"))

        if self.errors:
            return None
        model = CausalModel(
            self.model_name.text, tuple(variables), tuple(priors), tuple(functions), Roles(**roles)
        )
        for issue in validate(model).issues:
            self.error(self.locate(issue), issue.message)
        return None if self.errors else model

    def locate(self, issue) -> Span:
        name = issue.variable
        for key in ((issue.part, name), (EXOGENOUS, name), (ENDOGENOUS, name)):
            if key in self.spans:
                return self.spans[key]
        if issue.part == "role":
            for role in ROLE_KEYWORDS:
                if (role, name) in self.spans:
                    return self.spans[(role, name)]
        return self.model_name.span


def parse(source: Union[str, bytes]) -> Union[ModelDocument, list[Diagnostic]]:
    """Parse model text; on failure return the error diagnostics instead of raising."""
    if isinstance(source, (bytes, bytearray)):
        try:
            text = bytes(source).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(source[: exc.start])
            line = prefix.count(b"\n") + 1
            column = exc.start - (prefix.rfind(b"\n") + 1) + 1
            return [Diagnostic("error", "input is not valid UTF-8", line, column, 1, exc.start)]
    else:
        text = source
    try:
        name, decls = _Parser(text).document()
    except _Abort as abort:
        return [abort.diag]
    except RecursionError:
        return [_diag(_span_at(text, 0, 0), "expression nested too deeply")]
    builder = _Builder(text, name, decls)
    model = builder.build()
    if model is None:
        return sorted(builder.errors, key=lambda d: d.offset)
    return ModelDocument(text, model, builder.spans, builder.warnings)


def load(source: Union[str, bytes]) -> ModelDocument:
    """Like :func:`parse` but raises :class:`DslError` on failure."""
    result = parse(source)
    if isinstance(result, list):
        raise DslError(result)
    return result


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def _braces(items) -> str:
    return "{" + ", ".join(items) + "}"


def _expr(e: Expr, indent: str) -> str:
    if isinstance(e, (Const,)):
        return e.value
    if isinstance(e, Ref):
        return e.name
    if isinstance(e, IfEq):
        return f"if {e.variable} == {e.value} then {_expr(e.then, indent)} else {_expr(e.orelse, indent)}"
    inner = indent + "  "
    lines = ["table {"]
    for key, out in e.rows:
        lines.append(f"{inner}({', '.join(key)}) -> {out};")
    if e.default is not None:
        lines.append(f"{inner}default -> {e.default};")
    lines.append(indent + "}")
    return "\n".join(lines)


def serialize(model: CausalModel) -> str:
    """Canonical text: declarations in model order, then roles; two-space indentation."""
    out = [f"model {model.name} {{"]
    for v in model.variables:
        keyword = "exogenous" if v.exogenous else "variable"
        out.append(f"  {keyword} {v.name} {{")
        out.append(f"    domain {_braces(v.domain)}")
        if v.exogenous:
            out.append(f"    prior {_braces(repr(float(p)) for p in model.prior(v.name).probabilities)}")
        else:
            fn = model.function(v.name)
            out.append(f"    parents {_braces(fn.parents)}")
            out.append(f"    fn {_expr(fn.body, '    ')}")
        out.append("  }")
    roles = model.roles
    role_lines = []
    if roles.protected is not None:
        role_lines.append(f"  protected {roles.protected}")
    role_lines.extend(f"  feature {f}" for f in roles.features)
    if roles.predictor is not None:
        role_lines.append(f"  predictor {roles.predictor}")
    if roles.target is not None:
        role_lines.append(f"  target {roles.target}")
    if role_lines:
        out.append("")
        out.extend(role_lines)
    out.append("}")
    return "\n".join(out) + "\n"
