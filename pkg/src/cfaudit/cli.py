"""Command-line front end.

Exit codes: 0 all requested criteria satisfied (or command succeeded),
1 a criterion is violated, 2 input error, 3 evidence or context with zero
probability.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, corpus
from .dsl import load, DslError
from .engine import counterfactual_query
from .errors import CausalModelError, InconsistentEvidence
from .fairness import DEFAULT_TOLERANCE, Criterion, run_audit
from .report import build_document, fmt, render_text

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_IMPOSSIBLE = 0, 1, 2, 3

TOLERANCE_ENV = "CF_AUDIT_TOLERANCE"

CRITERIA = {
    "cf": Criterion.COUNTERFACTUAL,
    "crf": Criterion.CAUSAL_RELEVANCE,
    "crf-strict": Criterion.STRICT_CAUSAL_RELEVANCE,
    "wrongful": Criterion.WRONGFUL,
}


class InputError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"cfaudit: {msg}", file=sys.stderr)


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{path}: file not found")
    try:
        doc = load(p.read_bytes())
    except DslError as exc:
        for d in exc.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        raise InputError(f"{path}: {len(exc.diagnostics)} error(s)") from None
    for w in doc.warnings:
        print(f"{path}:{w}", file=sys.stderr)
    return doc


def _pairs(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        for part in item.split(","):
            if not part:
                continue
            key, sep, value = part.partition("=")
            if not sep or not key or not value:
                raise InputError(f"expected name=value, got {part!r}")
            out[key.strip()] = value.strip()
    return out


def _tolerance(flag) -> float:
    if flag is not None:
        value = flag
    else:
        raw = os.environ.get(TOLERANCE_ENV)
        if raw is None:
            return DEFAULT_TOLERANCE
        try:
            value = float(raw)
        except ValueError:
            raise InputError(f"{TOLERANCE_ENV}={raw!r} is not a number") from None
    if not value >= 0:
        raise InputError("tolerance must be a non-negative number")
    return value


def cmd_validate(args) -> int:
    doc = _load(args.path)
    print(f"{args.path}: ok (model {doc.model.name})")
    return EXIT_OK


def _print_distribution(dist, title=None) -> None:
    if title:
        print(title)
    rows = [[" ".join(key), fmt(p)] for key, p in dist.rows()]
    header = " ".join(dist.variables)
    width = max(len(header), *(len(r[0]) for r in rows))
    print(f"{header.ljust(width)}  probability")
    for label, p in rows:
        print(f"{label.ljust(width)}  {p}")


def cmd_query(args) -> int:
    model = _load(args.path).model
    evidence = _pairs(args.evidence)
    intervention = _pairs(args.do)
    query = [q for item in args.query for q in item.split(",") if q]
    dist = counterfactual_query(model, evidence, intervention, query)
    _print_distribution(dist)
    if args.oracle:
        from .oracle import oracle_counterfactual

        reference = oracle_counterfactual(model, evidence, intervention, query)
        print()
        _print_distribution(reference, "oracle:")
        print(f"max deviation: {fmt(dist.max_deviation(reference))}")
    return EXIT_OK


def cmd_audit(args) -> int:
    model = _load(args.path).model
    tolerance = _tolerance(args.tolerance)
    chosen = args.criterion or ["all"]
    if "all" in chosen:
        criteria = list(Criterion)
    else:
        criteria = list(dict.fromkeys(CRITERIA[c] for c in chosen))
    audit = run_audit(model, tolerance, criteria)
    doc = build_document(audit)
    if args.format == "json":
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        sys.stdout.write(render_text(doc))
    return EXIT_OK if all(r.satisfied for r in audit.reports) else EXIT_VIOLATED


def cmd_corpus(args) -> int:
    if args.list:
        width = max(map(len, corpus.NAMES))
        for name in corpus.NAMES:
            print(f"{name.ljust(width)}  {corpus.DESCRIPTIONS[name]}")
        return EXIT_OK
    try:
        for path in corpus.emit(args.emit):
            print(path)
    except OSError as exc:
        raise InputError(f"cannot write corpus: {exc}") from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfaudit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"cfaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a model file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("query", help="answer a counterfactual query")
    p.add_argument("path")
    p.add_argument("--evidence", nargs="+", action="extend", metavar="NAME=VALUE")
    p.add_argument("--do", nargs="+", action="extend", metavar="NAME=VALUE")
    p.add_argument("--query", nargs="+", action="extend", required=True, metavar="VAR")
    p.add_argument("--oracle", action="store_true", help="cross-check against the brute-force oracle")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("audit", help="run fairness audits")
    p.add_argument("path")
    p.add_argument("--criterion", action="append", choices=[*CRITERIA, "all"])
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("corpus", help="list or write the embedded model corpus")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--list", action="store_true")
    g.add_argument("--emit", metavar="DIR")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except InconsistentEvidence as exc:
        _err(str(exc))
        return EXIT_IMPOSSIBLE
    except CausalModelError as exc:
        _err(str(exc))
        return EXIT_INPUT
    except Exception as exc:  # keep the exit-code contract even on bugs
        _err(f"internal error: {exc!r}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
