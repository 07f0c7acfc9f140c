"""Audit reports as a JSON-ready document and as aligned plain text."""

from __future__ import annotations

from . import __version__
from .engine import Context
from .fairness import Audit, EffectReport

TOOL = "cfaudit"


def num(x: float) -> float:
    """Round to 12 significant digits."""
    return float(f"{x:.12g}")


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _context(ctx: Context) -> dict:
    out = dict(zip(ctx.features, ctx.x))
    out[ctx.protected] = ctx.a
    return out


def _effect(e: EffectReport) -> dict:
    return {
        "variable": e.outcome,
        "signed": {y: num(d) for y, d in zip(e.values, e.signed)},
        "magnitude": num(e.magnitude),
    }


def build_document(audit: Audit) -> dict:
    criteria = []
    for r in audit.reports:
        criteria.append(
            {
                "criterion": r.criterion.value,
                "verdict": r.verdict.value,
                "tolerance": r.tolerance,
                "witness_count": len(r.witnesses),
                "witnesses": [
                    {
                        "context": _context(w.context),
                        "a_prime": w.a_prime,
                        **{k: num(v) for k, v in w.evidence.items()},
                    }
                    for w in r.witnesses
                ],
            }
        )
    effects = [
        {
            "context": _context(e.context),
            "context_probability": num(e.context.probability),
            "a_prime": e.a_prime,
            "predictor": _effect(e.predictor),
            "target": _effect(e.target),
            "differential_treatment": num(e.differential),
        }
        for e in audit.effects
    ]
    roles = audit.model.roles
    return {
        "tool": TOOL,
        "version": __version__,
        "model": audit.model.name,
        "roles": {
            "protected": roles.protected,
            "features": list(roles.features),
            "predictor": roles.predictor,
            "target": roles.target,
        },
        "tolerance": audit.tolerance,
        "summary": [{"criterion": c["criterion"], "verdict": c["verdict"]} for c in criteria],
        "criteria": criteria,
        "effects": effects,
    }


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    return [line(header), line(["-" * w for w in widths]), *(line(r) for r in rows)]


def _label(context: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in context.items())


def render_text(doc: dict) -> str:
    out = [f"{doc['tool']} {doc['version']}  model {doc['model']}  tolerance {fmt(doc['tolerance'])}", ""]
    out += _table(["criterion", "verdict"], [[s["criterion"], s["verdict"]] for s in doc["summary"]])
    for c in doc["criteria"]:
        out.append("")
        out.append(f"{c['criterion']}: {c['verdict']} ({c['witness_count']} witnesses, tolerance {fmt(c['tolerance'])})")
        if c["witnesses"]:
            rows = [
                [
                    _label(w["context"]),
                    w["a_prime"],
                    fmt(w["predictor_effect"]),
                    fmt(w["target_effect"]),
                    fmt(w["differential_treatment"]),
                ]
                for w in c["witnesses"]
            ]
            out += ["  " + s for s in _table(["context", "a'", "predictor", "target", "differential"], rows)]
    out.append("")
    out.append("effects (total variation; signed vectors in the JSON report)")
    rows = [
        [
            _label(e["context"]),
            fmt(e["context_probability"]),
            e["a_prime"],
            fmt(e["predictor"]["magnitude"]),
            fmt(e["target"]["magnitude"]),
        ]
        for e in doc["effects"]
    ]
    out += ["  " + s for s in _table(["context", "P(context)", "a'", "predictor", "target"], rows)]
    return "\n".join(out) + "\n"
