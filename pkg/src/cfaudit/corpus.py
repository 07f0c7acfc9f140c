"""Embedded models for the two suspect-identification scenarios and the four
normatively relevant causal structures."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .dsl import ModelDocument, load

SUFFIX = ".scm.txt"

DESCRIPTIONS = {
    "scenario_1": "insufficiency: score ignores skin colour that bears on resembling the offender",
    "scenario_2": "non-necessity: score favours the white suspect as far as skin colour is relevant",
    "structure_a": "A affects the predictor only (wrongful discrimination)",
    "structure_b": "A affects predictor and target, predictor less (permissible discrimination)",
    "structure_c": "A affects the target only (a relevant attribute is ignored)",
    "structure_d": "A affects neither (standard fair prediction)",
}

NAMES = tuple(DESCRIPTIONS)


def text(name: str) -> str:
    if name not in DESCRIPTIONS:
        raise KeyError(f"no corpus model named {name!r}")
    return resources.files("cfaudit.models").joinpath(name + SUFFIX).read_text(encoding="utf-8")


def document(name: str) -> ModelDocument:
    return load(text(name))


def emit(directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in NAMES:
        path = out / (name + SUFFIX)
        path.write_bytes(text(name).encode("utf-8"))
        written.append(path)
    return written
