"""Small model builders shared by the tests."""

from cfaudit.scm import (
    CausalModel,
    Const,
    ExogenousPrior,
    IfEq,
    Ref,
    Roles,
    StructuralFunction,
    Table,
    VariableDecl,
)


def exo(name, domain, probs):
    return VariableDecl(name, tuple(domain), "exogenous"), ExogenousPrior(name, tuple(probs))


def endo(name, domain):
    return VariableDecl(name, tuple(domain), "endogenous")


def coin_model():
    u, pu = exo("U", ["heads", "tails"], [0.5, 0.5])
    return CausalModel(
        "coin", (u, endo("V", ["heads", "tails"])), (pu,), (StructuralFunction("V", ("U",), Ref("U")),)
    )


def chain_model():
    """U -> A -> P with A := U and P := (A == w ? one : zero)."""
    u, pu = exo("U", ["w", "b"], [0.3, 0.7])
    return CausalModel(
        "chain",
        (u, endo("A", ["w", "b"]), endo("P", ["one", "zero"])),
        (pu,),
        (
            StructuralFunction("A", ("U",), Ref("U")),
            StructuralFunction("P", ("A",), IfEq("A", "w", Const("one"), Const("zero"))),
        ),
        Roles(protected="A", predictor="P"),
    )


def xor_model():
    """Three fair-ish binary coins; V = U1 xor U2, W = U3 if V == 1 else 0."""
    us = []
    priors = []
    for name, p in (("U1", 0.5), ("U2", 0.25), ("U3", 0.1)):
        d, pr = exo(name, ["0", "1"], [1 - p, p])
        us.append(d)
        priors.append(pr)
    # identifiers must start with a letter in the model language, but the
    # in-memory model has no such restriction
    v = StructuralFunction(
        "V",
        ("U1", "U2"),
        Table(((("0", "0"), "0"), (("0", "1"), "1"), (("1", "0"), "1"), (("1", "1"), "0"))),
    )
    w = StructuralFunction("W", ("V", "U3"), IfEq("V", "1", Ref("U3"), Const("0")))
    return CausalModel(
        "xor", (*us, endo("V", ["0", "1"]), endo("W", ["0", "1"])), tuple(priors), (v, w)
    )
