"""Exception hierarchy shared by the model, engine and audit layers."""


class CausalModelError(Exception):
    """Base class for every error raised by cfaudit."""


class InvalidModel(CausalModelError):
    def __init__(self, issues):
        self.issues = list(issues)
        lines = "; ".join(str(i) for i in self.issues)
        super().__init__(f"invalid causal model: {lines}")


class UnknownVariable(CausalModelError, KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(name)

    def __str__(self) -> str:
        return f"unknown variable {self.name!r}"


class ValueOutsideDomain(CausalModelError, ValueError):
    def __init__(self, variable: str, value: str, domain=()):
        self.variable = variable
        self.value = value
        self.domain = tuple(domain)
        super().__init__(
            f"value {value!r} is not in the domain of {variable!r} {{{', '.join(self.domain)}}}"
        )


class UnknownValue(ValueOutsideDomain):
    """A counterfactual value for the protected attribute that its domain lacks."""


class NotIntervenable(CausalModelError, ValueError):
    """Interventions and evidence may only target endogenous variables."""


class InconsistentEvidence(CausalModelError):
    """Evidence with zero probability under the model's prior."""

    def __init__(self, evidence):
        self.evidence = dict(evidence)
        shown = ", ".join(f"{k}={v}" for k, v in self.evidence.items())
        super().__init__(f"evidence has probability 0: {{{shown}}}")


class MissingRole(CausalModelError):
    pass
