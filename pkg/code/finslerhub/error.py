class DomainError(ValueError):
    """Raised if a point lies outside the domain of a φ family or of a Riemannian
    metric, e.g. b² ≥ b_o² or |x| ≥ r_μ"""

    ...


class BranchError(ArithmeticError):
    """Raised if a complex square root argument lands on the closed negative real
    axis"""

    ...


class DegenerateDirection(ValueError):
    """Raised if a tangent vector is zero where a direction is needed"""

    ...


class SingularTensor(ArithmeticError):
    """Raised if a Finsler validity quantity vanishes or changes sign where the
    fundamental tensor has to be inverted"""

    def __init__(self, msg, quantity=None):
        super().__init__(msg)
        self.quantity = quantity


class PreconditionError(RuntimeError):
    """Raised if a closed-form specialization is asked for data that does not
    satisfy its hypotheses"""

    ...


class StepTooLarge(ArithmeticError):
    """Raised if the finite-difference spray disagrees with itself at half the
    step"""

    def __init__(self, msg, disagreement=None):
        super().__init__(msg)
        self.disagreement = disagreement


class DomainExit(RuntimeError):
    """Raised if a geodesic leaves the domain of its metric. Carries the partial
    path traced so far."""

    def __init__(self, msg, path=None):
        super().__init__(msg)
        self.path = path


class StepInstability(ArithmeticError):
    """Raised if F(x, ẋ) drifts too far along an integrated geodesic. Carries the
    partial path traced so far."""

    def __init__(self, msg, path=None, drift=None):
        super().__init__(msg)
        self.path = path
        self.drift = drift


class ConfigError(ValueError):
    """Raised if a run manifest is malformed or carries unknown keys"""

    ...


class SpecMismatchError(ValueError):
    """Raised if the parts of a metric description don't fit together, e.g. a β
    built for another curvature than α"""

    ...
