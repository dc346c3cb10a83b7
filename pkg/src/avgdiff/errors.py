"""Exception types shared across the package."""


class SpecError(ValueError):
    """A field or scenario description was rejected."""


class DomainViolation(ValueError):
    def __init__(self, norm, radius):
        self.norm = float(norm)
        self.radius = float(radius)
        super().__init__(f"state norm {self.norm:.6g} exceeds domain radius {self.radius:.6g}")


class NumericOverflow(ArithmeticError):
    def __init__(self, step):
        self.step = step
        super().__init__(f"non-finite state at step {step}")


class UnsupportedScale(ValueError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, message, residual):
        self.residual = float(residual)
        super().__init__(f"{message} (last residual {self.residual:.3e})")


class SingularJacobian(RuntimeError):
    pass


class AveragingDivergence(RuntimeError):
    pass


class ResourceLimit(ValueError):
    pass


class ParameterError(ValueError):
    pass
