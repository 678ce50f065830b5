"""Exception hierarchy shared by all modules."""


class SemiconfError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(SemiconfError, ValueError):
    pass


class ExprSyntaxError(SemiconfError, ValueError):
    """Malformed expression text.  ``offset`` is the 0-based character position."""

    def __init__(self, message, offset, source=""):
        self.message = message
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifier(ExprSyntaxError):
    def __init__(self, name, offset, source=""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, source)


class DomainError(SemiconfError, ArithmeticError):
    """Evaluation left the domain of some subexpression.

    ``subexpr`` holds the printed offending subexpression and ``point`` the
    coordinates where it happened, when known.
    """

    def __init__(self, message, subexpr=None, point=None):
        self.subexpr = subexpr
        self.point = point
        text = message
        if subexpr is not None:
            text += f" in {subexpr}"
        if point is not None:
            text += f" at {tuple(float(c) for c in point)}"
        super().__init__(text)


class SingularJacobian(SemiconfError, ArithmeticError):
    pass


class NotAffine(SemiconfError):
    def __init__(self, residual, tol):
        self.residual = residual
        super().__init__(f"affine fit residual {residual:.3e} exceeds tolerance {tol:.1e}")


class NotEtaOrthogonal(SemiconfError):
    def __init__(self, residual, tol):
        self.residual = residual
        super().__init__(f"A^T eta A deviates from eta by {residual:.3e} (tolerance {tol:.1e})")


class InsufficientSamples(SemiconfError, ValueError):
    pass


class MixedMonotonicity(SemiconfError, ValueError):
    pass


class ZeroDerivative(SemiconfError, ValueError):
    pass


class NotSeparable(SemiconfError):
    pass


class NotConformal(SemiconfError):
    def __init__(self, message, verdict=None):
        self.verdict = verdict
        super().__init__(message)


class NotWaveSolution(SemiconfError):
    def __init__(self, residual, point):
        self.residual = residual
        self.point = point
        super().__init__(
            f"wave-equation residual {residual:.3e} at (x, t) = "
            f"({point[0]:.6g}, {point[1]:.6g})"
        )


class DegenerateRectangle(SemiconfError, ValueError):
    pass
