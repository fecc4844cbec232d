"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` and budget guards
raise :class:`BudgetExceeded`; the CLI maps the two families to distinct exit
codes.
"""


class WiretapLabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(WiretapLabError, ValueError):
    """Input violates a documented precondition."""


class NonStochasticRow(ValidationError):
    def __init__(self, row, total):
        self.row = row
        self.total = total
        super().__init__(f"row {row} sums to {total:.12g}, expected 1")


class NegativeEntry(ValidationError):
    pass


class AlphabetMismatch(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NonUniformMarginal(ValidationError):
    pass


class InfeasibleEps(ValidationError):
    pass


class EpsOutOfRange(ValidationError):
    pass


class DeltaOutOfRange(ValidationError):
    pass


class GammaOutOfRange(ValidationError):
    pass


class UnknownSymbol(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class DegenerateDomain(ValidationError):
    pass


class BudgetExceeded(WiretapLabError):
    """An exact enumeration would exceed the configured entry budget."""

    def __init__(self, what, size, budget):
        self.what = what
        self.size = size
        self.budget = budget
        super().__init__(f"{what}: {size} entries exceeds budget {budget}")


class NoConvergence(WiretapLabError):
    pass


class CapacityNotConverged(NoConvergence):
    pass
