"""Exception hierarchy shared across the package."""


class NlkitError(Exception):
    """Base class for all package errors."""


class ShapeError(NlkitError, ValueError):
    """Tensor dimensions disagree with the scenario."""


class UnsupportedScenarioError(NlkitError, ValueError):
    """Operation needs a scenario this one is not (e.g. +-1 alphabets, 2x2 inputs)."""


class DomainError(NlkitError, ValueError):
    """Scalar argument outside the domain of a closed-form expression."""


class EnumerationCapError(NlkitError):
    """Exhaustive enumeration would exceed the configured cap."""

    def __init__(self, what, count, cap):
        super().__init__(f"{what}: {count} items exceeds cap {cap}")
        self.count = count
        self.cap = cap


class SolverError(NlkitError):
    """The LP solver failed numerically (not the same as an infeasible verdict)."""
