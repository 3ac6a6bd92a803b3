"""Exception types raised across the package."""


class FWMError(Exception):
    """Base class for all package errors."""


class InvalidParameter(FWMError, ValueError):
    pass


class InvalidLattice(FWMError, ValueError):
    pass


class InvalidInput(FWMError, ValueError):
    pass


class UnsupportedStep(FWMError, ValueError):
    """Raised when a time step is not a whole-cell advection step."""


class NumericFault(FWMError, FloatingPointError):
    pass


class StepTooLarge(FWMError, ValueError):
    pass


class CapacityExceeded(FWMError, ValueError):
    pass


class ConstructionBug(FWMError, AssertionError):
    pass


class ScenarioLookupError(FWMError, LookupError):
    pass


class SpecSyntaxError(FWMError, ValueError):
    """Malformed envelope/mask/config token."""

    def __init__(self, message, token=None):
        super().__init__(message)
        self.token = token
