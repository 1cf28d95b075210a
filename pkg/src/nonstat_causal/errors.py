"""Exception hierarchy shared by all modules."""


class NonstatCausalError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(NonstatCausalError, ValueError):
    """Array shapes or lengths do not line up."""


class ParameterError(NonstatCausalError, ValueError):
    """A tuning parameter is outside its admissible range."""


class NonInvertibleError(NonstatCausalError, ArithmeticError):
    """A lag operator has a zero leading coefficient somewhere on its grid."""


class ModelViolationError(NonstatCausalError, ArithmeticError):
    """Inputs violate a modelling assumption needed by a recursion."""


class InsufficientDataError(NonstatCausalError, ValueError):
    """Series too short for the requested block layout or test."""


class DegenerateInputError(NonstatCausalError, ValueError):
    """Input carries no information (e.g. a constant series)."""


class EnumerationLimitError(NonstatCausalError, RuntimeError):
    """Subset enumeration would exceed the configured cap."""
