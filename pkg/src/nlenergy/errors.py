"""Exception types shared across the package."""


class NonlocalError(Exception):
    """Base class for package errors."""


class UsageError(NonlocalError, ValueError):
    """Invalid combination of arguments or options."""


class DomainError(NonlocalError, ValueError):
    """Argument outside the mathematical domain of a function."""


class InputError(NonlocalError, ValueError):
    """Input data that cannot be processed (non-finite energy, bad file)."""


class PreconditionError(NonlocalError, ValueError):
    """A documented precondition of an experiment does not hold."""
