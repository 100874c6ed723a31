class HPError(Exception):
    """Base class for errors raised by hpdecode."""


class InvalidInputError(HPError, ValueError):
    pass


class CapacityError(HPError, MemoryError):
    """Exact simulation would exceed the dense-matrix memory guard."""


class PreconditionError(HPError, ValueError):
    pass
