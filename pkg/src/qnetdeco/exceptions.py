class QnetError(Exception):
    """Base class for library errors."""


class SizeError(QnetError, ValueError):
    """A matrix or register exceeds a configured dimension cap."""


class NotPSDError(QnetError, ValueError):
    pass


class NotHermitianError(QnetError, ValueError):
    pass


class InvalidStateError(QnetError, ValueError):
    """Input fails the density-matrix or pure-state invariants."""


class InvalidNetworkError(QnetError, ValueError):
    pass


class IllConditionedBasisError(QnetError, ValueError):
    pass


class ParityRequiredError(QnetError, ValueError):
    """The asymptote oscillates, so a parity (or step count) must be given."""


class NoFiniteSizeError(QnetError, ValueError):
    """No finite environment size makes the asymptotic entanglement vanish."""
