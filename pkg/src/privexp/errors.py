"""Exceptions and warnings raised across the package."""


class PriorTooLow(ValueError):
    """The prior is below the one-player cutoff required by a construction."""


class HypothesisViolated(ValueError):
    """Parameters fall outside the region a construction requires."""

    def __init__(self, detail):
        super().__init__(detail)
        self.detail = detail


class RootNotBracketed(ArithmeticError):
    """A root finder was handed an interval without a sign change."""


class HorizonExceeded(LookupError):
    """A belief system was queried beyond the depth it was built for."""


class UnclassifiableTail(RuntimeError):
    """Play at the evaluation horizon neither settles on S forever nor on R forever."""


class NotAnEquilibrium(RuntimeError):
    """A check that presupposes an equilibrium was handed a profile that fails verification."""


class ParseError(ValueError):
    """Malformed history string; ``offset`` is the byte offset of the offending character."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class GenericityViolation(UserWarning):
    """A belief on the prior's failure ladder sits within the tolerance band of a cutoff."""


class EmptyRegion(UserWarning):
    """The validity interval of a construction is empty for these parameters."""


class OutsideRegion(UserWarning):
    """The prior lies outside the validity interval of a construction."""
