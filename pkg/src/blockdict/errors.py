"""Exception types shared across the library."""


class CapacityError(RuntimeError):
    """An exhaustive enumeration would exceed its configured cap."""


class HypothesisViolationError(RuntimeError):
    """A measurement admits no block-sparse code within tolerance."""


class RankError(ValueError):
    """A matrix that must have full column rank does not."""
