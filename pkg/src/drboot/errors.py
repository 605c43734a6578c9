"""Exception hierarchy shared across the package."""


class DRBootError(ValueError):
    """Base class for all input/contract errors raised by drboot."""


class RankDeficient(DRBootError):
    pass


class DimensionMismatch(DRBootError):
    pass


class InvalidNoiseSpec(DRBootError):
    pass


class SizeLimitExceeded(DRBootError):
    pass


class InvalidInputs(DRBootError):
    pass


class NegativeRadius(DRBootError):
    pass


class UnsupportedRisk(DRBootError):
    pass


class UnsupportedOrder(DRBootError):
    pass
