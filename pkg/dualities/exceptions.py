class DualityError(Exception):
    """Base class for every failure raised by the dualities services."""


class DomainError(DualityError, ValueError):
    pass


class BicharacterError(DualityError, ValueError):
    pass


class DegenerateBicharacterError(BicharacterError):
    pass


class FusionRingError(DualityError, ValueError):
    pass


class ChannelError(DualityError, RuntimeError):
    pass


class UnsupportedChainError(DualityError, ValueError):
    pass


class DimensionMismatchError(DualityError, ValueError):
    pass


class CapExceededError(DualityError, RuntimeError):
    def __init__(self, dimension, cap):
        # args must rebuild the error when task results are unpickled or decoded
        super().__init__(dimension, cap)
        self.dimension = dimension
        self.cap = cap

    def __str__(self):
        return f'Dense dimension {self.dimension} exceeds the cap of {self.cap}. Raise DUALITYKIT_CAP or shorten the chain.'
