"""Exception hierarchy shared by every module."""


class NNLinkError(Exception):
    """Base class for all errors raised by nnlink."""


class NonDivisibleLength(NNLinkError, ValueError):
    """Bit sequence length is not a multiple of the block size."""


class UnsupportedOrder(NNLinkError, ValueError):
    """Modulation order outside the supported set."""


class InvalidNoise(NNLinkError, ValueError):
    """Noise variance must be strictly positive."""


class ShapeMismatch(NNLinkError, ValueError):
    pass


class NotNormalized(NNLinkError, ValueError):
    """Probability vectors do not sum to one."""


class StaleCache(NNLinkError, RuntimeError):
    """Backward pass called with a cache that no longer matches the model."""


class StaleCalibration(NNLinkError, RuntimeError):
    """Encoder parameters changed since the codebook power was calibrated."""


class IndexOutOfRange(NNLinkError, IndexError):
    pass


class ConfigInvalid(NNLinkError, ValueError):
    pass


class ModelLoadError(NNLinkError, OSError):
    pass


class FormatVersionMismatch(ModelLoadError):
    pass
