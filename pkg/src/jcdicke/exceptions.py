"""Exception types raised across the package."""


class JCDickeError(Exception):
    """Base class for all errors raised by jcdicke."""


class ParameterError(JCDickeError, ValueError):
    """Invalid physical or model parameter."""


class DetuningTooSmall(ParameterError):
    """Single-photon detuning is not large compared to the couplings."""


class NonPositiveOmegaA(ParameterError):
    """Effective cavity frequency is not positive."""


class DomainError(JCDickeError, ValueError):
    """Displacement outside [-1, 1]."""


class InvalidEpsilon(JCDickeError, ValueError):
    pass


class PathError(JCDickeError, ValueError):
    """A parameter path that does not vary exactly one coordinate."""


class CutoffError(JCDickeError, ValueError):
    pass


class DimensionCap(JCDickeError, RuntimeError):
    """Hilbert-space dimension exceeds the configured cap."""


class NonConverged(JCDickeError, RuntimeError):
    """Photon cutoff doubling reached the dimension cap before converging."""


class ConfigError(JCDickeError, ValueError):
    """Unresolvable or inconsistent sweep configuration."""
