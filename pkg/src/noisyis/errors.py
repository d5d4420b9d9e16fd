"""Exception types shared across the library."""


class NoisyISError(Exception):
    """Base class for all library errors."""


class SupportViolation(NoisyISError):
    """Weight requested at a point the proposal cannot produce."""


class NoDensity(NoisyISError):
    """Channel has no density to evaluate (identity, or lognormal gamma=0)."""


class DegenerateWeights(NoisyISError):
    """Every weight is zero (all log-weights -inf), nothing to normalize."""


class OracleDivergence(NoisyISError):
    """A requested moment integral does not converge (or quadrature failed)."""


class ConfigError(NoisyISError):
    """Config file is malformed: unknown key, wrong type, or invalid value."""
