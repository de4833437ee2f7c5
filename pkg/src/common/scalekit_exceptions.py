"""Custom exceptions and warnings for scalekit operations."""


class ScaleKitError(Exception):
    """Base exception for scalekit errors.

    Every subclass carries a machine-readable ``category`` and the process
    ``exit_code`` the CLI uses when the error escapes a command.
    """

    category = "error"
    exit_code = 1


class ConfigError(ScaleKitError):
    """Configuration file could not be parsed or failed validation."""

    category = "config"
    exit_code = 2


class ArgumentError(ScaleKitError):
    """An argument is outside the operation's domain (off-grid x, bad deltas, short depth)."""

    category = "argument"


class InvalidTripletError(ScaleKitError):
    """Triplet or measure violates a structural invariant."""

    category = "triplet"
    exit_code = 2


class InfiniteMassError(ScaleKitError):
    """Requested interval carries infinite Levy mass."""

    category = "infinite-mass"


class InadmissibleStepError(ScaleKitError):
    """Grid step h yields a negative chain rate or a negative drift gap."""

    category = "inadmissible-h"
    exit_code = 3


class ScaleRangeError(ScaleKitError):
    """Scale function values left the representable range."""

    category = "range"
    exit_code = 4


class PhiDivergenceError(ScaleKitError):
    """Root search for the right inverse of the Laplace exponent failed to bracket."""

    category = "divergence"


class InsufficientMarginError(ScaleKitError):
    """Transform argument too close to the growth exponent for a usable tail bound."""

    category = "margin"


class OracleResolutionError(ScaleKitError):
    """Benchmark oracle is not strictly finer than the sweep grids."""

    category = "oracle"


class AssumptionCheckError(ScaleKitError):
    """Small-jump exponent needed for a rate prediction is unavailable."""

    category = "assumption"


class QuadratureError(ScaleKitError):
    """Numerical integration did not reach the requested tolerance."""

    category = "quadrature"


class ScaleKitWarning(UserWarning):
    """Numerical caveat a caller may want to act on."""
    pass
