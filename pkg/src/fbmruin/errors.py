"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ``ConfigError`` -> 1,
``InfeasibleRareEvent`` -> 2, ``InvariantBreach`` -> 3.
"""


class FbmRuinError(Exception):
    pass


class ConfigError(FbmRuinError, ValueError):
    """Invalid parameter value; ``key`` names the offending field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class InvariantBreach(FbmRuinError, RuntimeError):
    """Something that should be mathematically impossible happened."""


class NegativeEigenvalue(InvariantBreach):
    pass


class GridTooLarge(ConfigError):
    def __init__(self, n_steps, limit):
        super().__init__("n_steps", f"dense factorization limited to {limit} steps, got {n_steps}")


class LengthMismatch(ConfigError):
    def __init__(self, expected, got):
        super().__init__("increments", f"expected {expected} increments, got {got}")


class NonZeroStart(ConfigError):
    def __init__(self, value):
        super().__init__("y_values", f"input path must start at 0, got {value!r}")


class RegimeMismatch(ConfigError):
    def __init__(self, message):
        super().__init__("scenario", message)


class S0OutOfRange(ConfigError):
    def __init__(self, s0, t0):
        super().__init__("s0", f"need 0 <= s0 < t0 = {t0:.6g}, got {s0!r}")


class GammaOutOfRange(ConfigError):
    def __init__(self, gamma, allowed):
        super().__init__("gamma", f"need gamma in {allowed}, got {gamma!r}")


class MissingConstant(ConfigError):
    pass


class BadExpansionSpec(ConfigError):
    pass


class ParamOutOfRange(ConfigError):
    pass


class OutOfTriangle(ConfigError):
    def __init__(self):
        super().__init__("s,t", "point outside the triangle 0 <= s <= t <= 1")


class SOutOfRange(ConfigError):
    def __init__(self):
        super().__init__("s", "defined only for s in the open interval (0, 1)")


class InfeasibleRareEvent(FbmRuinError):
    """No ruin observed; carries the rule-of-three upper bound on the probability."""

    def __init__(self, replications):
        self.replications = replications
        self.upper_bound = 3.0 / replications
        super().__init__(
            f"no ruin in {replications} replications; probability is below ~{self.upper_bound:.3g} "
            "(rule of three), increase replications or lower u"
        )


class TooFewObservations(FbmRuinError, ValueError):
    def __init__(self, n, needed):
        super().__init__(f"need at least {needed} conditional observations, got {n}")
