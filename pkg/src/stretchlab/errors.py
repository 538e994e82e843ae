"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class;
generic programming errors stay as ValueError/TypeError.
"""


class StretchLabError(Exception):
    """Base class for all package-specific failures."""


class NumericalOverflow(StretchLabError):
    """A matrix product or sum left the representable range."""


class InvalidPoint(StretchLabError):
    """A point fed to a hyperbolic-distance routine is not in the model."""


class EnumerationTooLarge(StretchLabError):
    """A word enumeration would exceed the configured budget."""

    def __init__(self, n, total, budget):
        super().__init__(
            f"enumerating words up to length {n} needs {total} words, "
            f"budget is {budget}"
        )
        self.n = n
        self.total = total
        self.budget = budget


class DiskOverlap(StretchLabError):
    """The requested separation cannot produce disjoint ping-pong disks."""


class NotProvablyDiscrete(StretchLabError):
    """Ping-pong verification failed after a perturbation."""


class SuspectSpec(StretchLabError):
    """A class length collapsed below the degeneracy floor."""


class IncompleteWindow(StretchLabError):
    """A counting window reaches past the completeness horizon."""


class SweepBracketFailure(StretchLabError):
    """A parameter sweep found no sign change to bracket."""


class BracketFailure(StretchLabError):
    """Root bracketing failed for a pressure equation."""


class EigenStall(StretchLabError):
    """Power iteration failed to converge within the iteration cap."""


class NoOrbits(StretchLabError):
    """A periodic-orbit level is empty."""


class DerivativeMismatch(StretchLabError):
    """Two routes to the same derivative disagree beyond tolerance."""


class NumericalInstability(StretchLabError):
    """A quantity that must be nonnegative came out clearly negative."""


class NotInPressureZeroSlice(StretchLabError):
    """Inputs violate the pressure-zero / mean-zero preconditions."""


class BeyondFold(StretchLabError):
    """Requested parameter lies past the turning point of the solution curve."""


class FoldReached(StretchLabError):
    """Continuation hit the fold of the solution curve."""

    def __init__(self, t):
        super().__init__(f"continuation failed near t = {t}")
        self.t = t


class BadRay(StretchLabError):
    """A ray does not meet the sampling requirements for finite differences."""


class ConfigError(StretchLabError):
    """A run configuration is malformed."""


class StageFailed(StretchLabError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause
