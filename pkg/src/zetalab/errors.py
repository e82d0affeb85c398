"""Exception types shared across the package.

Every recoverable failure mode has its own class so callers (and the CLI
error-to-exit-code mapping) can react to the kind, not the message.
"""


class ZetalabError(Exception):
    """Base class for all errors raised by zetalab on bad inputs or
    unreachable numerical goals. Distinct from bugs (plain exceptions)."""


class PoleAtOne(ZetalabError):
    """Evaluation point inside the guard radius around the pole s = 1."""


class ToleranceUnreachable(ZetalabError):
    """Requested absolute tolerance cannot be certified within max_terms."""


class DivisionNearZero(ZetalabError):
    """A ratio denominator has modulus below the documented guard."""


class BranchCutFailure(ZetalabError):
    """Phase unwrapping found an inconsistent jump (winding around a zero)."""


class FitBoundNotMet(ZetalabError):
    """No polynomial of degree up to the cap meets the requested sup bound."""

    def __init__(self, achieved: float, degree: int):
        self.achieved = achieved
        self.degree = degree
        super().__init__(
            f"best sup-grid error {achieved:.6g} at degree {degree} misses the bound"
        )


class NoPositiveDelta(ZetalabError):
    """Halving search for a continuity modulus exhausted without success."""


class MarginTooSmall(ZetalabError):
    """Region enlargement cannot keep the required distance inside the strip."""


class OverlapDetected(ZetalabError):
    """Two shifted copies in a union have intersecting imaginary extents."""


class CapExceeded(ZetalabError):
    """No covering number at or below the cap certifies the torus statement."""

    def __init__(self, cap: int, uncovered: int):
        self.cap = cap
        self.uncovered = uncovered
        super().__init__(f"{uncovered} mesh points uncovered after l = {cap}")


class KroneckerNotFound(ZetalabError):
    """The orbit-shift search failed within the covering number bound."""


class IndependenceViolated(ZetalabError):
    """Hybrid scan preconditions on log-independence or irrationality fail."""


class SchemaError(ZetalabError):
    """A config or artifact file does not match its documented schema."""
