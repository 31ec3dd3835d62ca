"""Exception hierarchy shared by the library and the CLI.

The CLI maps :class:`ConfigurationError` (and subclasses) to exit code 1 and
:class:`DiagnosticError` to exit code 2.
"""


class MixlabError(Exception):
    """Base class for all library errors."""


class ConfigurationError(MixlabError, ValueError):
    """Malformed input: bad problem spec, undefined label, out-of-range parameter."""


class PreconditionError(ConfigurationError):
    """A bound or procedure was called outside the regime where it is valid."""


class DiagnosticError(MixlabError):
    """The computation ran but the answer is a structural negative result."""


class NonUniqueMinimizerError(DiagnosticError):
    """Two risk minimizers whose losses differ on a positive-probability atom."""

    def __init__(self, minimizers):
        self.minimizers = tuple(minimizers)
        names = ", ".join(h.name for h in self.minimizers)
        super().__init__(
            f"non-unique risk minimizer: {{{names}}} all attain the minimal risk "
            "but their losses differ with positive probability; stochastic "
            "mixability fails for every eta > 0"
        )


class UnboundedBernsteinError(DiagnosticError):
    """Some hypothesis has zero excess risk yet a non-degenerate excess loss."""

    def __init__(self, hypothesis):
        self.hypothesis = hypothesis
        super().__init__(
            f"Bernstein constant is unbounded: {hypothesis.name!r} has zero excess "
            "risk but a non-zero second moment of its excess loss"
        )


class BoundaryCaseError(DiagnosticError):
    """The moment target sits on (or outside) the boundary of the feasible region."""
