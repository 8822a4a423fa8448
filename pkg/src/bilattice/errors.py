"""Exception and warning types shared across the package.

Two error families matter for the CLI exit codes: configuration problems
(bad input, exit code 2) and numerical failures raised by the solvers
(exit code 3).
"""


class BilatticeError(Exception):
    """Base class for all package errors."""


class ConfigError(BilatticeError):
    """Invalid configuration, geometry, or input file."""


class NumericalError(BilatticeError):
    """A solver failed or a numerical precondition was violated."""


class DegenerateHybridizationError(NumericalError):
    """Polariton mixing angles are undefined at G = 0."""


class InsideBandError(NumericalError):
    """Self-energy requested at an energy inside a band (principal-value
    evaluation is out of scope)."""


class NoBoundStateError(NumericalError):
    """The pole equation has no sign change inside the middle gap."""


class HybridizationFailureError(NumericalError):
    """No in-gap eigenstate with dominant emitter weight was found."""

    def __init__(self, msg, candidates=()):
        super().__init__(msg)
        self.candidates = tuple(candidates)


class ParityViolationError(NumericalError):
    """Giant-atom coupling points do not share one chiral sublattice."""


class ResolutionError(NumericalError):
    """Momentum grid too coarse for the requested real-space range."""


class DecompositionError(NumericalError):
    """Field cannot be split into two real shifted single-point profiles."""


class GeometryMismatchError(NumericalError):
    """Spin-array geometry is inconsistent with the requested analysis."""


class GaplessError(NumericalError):
    """Spectral gap below threshold; topological invariant undefined."""


class IntegrationError(NumericalError):
    """Master-equation integration failed or trace drifted."""


class ProtocolFailureError(NumericalError):
    """No fidelity maximum found within the search horizon."""


class ResolutionWarning(UserWarning):
    """Field did not decay below threshold inside the grid."""


class MarkovianWarning(UserWarning):
    """Coupling not small against the gap; effective spin model is
    only approximate."""


class SymmetryBreakingWarning(UserWarning):
    """Polarization did not snap to a quantized value."""


class GaplessFitWarning(UserWarning):
    """Fitted hoppings indicate an undimerized (gap-closing) geometry."""
