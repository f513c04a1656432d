"""Exception types shared across the package."""


class TorsolveError(Exception):
    """Base class for all package errors."""


class ZeroMatrixError(TorsolveError):
    """Smith normal form of the zero matrix is not defined here."""


class NotUnimodularError(TorsolveError):
    """Matrix is not square with determinant +-1."""


class LatticeMembershipError(TorsolveError):
    """A support point does not lie in the column lattice of the given map."""


class MixedVolumeZeroError(TorsolveError):
    """The support system has mixed volume zero (witness subset attached)."""

    def __init__(self, witness):
        self.witness = tuple(witness)
        super().__init__(f"mixed volume is zero, witness subset {self.witness}")


class DegenerateFiberError(TorsolveError):
    """All coefficients of some polynomial vanished on a fiber (non-generic input)."""


class SingularJacobianError(TorsolveError):
    """Jacobian too ill-conditioned for Newton refinement."""


class NoConvergenceError(TorsolveError):
    """Newton iteration did not reach the requested residual."""


class CountMismatchError(TorsolveError):
    """A solve produced a solution count different from the mixed volume.

    Carries the partial results so callers can inspect or report them.
    """

    def __init__(self, message, expected, found, partial=None):
        self.expected = expected
        self.found = found
        self.partial = partial
        super().__init__(f"{message}: expected {expected} solutions, found {found}")


class SystemFileError(TorsolveError):
    """Input file failed to parse or validate."""
