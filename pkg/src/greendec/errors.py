"""Exception types raised across the package.

Every failure mode that callers are expected to handle gets its own class so
tests and the CLI can match on type rather than message text.
"""


class GreendecError(Exception):
    """Base class for all package-specific errors."""


class InvalidParams(GreendecError):
    """Mesh generator parameters out of range (radii, resolution, ...)."""


class DegenerateSimplex(GreendecError):
    """A simplex has (numerically) zero volume."""


class DegreeOutOfRange(GreendecError):
    """Requested form degree p outside 0..dim."""


class ShapeMismatch(GreendecError):
    """Cochain length does not match DOF count for (mesh, p, rank, bc)."""


class FlatnessViolation(GreendecError):
    """Triangle holonomy of a bundle deviates from the identity."""


class NotOrthogonal(GreendecError):
    """Edge transport matrices are not orthogonal to tolerance."""


class EmptySourceSet(GreendecError):
    """Distance field or kernel requested with no source points."""


class SingularOperator(GreendecError):
    """Linear solve attempted with a singular operator and no kernel basis."""


class InsufficientSamples(GreendecError):
    """Too few interior sources / sample pairs for a statistical report."""


class BallTooSmall(GreendecError):
    """Interior ball radius below the minimum mesh-width multiple."""


class NotClosed(GreendecError):
    """Input form expected to be d-closed is not."""


class InvalidExponent(GreendecError):
    """Norm exponent q < 1 requested."""


class InadmissibleExponents(GreendecError):
    """Exponent tuple rejected by the admissibility predicate."""


class ObstructionNonExact(GreendecError):
    """du = f unsolvable: f has a nontrivial harmonic component.

    Carries the solve report (with ``obstruction_norm``) as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EnsembleDegenerate(GreendecError):
    """Every ensemble sample evaluated to 0/0 in an inequality check."""


class DisconnectedInterior(GreendecError):
    """Planar grid domain has a disconnected interior node set."""


class RankDeficient(GreendecError):
    """Discrete d-bar constraint matrix lost row rank.

    Carries the solve report (with ``residual``) as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BaselineViolated(GreendecError):
    """Classical L2 existence bound failed; indicates a discretization bug."""


class UnsupportedConfiguration(GreendecError):
    """Config keys/values outside the supported matrix."""


class ConfigParse(GreendecError):
    """Malformed or incomplete run configuration file."""


class MissingInput(GreendecError):
    """Referenced input file (mesh, config) does not exist."""


class EmptyReport(GreendecError):
    """Plot emission requested with no data rows."""
