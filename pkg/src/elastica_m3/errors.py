"""Exception hierarchy shared across the package.

Numerical-domain failures carry enough context (operation name, parameter
value, degenerate quantity) for the CLI to print an actionable message and
exit with the dedicated status code.
"""


class ElasticaError(Exception):
    """Base class for all package errors."""


class SceneError(ElasticaError):
    """Malformed scene file or unresolved name reference (CLI exit 2)."""


class ExprSyntaxError(ElasticaError):
    """Malformed expression source; carries the character position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownVariableError(ElasticaError):
    """Identifier not in the declared variable set of an expression."""

    def __init__(self, name, position):
        super().__init__(f"unknown variable '{name}' (at position {position})")
        self.name = name
        self.position = position


class NumericalDomainError(ElasticaError):
    """A quantity left the domain where the geometry is defined (CLI exit 3).

    `where` names the operation, `at` the offending parameter value (s or
    sigma, may be None), `quantity` the thing that degenerated.
    """

    def __init__(self, where, quantity, at=None, detail=""):
        self.where = where
        self.quantity = quantity
        self.at = at
        loc = "" if at is None else f" at parameter {at!r}"
        tail = f": {detail}" if detail else ""
        super().__init__(f"{where}: {quantity} degenerated{loc}{tail}")


class JetDomainError(NumericalDomainError):
    """Division by a jet with zero constant term, or log/sqrt off-domain."""


class OutOfDomainError(NumericalDomainError):
    """(u, v) point outside the declared patch rectangle."""


class DegenerateNormalError(NumericalDomainError):
    """x_u x x_v is null or vanishing; no unit normal exists."""


class MixedCausalTypeError(NumericalDomainError):
    """Patch normal changes causal character across the sample grid."""


class NullTangentError(NumericalDomainError):
    """Curve tangent is null (or vanishing) where a frame was requested."""


class DegenerateOsculatingError(NumericalDomainError):
    """alpha' x alpha'' is null or zero; curvature/torsion undefined."""


class IndefiniteDenominatorError(NumericalDomainError):
    """eps2*kappa_g^2 + eps3*kappa_n^2 vanished; the torsion expression
    built from Darboux invariants has a genuine singularity there."""


class SingularTangentBasisError(NumericalDomainError):
    """{x_u, x_v} fails to span the tangent plane at a curve point."""


class WindowExceededError(NumericalDomainError):
    """No parameter cut of the varied arc reproduces the target length."""


class NullSpeedError(NumericalDomainError):
    """Varied-arc speed vanished inside the arc-length integral."""


class ConstraintViolationError(NumericalDomainError):
    """Bump function violates the clamped-start conditions."""
