"""Shared exception types."""


class ArityMismatch(ValueError):
    """Operands defined over different coordinate arities."""


class SingularLocusError(ArithmeticError):
    """Evaluation requested on the locus r = 0 where arctan(x0/r) is undefined."""


class PoleError(ZeroDivisionError):
    """Denominator vanishes at the evaluation point."""


class TauDivisionError(ZeroDivisionError):
    """Division by an expression that depends on the arctan generator."""


class DimensionMismatch(ValueError):
    """Matrix or vector dimensions are inconsistent."""


class CapExceeded(RuntimeError):
    """A combinatorial size guard was hit; raise the cap to proceed."""


class NotACocycle(ValueError):
    """Coboundary test requested for a cochain that is not closed."""


class NotAHomomorphism(ValueError):
    """Linear map between Lie algebras does not respect brackets."""


class NotAPotential(ValueError):
    """Candidate potential form fails d(alpha) = omega."""


class NotInvariant(ValueError):
    """Form is not invariant under the full infinitesimal action."""


class NotHamiltonian(ValueError):
    """Form/field pair fails the Hamiltonian relation d(sigma) = -i_v(omega)."""


class NotACycle(ValueError):
    """Chain expected to be closed has nonzero boundary."""
