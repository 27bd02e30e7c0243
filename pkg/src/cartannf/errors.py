"""Exception types. CLI exit codes are attached to the ones that surface there."""


class NormalFormError(Exception):
    exit_code = 1


class DimensionMismatch(NormalFormError, ValueError):
    """Operands disagree on variable count or truncation order."""

    exit_code = 2


class InvalidBound(NormalFormError, ValueError):
    """A norm bound was requested outside its hypotheses."""


class RankDeficient(NormalFormError, ValueError):
    """The eigenvalue matrix does not have full row rank (S not injective)."""

    exit_code = 2


class BudgetExceeded(NormalFormError, RuntimeError):
    """An enumeration or sampling budget ran out."""

    exit_code = 7


class CartanViolation(NormalFormError):
    """Junior parts are not free: det of the junior matrix vanishes identically."""

    exit_code = 3


class NotInModule(NormalFormError):
    """A normal form is not in the first-integral module spanned by S(g)."""

    exit_code = 4


class CommutationFailure(NormalFormError):
    """Family members fail to commute up to the working order."""

    exit_code = 5


class SolveInconsistent(NormalFormError):
    """The multiplied-through cohomological equation has no polynomial solution."""

    exit_code = 6
