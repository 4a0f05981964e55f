"""Exception hierarchy shared by the whole package.

The CLI maps these onto its exit-code contract: theorem violations are
exit 1, input problems exit 2, resource refusals exit 3.
"""

from __future__ import annotations


class CartdecompError(Exception):
    """Base class for all package errors."""


class InputError(CartdecompError):
    """Malformed or out-of-contract input (exit code 2)."""


class DataError(InputError):
    """Shipped data failed its own integrity checks."""


class InvalidMorphismError(InputError):
    """Generator images do not extend to a homomorphism."""


class LimitError(CartdecompError):
    """A resource guard refused the computation (exit code 3)."""


class TheoremViolation(CartdecompError):
    """A recomputed fact contradicts what the analysis asserts (exit code 1).

    Carries a machine-readable witness so failed runs stay diagnosable.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness

    def witness_dict(self) -> dict:
        return {"message": str(self), "witness": self.witness}


# Default guards for backtrack searches.  Refuse loudly rather than run for
# hours: the package targets desk scale.
MAX_BACKTRACK_DEGREE = 20_000
MAX_BACKTRACK_ORDER = 10**9


def check_backtrack_guard(degree: int, order: int, override: bool = False,
                          what: str = "backtrack search") -> None:
    if override:
        return
    if degree > MAX_BACKTRACK_DEGREE:
        raise LimitError(
            f"{what} refused: degree {degree} exceeds guard "
            f"{MAX_BACKTRACK_DEGREE} (pass override to force)")
    if order > MAX_BACKTRACK_ORDER:
        raise LimitError(
            f"{what} refused: group order {order} exceeds guard "
            f"{MAX_BACKTRACK_ORDER} (pass override to force)")
