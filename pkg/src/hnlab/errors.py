"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to:
2 for invariant violations in supplied data, 64 for bad parameters or
usage, 65 for unreadable input.
"""

from __future__ import annotations


class HNLabError(Exception):
    exit_code = 2


class InvariantError(HNLabError, ValueError):
    exit_code = 2


class UsageError(HNLabError, ValueError):
    exit_code = 64


class DataFormatError(HNLabError, ValueError):
    exit_code = 65


# -- profiles ---------------------------------------------------------------


class EmptyProfile(InvariantError):
    def __init__(self) -> None:
        super().__init__("profile has no graded pieces")


class ZeroRank(InvariantError):
    def __init__(self, index: int) -> None:
        self.index = index
        super().__init__(f"piece {index} has rank < 1")


class NonDecreasingSlopes(InvariantError):
    def __init__(self, index: int, upper=None, lower=None) -> None:
        self.index = index
        msg = f"slopes of pieces {index} and {index + 1} do not strictly decrease"
        if upper is not None:
            msg += f" ({upper} <= {lower})"
        super().__init__(msg)


class TotalsMismatch(InvariantError):
    def __init__(self, left, right) -> None:
        self.left, self.right = left, right
        super().__init__(f"total (rank, degree) differ: {left} vs {right}")


class NonIntegerDegree(InvariantError):
    def __init__(self, index: int, degree) -> None:
        self.index = index
        super().__init__(f"piece {index} has non-integer degree {degree}")


class InvalidMarking(InvariantError):
    pass


class RefinementViolation(InvariantError):
    def __init__(self, level: int, witness=None) -> None:
        self.level, self.witness = level, witness
        super().__init__(
            f"level {level} does not refine the pullback of level {level - 1}"
            + (f" (missing member {witness})" if witness is not None else "")
        )


class TowerNotStabilized(InvariantError):
    def __init__(self) -> None:
        super().__init__("tower has no strongly semistable level")


class NoDescentTarget(InvariantError):
    def __init__(self, index: int) -> None:
        self.index = index
        super().__init__(f"piece {index} has no descent target")


class NoSolution(InvariantError):
    pass


class AmbiguousSolution(InvariantError):
    def __init__(self, candidates) -> None:
        self.candidates = tuple(candidates)
        super().__init__(f"several (s1, l1) pairs match: {list(self.candidates)}")


# -- parameters --------------------------------------------------------------


class NotPrime(UsageError):
    def __init__(self, p) -> None:
        self.p = p
        super().__init__(f"{p!r} is not a prime")


class EvenPrime(UsageError):
    def __init__(self, p: int) -> None:
        super().__init__(f"p must be an odd prime, got {p}")


class OddDegree(UsageError):
    def __init__(self, d: int) -> None:
        super().__init__(f"Fermat variant needs even degree, got d={d}")


class DegreeTooSmall(UsageError):
    def __init__(self, d: int, minimum: int = 4) -> None:
        super().__init__(f"degree must be >= {minimum}, got d={d}")


class CongruenceFail(UsageError):
    pass


class DeltaOutOfRange(UsageError):
    pass


class ParityViolation(UsageError):
    pass


class RangeViolation(UsageError):
    pass


class MissingGeometryField(UsageError):
    def __init__(self, name: str) -> None:
        self.field = name
        super().__init__(f"geometry field {name!r} is required")


class GenusZero(UsageError):
    def __init__(self) -> None:
        super().__init__("curve bound needs genus >= 1")


class BudgetExceeded(UsageError):
    def __init__(self, size: int, limit: int) -> None:
        self.size, self.limit = size, limit
        super().__init__(f"oracle basis size q^3={size} exceeds budget {limit}")


class InsufficientData(UsageError):
    pass
