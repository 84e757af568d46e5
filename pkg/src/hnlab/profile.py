"""Formal Harder-Narasimhan profiles and their slope calculus.

A profile is the ordered list of graded pieces ``E_i / E_{i-1}`` of an HN
filtration, each recorded as ``(rank, degree)``.  Cumulative members
``E_i`` are derived on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import (
    DataFormatError,
    EmptyProfile,
    InvalidMarking,
    NonDecreasingSlopes,
    NonIntegerDegree,
    TotalsMismatch,
    ZeroRank,
)
from .exact import RationalLike, fraction_str, require_prime, to_rational

Member = tuple[int, Fraction]


@dataclass(frozen=True)
class GradedPiece:
    rank: int
    degree: Fraction

    def __post_init__(self) -> None:
        if isinstance(self.rank, bool) or not isinstance(self.rank, int):
            raise DataFormatError(f"rank must be an integer, got {self.rank!r}")
        object.__setattr__(self, "degree", to_rational(self.degree))

    @property
    def slope(self) -> Fraction:
        return self.degree / self.rank

    def as_tuple(self) -> tuple[int, Fraction]:
        return (self.rank, self.degree)


PieceLike = Union[GradedPiece, tuple[int, RationalLike]]


def _piece(obj: PieceLike) -> GradedPiece:
    if isinstance(obj, GradedPiece):
        return obj
    rank, degree = obj
    return GradedPiece(rank, to_rational(degree))


@dataclass(frozen=True)
class HNProfile:
    """Validated HN profile; build it with :func:`validate_profile`."""

    pieces: tuple[GradedPiece, ...]

    def __post_init__(self) -> None:
        _check_pieces(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def slopes(self) -> list[Fraction]:
        return [piece.slope for piece in self.pieces]

    @property
    def total_rank(self) -> int:
        return sum(piece.rank for piece in self.pieces)

    @property
    def total_degree(self) -> Fraction:
        return sum((piece.degree for piece in self.pieces), Fraction(0))

    @property
    def totals(self) -> Member:
        return (self.total_rank, self.total_degree)

    @property
    def mu(self) -> Fraction:
        return self.total_degree / self.total_rank

    @property
    def mu_max(self) -> Fraction:
        return self.pieces[0].slope

    @property
    def mu_min(self) -> Fraction:
        return self.pieces[-1].slope

    @property
    def length(self) -> int:
        """Number of proper nonzero members, ``l(E)``."""
        return len(self.pieces) - 1

    @property
    def is_semistable(self) -> bool:
        return len(self.pieces) == 1

    def members(self) -> list[Member]:
        return cumulative_members(self)

    def as_tuples(self) -> list[tuple[int, Fraction]]:
        return [piece.as_tuple() for piece in self.pieces]

    def to_json(self) -> dict:
        return {
            "pieces": [
                {"rank": piece.rank, "degree": fraction_str(piece.degree)}
                for piece in self.pieces
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "HNProfile":
        return validate_profile(pieces_from_json(data))


def pieces_from_json(data: Mapping) -> list[GradedPiece]:
    """Read ``{"pieces": [{"rank": int, "degree": "num/den"}]}`` without
    checking slope order."""
    if not isinstance(data, Mapping) or "pieces" not in data:
        raise DataFormatError("profile JSON needs a 'pieces' list")
    raw = data["pieces"]
    if not isinstance(raw, list):
        raise DataFormatError("'pieces' must be a list")
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, Mapping) or set(item) != {"rank", "degree"}:
            raise DataFormatError(f"piece {i} must have exactly 'rank' and 'degree'")
        rank = item["rank"]
        if isinstance(rank, bool) or not isinstance(rank, int):
            raise DataFormatError(f"piece {i}: rank must be an integer")
        degree = item["degree"]
        if not isinstance(degree, (str, int)) or isinstance(degree, bool):
            raise DataFormatError(f"piece {i}: degree must be a fraction string")
        out.append(GradedPiece(rank, to_rational(degree)))
    return out


def _check_pieces(pieces: Sequence[GradedPiece]) -> None:
    if not pieces:
        raise EmptyProfile()
    for i, piece in enumerate(pieces):
        if piece.rank < 1:
            raise ZeroRank(i)
    for i in range(len(pieces) - 1):
        upper, lower = pieces[i].slope, pieces[i + 1].slope
        if not upper > lower:
            raise NonDecreasingSlopes(i, upper, lower)


def validate_profile(pieces: Iterable[PieceLike]) -> HNProfile:
    """Return the profile if the slopes strictly decrease.

    >>> validate_profile([(1, 4), (2, 6)]).slopes
    [Fraction(4, 1), Fraction(3, 1)]
    """
    return HNProfile(tuple(_piece(p) for p in pieces))


def instability_degree(profile: HNProfile) -> Fraction:
    return profile.mu_max - profile.mu_min


def cumulative_members(profile: HNProfile | Sequence[PieceLike]) -> list[Member]:
    """(rank, degree) of E_1, E_2, ..., E_{l+1}; the last one is E itself."""
    pieces = profile.pieces if isinstance(profile, HNProfile) else [_piece(p) for p in profile]
    out: list[Member] = []
    rank, degree = 0, Fraction(0)
    for piece in pieces:
        rank += piece.rank
        degree += piece.degree
        out.append((rank, degree))
    return out


@dataclass(frozen=True)
class FrobeniusData:
    p: int
    iterations: int = 1

    def __post_init__(self) -> None:
        require_prime(self.p)
        if isinstance(self.iterations, bool) or not isinstance(self.iterations, int) or self.iterations < 0:
            raise DataFormatError(f"iterations must be a non-negative integer, got {self.iterations!r}")

    @property
    def factor(self) -> int:
        return self.p**self.iterations


def frobenius_pullback_strong(profile: HNProfile, frob: FrobeniusData) -> HNProfile:
    """Pull back assuming every graded piece is strongly semistable.

    Degrees scale by ``p**s`` and the profile stays the HN profile.
    """
    factor = frob.factor
    return HNProfile(tuple(GradedPiece(pc.rank, pc.degree * factor) for pc in profile.pieces))


def direct_sum_hn(summands: Iterable[PieceLike]) -> HNProfile:
    """HN profile of a direct sum of semistable summands.

    Summands of equal slope are merged into a single piece.
    """
    pieces = [_piece(s) for s in summands]
    if not pieces:
        raise EmptyProfile()
    for i, piece in enumerate(pieces):
        if piece.rank < 1:
            raise ZeroRank(i)
    merged: dict[Fraction, list] = {}
    for piece in pieces:
        slot = merged.setdefault(piece.slope, [0, Fraction(0)])
        slot[0] += piece.rank
        slot[1] += piece.degree
    ordered = sorted(merged.items(), key=lambda kv: kv[0], reverse=True)
    return HNProfile(tuple(GradedPiece(r, d) for _, (r, d) in ordered))


@dataclass(frozen=True)
class SubfiltrationResult:
    holds: bool
    witness: Member | None = None

    def __bool__(self) -> bool:
        return self.holds


MembersLike = Union[HNProfile, Sequence[Member]]


def _members(obj: MembersLike) -> list[Member]:
    if isinstance(obj, HNProfile):
        return cumulative_members(obj)
    return [(int(r), to_rational(d)) for r, d in obj]


def is_subfiltration(coarse: MembersLike, fine: MembersLike) -> SubfiltrationResult:
    """Check that every cumulative member of ``coarse`` is a member of ``fine``.

    Both arguments are profiles or explicit lists of cumulative members
    ending with the whole sheaf.
    """
    cm, fm = _members(coarse), _members(fine)
    if not cm or not fm:
        raise EmptyProfile()
    if cm[-1] != fm[-1]:
        raise TotalsMismatch(cm[-1], fm[-1])
    present = set(fm)
    for member in cm:
        if member not in present:
            return SubfiltrationResult(False, member)
    return SubfiltrationResult(True)


@dataclass(frozen=True)
class GapRow:
    index: int
    gap: Fraction
    inverse_rank_product: Fraction
    pair_bound: Fraction
    total_bound: Fraction

    @property
    def ok(self) -> bool:
        return self.gap >= self.inverse_rank_product >= self.pair_bound >= self.total_bound


def slope_gap_check(profile: HNProfile) -> list[GapRow]:
    """Adjacent slope gaps against 1/(r_i r_{i+1}) >= 4/(r_i+r_{i+1})^2 >= 4/r^2.

    Only meaningful for integer degrees, so rational degrees are refused.
    """
    for i, piece in enumerate(profile.pieces):
        if piece.degree.denominator != 1:
            raise NonIntegerDegree(i, piece.degree)
    r = profile.total_rank
    rows = []
    for i in range(len(profile.pieces) - 1):
        a, b = profile.pieces[i], profile.pieces[i + 1]
        rows.append(
            GapRow(
                index=i,
                gap=a.slope - b.slope,
                inverse_rank_product=Fraction(1, a.rank * b.rank),
                pair_bound=Fraction(4, (a.rank + b.rank) ** 2),
                total_bound=Fraction(4, r * r),
            )
        )
    return rows


@dataclass(frozen=True)
class DescentMarking:
    """Which members of a pulled-back profile descend, and to what.

    ``targets`` maps a 1-based member index of the pulled-back profile to the
    1-based member index of the base profile.  With ``almost=False`` the
    members literally descend, so the map must be strictly increasing; with
    ``almost=True`` it records the almost-descent targets, which may repeat.
    """

    targets: Mapping[int, int] = field(default_factory=dict)
    almost: bool = False

    def __post_init__(self) -> None:
        items = sorted((int(k), int(v)) for k, v in dict(self.targets).items())
        object.__setattr__(self, "targets", dict(items))
        values = [v for _, v in items]
        for k, v in items:
            if k < 1 or v < 1:
                raise InvalidMarking(f"marking indices are 1-based, got {k} -> {v}")
        for a, b in zip(values, values[1:]):
            if b < a or (b == a and not self.almost):
                raise InvalidMarking(f"descent map must increase, got {values}")

    def __len__(self) -> int:
        return len(self.targets)

    def proper_count(self, length: int) -> int:
        """``s``: marked members among the proper ones E_1..E_l."""
        for k in self.targets:
            if k > length + 1:
                raise InvalidMarking(f"member {k} does not exist (l = {length})")
        return sum(1 for k in self.targets if k <= length)

    def check_against(self, profile: HNProfile, base: HNProfile) -> None:
        for k, v in self.targets.items():
            if k > len(profile):
                raise InvalidMarking(f"member {k} does not exist in a {len(profile)}-piece profile")
            if v > len(base):
                raise InvalidMarking(f"base member {v} does not exist in a {len(base)}-piece profile")

    def to_json(self) -> dict:
        return {str(k): v for k, v in self.targets.items()}

    @classmethod
    def from_json(cls, data: Mapping | None, almost: bool = False) -> "DescentMarking":
        if data is None:
            return cls({}, almost)
        if not isinstance(data, Mapping):
            raise DataFormatError("marking must be an object mapping member index to base index")
        try:
            return cls({int(k): int(v) for k, v in data.items()}, almost)
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"bad marking {data!r}") from exc


def almost_descent_marking(level: HNProfile, base: HNProfile) -> DescentMarking:
    """Almost-descent targets when ``level`` refines a pullback of ``base``.

    In that situation every pulled-back member of ``base`` is a member of
    ``level``, so ``F_j`` lies in the pullback of ``E_i`` exactly when its
    rank does not exceed that of ``E_i``.
    """
    if level.total_rank != base.total_rank:
        raise TotalsMismatch(level.totals, base.totals)
    base_ranks = [r for r, _ in cumulative_members(base)]
    targets = {}
    for j, (rank, _) in enumerate(cumulative_members(level), start=1):
        targets[j] = next(i for i, br in enumerate(base_ranks, start=1) if rank <= br)
    return DescentMarking(targets, almost=True)
