"""Plane trinomial curves, their Hilbert-Kunz data, and the two
counterexample families for refinement in small characteristic.

For a smooth plane curve of degree d the syzygy bundle V of O_X(1) has
rank 2 and degree -d.  If ``s1`` is the first Frobenius power at which V
destabilises and ``l1`` the instability degree there, then

    e_HK = 3d/4 + l1^2 / (4 d p^(2 s1)),
    deg L1 = -(d/2) p^s1 + l1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bounds import BoundReport, char_threshold_t1, curve_bound, lemma1_bound, GeometryContext, Threshold
from .errors import (
    AmbiguousSolution,
    CongruenceFail,
    DegreeTooSmall,
    DeltaOutOfRange,
    EvenPrime,
    NoSolution,
    OddDegree,
    ParityViolation,
    RangeViolation,
    UsageError,
)
from .exact import RationalLike, integer_sqrt_exact, primes_upto, require_prime, to_rational
from .profile import (
    FrobeniusData,
    GradedPiece,
    HNProfile,
    SubfiltrationResult,
    cumulative_members,
    direct_sum_hn,
    frobenius_pullback_strong,
    instability_degree,
    is_subfiltration,
    validate_profile,
)

VARIANTS = ("fermat", "cyclic")


def genus(d: int) -> int:
    return (d - 1) * (d - 2) // 2


def _check_s1_l1(d: int, p: int, s1: int, l1: int) -> None:
    require_prime(p)
    if d < 1:
        raise DegreeTooSmall(d, 1)
    if s1 < 1:
        raise RangeViolation(f"s1 must be >= 1, got {s1}")
    if not 0 <= l1 <= d * (d - 3):
        raise RangeViolation(f"l1={l1} outside 0..{d * (d - 3)}")
    if (l1 - p * d) % 2:
        raise ParityViolation(f"l1={l1} is not congruent to p*d={p * d} mod 2")


def ehk_from_s1_l1(d: int, p: int, s1: int, l1: int) -> Fraction:
    _check_s1_l1(d, p, s1, l1)
    return Fraction(3 * d, 4) + Fraction(l1 * l1, 4 * d * p ** (2 * s1))


@dataclass(frozen=True)
class S1L1:
    """Inverted HK data; ``s1 is None`` marks a strongly semistable V (l1 = 0)."""

    s1: Optional[int]
    l1: int


def s1_l1_from_ehk(d: int, p: int, e_hk: RationalLike) -> S1L1:
    require_prime(p)
    excess = to_rational(e_hk) - Fraction(3 * d, 4)
    if excess < 0:
        raise NoSolution(f"e_HK={e_hk} is below 3d/4")
    if excess == 0:
        return S1L1(None, 0)
    top = d * (d - 3)
    found = []
    s1 = 1
    while True:
        square = excess * 4 * d * p ** (2 * s1)
        if square > top * top:
            break
        if square.denominator == 1:
            root = integer_sqrt_exact(square.numerator)
            if root is not None and 0 < root <= top and (root - p * d) % 2 == 0:
                found.append(S1L1(s1, root))
        s1 += 1
    if not found:
        raise NoSolution(f"e_HK={e_hk} has no representation with d={d}, p={p}")
    if len(found) > 1:
        raise AmbiguousSolution((c.s1, c.l1) for c in found)
    return found[0]


@dataclass(frozen=True)
class DegL1:
    deg_L1: Fraction
    instability: int


def deg_L1(d: int, p: int, s1: int, l1: int) -> DegL1:
    _check_s1_l1(d, p, s1, l1)
    return DegL1(Fraction(-d * p**s1, 2) + Fraction(l1, 2), l1)


def pulled_back_syzygy_profile(d: int, p: int, s1: int, l1: int) -> HNProfile:
    """HN profile of F^{s1*}V: [(1, deg L1), (1, -d p^s1 - deg L1)]."""
    dl = deg_L1(d, p, s1, l1).deg_L1
    total = Fraction(-d * p**s1)
    if l1 == 0:
        return validate_profile([(2, total)])
    return validate_profile([(1, dl), (1, total - dl)])


@dataclass(frozen=True)
class CongruenceResult:
    holds: bool
    modulus: int
    residue: int
    allowed: tuple[int, ...]

    def __bool__(self) -> bool:
        return self.holds


def monsky_prime_check(d: int, p: int, variant: str) -> CongruenceResult:
    """Congruence conditions under which Monsky's closed form applies.

    cyclic  x^(d-1)y + y^(d-1)z + z^(d-1)x : p = +-(d-1) mod 2(d^2-3d+3)
    fermat  x^d + y^d + z^d               : p = d +- 1 mod 2d
    """
    if variant == "fermat":
        if d % 2:
            raise OddDegree(d)
        if d < 4:
            raise DegreeTooSmall(d)
        modulus = 2 * d
        allowed = {(d - 1) % modulus, (d + 1) % modulus}
    elif variant == "cyclic":
        if d < 4:
            raise DegreeTooSmall(d)
        if d % 2:
            raise OddDegree(d)
        modulus = 2 * (d * d - 3 * d + 3)
        allowed = {(d - 1) % modulus, (-(d - 1)) % modulus}
    else:
        raise UsageError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    residue = p % modulus
    return CongruenceResult(residue in allowed, modulus, residue, tuple(sorted(allowed)))


def prime_search(d: int, variant: str, limit: int) -> list[int]:
    return [p for p in primes_upto(limit) if monsky_prime_check(d, p, variant).holds]


def monsky_ehk(d: int, p: int) -> Fraction:
    """Monsky's closed form 3d/4 + (d(d-3))^2 / (4 d p^2)."""
    return Fraction(3 * d, 4) + Fraction((d * (d - 3)) ** 2, 4 * d * p * p)


@dataclass(frozen=True)
class TrinomialInstance:
    d: int
    p: int
    variant: str
    s1: int
    l1: int
    e_hk: Fraction
    genus: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "genus", genus(self.d))
        if self.d < 4:
            raise DegreeTooSmall(self.d)
        if self.e_hk != ehk_from_s1_l1(self.d, self.p, self.s1, self.l1):
            raise RangeViolation("e_hk does not match (s1, l1)")

    @property
    def deg_L1(self) -> Fraction:
        return deg_L1(self.d, self.p, self.s1, self.l1).deg_L1

    def fv_profile(self) -> HNProfile:
        return pulled_back_syzygy_profile(self.d, self.p, self.s1, self.l1)

    def v_profile(self) -> HNProfile:
        return validate_profile([(2, -self.d)])


def trinomial_instance(d: int, p: int, variant: str, force: bool = False) -> TrinomialInstance:
    """Monsky instance: s1 = 1, l1 = d(d-3) whenever the congruence holds."""
    require_prime(p)
    check = monsky_prime_check(d, p, variant)
    if not check.holds and not force:
        raise CongruenceFail(
            f"p={p} is {check.residue} mod {check.modulus}, not in {list(check.allowed)} ({variant}, d={d})"
        )
    return TrinomialInstance(d, p, variant, 1, d * (d - 3), monsky_ehk(d, p))


def trinomial_curve_report(inst: TrinomialInstance) -> BoundReport:
    """The curve bound on F*V with l=1, s=0 and semistable V."""
    return curve_bound(inst.fv_profile(), 0, inst.genus, inst.p, instability_degree(inst.v_profile()))


# -- Raynaud ----------------------------------------------------------------


@dataclass(frozen=True)
class RaynaudInstance:
    p: int
    k: int
    genus: int
    L: GradedPiece
    B: GradedPiece
    FL: GradedPiece
    FB_pieces: tuple[GradedPiece, ...]
    V: HNProfile
    FV: HNProfile
    refinement: SubfiltrationResult
    threshold: Threshold
    lemma1: BoundReport

    @property
    def threshold_ok(self) -> bool:
        return self.threshold.admits(self.p)


def raynaud_generate(p: int, k: int) -> RaynaudInstance:
    """V = L + B on a curve of genus pk + 1, with F*B filtered by Omega^i."""
    require_prime(p)
    if p == 2:
        raise EvenPrime(p)
    if k < 1:
        raise UsageError(f"k must be >= 1, got {k}")
    g = p * k + 1
    L = GradedPiece(1, Fraction(2 * k * (p - 1)))
    B = GradedPiece(p - 1, Fraction((g - 1) * (p - 1)))
    V = direct_sum_hn([L, B])
    FL = GradedPiece(1, L.degree * p)
    FB_pieces = tuple(GradedPiece(1, Fraction(i * (2 * g - 2))) for i in range(p - 1, 0, -1))
    FV = direct_sum_hn([FL, *FB_pieces])
    pulled = frobenius_pullback_strong(V, FrobeniusData(p, 1))
    refinement = is_subfiltration(pulled, FV)
    threshold = char_threshold_t1(V.total_rank, 1, 2 * g - 2)
    geom = GeometryContext.curve(g)
    report = lemma1_bound(FV, 0, geom, FrobeniusData(p, 1), instability_degree(V), V.total_rank)
    return RaynaudInstance(p, k, g, L, B, FL, FB_pieces, V, FV, refinement, threshold, report)


# -- Monsky W ---------------------------------------------------------------


@dataclass(frozen=True)
class MonskyWInstance:
    """W = L0 + V with the pulled-back filtration stored exactly as displayed.

    ``fw_pieces`` are the graded pieces of 0 < L1 < L1 + F*L0 < F*W and are
    deliberately not validated as an HN profile.
    """

    d: int
    p: int
    delta: int
    W: HNProfile
    L0: GradedPiece
    FL0: GradedPiece
    L1: GradedPiece
    FV_total: Fraction
    fw_pieces: tuple[GradedPiece, ...]
    refinement: SubfiltrationResult
    slopes_decrease: bool
    warnings: tuple[str, ...]

    @property
    def fw_members(self):
        return cumulative_members(self.fw_pieces)


def monsky_w_generate(d: int, p: int, delta: int) -> MonskyWInstance:
    require_prime(p)
    check = monsky_prime_check(d, p, "fermat")
    if not check.holds:
        raise CongruenceFail(f"p={p} is {check.residue} mod {check.modulus}, not in {list(check.allowed)}")
    if not 1 <= delta * p <= d * (d - 3) // 2:
        raise DeltaOutOfRange(f"need 1 <= delta*p <= {d * (d - 3) // 2}, got {delta * p}")
    L0 = GradedPiece(1, Fraction(d, 2) + delta)
    V = GradedPiece(2, Fraction(-d))
    W = direct_sum_hn([L0, V])
    FL0 = GradedPiece(1, L0.degree * p)
    L1 = GradedPiece(1, Fraction(-d * p, 2) + Fraction(d * (d - 3), 2))
    # rank-2 bundle with slope -dp/2
    fv_total = Fraction(-d * p)
    quotient = GradedPiece(1, fv_total - L1.degree)
    fw_pieces = (L1, FL0, quotient)
    slopes = [pc.slope for pc in fw_pieces]
    decreasing = all(a > b for a, b in zip(slopes, slopes[1:]))
    warnings = []
    if not decreasing:
        warnings.append(
            f"displayed filtration is not slope-decreasing: mu(L1)={L1.slope}, "
            f"mu(F*L0)={FL0.slope}, mu(F*V/L1)={quotient.slope}"
        )
    pulled = frobenius_pullback_strong(W, FrobeniusData(p, 1))
    refinement = is_subfiltration(pulled, cumulative_members(fw_pieces))
    return MonskyWInstance(
        d, p, delta, W, L0, FL0, L1, fv_total, fw_pieces, refinement, decreasing, tuple(warnings)
    )
