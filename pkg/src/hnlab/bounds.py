"""Instability bounds and characteristic thresholds.

Checkers never reject data that violates a bound: they return a
:class:`BoundReport` with ``holds=False``.  Whether the characteristic
hypothesis of the corresponding statement is met is reported separately in
``hypothesis_ok``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import (
    GenusZero,
    InvalidMarking,
    InvariantError,
    MissingGeometryField,
    NoDescentTarget,
    RefinementViolation,
    TotalsMismatch,
    TowerNotStabilized,
    UsageError,
)
from .exact import RationalLike, fraction_str, to_rational
from .profile import (
    DescentMarking,
    FrobeniusData,
    HNProfile,
    frobenius_pullback_strong,
    instability_degree,
    is_subfiltration,
)

MarkingLike = Union[DescentMarking, int]


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: Fraction
    rhs: Fraction
    hypothesis_ok: bool = True
    informational: bool = False

    @property
    def slack(self) -> Fraction:
        return self.rhs - self.lhs

    @property
    def holds(self) -> bool:
        return self.slack >= 0

    def to_json(self) -> dict:
        return {
            "lhs": fraction_str(self.lhs),
            "rhs": fraction_str(self.rhs),
            "holds": self.holds,
            "slack": fraction_str(self.slack),
            "hypothesis_ok": self.hypothesis_ok,
            "name": self.name,
        }


def _report(name, lhs, rhs, hypothesis_ok=True, informational=False) -> BoundReport:
    return BoundReport(name, to_rational(lhs), to_rational(rhs), bool(hypothesis_ok), informational)


def equality_report(name: str, left: Fraction, right: Fraction, hypothesis_ok: bool = True) -> BoundReport:
    """An equality claim encoded as ``|left - right| <= 0``."""
    return _report(name, abs(left - right), 0, hypothesis_ok)


@dataclass(frozen=True)
class GeometryContext:
    dim_n: int
    mu_max_omega: Fraction
    genus: Optional[int] = None
    omega_profile: Optional[HNProfile] = None
    deg_O2: Optional[Fraction] = None
    mu_omega: Optional[Fraction] = None
    l_max_omega: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.dim_n < 1:
            raise InvariantError(f"dimension must be positive, got {self.dim_n}")
        object.__setattr__(self, "mu_max_omega", to_rational(self.mu_max_omega))
        for name in ("deg_O2", "mu_omega", "l_max_omega"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, to_rational(value))
        if self.genus is not None:
            if self.genus < 0:
                raise InvariantError(f"genus must be non-negative, got {self.genus}")
            if self.dim_n == 1 and self.mu_max_omega != 2 * self.genus - 2:
                raise InvariantError(
                    f"on a curve of genus {self.genus} mu_max(Omega) must be {2 * self.genus - 2}"
                )
        if self.omega_profile is not None and self.omega_profile.mu_max != self.mu_max_omega:
            raise InvariantError("omega_profile.mu_max differs from mu_max_omega")

    @classmethod
    def curve(cls, genus: int) -> "GeometryContext":
        return cls(dim_n=1, mu_max_omega=Fraction(2 * genus - 2), genus=genus, mu_omega=Fraction(2 * genus - 2))


def _marking_size(marking: MarkingLike, length: int) -> int:
    if isinstance(marking, DescentMarking):
        s = marking.proper_count(length)
    else:
        s = int(marking)
        if s < 0:
            raise InvalidMarking(f"s must be non-negative, got {s}")
    if s > length:
        raise InvalidMarking(f"s = {s} exceeds l = {length}")
    return s


def lemma1_bound(
    fe_profile: HNProfile,
    marking: MarkingLike,
    geom: GeometryContext,
    frob: FrobeniusData,
    base_I: RationalLike,
    base_rank: int,
) -> BoundReport:
    """I(F*E) <= (l - s) mu_max(Omega) + min(1, s) p I(E), hypothesis p >= r + n - (s + 2)."""
    length = fe_profile.length
    s = _marking_size(marking, length)
    eps = min(1, s)
    rhs = (length - s) * geom.mu_max_omega + eps * frob.p * to_rational(base_I)
    hyp = frob.p >= base_rank + geom.dim_n - (s + 2)
    return _report("lemma1", instability_degree(fe_profile), rhs, hyp)


def sun_conjecture_bound(
    fe_profile: HNProfile,
    marking: MarkingLike,
    geom: GeometryContext,
    frob: FrobeniusData,
    base_I: RationalLike,
    base_rank: int,
) -> BoundReport:
    length = fe_profile.length
    s = _marking_size(marking, length)
    rhs = (length - s) * geom.mu_max_omega + frob.p * s * to_rational(base_I)
    hyp = frob.p >= base_rank + geom.dim_n - (s + 2)
    return _report("sun", instability_degree(fe_profile), rhs, hyp)


def shepherd_barron_bound(fe_profile: HNProfile, geom: GeometryContext, r: int, p: int | None = None) -> BoundReport:
    """Semistable base: I(F*E) <= (r - 1) mu_max(Omega)."""
    hyp = True if p is None else p >= r + geom.dim_n - 2
    return _report("sb", instability_degree(fe_profile), (r - 1) * geom.mu_max_omega, hyp)


def curve_bound(
    fe_profile: HNProfile,
    marking: MarkingLike,
    genus: int,
    p: int,
    base_I: RationalLike,
) -> BoundReport:
    """Curve case of the main bound; valid for every prime."""
    if genus < 1:
        raise GenusZero()
    FrobeniusData(p)
    length = fe_profile.length
    s = _marking_size(marking, length)
    eps = min(1, s)
    rhs = (length - s) * (2 * genus - 2) + eps * p * to_rational(base_I)
    return _report("curve", instability_degree(fe_profile), rhs, True)


# -- towers -------------------------------------------------------------------


@dataclass(frozen=True)
class TowerSpec:
    """Profiles of ``F^{k*}E`` for k = 1..len(levels) over ``base``.

    ``strongly_semistable_at`` is the level index (0 = base) from which on
    every graded piece is strongly semistable, so later pullbacks are strong.
    Totals are enforced on construction; the refinement property is checked
    by :meth:`refinement_violation` since some of the source examples break it.
    """

    base: HNProfile
    frob: FrobeniusData
    levels: tuple[tuple[HNProfile, DescentMarking], ...] = ()
    strongly_semistable_at: Optional[int] = None

    def __post_init__(self) -> None:
        levels = tuple(
            (lv, DescentMarking()) if isinstance(lv, HNProfile) else (lv[0], lv[1]) for lv in self.levels
        )
        object.__setattr__(self, "levels", levels)
        p = self.frob.p
        for k, (profile, _) in enumerate(levels, start=1):
            expected = (self.base.total_rank, self.base.total_degree * p**k)
            if profile.totals != expected:
                raise TotalsMismatch(profile.totals, expected)
        if self.strongly_semistable_at is not None and not 0 <= self.strongly_semistable_at <= len(levels):
            raise InvariantError(
                f"strongly_semistable_at={self.strongly_semistable_at} outside 0..{len(levels)}"
            )

    @property
    def rank(self) -> int:
        return self.base.total_rank

    def profile_at(self, k: int) -> HNProfile:
        if k == 0:
            return self.base
        if k <= len(self.levels):
            return self.levels[k - 1][0]
        if self.strongly_semistable_at is None:
            raise TowerNotStabilized()
        top = len(self.levels)
        return frobenius_pullback_strong(self.profile_at(top), FrobeniusData(self.frob.p, k - top))

    def refinement_violation(self) -> Optional[tuple[int, tuple]]:
        """First level not refining the strong pullback of the previous one."""
        step = FrobeniusData(self.frob.p, 1)
        for k in range(1, len(self.levels) + 1):
            coarse = frobenius_pullback_strong(self.profile_at(k - 1), step)
            res = is_subfiltration(coarse, self.profile_at(k))
            if not res.holds:
                return k, res.witness
        return None

    def normalized_slopes(self, k: int) -> list[Fraction]:
        """a_i(F^{k*}E) = mu_i / p^k."""
        return [mu / self.frob.p**k for mu in self.profile_at(k).slopes]

    def normalized_ranks(self, k: int) -> list[int]:
        return [pc.rank for pc in self.profile_at(k).pieces]

    def _stable_level(self) -> int:
        if self.strongly_semistable_at is None:
            raise TowerNotStabilized()
        return self.strongly_semistable_at

    @property
    def l_max(self) -> Fraction:
        s = self._stable_level()
        return self.profile_at(s).mu_max / self.frob.p**s

    @property
    def l_min(self) -> Fraction:
        s = self._stable_level()
        return self.profile_at(s).mu_min / self.frob.p**s

    @property
    def stable_slopes(self) -> list[Fraction]:
        """The limiting normalized slopes (the a~_i of the stable level)."""
        return self.normalized_slopes(self._stable_level())

    @property
    def stable_ranks(self) -> list[int]:
        return self.normalized_ranks(self._stable_level())


def theorem_t5_bound(tower: TowerSpec, geom: GeometryContext, l: int, s: int) -> list[BoundReport]:
    """L_max(E) - L_min(E) <= (l - s)/p L_max(Omega) + I(E), plus its corollary.

    ``l`` and ``s`` are opaque caller inputs.  ``L_max(Omega)`` is taken from
    ``geom.l_max_omega`` when given, otherwise ``mu_max(Omega)`` stands in and
    the report name says so.
    """
    if tower.strongly_semistable_at is None:
        raise TowerNotStabilized()
    p = tower.frob.p
    if geom.l_max_omega is not None:
        l_omega, label = geom.l_max_omega, "t5"
    else:
        l_omega, label = geom.mu_max_omega, "t5[mu_max]"
    base_I = instability_degree(tower.base)
    reports = [_report(label, tower.l_max - tower.l_min, Fraction(l - s, p) * l_omega + base_I)]
    fe_I = instability_degree(tower.profile_at(1))
    if geom.mu_max_omega > 0:
        reports.append(_report(label + "-corollary", fe_I, (tower.rank - 1) * l_omega + base_I))
    else:
        reports.append(equality_report(label + "-I-stable", fe_I, base_I))
    return reports


def cc1_check(tower: TowerSpec, geom: Optional[GeometryContext] = None) -> list[BoundReport]:
    """Rank-one endpoints give I(F^{k*}E) = p^k I(E); with ``geom`` also the
    general per-step inequality."""
    bad = tower.refinement_violation()
    if bad is not None:
        raise RefinementViolation(*bad)
    p = tower.frob.p
    base = tower.base
    r = tower.rank
    hyp = True
    if geom is not None:
        hyp = char_threshold_t1(r, geom.dim_n, geom.mu_max_omega).admits(p)
    reports = []
    base_I = instability_degree(base)
    if base.pieces[0].rank == 1 and base.pieces[-1].rank == 1:
        for k in range(1, len(tower.levels) + 1):
            reports.append(
                equality_report(f"cc1-equality[k={k}]", instability_degree(tower.profile_at(k)), p**k * base_I, hyp)
            )
    if geom is not None:
        for k in range(1, len(tower.levels) + 1):
            prev = tower.profile_at(k - 1)
            if prev.is_semistable:
                continue
            rhs = geom.mu_max_omega * (prev.pieces[-1].rank + prev.pieces[0].rank - 2) + p * instability_degree(prev)
            reports.append(_report(f"cc1-inequality[k={k}]", instability_degree(tower.profile_at(k)), rhs, hyp))
    return reports


# -- slope drift --------------------------------------------------------------


@dataclass(frozen=True)
class DriftRow:
    piece: int
    target: int
    C: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return abs(self.C) <= self.bound


def _drift_pairs(level_profile: HNProfile, marking: DescentMarking, base: HNProfile):
    marking.check_against(level_profile, base)
    for j in range(1, len(level_profile) + 1):
        if j not in marking.targets:
            raise NoDescentTarget(j)
        yield j, marking.targets[j]


def drift_check_l5(
    level_profile: HNProfile,
    marking: DescentMarking,
    base: HNProfile,
    frob: FrobeniusData,
    geom: GeometryContext,
    r: Optional[int] = None,
) -> list[DriftRow]:
    """C = p (mu_j / p^s - mu_i(E)) against 2 |mu_max(Omega)| (r - 1)."""
    r = base.total_rank if r is None else r
    bound = 2 * abs(geom.mu_max_omega) * (r - 1)
    factor = frob.factor
    rows = []
    for j, i in _drift_pairs(level_profile, marking, base):
        a_j = level_profile.pieces[j - 1].slope / factor
        rows.append(DriftRow(j, i, frob.p * (a_j - base.pieces[i - 1].slope), bound))
    return rows


def drift_check_pp8(
    level_profile: HNProfile,
    marking: DescentMarking,
    base: HNProfile,
    frob: FrobeniusData,
    geom: GeometryContext,
    m: int,
    r: Optional[int] = None,
) -> list[DriftRow]:
    """C = p (a_j^m - mu_i^m) against 4 |mu_max(Omega)| (r-1) max{2|mu_i|, 2}^(m-1)."""
    if m < 1:
        raise UsageError(f"m must be a positive integer, got {m}")
    r = base.total_rank if r is None else r
    envelope = max([2 * abs(mu) for mu in base.slopes] + [Fraction(2)])
    bound = 4 * abs(geom.mu_max_omega) * (r - 1) * envelope ** (m - 1)
    factor = frob.factor
    rows = []
    for j, i in _drift_pairs(level_profile, marking, base):
        a_j = level_profile.pieces[j - 1].slope / factor
        rows.append(DriftRow(j, i, frob.p * (a_j**m - base.pieces[i - 1].slope ** m), bound))
    return rows


def drift_reports(name: str, rows: Sequence[DriftRow]) -> list[BoundReport]:
    return [_report(f"{name}[j={row.piece}->i={row.target}]", abs(row.C), row.bound) for row in rows]


# -- thresholds -----------------------------------------------------------------


@dataclass(frozen=True)
class Threshold:
    """Smallest admissible characteristic, with a predicate for a given prime."""

    value: Fraction

    def admits(self, p: int) -> bool:
        return p >= self.value

    __call__ = admits


def char_threshold_t1(r: int, n: int, mu_max_omega: RationalLike) -> Threshold:
    """max{r + n - 2, mu_max(Omega) r^3 / 4}."""
    if r < 1 or n < 1:
        raise UsageError("rank and dimension must be positive")
    mu = to_rational(mu_max_omega)
    return Threshold(max(Fraction(r + n - 2), mu * r**3 / 4))


@dataclass(frozen=True)
class BehrendInput:
    rank_g: int
    dim_adjoint: int
    coxeter_h: int
    dim_X: int
    mu_max_omega: Fraction

    def __post_init__(self) -> None:
        for name in ("rank_g", "dim_adjoint", "coxeter_h", "dim_X"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive")
        object.__setattr__(self, "mu_max_omega", to_rational(self.mu_max_omega))


def char_threshold_behrend(inp: BehrendInput) -> Threshold:
    return Threshold(
        max(
            Fraction(inp.rank_g + inp.dim_X - 2),
            inp.mu_max_omega * inp.rank_g**3 / 4,
            Fraction(2 * inp.dim_adjoint),
            Fraction(4 * inp.coxeter_h),
        )
    )


def threshold_report(name: str, threshold: Threshold, p: int) -> BoundReport:
    """Informational: lhs is the threshold, rhs the prime."""
    ok = threshold.admits(p)
    return _report(name, threshold.value, p, ok, informational=True)


def embedding_slope_bound(geom: GeometryContext, rank_M1: int) -> Fraction:
    """Upper bound for mu(M_1) from global generation of (Omega/M_1)(2)."""
    if geom.mu_omega is None:
        raise MissingGeometryField("mu_omega")
    if geom.deg_O2 is None:
        raise MissingGeometryField("deg_O2")
    n = geom.dim_n
    if not 1 <= rank_M1 <= n:
        raise UsageError(f"rank(M_1) must lie in 1..{n}, got {rank_M1}")
    return Fraction(n, rank_M1) * geom.mu_omega + geom.deg_O2 * Fraction(n - rank_M1, rank_M1)


def embedding_report(geom: GeometryContext, rank_M1: Optional[int] = None) -> BoundReport:
    """mu_max(Omega) = mu(M_1) against :func:`embedding_slope_bound`.

    Without an explicit rank the first piece of ``geom.omega_profile`` is M_1.
    """
    if rank_M1 is None:
        if geom.omega_profile is None:
            raise MissingGeometryField("omega_profile")
        rank_M1 = geom.omega_profile.pieces[0].rank
    return _report("embedding", geom.mu_max_omega, embedding_slope_bound(geom, rank_M1))
