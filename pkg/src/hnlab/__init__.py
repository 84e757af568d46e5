"""Exact slope calculus for Harder-Narasimhan profiles under Frobenius pullback."""

from .bounds import (
    BehrendInput,
    BoundReport,
    GeometryContext,
    TowerSpec,
    cc1_check,
    char_threshold_behrend,
    char_threshold_t1,
    curve_bound,
    drift_check_l5,
    drift_check_pp8,
    embedding_slope_bound,
    lemma1_bound,
    shepherd_barron_bound,
    sun_conjecture_bound,
    theorem_t5_bound,
)
from .curves import (
    deg_L1,
    ehk_from_s1_l1,
    monsky_prime_check,
    monsky_w_generate,
    prime_search,
    raynaud_generate,
    s1_l1_from_ehk,
)
from .oracle import HKFunctionTable, estimate_ehk, hk_colength
from .profile import (
    DescentMarking,
    FrobeniusData,
    GradedPiece,
    HNProfile,
    direct_sum_hn,
    frobenius_pullback_strong,
    instability_degree,
    is_subfiltration,
    slope_gap_check,
    validate_profile,
)

__version__ = "0.1.0"

__all__ = [
    "BehrendInput",
    "BoundReport",
    "DescentMarking",
    "FrobeniusData",
    "GeometryContext",
    "GradedPiece",
    "HKFunctionTable",
    "HNProfile",
    "TowerSpec",
    "cc1_check",
    "char_threshold_behrend",
    "char_threshold_t1",
    "curve_bound",
    "deg_L1",
    "direct_sum_hn",
    "drift_check_l5",
    "drift_check_pp8",
    "ehk_from_s1_l1",
    "embedding_slope_bound",
    "estimate_ehk",
    "frobenius_pullback_strong",
    "hk_colength",
    "instability_degree",
    "is_subfiltration",
    "lemma1_bound",
    "monsky_prime_check",
    "monsky_w_generate",
    "prime_search",
    "raynaud_generate",
    "s1_l1_from_ehk",
    "shepherd_barron_bound",
    "slope_gap_check",
    "sun_conjecture_bound",
    "theorem_t5_bound",
    "validate_profile",
]
