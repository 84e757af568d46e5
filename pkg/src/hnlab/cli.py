"""Command-line front end.

Exit codes: 0 ok, 2 invariant violation, 3 a bound failed, 64 usage,
65 unreadable data.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Callable, Mapping, Optional, Sequence

from . import bounds as B
from . import curves as C
from .errors import DataFormatError, HNLabError, UsageError
from .exact import parse_fraction, primes_upto
from .oracle import DEFAULT_BUDGET, ColengthCache, estimate_ehk, hk_table
from .profile import (
    DescentMarking,
    FrobeniusData,
    HNProfile,
    almost_descent_marking,
    instability_degree,
    pieces_from_json,
    slope_gap_check,
    validate_profile,
)
from .report import FORMATS, render

EXIT_OK, EXIT_INVARIANT, EXIT_BOUND_FAILED, EXIT_USAGE, EXIT_DATA = 0, 2, 3, 64, 65

BOUND_NAMES = (
    "lemma1", "sun", "sb", "curve", "t5", "cc1", "drift-l5", "drift-pp8",
    "threshold-t1", "threshold-behrend", "embedding",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit 2, which means "invariant" here
        raise UsageError(f"{self.prog}: {message}")


def _fraction_arg(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except DataFormatError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS
    parser.add_argument("--format", choices=FORMATS, default=default if suppress else "table")
    parser.add_argument("--cache", default=default if suppress else None,
                        help="HK colength cache directory (overrides HNLAB_CACHE)")
    parser.add_argument("--budget", type=int, default=default if suppress else DEFAULT_BUDGET,
                        help="largest q^3 the oracle may build")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hnlab", description="Exact HN slope workbench for Frobenius pullbacks.")
    _global_flags(parser, suppress=False)
    common = _Parser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    prof = sub.add_parser("profile", help="profile utilities", parents=[common])
    prof_sub = prof.add_subparsers(dest="profile_command", required=True, parser_class=_Parser)
    check = prof_sub.add_parser("check", help="validate a profile JSON file", parents=[common])
    check.add_argument("path")

    bnd = sub.add_parser("bounds", help="evaluate an inequality or threshold", parents=[common])
    bnd.add_argument("path", nargs="?", help="JSON case file (object, list, or {'cases': [...]})")
    bnd.add_argument("--bound", required=True, choices=BOUND_NAMES)
    bnd.add_argument("--mu-max-omega", type=_fraction_arg)
    bnd.add_argument("--l-max-omega", type=_fraction_arg, help="L_max(Omega) for t5; defaults to mu_max")
    bnd.add_argument("--mu-omega", type=_fraction_arg)
    bnd.add_argument("--deg-O2", dest="deg_O2", type=_fraction_arg)
    bnd.add_argument("--dim", type=int, default=None, help="dim X (default 1)")
    bnd.add_argument("--genus", type=int)
    bnd.add_argument("--p", type=int)
    bnd.add_argument("--rank", type=int)
    bnd.add_argument("--s", type=int, help="number of descending members")
    bnd.add_argument("--l", type=int, help="t5 only: number of proper members")
    bnd.add_argument("--base-I", dest="base_I", type=_fraction_arg)
    bnd.add_argument("--m", type=int, default=None)
    bnd.add_argument("--rank-M1", dest="rank_M1", type=int)
    bnd.add_argument("--rank-g", dest="rank_g", type=int)
    bnd.add_argument("--dim-adjoint", dest="dim_adjoint", type=int)
    bnd.add_argument("--coxeter-h", dest="coxeter_h", type=int)

    crv = sub.add_parser("curve", help="plane trinomial curve data", parents=[common])
    crv.add_argument("--d", type=int, required=True)
    crv.add_argument("--p", type=int)
    crv.add_argument("--variant", choices=C.VARIANTS, default="fermat")
    crv.add_argument("--oracle", action="store_true", help="append brute-force HK colengths")
    crv.add_argument("--e-list", type=_int_list, default=[1, 2])
    crv.add_argument("--sweep-primes", type=int, metavar="N")
    crv.add_argument("--force", action="store_true", help="skip the congruence precondition")

    ex = sub.add_parser("example", help="reproduce a counterexample family", parents=[common])
    ex_sub = ex.add_subparsers(dest="example", required=True, parser_class=_Parser)
    ray = ex_sub.add_parser("raynaud", parents=[common])
    ray.add_argument("--p", type=int, required=True)
    ray.add_argument("--k", type=int, default=1)
    mw = ex_sub.add_parser("monsky-w", parents=[common])
    mw.add_argument("--d", type=int, required=True)
    mw.add_argument("--p", type=int, required=True)
    mw.add_argument("--delta", type=int, default=1)

    tw = sub.add_parser("tower", help="analyse a Frobenius tower JSON file", parents=[common])
    tw.add_argument("path")
    tw.add_argument("--mu-max-omega", type=_fraction_arg)
    tw.add_argument("--l-max-omega", type=_fraction_arg)
    tw.add_argument("--dim", type=int, default=1)
    tw.add_argument("--l", type=int)
    tw.add_argument("--s", type=int)
    return parser


# -- input helpers ---------------------------------------------------------------


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def _profile(data: Any, what: str) -> HNProfile:
    if data is None:
        raise UsageError(f"case is missing {what!r}")
    return HNProfile.from_json(data)


def load_tower(data: Mapping) -> B.TowerSpec:
    """{"base": profile, "p": int, "levels": [{"pieces": [...], "marking": {...}}],
    "strongly_semistable_at": int | null}"""
    if not isinstance(data, Mapping):
        raise DataFormatError("tower must be a JSON object")
    try:
        base = HNProfile.from_json(data["base"])
        p = int(data["p"])
        levels = []
        for item in data.get("levels", []):
            levels.append((HNProfile.from_json(item), DescentMarking.from_json(item.get("marking"))))
        stable = data.get("strongly_semistable_at")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, HNLabError):
            raise
        raise DataFormatError(f"bad tower: {exc!r}") from exc
    return B.TowerSpec(base, FrobeniusData(p, len(levels)), tuple(levels), stable)


def _cases(path: Optional[str]) -> list[dict]:
    if path is None:
        return [{}]
    data = _load_json(path)
    if isinstance(data, Mapping) and "cases" in data:
        data = data["cases"]
    if isinstance(data, Mapping):
        data = [data]
    if not isinstance(data, list) or not all(isinstance(c, Mapping) for c in data):
        raise DataFormatError("case file must hold an object or a list of objects")
    return [dict(c) for c in data]


class _Case:
    """Case-file values layered over command-line flags."""

    def __init__(self, case: Mapping, flags: Mapping) -> None:
        self.case, self.flags = case, flags

    def get(self, key: str, default=None):
        if key in self.case and self.case[key] is not None:
            return self.case[key]
        value = self.flags.get(key)
        return default if value is None else value

    def need(self, key: str, flag: Optional[str] = None):
        value = self.get(key)
        if value is None:
            raise UsageError(f"missing --{flag or key.replace('_', '-')}")
        return value

    def fraction(self, key: str, required: bool = True) -> Optional[Fraction]:
        value = self.need(key) if required else self.get(key)
        if value is None or isinstance(value, Fraction):
            return value
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise DataFormatError(f"{key} must be a fraction string")
        return parse_fraction(str(value))

    def integer(self, key: str, required: bool = True) -> Optional[int]:
        value = self.need(key) if required else self.get(key)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise DataFormatError(f"{key} must be an integer")
        return value


def _geometry(c: _Case, need_mu: bool = True) -> B.GeometryContext:
    mu = c.fraction("mu_max_omega", required=need_mu)
    omega = c.get("omega_profile")
    try:
        return B.GeometryContext(
            dim_n=c.integer("dim", required=False) or 1,
            mu_max_omega=mu if mu is not None else Fraction(0),
            genus=c.integer("genus", required=False),
            omega_profile=HNProfile.from_json(omega) if omega is not None else None,
            deg_O2=c.fraction("deg_O2", required=False),
            mu_omega=c.fraction("mu_omega", required=False),
            l_max_omega=c.fraction("l_max_omega", required=False),
        )
    except HNLabError as exc:
        if exc.exit_code == EXIT_INVARIANT:
            raise UsageError(f"inconsistent geometry flags: {exc}") from exc
        raise


def _base_data(c: _Case) -> tuple[Fraction, int]:
    base = c.get("base_profile")
    if base is not None:
        profile = _profile(base, "base_profile")
        base_I = instability_degree(profile)
        rank = c.integer("rank", required=False) or profile.total_rank
    else:
        base_I = c.fraction("base_I")
        rank = c.integer("rank")
    return base_I, rank


def _marking(c: _Case, almost: bool = False):
    if c.get("marking") is not None:
        return DescentMarking.from_json(c.get("marking"), almost=almost)
    return c.integer("s", required=False) or 0


def _frob(c: _Case) -> FrobeniusData:
    return FrobeniusData(c.integer("p"), c.integer("iterations", required=False) or 1)


def _eval_bound(name: str, c: _Case) -> list[B.BoundReport]:
    if name in ("lemma1", "sun"):
        geom = _geometry(c)
        fe = _profile(c.get("fe_profile"), "fe_profile")
        base_I, rank = _base_data(c)
        fn = B.lemma1_bound if name == "lemma1" else B.sun_conjecture_bound
        return [fn(fe, _marking(c), geom, FrobeniusData(c.integer("p")), base_I, rank)]
    if name == "sb":
        geom = _geometry(c)
        fe = _profile(c.get("fe_profile"), "fe_profile")
        return [B.shepherd_barron_bound(fe, geom, c.integer("rank"), c.integer("p", required=False))]
    if name == "curve":
        fe = _profile(c.get("fe_profile"), "fe_profile")
        base_I = c.fraction("base_I", required=False)
        if base_I is None:
            base_I, _ = _base_data(c)
        return [B.curve_bound(fe, _marking(c), c.integer("genus"), c.integer("p"), base_I)]
    if name == "t5":
        geom = _geometry(c)
        tower = load_tower(c.need("tower"))
        return B.theorem_t5_bound(tower, geom, c.integer("l"), c.integer("s"))
    if name == "cc1":
        tower = load_tower(c.need("tower"))
        geom = _geometry(c) if c.get("mu_max_omega") is not None else None
        return B.cc1_check(tower, geom)
    if name in ("drift-l5", "drift-pp8"):
        geom = _geometry(c)
        level = _profile(c.get("level_profile"), "level_profile")
        base = _profile(c.get("base_profile"), "base_profile")
        frob = _frob(c)
        if c.get("marking") is not None:
            marking = DescentMarking.from_json(c.get("marking"), almost=True)
        else:
            marking = almost_descent_marking(level, base)
        r = c.integer("rank", required=False)
        if name == "drift-l5":
            rows = B.drift_check_l5(level, marking, base, frob, geom, r)
        else:
            rows = B.drift_check_pp8(level, marking, base, frob, geom, c.integer("m"), r)
        return B.drift_reports(name, rows)
    if name == "threshold-t1":
        geom = _geometry(c)
        rank = c.integer("rank", required=False)
        if rank is None:
            rank = _profile(c.get("base_profile"), "base_profile").total_rank
        return [B.threshold_report("threshold-t1", B.char_threshold_t1(rank, geom.dim_n, geom.mu_max_omega), c.integer("p"))]
    if name == "threshold-behrend":
        mu = c.fraction("mu_max_omega")
        inp = B.BehrendInput(
            c.integer("rank_g"), c.integer("dim_adjoint"), c.integer("coxeter_h"),
            c.integer("dim", required=False) or 1, mu,
        )
        return [B.threshold_report("threshold-behrend", B.char_threshold_behrend(inp), c.integer("p"))]
    if name == "embedding":
        geom = _geometry(c)
        return [B.embedding_report(geom, c.integer("rank_M1", required=False))]
    raise UsageError(f"unknown bound {name!r}")


def _bound_exit(reports: Sequence[B.BoundReport]) -> int:
    failed = any(not r.holds for r in reports if not r.informational)
    return EXIT_BOUND_FAILED if failed else EXIT_OK


# -- commands --------------------------------------------------------------------


def cmd_profile_check(args) -> tuple[list[dict], int]:
    data = _load_json(args.path)
    pieces = pieces_from_json(data)
    profile = validate_profile(pieces)
    rows = [{
        "section": "profile",
        "valid": True,
        "pieces": len(profile),
        "total_rank": profile.total_rank,
        "total_degree": profile.total_degree,
        "mu_max": profile.mu_max,
        "mu_min": profile.mu_min,
        "instability": instability_degree(profile),
    }]
    if all(pc.degree.denominator == 1 for pc in profile.pieces):
        for g in slope_gap_check(profile):
            rows.append({
                "section": "gaps", "pair": g.index, "gap": g.gap,
                "1/(r_i r_i+1)": g.inverse_rank_product, "4/(r_i+r_i+1)^2": g.pair_bound,
                "4/r^2": g.total_bound, "ok": g.ok,
            })
    return rows, EXIT_OK


def cmd_bounds(args) -> tuple[list[dict], int]:
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "path", "bound", "format", "cache", "budget")}
    reports: list[B.BoundReport] = []
    for case in _cases(args.path):
        reports.extend(_eval_bound(args.bound, _Case(case, flags)))
    return [r.to_json() for r in reports], _bound_exit(reports)


def _instance_rows(inst: C.TrinomialInstance, check: C.CongruenceResult) -> dict:
    dl = C.deg_L1(inst.d, inst.p, inst.s1, inst.l1)
    inverted = C.s1_l1_from_ehk(inst.d, inst.p, inst.e_hk)
    curve = C.trinomial_curve_report(inst)
    return {
        "section": "instance",
        "d": inst.d,
        "p": inst.p,
        "variant": inst.variant,
        "modulus": check.modulus,
        "residue": check.residue,
        "congruence": check.holds,
        "genus": inst.genus,
        "e_hk": inst.e_hk,
        "s1": inverted.s1,
        "l1": inverted.l1,
        "deg_L1": dl.deg_L1,
        "I": dl.instability,
        "2g-2": 2 * inst.genus - 2,
        "curve_bound_slack": curve.slack,
    }


def cmd_curve(args) -> tuple[list[dict], int]:
    if args.p is None and args.sweep_primes is None:
        raise UsageError("curve needs --p or --sweep-primes")
    rows: list[dict] = []
    if args.p is not None:
        check = C.monsky_prime_check(args.d, args.p, args.variant)
        inst = C.trinomial_instance(args.d, args.p, args.variant, force=args.force)
        row = _instance_rows(inst, check)
        if not check.holds:
            row["warning"] = "congruence fails; closed form not justified"
        rows.append(row)
        if args.oracle:
            cache = ColengthCache.from_env(args.cache)
            table = hk_table(args.d, args.p, args.variant, args.e_list, args.budget, cache)
            deviations = table.deviations(inst.e_hk)
            for e, value in table.entries.items():
                rows.append({
                    "section": "oracle", "e": e, "q": table.q(e), "colength": value,
                    "e_hk*q^2": inst.e_hk * table.q(e) ** 2, "deviation": deviations[e],
                })
            fit = estimate_ehk(table)
            dev_values = [deviations[fit.e1], deviations[fit.e2]]
            rows.append({
                "section": "fit", "e1": fit.e1, "e2": fit.e2, "a": fit.a, "b": fit.b,
                "closed_form": inst.e_hk, "a-closed_form": fit.a - inst.e_hk,
                "deviation_constant": dev_values[0] == dev_values[1],
            })
    if args.sweep_primes is not None:
        for p in primes_upto(args.sweep_primes):
            check = C.monsky_prime_check(args.d, p, args.variant)
            row = {"section": "sweep", "p": p, "modulus": check.modulus, "residue": check.residue,
                   "congruence": check.holds, "e_hk": None, "warning": None}
            if check.holds:
                row["e_hk"] = C.monsky_ehk(args.d, p)
            else:
                row["warning"] = "congruence fails"
            rows.append(row)
    return rows, EXIT_OK


def _example_raynaud(args) -> list[dict]:
    inst = C.raynaud_generate(args.p, args.k)
    return [
        {"section": "profiles", "name": "V", "profile": inst.V, "I": instability_degree(inst.V)},
        {"section": "profiles", "name": "F*V", "profile": inst.FV, "I": instability_degree(inst.FV)},
        {"section": "verdict", "p": inst.p, "k": inst.k, "genus": inst.genus,
         "refines": inst.refinement.holds,
         "witness": list(inst.refinement.witness) if inst.refinement.witness else None,
         "threshold_t1": inst.threshold.value, "threshold_met": inst.threshold_ok},
        {"section": "lemma1", **inst.lemma1.to_json()},
    ]


def _example_monsky_w(args) -> list[dict]:
    inst = C.monsky_w_generate(args.d, args.p, args.delta)
    rows = [
        {"section": "profiles", "name": "W", "pieces": list(inst.W.pieces)},
        {"section": "profiles", "name": "F*W as stated", "pieces": list(inst.fw_pieces)},
        {"section": "verdict", "d": inst.d, "p": inst.p, "delta": inst.delta,
         "refines": inst.refinement.holds,
         "witness": list(inst.refinement.witness) if inst.refinement.witness else None,
         "stated_slopes_decrease": inst.slopes_decrease},
    ]
    for w in inst.warnings:
        rows.append({"section": "warning", "message": w})
    return rows


def cmd_example(args) -> tuple[list[dict], int]:
    if args.example == "raynaud":
        return _example_raynaud(args), EXIT_OK
    return _example_monsky_w(args), EXIT_OK


def cmd_tower(args) -> tuple[list[dict], int]:
    tower = load_tower(_load_json(args.path))
    rows: list[dict] = []
    for k in range(len(tower.levels) + 1):
        profile = tower.profile_at(k)
        rows.append({
            "section": "levels", "k": k, "profile": profile, "I": instability_degree(profile),
            "normalized_slopes": tower.normalized_slopes(k), "ranks": tower.normalized_ranks(k),
        })
    bad = tower.refinement_violation()
    rows.append({"section": "refinement", "refines": bad is None,
                 "level": bad[0] if bad else None, "witness": list(bad[1]) if bad else None})
    if tower.strongly_semistable_at is not None:
        rows.append({"section": "limits", "L_max": tower.l_max, "L_min": tower.l_min,
                     "stable_at": tower.strongly_semistable_at})
    geom = None
    if args.mu_max_omega is not None:
        geom = B.GeometryContext(args.dim, args.mu_max_omega, l_max_omega=args.l_max_omega)
    reports: list[B.BoundReport] = []
    if bad is None:
        reports.extend(B.cc1_check(tower, geom))
    if geom is not None and args.l is not None and args.s is not None:
        reports.extend(B.theorem_t5_bound(tower, geom, args.l, args.s))
    rows.extend({"section": "reports", **r.to_json()} for r in reports)
    return rows, _bound_exit(reports)


COMMANDS: dict[str, Callable] = {
    "profile": cmd_profile_check,
    "bounds": cmd_bounds,
    "curve": cmd_curve,
    "example": cmd_example,
    "tower": cmd_tower,
}


def run(argv: Optional[Sequence[str]] = None) -> tuple[str, int]:
    """Execute one invocation and return (rendered output, exit code)."""
    args = build_parser().parse_args(argv)
    rows, code = COMMANDS[args.command](args)
    return render(rows, args.format), code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        text, code = run(argv)
    except HNLabError as exc:
        print(f"hnlab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
