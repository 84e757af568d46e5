"""Brute-force Hilbert-Kunz function of a plane curve over a prime field.

    HK(q) = dim_k k[x,y,z] / (h, x^q, y^q, z^q)
          = q^3 - rank(h * - : A -> A),   A = k[x,y,z] / (x^q, y^q, z^q)

The multiplication matrix is assembled on the monomial basis of ``A`` and
split into the connected components of its bipartite support graph; each
component is an independent dense block whose rank is found by exact
Gaussian elimination modulo p.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import BudgetExceeded, DataFormatError, InsufficientData, InvariantError, UsageError
from .exact import fraction_str, require_prime

DEFAULT_BUDGET = 4_000_000
CACHE_ENV = "HNLAB_CACHE"

Monomial = tuple[int, int, int]
Polynomial = Mapping[Monomial, int]
HSpec = Union[str, Polynomial]


def trinomial(d: int, variant: str) -> dict[Monomial, int]:
    if variant == "fermat":
        return {(d, 0, 0): 1, (0, d, 0): 1, (0, 0, d): 1}
    if variant == "cyclic":
        return {(d - 1, 1, 0): 1, (0, d - 1, 1): 1, (1, 0, d - 1): 1}
    raise UsageError(f"unknown variant {variant!r}")


def _polynomial(d: Optional[int], h_spec: HSpec, p: int) -> dict[Monomial, int]:
    if isinstance(h_spec, str):
        if d is None:
            raise UsageError("named polynomial needs a degree")
        poly = trinomial(d, h_spec)
    else:
        poly = {tuple(int(x) for x in m): int(c) for m, c in dict(h_spec).items()}
    poly = {m: c % p for m, c in poly.items() if c % p}
    if not poly:
        raise UsageError("polynomial vanishes modulo p")
    degrees = {sum(m) for m in poly}
    if len(degrees) != 1:
        raise UsageError("polynomial must be homogeneous")
    if any(len(m) != 3 or min(m) < 0 for m in poly):
        raise UsageError("monomials need three non-negative exponents")
    if d is not None and degrees != {d}:
        raise UsageError(f"polynomial has degree {degrees.pop()}, expected {d}")
    return poly


def rank_mod_p(matrix: np.ndarray, p: int) -> int:
    """Row-reduce a copy of ``matrix`` over F_p and return its rank."""
    m = np.array(matrix, dtype=np.int64) % p
    rows, cols = m.shape
    if rows > cols:
        m = m.T.copy()
        rows, cols = cols, rows
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(m[rank:, c])
        if nz.size == 0:
            continue
        pivot = rank + nz[0]
        if pivot != rank:
            m[[rank, pivot]] = m[[pivot, rank]]
        m[rank] = (m[rank] * pow(int(m[rank, c]), -1, p)) % p
        below = rank + 1 + np.flatnonzero(m[rank + 1 :, c])
        if below.size:
            m[below] = (m[below] - np.outer(m[below, c], m[rank])) % p
        rank += 1
    return rank


def _multiplication_support(poly: Mapping[Monomial, int], q: int):
    """Entries (source, target, coefficient) of h * - on the monomial basis."""
    a, b, c = (g.ravel() for g in np.meshgrid(np.arange(q), np.arange(q), np.arange(q), indexing="ij"))
    rows, cols, vals = [], [], []
    for (dx, dy, dz), coeff in sorted(poly.items()):
        keep = np.flatnonzero((a + dx < q) & (b + dy < q) & (c + dz < q))
        rows.append(keep)
        cols.append(((a[keep] + dx) * q + (b[keep] + dy)) * q + (c[keep] + dz))
        vals.append(np.full(keep.size, coeff, dtype=np.int64))
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)


def multiplication_rank(poly: Mapping[Monomial, int], q: int, p: int) -> int:
    n = q**3
    rows, cols, vals = _multiplication_support(poly, q)
    if rows.size == 0:
        return 0
    graph = coo_matrix((np.ones(rows.size, dtype=np.int8), (rows, cols + n)), shape=(2 * n, 2 * n))
    _, labels = connected_components(graph, directed=False)
    entry_label = labels[rows]
    order = np.argsort(entry_label, kind="stable")
    splits = np.flatnonzero(np.diff(entry_label[order])) + 1
    total = 0
    seen: dict[tuple, int] = {}
    for block in np.split(order, splits):
        if block.size == 1:
            total += 1
            continue
        r_ids, r_pos = np.unique(rows[block], return_inverse=True)
        c_ids, c_pos = np.unique(cols[block], return_inverse=True)
        if r_ids.size == 1 or c_ids.size == 1:
            total += 1
            continue
        dense = np.zeros((r_ids.size, c_ids.size), dtype=np.int64)
        np.add.at(dense, (r_pos, c_pos), vals[block])
        # Frobenius-power boxes repeat the same block many times
        key = (dense.shape, hashlib.sha256(dense.tobytes()).digest())
        if key not in seen:
            seen[key] = rank_mod_p(dense, p)
        total += seen[key]
    return total


def hk_colength(
    d: Optional[int],
    p: int,
    e: int,
    h_spec: HSpec = "fermat",
    budget: int = DEFAULT_BUDGET,
) -> int:
    """dim_k k[x,y,z]/(h, x^q, y^q, z^q) for q = p^e over F_p.

    ``h_spec`` is ``"fermat"``, ``"cyclic"`` or an explicit polynomial
    ``{(i, j, k): coefficient}``.
    """
    require_prime(p)
    if e < 0:
        raise UsageError(f"e must be non-negative, got {e}")
    poly = _polynomial(d, h_spec, p)
    q = p**e
    size = q**3
    if size > budget:
        raise BudgetExceeded(size, budget)
    return size - multiplication_rank(poly, q, p)


@dataclass(frozen=True)
class HKFunctionTable:
    p: int
    entries: Mapping[int, int]
    d: Optional[int] = None
    variant: Optional[str] = None

    def __post_init__(self) -> None:
        items = sorted((int(e), int(v)) for e, v in dict(self.entries).items())
        object.__setattr__(self, "entries", dict(items))
        for e, value in items:
            if not 0 <= value <= self.p ** (3 * e):
                raise InvariantError(f"colength {value} at e={e} outside 0..q^3")
        for (e1, v1), (e2, v2) in zip(items, items[1:]):
            if e2 == e1 + 1 and not v2 > v1:
                raise InvariantError(f"colength must increase in e: HK(e={e1})={v1}, HK(e={e2})={v2}")

    def q(self, e: int) -> int:
        return self.p**e

    def deviations(self, e_hk: Fraction) -> dict[int, Fraction]:
        """HK(q) - e_hk q^2 for every entry."""
        return {e: v - e_hk * self.q(e) ** 2 for e, v in self.entries.items()}

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "variant": self.variant,
            "entries": {str(e): v for e, v in self.entries.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "HKFunctionTable":
        try:
            return cls(
                p=int(data["p"]),
                entries={int(e): int(v) for e, v in data["entries"].items()},
                d=data.get("d"),
                variant=data.get("variant"),
            )
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise DataFormatError(f"bad HK table: {exc}") from exc


@dataclass(frozen=True)
class HKFit:
    """HK(q) = a q^2 + b through two consecutive Frobenius powers."""

    a: Fraction
    b: Fraction
    e1: int
    e2: int


def estimate_ehk(table: HKFunctionTable, p: Optional[int] = None) -> HKFit:
    """Two-point fit on the two largest consecutive exponents in ``table``."""
    p = table.p if p is None else p
    exps = sorted(table.entries)
    pairs = [(e1, e2) for e1, e2 in zip(exps, exps[1:]) if e2 == e1 + 1]
    if not pairs:
        raise InsufficientData("need colengths at two consecutive exponents")
    e1, e2 = pairs[-1]
    q1, q2 = p**e1, p**e2
    h1, h2 = table.entries[e1], table.entries[e2]
    a = Fraction(h2 - h1, q2 * q2 - q1 * q1)
    return HKFit(a, h1 - a * q1 * q1, e1, e2)


# -- cache ------------------------------------------------------------------------


class ColengthCache:
    """Write-once JSON files keyed by (d, p, e, variant)."""

    def __init__(self, directory: Union[str, os.PathLike]) -> None:
        self.directory = Path(directory)

    @classmethod
    def from_env(cls, override: Optional[str] = None) -> Optional["ColengthCache"]:
        path = override or os.environ.get(CACHE_ENV)
        return cls(path) if path else None

    @staticmethod
    def key(d: int, p: int, e: int, variant: str) -> str:
        canonical = json.dumps({"d": d, "e": e, "p": p, "variant": variant}, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()[:32]

    def _path(self, d, p, e, variant) -> Path:
        return self.directory / f"hk-{self.key(d, p, e, variant)}.json"

    def get(self, d: int, p: int, e: int, variant: str) -> Optional[int]:
        path = self._path(d, p, e, variant)
        if not path.exists():
            return None
        table = HKFunctionTable.from_json(json.loads(path.read_text()))
        if (table.d, table.p, table.variant) != (d, p, variant) or e not in table.entries:
            raise DataFormatError(f"cache file {path} does not match its key")
        return table.entries[e]

    def put(self, d: int, p: int, e: int, variant: str, value: int) -> None:
        path = self._path(d, p, e, variant)
        if path.exists():
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        body = json.dumps(HKFunctionTable(p, {e: value}, d, variant).to_json(), indent=2) + "\n"
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(body)
            try:
                os.link(tmp, path)
            except FileExistsError:
                pass
        finally:
            os.unlink(tmp)


def hk_table(
    d: int,
    p: int,
    variant: str,
    exponents,
    budget: int = DEFAULT_BUDGET,
    cache: Optional[ColengthCache] = None,
) -> HKFunctionTable:
    entries = {}
    for e in exponents:
        value = cache.get(d, p, e, variant) if cache else None
        if value is None:
            value = hk_colength(d, p, e, variant, budget)
            if cache:
                cache.put(d, p, e, variant, value)
        entries[e] = value
    return HKFunctionTable(p, entries, d, variant)


def fit_summary(table: HKFunctionTable, e_hk: Fraction) -> dict:
    fit = estimate_ehk(table)
    return {
        "a": fraction_str(fit.a),
        "b": fraction_str(fit.b),
        "e_pair": [fit.e1, fit.e2],
        "closed_form": fraction_str(e_hk),
        "a_minus_closed_form": fraction_str(fit.a - e_hk),
        "deviations": {str(e): fraction_str(v) for e, v in table.deviations(e_hk).items()},
    }
