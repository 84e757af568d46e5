import json
import random
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
import sympy
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from hnlab.curves import monsky_ehk
from hnlab.errors import BudgetExceeded, DataFormatError, InsufficientData, InvariantError, UsageError
from hnlab.oracle import (
    ColengthCache,
    HKFunctionTable,
    estimate_ehk,
    fit_summary,
    hk_colength,
    hk_table,
    rank_mod_p,
    trinomial,
)

x, y, z = sympy.symbols("x y z")


def groebner_colength(poly, p, q):
    """dim of k[x,y,z]/(h, x^q, y^q, z^q) by counting standard monomials."""
    h = sum(c * x**i * y**j * z**k for (i, j, k), c in poly.items())
    basis = sympy.groebner([h, x**q, y**q, z**q], x, y, z, modulus=p, order="grevlex")
    leads = [sympy.Poly(g, x, y, z).monoms(order="grevlex")[0] for g in basis.exprs]
    count = 0
    for mono in product(range(q), repeat=3):
        if not any(all(a >= b for a, b in zip(mono, lead)) for lead in leads):
            count += 1
    return count


def sympy_rank(matrix, p):
    rows = [[GF(p)(int(v)) for v in row] for row in matrix.tolist()]
    return DomainMatrix(rows, matrix.shape, GF(p)).rank()


class TestAnchors:
    def test_e_zero(self):
        assert hk_colength(4, 5, 0) == 1

    @pytest.mark.parametrize("p, e", [(5, 1), (5, 2), (3, 2), (2, 3)])
    def test_linear_form(self, p, e):
        assert hk_colength(None, p, e, {(1, 0, 0): 1}) == p ** (2 * e)

    def test_trinomials(self):
        assert trinomial(4, "fermat") == {(4, 0, 0): 1, (0, 4, 0): 1, (0, 0, 4): 1}
        assert trinomial(4, "cyclic") == {(3, 1, 0): 1, (0, 3, 1): 1, (1, 0, 3): 1}

    def test_rejects(self):
        with pytest.raises(UsageError):
            hk_colength(None, 5, 1, {(1, 0, 0): 1, (1, 1, 0): 1})
        with pytest.raises(UsageError):
            hk_colength(None, 5, 1, {(1, 0, 0): 5})
        with pytest.raises(UsageError):
            hk_colength(4, 5, 1, "klein")


class TestGroebnerCrossCheck:
    @pytest.mark.parametrize(
        "d, p, e, variant",
        [(4, 5, 1, "fermat"), (4, 3, 1, "fermat"), (4, 7, 1, "fermat"), (4, 11, 1, "cyclic"),
         (4, 3, 1, "cyclic"), (3, 2, 2, "fermat"), (4, 2, 2, "cyclic")],
    )
    def test_named(self, d, p, e, variant):
        assert hk_colength(d, p, e, variant) == groebner_colength(trinomial(d, variant), p, p**e)

    @pytest.mark.parametrize("seed", range(12))
    def test_random_forms(self, seed):
        rng = random.Random(seed)
        p = rng.choice([2, 3, 5])
        e = 2 if p == 2 else 1
        d = rng.randint(2, 4)
        monos = [m for m in product(range(d + 1), repeat=3) if sum(m) == d]
        poly = {m: rng.randint(1, p - 1) for m in rng.sample(monos, rng.randint(1, min(4, len(monos))))}
        assert hk_colength(d, p, e, poly) == groebner_colength(poly, p, p**e)


@pytest.mark.parametrize("seed", range(20))
def test_rank_mod_p_matches_sympy(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.choice([2, 3, 5, 7]))
    shape = tuple(int(v) for v in rng.integers(1, 9, size=2))
    matrix = rng.integers(0, p, size=shape)
    # force some dependence
    if shape[0] > 2:
        matrix[-1] = (matrix[0] + 2 * matrix[1]) % p
    assert rank_mod_p(matrix, p) == sympy_rank(matrix, p)


class TestFrozen:
    def test_fermat_mod_5(self):
        assert hk_colength(4, 5, 1) == 75
        assert hk_colength(4, 5, 2) == 1900

    def test_cyclic_mod_11(self):
        assert hk_colength(4, 11, 1, "cyclic") == 363

    def test_cyclic_mod_3(self):
        assert hk_table(4, 3, "cyclic", [3, 4]).entries == {3: 2268, 4: 20412}

    @pytest.mark.slow
    def test_fermat_mod_5_cube(self):
        assert hk_colength(4, 5, 3) == 47500


class TestFit:
    def test_synthetic(self):
        table = HKFunctionTable(5, {1: 3 * 25 + 1, 2: 3 * 625 + 1})
        fit = estimate_ehk(table)
        assert (fit.a, fit.b) == (3, 1)

    def test_uses_largest_pair(self):
        table = HKFunctionTable(5, {1: 75, 2: 1900, 3: 47500})
        fit = estimate_ehk(table)
        assert (fit.e1, fit.e2, fit.a, fit.b) == (2, 3, Fraction(76, 25), 0)

    def test_insufficient(self):
        with pytest.raises(InsufficientData):
            estimate_ehk(HKFunctionTable(5, {1: 75}))
        with pytest.raises(InsufficientData):
            estimate_ehk(HKFunctionTable(5, {1: 75, 3: 47500}))

    def test_cyclic_mod_3_stable_range(self):
        # deep enough that the fit reproduces the closed form
        fit = estimate_ehk(HKFunctionTable(3, {3: 2268, 4: 20412}))
        assert fit.a == Fraction(28, 9) == monsky_ehk(4, 3)

    def test_summary(self):
        summary = fit_summary(HKFunctionTable(5, {1: 75, 2: 1900}, 4, "fermat"), Fraction(76, 25))
        assert summary["a"] == "73/24"
        assert summary["a_minus_closed_form"] == "1/600"
        assert summary["deviations"] == {"1": "-1/1", "2": "0/1"}

    def test_table_invariants(self):
        with pytest.raises(InvariantError):
            HKFunctionTable(5, {1: 200})
        with pytest.raises(InvariantError):
            HKFunctionTable(5, {1: 75, 2: 75})

    def test_table_json(self):
        table = HKFunctionTable(5, {1: 75, 2: 1900}, 4, "fermat")
        assert HKFunctionTable.from_json(json.loads(json.dumps(table.to_json()))) == table
        with pytest.raises(DataFormatError):
            HKFunctionTable.from_json({"p": 5})


class TestCacheAndBudget:
    def test_budget(self):
        with pytest.raises(BudgetExceeded) as err:
            hk_colength(4, 5, 2, budget=10_000)
        assert err.value.size == 15_625

    def test_write_once(self, tmp_path):
        cache = ColengthCache(tmp_path)
        assert cache.get(4, 5, 1, "fermat") is None
        table = hk_table(4, 5, "fermat", [1], cache=cache)
        assert cache.get(4, 5, 1, "fermat") == 75 == table.entries[1]
        (path,) = tmp_path.glob("hk-*.json")
        before = path.read_bytes()
        cache.put(4, 5, 1, "fermat", 12345)
        assert path.read_bytes() == before
        assert not list(tmp_path.glob("*.tmp"))

    def test_cached_value_is_used(self, tmp_path):
        cache = ColengthCache(tmp_path)
        cache.put(4, 5, 2, "fermat", 1900)
        # budget too small to compute, so the value must come from disk
        assert hk_table(4, 5, "fermat", [2], budget=10, cache=cache).entries == {2: 1900}

    def test_mismatched_file(self, tmp_path):
        cache = ColengthCache(tmp_path)
        cache.put(4, 5, 1, "fermat", 75)
        (path,) = tmp_path.glob("hk-*.json")
        data = json.loads(path.read_text())
        data["d"] = 6
        path.write_text(json.dumps(data))
        with pytest.raises(DataFormatError):
            cache.get(4, 5, 1, "fermat")

    def test_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("HNLAB_CACHE", str(tmp_path))
        assert ColengthCache.from_env().directory == tmp_path
        assert ColengthCache.from_env("/elsewhere").directory.as_posix() == "/elsewhere"
        monkeypatch.delenv("HNLAB_CACHE")
        assert ColengthCache.from_env() is None

    def test_key_is_stable(self):
        assert ColengthCache.key(4, 5, 1, "fermat") == ColengthCache.key(4, 5, 1, "fermat")
        assert ColengthCache.key(4, 5, 1, "fermat") != ColengthCache.key(4, 5, 1, "cyclic")
