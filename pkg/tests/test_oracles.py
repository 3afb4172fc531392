import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvwitness.oracles import (
    OracleDomainError,
    oracle_agarwal_noon,
    oracle_agarwal_noon_lossy,
    oracle_cat_agarwal_moments,
    oracle_d124_tmsv,
    oracle_d149_cat,
    oracle_d149_lossy_imperfect,
    oracle_d1913_noon,
    oracle_d24_bounds,
    oracle_d24_lossy,
    oracle_d24_no_loss,
)
from cvwitness.states import mixed_cat
from cvwitness.fock import expectation

lam = st.floats(-0.95, 0.95)
tau = st.floats(0, 1)


def test_d124_tmsv():
    assert oracle_d124_tmsv(0.5) == pytest.approx(-1 / 3)
    assert oracle_d124_tmsv(0) == 0
    assert oracle_d124_tmsv(-0.5) == oracle_d124_tmsv(0.5)
    with pytest.raises(OracleDomainError):
        oracle_d124_tmsv(1.0)


def test_d24_lossy_examples():
    assert oracle_d24_lossy(0.6, 0.6) == pytest.approx(oracle_d124_tmsv(0.6))
    assert oracle_d24_lossy(0.5, 0.7) == pytest.approx(oracle_d24_no_loss(0.5, 0.7))
    t = 0.35
    assert oracle_d24_lossy(0.5, 0.7, t, t, t, t) == pytest.approx(t**2 * oracle_d24_no_loss(0.5, 0.7))
    assert oracle_d24_lossy(0.0, 0.7, 0.3, 0.4, 0.5, 0.6) == 0
    with pytest.raises(OracleDomainError):
        oracle_d24_lossy(0.5, 0.5, 1.1)


@given(lam, lam, tau, tau, tau, tau)
def test_d24_lossy_swap_symmetry(l1, l2, ta1, ta2, tb1, tb2):
    a = oracle_d24_lossy(l1, l2, ta1, ta2, tb1, tb2)
    b = oracle_d24_lossy(l2, l1, ta2, ta1, tb2, tb1)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_d24_bounds_examples():
    base = oracle_d24_no_loss(0.6, 0.4)
    lo, hi = oracle_d24_bounds(0.6, 0.4)
    assert lo == pytest.approx(base) and hi == pytest.approx(base)
    # ta1 tb2 = ta2 tb1 = 0.4 collapses both bounds to 0.4 * base
    lo, hi = oracle_d24_bounds(0.6, 0.4, 0.8, 0.5, 0.8, 0.5)
    assert lo == pytest.approx(0.4 * base) and hi == pytest.approx(0.4 * base)
    assert oracle_d24_lossy(0.6, 0.4, 0.8, 0.5, 0.8, 0.5) == pytest.approx(0.4 * base)
    with pytest.raises(OracleDomainError):
        oracle_d24_bounds(0.5, -0.5)


def test_d149_cat():
    assert oracle_d149_cat(1, 1, 0) == pytest.approx(-math.cosh(2) / math.sinh(2) ** 3, rel=1e-14)
    assert oracle_d149_cat(1, 1, 0) == pytest.approx(-0.0788585631876759, abs=1e-12)
    assert oracle_d149_cat(0, 1, 0.3) == 0
    assert oracle_d149_cat(1, 1, 1) == 0
    assert abs(oracle_d149_cat(1, 1, 1 - 1e-12)) < 1e-10


@given(st.floats(0.05, 2), st.floats(0.05, 2), st.floats(0, 0.99))
def test_d149_cat_negative(a, b, z):
    assert oracle_d149_cat(a, b, z) < 0


def test_d149_lossy_imperfect_reduction():
    ref = oracle_d149_cat(1, 1, 0)
    assert oracle_d149_lossy_imperfect([1] * 3, [1] * 3, [0] * 3) == pytest.approx(ref, abs=1e-12)
    for a, z in ((0.5, 0.0), (0.8, 0.5), (1.3, 0.9), (0.3j, 0.2)):
        got = oracle_d149_lossy_imperfect([a] * 3, [a] * 3, [z] * 3)
        assert got == pytest.approx(oracle_d149_cat(a, a, z), abs=1e-12)
    zero = oracle_d149_lossy_imperfect([1] * 3, [1] * 3, [0] * 3, (0, 0, 0), (0, 0, 0))
    assert zero == 0


def test_d1913_noon():
    h = 1 / math.sqrt(2)
    assert oracle_d1913_noon(1, h, h) == pytest.approx(-0.5)
    assert oracle_d1913_noon(2, h, h) == pytest.approx(-1.0)
    assert oracle_d1913_noon(3, h, h) == 0
    assert oracle_d1913_noon(1, 1, 0) == 0
    with pytest.raises(OracleDomainError):
        oracle_d1913_noon(1, 0.5, 0.5)


def test_agarwal_noon():
    h = 1 / math.sqrt(2)
    assert oracle_agarwal_noon(2, h, h) == pytest.approx(-4)
    assert oracle_agarwal_noon(1, h, h) == pytest.approx(-2, rel=1e-12)
    t = 0.7
    assert oracle_agarwal_noon_lossy(2, h, h, t, t) == pytest.approx(-4 * t**4)
    a, b = 0.6, 0.8j
    assert oracle_agarwal_noon(1, a, b) == pytest.approx(-4 * 2 * (a * 0.8) ** 2)
    assert oracle_agarwal_noon(3, a, b) == 0


def test_cat_agarwal_moments():
    m = oracle_cat_agarwal_moments(0.9, 0.9, 0.4)
    assert m["a2bd2"] == pytest.approx(0.9**4)
    zero = oracle_cat_agarwal_moments(0, 0.5, 0.3)
    for key in ("ada", "adb", "a2bd2", "ad2b2", "adabdb"):
        assert zero[key] == 0


def test_cat_agarwal_moments_against_simulation():
    a, b, z = 0.7, 0.5 - 0.3j, 0.35
    s = mixed_cat(a, b, z, 15)
    m = oracle_cat_agarwal_moments(a, b, z)
    words = {
        "ada": "a1+ a1",
        "bdb": "b1+ b1",
        "adb": "a1+ b1",
        "a2bd2": "a1^2 b1+^2",
        "ad2b2": "a1+^2 b1^2",
        "adabdb": "a1+ a1 b1+ b1",
    }
    for key, w in words.items():
        assert expectation(w, s) == pytest.approx(m[key], abs=1e-9)
