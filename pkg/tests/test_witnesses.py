import math

import numpy as np
import pytest

from cvwitness.fock import tensor
from cvwitness.oracles import (
    oracle_agarwal_noon,
    oracle_d124_tmsv,
    oracle_d149_cat,
    oracle_d1913_noon,
    oracle_d24_lossy,
    oracle_d24_no_loss,
    oracle_d24_squeezed_products,
)
from cvwitness.states import coherent_product, displace, mixed_cat, noon, squeezed, tmsv, vacuum
from cvwitness.witnesses import (
    D124,
    DeterminantSpec,
    NumericalInconsistencyError,
    OptimizationUndefinedError,
    agarwal_d1913,
    agarwal_spin_form,
    d124_covariance_form,
    det_witness,
    duan,
    duan_optimized,
    expand_multicopy,
    lossy_moment,
    mean_field_reduction_check,
    multicopy_expectation,
    multicopy_expectation_tensor,
    normal_order,
)
from cvwitness.fock import word

H = 1 / math.sqrt(2)


def test_spec_validation():
    assert D124.size == 3
    with pytest.raises(ValueError):
        DeterminantSpec("bad", (("1", "a1"),))
    with pytest.raises(ValueError):
        DeterminantSpec("bad", (("a2",),))


def test_det_examples():
    assert det_witness("d124", tmsv(0.5, 60)) == pytest.approx(-1 / 3, abs=1e-12)
    assert det_witness("d124", coherent_product((0.7, -0.4j), 25)) == pytest.approx(0, abs=1e-10)
    assert det_witness("d1913", noon(1, H, H)) == pytest.approx(-0.5, abs=1e-14)


def test_det_rejects_wrong_modes():
    with pytest.raises(ValueError):
        det_witness("d124", vacuum(1, 3))


def test_covariance_form():
    s = tmsv(0.5, 60)
    assert d124_covariance_form(s) == pytest.approx(det_witness("d124", s), abs=1e-9)
    assert d124_covariance_form(vacuum(2, 3, ("a1", "b1"))) == 0
    assert d124_covariance_form(coherent_product((0.5, 0.3), 25)) == pytest.approx(0, abs=1e-12)


def test_duan():
    vac = vacuum(2, 3, ("a1", "b1"))
    assert duan(vac, 1.0) == pytest.approx(0, abs=1e-14)
    with pytest.raises(OptimizationUndefinedError):
        duan_optimized(vac)
    with pytest.raises(ValueError):
        duan(vac, 0.0)
    s = tmsv(0.5, 60)
    assert duan_optimized(s) < 0
    # var(x1 - x2) + var(p1 + p2) = 2 exp(-2r) for a TMSV with squeezing r
    r = math.atanh(0.5)
    assert duan(s, 1.0, sign=-1) == pytest.approx(2 * math.exp(-2 * r) - 2, abs=1e-10)


def test_agarwal_values():
    assert agarwal_d1913(noon(2, H, H)) == pytest.approx(-4, abs=1e-12)
    assert agarwal_d1913(noon(1, H, H)) == pytest.approx(-2, abs=1e-12)
    s = noon(3, 0.6, 0.8j)
    assert agarwal_d1913(s) == pytest.approx(agarwal_spin_form(s), abs=1e-10)
    assert agarwal_d1913(s) == pytest.approx(oracle_agarwal_noon(3, 0.6, 0.8j), abs=1e-12)


def test_agarwal_consistency_on_cat():
    s = mixed_cat(0.8, 0.6, 0.3, 20)
    assert agarwal_d1913(s) == pytest.approx(agarwal_spin_form(s), abs=1e-9)


def test_expansion_size():
    assert len(expand_multicopy(D124)) == 36
    assert sum(t.coeff for t in expand_multicopy(D124)) == pytest.approx(0)


def test_normal_order():
    # a a+ = a+ a + 1
    assert normal_order((False, True)) == {(1, 1): 1.0, (0, 0): 1.0}
    assert normal_order((True, False)) == {(1, 1): 1.0}


def test_lossy_moment_antinormal():
    s = tmsv(0.5, 60)
    tau = 0.3
    got = lossy_moment(word("a1 a1+"), s, {word("a1").labels[0]: tau})
    assert got == pytest.approx(tau / 3 + 1, abs=1e-12)


def test_d24_two_tmsv():
    s1, s2 = tmsv(0.5, 60), tmsv(0.7, 90)
    assert multicopy_expectation("d24", [s1, s2]) == pytest.approx(oracle_d24_no_loss(0.5, 0.7), abs=1e-10)
    t = 0.6
    losses = {k: t for k in ("a1", "a2", "b1", "b2")}
    got = multicopy_expectation("d24", [s1, s2], losses)
    assert got == pytest.approx(t**2 * oracle_d24_no_loss(0.5, 0.7), abs=1e-10)
    taus = {"a1": 0.9, "a2": 0.4, "b1": 0.7, "b2": 0.55}
    got = multicopy_expectation("d24", [s1, s2], taus)
    assert got == pytest.approx(oracle_d24_lossy(0.5, 0.7, 0.9, 0.4, 0.7, 0.55), abs=1e-10)


def test_d24_squeezed_products():
    d = 40
    r = (0.3, 0.5, 0.4, 0.2)  # r_a1, r_a2, r_b1, r_b2
    c1 = tensor(squeezed(r[0], d, "a1"), squeezed(r[2], d, "b1"))
    c2 = tensor(squeezed(r[1], d, "a1"), squeezed(r[3], d, "b1"))
    taus = {"a1": 0.8, "a2": 0.6, "b1": 0.9, "b2": 0.5}
    got = multicopy_expectation("d24", [c1, c2], taus)
    ref = oracle_d24_squeezed_products(*r, 0.8, 0.6, 0.9, 0.5)
    assert got == pytest.approx(ref, abs=1e-10)
    assert got >= 0


def test_copy_count_mismatch():
    with pytest.raises(ValueError):
        multicopy_expectation("d124", [tmsv(0.3, 20)] * 2)


def test_tensor_path_tmsv():
    s = tmsv(0.4, 7, max_leakage=1)
    fact = multicopy_expectation("d124", [s, s, s])
    tens = multicopy_expectation_tensor("d124", [s, s, s])
    assert tens == pytest.approx(fact, abs=1e-8)
    assert tens == pytest.approx(det_witness("d124", s), abs=1e-8)


def test_tensor_path_noon():
    s = noon(2, H, H)
    got = multicopy_expectation_tensor("d1913", [s, s, s])
    assert got == pytest.approx(oracle_d1913_noon(2, H, H), abs=1e-12)


def test_tensor_path_lossy_matches_factorized():
    s1, s2 = tmsv(0.3, 6, max_leakage=1), tmsv(0.4, 6, max_leakage=1)
    taus = {"a1": 0.7, "b2": 0.5}
    fact = multicopy_expectation("d24", [s1, s2], taus)
    tens = multicopy_expectation_tensor("d24", [s1, s2], taus)
    assert tens == pytest.approx(fact, abs=1e-10)


def test_cat_d149():
    s = mixed_cat(0.8, 0.8, 0.5, 15)
    assert det_witness("d149", s) == pytest.approx(oracle_d149_cat(0.8, 0.8, 0.5), abs=1e-8)
    assert multicopy_expectation("d149", [s, s, s]) == pytest.approx(oracle_d149_cat(0.8, 0.8, 0.5), abs=1e-8)


def test_mean_field_reduction():
    lam = 0.4
    s = tmsv(lam, 12, max_leakage=1e-6)
    s = displace(displace(s, "a1", 0.3), "b1", -0.2j)
    before, after = mean_field_reduction_check(s)
    assert before == pytest.approx(after, abs=1e-8)
    assert before == pytest.approx(oracle_d124_tmsv(lam), abs=2e-5)
    c = coherent_product((0.4, 0.2j), 12)
    before, after = mean_field_reduction_check(c)
    assert abs(before) < 1e-8 and abs(after) < 1e-8


def test_real_check():
    from cvwitness.witnesses import _real

    with pytest.raises(NumericalInconsistencyError):
        _real(1 + 1e-3j, "x")
    assert _real(np.complex128(2 + 1e-12j), "x") == 2
