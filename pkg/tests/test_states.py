import math

import numpy as np
import pytest

from cvwitness.fock import CutoffTooSmallError, Ensemble, expectation, word
from cvwitness.states import (
    IllDefinedStateError,
    cat_density_matrix,
    coherent,
    displace,
    fock,
    mixed_cat,
    noon,
    phase_rotate,
    squeezed,
    tmsv,
    tmsv_cutoff,
    vacuum,
)


def ev(w, s):
    return expectation(word(w), s)


def test_fock_and_vacuum():
    assert ev("a1+ a1", vacuum(1, 3)).real == 0
    assert ev("a1+ a1", fock(2, 4)).real == pytest.approx(2)
    assert abs(ev("a1", fock(2, 4))) == 0
    with pytest.raises(ValueError):
        fock(4, 4)


def test_coherent():
    np.testing.assert_allclose(coherent(0, 4).amplitudes, vacuum(1, 4).amplitudes)
    alpha = 1 + 0.5j
    s = coherent(alpha, 25)
    assert ev("a1", s) == pytest.approx(alpha, abs=1e-9)
    assert ev("a1+ a1", s).real == pytest.approx(abs(alpha) ** 2, abs=1e-9)
    with pytest.raises(CutoffTooSmallError):
        coherent(3.0, 5)


def test_squeezed():
    np.testing.assert_allclose(squeezed(0, 4).amplitudes, vacuum(1, 4).amplitudes)
    r = 0.5
    s = squeezed(r, 40)
    # sinh^2(0.5) = 0.2715403...; the spec example prints 0.27259
    assert ev("a1+ a1", s).real == pytest.approx(math.sinh(r) ** 2, abs=1e-9)
    assert ev("a1^2", s) == pytest.approx(-math.cosh(r) * math.sinh(r), abs=1e-9)


def test_tmsv():
    np.testing.assert_allclose(tmsv(0, 3).amplitudes[0, 0], 1)
    s = tmsv(0.5, 60)
    assert ev("a1+ a1", s).real == pytest.approx(1 / 3, abs=1e-12)
    assert ev("a1 b1", s) == pytest.approx(2 / 3, abs=1e-12)
    with pytest.raises(ValueError):
        tmsv(1.0, 10)
    assert tmsv(0.5, tmsv_cutoff(0.5, 1e-9)).norm() == pytest.approx(1)


def test_tmsv_number_difference_selection():
    s = tmsv(0.6, 30, max_leakage=1e-6)
    for w in ("a1", "b1+", "a1+ a1 b1", "a1^2 b1", "a1+ b1"):
        assert abs(ev(w, s)) < 1e-14


def test_cat_z0_single_branch():
    s = mixed_cat(1.0, 1.0, 0.0, 20)
    assert len(s.branches) == 1
    assert s.branches[0][0] == pytest.approx(1)


def test_cat_ill_defined():
    with pytest.raises(IllDefinedStateError):
        mixed_cat(0, 0, 0, 5)


def test_cat_moments():
    a, b, z = 0.9, 0.6 + 0.2j, 0.4
    s = mixed_cat(a, b, z, 25)
    nn = 0.5 / (1 - (1 - z) * math.exp(-2 * (abs(a) ** 2 + abs(b) ** 2)))
    factor = 1 + (1 - z) * math.exp(-2 * abs(a) ** 2 - 2 * abs(b) ** 2)
    assert ev("b1+ b1", s).real == pytest.approx(2 * abs(b) ** 2 * nn * factor, abs=1e-10)
    for w in ("b1", "b1+", "a1 b1+ b1", "a1+ b1+ b1"):
        assert abs(ev(w, s)) < 1e-12


def test_cat_density_matrix_decomposition():
    a, b, z, d = 0.8, 0.5j, 0.3, 12
    s = mixed_cat(a, b, z, d, max_leakage=1)
    rho = sum(w * np.outer(br.amplitudes.ravel(), br.amplitudes.ravel().conj()) for w, br in s.branches)
    ref = cat_density_matrix(a, b, z, d)
    ref = ref / np.trace(ref)
    np.testing.assert_allclose(rho, ref, atol=1e-12)


def test_noon():
    s = noon(1, 1, 0)
    assert s.amplitudes[1, 0] == 1
    al, be = 0.6, 0.8
    assert ev("a1 b1+", noon(1, al, be)) == pytest.approx(al * be)
    for n in (1, 2, 3):
        s = noon(n, al, be)
        assert abs(ev("a1+ a1 b1+ b1", s)) < 1e-15
        assert (ev("a1+ a1", s) + ev("b1+ b1", s)).real == pytest.approx(n, abs=1e-14)
    with pytest.raises(ValueError):
        noon(2, al, be, cutoff=2)


def test_displace_and_phase():
    s = displace(vacuum(1, 20, ["a1"]), "a1", 0.7 - 0.2j)
    assert ev("a1", s) == pytest.approx(0.7 - 0.2j, abs=1e-10)
    r = phase_rotate(coherent(1.0, 20), "a1", 0.3)
    assert ev("a1", r) == pytest.approx(np.exp(0.3j), abs=1e-9)
