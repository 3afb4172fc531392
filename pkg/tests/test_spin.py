import numpy as np
import pytest

from cvwitness.circuits import get_circuit, lift
from cvwitness.fock import expectation
from cvwitness.spin import (
    c_operator,
    c_sum,
    casimir,
    f_operator,
    f_sum,
    safe_indices,
    six_modes,
    spin,
    spin_sum,
)
from cvwitness.states import fock_product, vacuum
from cvwitness.witnesses import d24_primed_sum, multicopy_sum

PAIR = ("a1", "a2")


def test_spin_examples():
    assert expectation(spin_sum("z", PAIR), fock_product((2, 0), 4, PAIR)).real == pytest.approx(1)
    assert expectation(spin_sum("0", PAIR), fock_product((1, 1), 3, PAIR)).real == pytest.approx(1)
    assert abs(expectation(spin_sum("x", PAIR), vacuum(2, 3, PAIR))) == 0
    with pytest.raises(ValueError):
        spin("x", ("a1", "a1"), 3)


def test_su2_algebra():
    d = 6
    lx, ly, lz, l0 = (spin(c, PAIR, d).dense() for c in "xyz0")
    idx = safe_indices(2, d, d - 2)
    sub = np.ix_(idx, idx)
    for p, q, r in ((lx, ly, lz), (ly, lz, lx), (lz, lx, ly)):
        assert np.abs((p @ q - q @ p - 1j * r)[sub]).max() < 1e-10
    for m in (lx, ly, lz):
        assert np.abs(l0 @ m - m @ l0).max() < 1e-12


def test_casimir():
    d = 6
    c = casimir(PAIR, d).dense()
    s = fock_product((1, 0), d, PAIR)
    v = s.amplitudes.ravel()
    assert np.vdot(v, c @ v).real == pytest.approx(0.75)
    assert abs(c[0, 0]) == 0
    idx = safe_indices(2, d, d - 2)
    l0 = spin("0", PAIR, d).dense()
    assert np.abs((c - l0 @ (l0 + np.eye(d * d)))[np.ix_(idx, idx)]).max() < 1e-10
    for comp in "xyz":
        m = spin(comp, PAIR, d).dense()
        assert np.abs((c @ m - m @ c)[np.ix_(idx, idx)]).max() < 1e-10


def test_c_identity():
    total = c_sum(1) - c_sum(2) + c_sum(3)
    labels = ("a2", "a3", "b2", "b3")
    diff = total.operator(labels, 4).max_abs_diff(d24_primed_sum().operator(labels, 4))
    assert diff < 1e-10


def test_c_after_circuit_is_number_form():
    d = 4
    labels = ("a2", "a3", "b2", "b3")
    for j in (1, 2, 3):
        c = c_operator(j, d)
        assert c.is_hermitian()
        v = lift(get_circuit(f"d124.C{j}").spec, d, labels).dense()
        out = v @ c.dense() @ v.conj().T
        idx = safe_indices(4, d, d - 1)
        occ = np.indices((d,) * 4).reshape(4, -1).T
        diag = 0.5 * (occ[:, 0] * occ[:, 3] + occ[:, 1] * occ[:, 2])
        sub = out[np.ix_(idx, idx)]
        assert np.abs(sub - np.diag(diag[idx])).max() < 1e-10
        assert np.linalg.eigvalsh(sub).min() > -1e-10
    assert abs(expectation(c_sum(3), vacuum(4, 2, labels))) == 0


def test_f_identity_and_hermiticity():
    d = 3
    total = f_sum(1) - f_sum(2) + f_sum(3) - f_sum(4) - f_sum(5)
    diff = total.operator(six_modes(), d).max_abs_diff(multicopy_sum("d149").operator(six_modes(), d))
    assert diff < 1e-10
    for j in range(1, 6):
        assert f_operator(j, d).is_hermitian()
        assert abs(expectation(f_sum(j), vacuum(6, 2, six_modes()))) == 0
    with pytest.raises(ValueError):
        f_sum(6)
