"""Property-based checks of the invariants the library promises."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvwitness.circuits import BS, PS, apply_circuit, circuit, compose, lift
from cvwitness.fock import PureState, mode, photon_distribution
from cvwitness.measurement import CountsTable, sample_distribution, setting_means
from cvwitness.oracles import oracle_d24_lossy
from cvwitness.states import displace, phase_rotate, tmsv, tmsv_cutoff
from cvwitness.witnesses import (
    d124_covariance_form,
    det_witness,
    multicopy_expectation,
    multicopy_expectation_tensor,
)

seeds = st.integers(0, 2**32 - 1)
angle = st.floats(0, 2 * math.pi, exclude_max=True)
lam = st.floats(0.05, 0.85)
tau = st.floats(0.05, 1.0)


def random_state(seed: int, cutoff: int = 4) -> PureState:
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=(cutoff, cutoff)) + 1j * rng.normal(size=(cutoff, cutoff))
    return PureState((mode("a1"), mode("b1")), cutoff, amps).normalized()


@given(seeds, angle, angle)
def test_phase_invariance(seed, ta, tb):
    s = random_state(seed)
    rot = phase_rotate(phase_rotate(s, "a1", ta), "b1", tb)
    for w in ("d124", "d24", "d149", "d1913"):
        assert det_witness(w, rot) == pytest.approx(det_witness(w, s), abs=1e-9)


@given(seeds)
def test_covariance_form_equals_determinant(seed):
    s = random_state(seed)
    assert d124_covariance_form(s) == pytest.approx(det_witness("d124", s), abs=1e-9)


@settings(max_examples=10)
@given(st.floats(-0.7, 0.7), st.floats(-0.7, 0.7), st.floats(-0.7, 0.7), st.floats(-0.7, 0.7))
def test_d124_displacement_invariance(xa, ya, xb, yb):
    base = tmsv(0.4, 45)
    moved = displace(displace(base, "a1", complex(xa, ya)), "b1", complex(xb, yb))
    assert det_witness("d124", moved) == pytest.approx(det_witness("d124", base), abs=1e-8)


@settings(max_examples=10)
@given(seeds, seeds, seeds, st.lists(tau, min_size=6, max_size=6))
def test_factorized_matches_tensor(s1, s2, s3, taus):
    states = [random_state(x, 3) for x in (s1, s2, s3)]
    losses = dict(zip(("a1", "a2", "a3", "b1", "b2", "b3"), taus[:3] + [1.0, 1.0, taus[5]]))
    fact = multicopy_expectation("d124", states, losses)
    tens = multicopy_expectation_tensor("d124", states, losses)
    assert tens == pytest.approx(fact, abs=1e-8)


@given(lam, lam, tau, tau, tau, tau)
def test_lossy_two_copy_matches_oracle(l1, l2, ta1, ta2, tb1, tb2):
    s1, s2 = tmsv(l1, tmsv_cutoff(l1, 1e-14)), tmsv(l2, tmsv_cutoff(l2, 1e-14))
    got = multicopy_expectation("d24", [s1, s2], {"a1": ta1, "a2": ta2, "b1": tb1, "b2": tb2})
    assert got == pytest.approx(oracle_d24_lossy(l1, l2, ta1, ta2, tb1, tb2), abs=1e-9)


@given(st.lists(st.tuples(st.floats(0, 1), angle), min_size=1, max_size=4))
def test_circuit_unitarity_and_homomorphism(params):
    els = []
    for t, th in params:
        els += [BS("a1", "a2", t), PS("a2", th)]
    spec = circuit(*els)
    m = compose(spec, ["a1", "a2"]).matrix
    np.testing.assert_allclose(m @ m.conj().T, np.eye(2), atol=1e-12)
    half = len(els) // 2
    s1, s2 = circuit(*els[:half]), circuit(*els[half:])
    np.testing.assert_allclose(
        compose(s1.then(s2), ["a1", "a2"]).matrix,
        compose(s2, ["a1", "a2"]).matrix @ compose(s1, ["a1", "a2"]).matrix,
        atol=1e-12,
    )
    # blocks with total photon number below the cutoff are exact
    u = lift(spec, 4, ["a1", "a2"]).dense()
    keep = [i * 4 + j for i in range(4) for j in range(4) if i + j < 4]
    sub = u[np.ix_(keep, keep)]
    np.testing.assert_allclose(sub.conj().T @ sub, np.eye(len(keep)), atol=1e-12)


@given(seeds, st.floats(0, 1), angle)
def test_circuits_preserve_probability(seed, t, th):
    s = random_state(seed).relabel({"b1": "a2"})
    out = apply_circuit(s, circuit(BS("a1", "a2", t), PS("a1", th)))
    assert photon_distribution(out).sum() == pytest.approx(1, abs=1e-12)


@settings(max_examples=8)
@given(seeds)
def test_c_settings_nonnegative(seed):
    s = random_state(seed, 3)
    means = setting_means("d124", [s, s, s])
    for v in means.values():
        assert float(np.ravel(v)[0]) >= -1e-12


@given(seeds, st.integers(1, 500))
def test_counts_sum_to_shots(seed, shots):
    rng = np.random.default_rng(seed)
    probs = rng.random(6)
    probs /= probs.sum()
    occ = np.arange(6).reshape(6, 1)
    tab = sample_distribution([mode("a1")], occ, probs, shots, seed)
    assert sum(tab.counts.values()) == shots
    assert CountsTable.from_csv(tab.to_csv(), seed=seed) == tab
