import math

import numpy as np
import pytest

from cvwitness.circuits import BS, circuit, concentrator, get_circuit
from cvwitness.measurement import (
    CountsTable,
    LocalCopies,
    NonLocalCircuitError,
    UnknownWitnessError,
    estimate,
    n,
    pipeline_value,
    sample,
    sample_pipeline,
    setting_means,
)
from cvwitness.oracles import oracle_agarwal_noon_lossy, oracle_d149_cat
from cvwitness.states import mixed_cat, noon, tmsv, vacuum
from cvwitness.witnesses import agarwal_d1913, det_witness, multicopy_expectation

H = 1 / math.sqrt(2)


def test_number_poly():
    p = n("a1") * n("b1") - 2 * n("a1") + 1
    occ = np.array([[0, 0], [2, 3]])
    np.testing.assert_allclose(p.evaluate(occ, [p.labels[0], p.labels[1]]), [1, 3])


def test_d124_pipeline_tmsv():
    s = tmsv(0.5, 12, max_leakage=1e-6)
    got = pipeline_value("d124", [s, s, s])
    assert got == pytest.approx(det_witness("d124", s), abs=1e-8)
    assert got == pytest.approx(-1 / 3, abs=2e-6)


def test_d124_setting_means_nonnegative():
    s = tmsv(0.6, 10, max_leakage=1)
    means = setting_means("d124", [s, s, s])
    assert all(float(np.ravel(v)[0]) >= -1e-12 for v in means.values())


def test_d149_pipeline_cat():
    s = mixed_cat(0.8, 0.8, 0.5, 10, max_leakage=1e-5)
    got = pipeline_value("d149", [s, s, s])
    assert got == pytest.approx(det_witness("d149", s), abs=1e-8)
    assert got == pytest.approx(oracle_d149_cat(0.8, 0.8, 0.5), abs=1e-4)


def test_agarwal_pipeline_noon():
    for cutoff in (3, 5):
        s = noon(2, H, H, cutoff=cutoff)
        assert pipeline_value("d1913_agarwal", s) == pytest.approx(-4, abs=1e-12)
    s = noon(1, 0.6, 0.8j)
    assert pipeline_value("d1913_agarwal", s) == pytest.approx(agarwal_d1913(s), abs=1e-10)


def test_agarwal_pipeline_lossy():
    s = noon(2, 0.6, 0.8)
    got = pipeline_value("d1913_agarwal", s, {"a1": 0.7, "b1": 0.4})
    assert got == pytest.approx(oracle_agarwal_noon_lossy(2, 0.6, 0.8, 0.7, 0.4), abs=1e-10)


def test_pipeline_imperfect_copies_match_factorized():
    # truncated states are fine here: both paths see the same vectors
    c = [mixed_cat(a, a, z, 4, max_leakage=1) for a, z in ((0.5, 0.2), (0.6, 0.5), (0.4, 0.0))]
    losses = {"a1": 0.9, "b2": 0.8, "a3": 0.7}
    got = pipeline_value("d149", c, losses)
    assert got == pytest.approx(multicopy_expectation("d149", c, losses), abs=1e-8)


def test_pipeline_errors():
    with pytest.raises(UnknownWitnessError):
        pipeline_value("duan", [vacuum(2, 2, ("a1", "b1"))])
    with pytest.raises(ValueError):
        pipeline_value("d124", [tmsv(0.3, 8, max_leakage=1)] * 2)


def test_local_copies_rejects_cross_party_circuit():
    s = tmsv(0.3, 6, max_leakage=1)
    with pytest.raises(NonLocalCircuitError):
        LocalCopies([s, s]).run(get_circuit("d1913_agarwal.Lx").spec)


def test_distribution_normalized():
    s = tmsv(0.4, 8, max_leakage=1)
    out = LocalCopies([s, s, s]).run(concentrator("a"), concentrator("b"))
    labels, occ, probs = out.distribution(("a2", "b3"))
    assert probs.sum() == pytest.approx(1, abs=1e-12)
    assert occ.shape == (len(probs), 2)


def test_sample_vacuum_and_determinism():
    vac = vacuum(2, 3, ("a1", "a2"))
    tab = sample(vac, circuit(BS("a1", "a2", 0.5)), ("a1", "a2"), shots=50, seed=1)
    assert tab.counts == {(0, 0): 50}
    s = tmsv(0.5, 12, max_leakage=1e-6)
    t1 = sample(s, None, ("a1", "b1"), shots=1000, seed=7)
    t2 = sample(s, None, ("a1", "b1"), shots=1000, seed=7)
    assert t1 == t2
    assert all(a == b for a, b in t1.counts)
    with pytest.raises(ValueError):
        sample(s, None, ("a1",), shots=0)


def test_counts_csv_roundtrip(tmp_path):
    s = tmsv(0.5, 12, max_leakage=1e-6)
    tab = sample(s, None, ("a1", "b1"), shots=200, seed=3)
    path = tmp_path / "c.csv"
    text = tab.to_csv(path)
    assert path.read_text() == text
    assert text.splitlines()[0] == "a1,b1,count"
    back = CountsTable.from_csv(text, seed=3)
    assert back == tab


def test_sampled_estimate_consistent():
    s = tmsv(0.5, 10, max_leakage=1e-4)
    counts = sample_pipeline("d124", [s, s, s], shots=1_000_000, seed=2024)
    value, se = estimate("d124", counts)
    assert se > 0
    assert abs(value - (-1 / 3)) < 5 * se


def test_estimator_unbiased_over_seeds():
    s = noon(1, 0.6, 0.8)
    exact = pipeline_value("d1913_agarwal", s)
    vals, ses = [], []
    for seed in range(20):
        v, e = estimate("d1913_agarwal", sample_pipeline("d1913_agarwal", s, shots=5000, seed=seed))
        vals.append(v)
        ses.append(e)
    spread = np.mean(ses) / math.sqrt(len(vals))
    assert abs(np.mean(vals) - exact) < 3 * spread + 1e-3
