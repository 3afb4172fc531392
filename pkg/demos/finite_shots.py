"""Estimating the witness from a finite number of detector clicks.

The standard error falls like 1/sqrt(shots); the estimate stays within a
few standard errors of the exact value.
"""

from cvwitness.measurement import estimate, pipeline_value, sample_pipeline
from cvwitness.states import tmsv

s = tmsv(0.5, 10, max_leakage=1e-4)
exact = pipeline_value("d124", [s, s, s])
print(f"exact value {exact:.6f}")
for shots in (10**3, 10**4, 10**5, 10**6):
    value, se = estimate("d124", sample_pipeline("d124", [s, s, s], shots=shots, seed=11))
    print(f"{shots:>8d} shots: {value:+.5f} +/- {se:.5f}  ({(value - exact) / se:+.2f} SE)")
