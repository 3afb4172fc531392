"""Two different squeezed vacua, each arm with its own transmissivity.

Loss shrinks the witness but never changes its sign; uniform loss tau
scales it by tau^2.
"""

import numpy as np

from cvwitness.oracles import oracle_d24_lossy, oracle_d24_no_loss
from cvwitness.states import tmsv, tmsv_cutoff
from cvwitness.witnesses import multicopy_expectation

lam1, lam2 = 0.5, 0.7
s1, s2 = tmsv(lam1, tmsv_cutoff(lam1)), tmsv(lam2, tmsv_cutoff(lam2))
base = oracle_d24_no_loss(lam1, lam2)
print(f"lossless value {base:.8f}")
print(f"{'tau':>5} {'simulated':>12} {'tau^2 * base':>12}")
for tau in np.linspace(0.2, 1.0, 5):
    got = multicopy_expectation("d24", [s1, s2], {k: tau for k in ("a1", "a2", "b1", "b2")})
    print(f"{tau:5.2f} {got:12.8f} {tau**2 * base:12.8f}")

taus = dict(a1=0.9, a2=0.4, b1=0.7, b2=0.55)
got = multicopy_expectation("d24", [s1, s2], taus)
print(f"\nasymmetric arms {taus}: {got:.8f} vs {oracle_d24_lossy(lam1, lam2, *taus.values()):.8f}")
