"""Agarwal-type witness on NOON states, with and without loss."""

import math

from cvwitness.measurement import pipeline_value
from cvwitness.oracles import oracle_agarwal_noon, oracle_agarwal_noon_lossy
from cvwitness.states import noon
from cvwitness.witnesses import agarwal_d1913, agarwal_spin_form

h = 1 / math.sqrt(2)
for n in (1, 2, 3):
    s = noon(n, h, h)
    print(f"N={n}: moments {agarwal_d1913(s):+.6f}  spin form {agarwal_spin_form(s):+.6f}  "
          f"counting {pipeline_value('d1913_agarwal', s):+.6f}  closed form {oracle_agarwal_noon(n, h, h):+.6f}")

s = noon(2, h, h)
for tau in (1.0, 0.8, 0.5):
    got = pipeline_value("d1913_agarwal", s, {"a1": tau, "b1": tau})
    print(f"tau={tau}: {got:+.6f} vs {oracle_agarwal_noon_lossy(2, h, h, tau, tau):+.6f}")
