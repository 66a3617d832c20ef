"""
Convolution weights
===================

The fractional derivative is replaced by a discrete convolution whose weights
are Taylor coefficients of ``[delta(z)]**alpha * exp(theta * delta(z))`` with
the BDF2 polynomial ``delta(z) = 3/2 - 2z + z^2/2``.
"""

import math

import numpy as np

from thetacq.series import (BDF2, consistency_defect, default_weight_count, omega_weights,
                            series_oracle, shift_weights)

alpha, theta = 0.5, 0.3

# %% the linear-cost recurrence and the log/exp route give the same numbers
w = omega_weights(BDF2, BDF2, alpha, theta, 2000)
o = series_oracle(BDF2, BDF2, alpha, theta, 2000)
print("first weights:", np.round(w.values[:6], 6))
print("max relative gap to the series route:", np.max(np.abs(w.values - o.values) / np.abs(o.values)))

# %% the tail decays like n**(-alpha - 1)
n = np.array([100, 400, 1600])
print("|w_n| n^1.5 at n = 100, 400, 1600:", np.abs(w.values[n]) * n**1.5)

# %% the shift weights fall off exponentially and sum to one
s = shift_weights(BDF2, theta, 30).values
print("shift weights 0..5:", np.round(s[:6], 6), " sum:", s.sum())

# %% consistency: tau^-a e^(-theta tau) w(e^-tau) - 1 shrinks by ~4 per halving
long = omega_weights(BDF2, BDF2, alpha, theta, default_weight_count(2.0**-8))
prev = None
for k in range(3, 9):
    d = consistency_defect(long, alpha, theta, 2.0**-k)
    print(f"tau = 2^-{k}: defect {d:.3e}" + (f"  order {math.log2(prev / d):.2f}" if prev else ""))
    prev = d
