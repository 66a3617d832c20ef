"""
Mittag-Leffler function
=======================

``E_a(z) = sum_k z^k / Gamma(a k + 1)``, summed directly for moderate |z|.
"""

import math

from scipy.special import erfcx

from thetacq.mittag_leffler import DomainError, ml_eval

# a = 1 is the exponential, a = 1/2 has a closed form through erfc
print(ml_eval(1.0, -1.0), math.exp(-1.0))
print(ml_eval(0.5, -1.0), erfcx(1.0))

# the smooth-data solution decays like E_a(-t^a)
for alpha in (0.1, 0.5, 0.9):
    print(alpha, [round(ml_eval(alpha, -t**alpha), 6) for t in (0.1, 0.5, 1.0)])

# arguments where the plain series would cancel catastrophically are refused
try:
    ml_eval(0.05, -1.8)
except DomainError as exc:
    print("refused:", exc)
