"""One-parameter Mittag-Leffler function E_a(z) for real, moderate arguments."""

import math

import numpy as np
from scipy.special import gammaln

ZMAX = 2.0
# largest term allowed before cancellation eats more than ~8 digits
_CANCELLATION_LIMIT = 1e8


class DomainError(ValueError):
    pass


def ml_eval(alpha, z, tol=1e-15):
    """
    Evaluate ``E_alpha(z) = sum_k z**k / Gamma(alpha*k + 1)`` by its Taylor series.

    Only ``0 < alpha <= 1`` and ``|z| <= 2`` are supported. Terms are formed in
    log space so that small ``alpha`` (tens of thousands of terms) neither
    overflows nor underflows. Summation stops once a block of terms ends below
    ``tol`` and the terms are decreasing; for ``z <= 0`` the series is then
    alternating, so the truncation error is bounded by the first omitted term.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    z = float(z)
    if abs(z) > ZMAX:
        raise DomainError(f"|z| = {abs(z)} exceeds the validated range |z| <= {ZMAX}")
    if z == 0.0:
        return 1.0

    logz = math.log(abs(z))
    sign = -1.0 if z < 0 else 1.0
    total = 0.0
    comp = 0.0
    block = 256
    k0 = 0
    while True:
        k = np.arange(k0, k0 + block)
        mags = np.exp(k * logz - gammaln(alpha * k + 1.0))
        if mags.max() > _CANCELLATION_LIMIT:
            raise DomainError(
                f"series for E_{alpha}({z}) cancels catastrophically; argument out of range")
        terms = mags * sign ** (k % 2) if sign < 0 else mags
        # Neumaier-compensated running sum
        for t in terms.tolist():
            s = total + t
            if abs(total) >= abs(t):
                comp += (total - s) + t
            else:
                comp += (t - s) + total
            total = s
        if mags[-1] < tol and mags[-1] <= mags[-2]:
            break
        k0 += block
    return total + comp


def ml_eval_array(alpha, z, tol=1e-15):
    return np.array([ml_eval(alpha, zi, tol) for zi in np.ravel(z)]).reshape(np.shape(z))
