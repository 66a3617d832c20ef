"""
Generating polynomials and convolution weights.

Weights are Taylor coefficients of ``[P(z)]**alpha * exp(theta * Q(z))`` for
polynomials P and Q. The production path is the linear recurrence obtained
from ``P * w' = w * G`` with ``G = alpha * P' + theta * P * Q'``; an
independent log/exp series route is kept alongside for cross-checking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

LD = np.longdouble


class InvalidOrderError(ValueError):
    pass


class SingularGeneratingFunctionError(ValueError):
    pass


class LogBranchError(ValueError):
    pass


class TruncationError(ValueError):
    pass


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial in the series variable; ``coeffs[j]`` multiplies z**j."""

    coeffs: np.ndarray

    def __init__(self, coeffs: Sequence[float] | np.ndarray):
        c = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
        if c.ndim != 1:
            raise ValueError("coefficients must be one-dimensional")
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else np.zeros(1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __getitem__(self, j: int) -> float:
        # coefficients beyond the degree are zero
        if 0 <= j < len(self.coeffs):
            return float(self.coeffs[j])
        return 0.0

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        return Polynomial(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        out = np.zeros(n)
        out[: len(self.coeffs)] += self.coeffs
        out[: len(other.coeffs)] += other.coeffs
        return Polynomial(out)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"Polynomial({self.coeffs.tolist()})"


@dataclass(frozen=True)
class WeightSequence:
    values: np.ndarray
    alpha: float
    theta: float
    kind: Literal["omega", "theta_shift"]
    P: Polynomial = field(repr=False)
    Q: Polynomial = field(repr=False)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def bdf_polynomial(p: int) -> Polynomial:
    """Generating polynomial ``sum_{j=1}^p (1 - z)**j / j`` of the order-p BDF."""
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= 6:
        raise InvalidOrderError(f"BDF order must be an integer in 1..6, got {p!r}")
    out = np.zeros(p + 1)
    for j in range(1, p + 1):
        # (1 - z)**j = sum_k C(j, k) (-z)**k
        for k in range(j + 1):
            out[k] += math.comb(j, k) * (-1) ** k / j
    return Polynomial(out)


BDF2 = bdf_polynomial(2)


def g_polynomial(P: Polynomial, Q: Polynomial, alpha: float, theta: float) -> Polynomial:
    """Return ``alpha * P' + theta * P * Q'``."""
    if P[0] == 0.0:
        raise SingularGeneratingFunctionError("P(0) must be nonzero")
    return alpha * P.derivative() + theta * (P * Q.derivative())


def omega_weights(P: Polynomial, Q: Polynomial, alpha: float, theta: float,
                  N: int) -> WeightSequence:
    """
    First N+1 Taylor coefficients of ``[P(z)]**alpha * exp(theta * Q(z))``.

    Uses the recurrence

        w_n = [w_0 G_{n-1} + sum_{k=1}^{n-1} w_{n-k} (G_{k-1} - (n-k) P_k)] / (n P_0)

    whose inner sum has at most ``max(deg G + 1, deg P)`` nonzero terms, so the
    total cost is linear in N.
    """
    P0 = P[0]
    if P0 == 0.0:
        raise SingularGeneratingFunctionError("P(0) = 0: [P(z)]**alpha is not analytic at z = 0")
    if N < 0:
        raise ValueError("N must be nonnegative")
    G = g_polynomial(P, Q, alpha, theta)
    # K bounds the window of k for which G_{k-1} or P_k can be nonzero
    K = max(G.degree + 1, P.degree)
    Gpad = np.zeros(K + 1)
    Gpad[: len(G.coeffs)] = G.coeffs
    Ppad = np.zeros(K + 1)
    Ppad[: len(P.coeffs)] = P.coeffs

    # The weights fall by many decades over a long run and plain doubles drift
    # by ~1e-11 relative at the tail; the extra bits of long double absorb that.
    g = Gpad.astype(LD)
    p = Ppad.astype(LD)
    # C[k][n] = G_{k-1} - (n-k) P_k, tabulated once per k
    n_all = np.arange(N + 1, dtype=LD)
    C = [None] + [list(g[k - 1] - (n_all - k) * p[k]) for k in range(1, K + 1)]
    g = list(g)
    w = [LD(0)] * (N + 1)
    if P0 > 0:
        w[0] = np.exp(LD(alpha) * np.log(LD(P0)) + LD(theta) * LD(Q[0]))
    elif float(alpha).is_integer():
        w[0] = LD(P0) ** int(alpha) * np.exp(LD(theta) * LD(Q[0]))
    else:
        raise SingularGeneratingFunctionError("P(0) < 0 with non-integer alpha has no real branch")
    P0 = LD(P0)
    for n in range(1, N + 1):
        # the k = n term is w_0 G_{n-1}; its (n-k) P_k factor vanishes
        acc = w[0] * g[n - 1] if n - 1 <= K else LD(0)
        for k in range(1, min(n - 1, K) + 1):
            acc += w[n - k] * C[k][n]
        w[n] = acc / (n * P0)
    w = np.array(w, dtype=LD).astype(float)
    return WeightSequence(w, float(alpha), float(theta), "omega", P, Q)


def shift_weights(Q: Polynomial, theta: float, N: int) -> WeightSequence:
    """Coefficients of ``exp(theta * Q(z))`` (P = 1, alpha = 0 in the recurrence)."""
    ws = omega_weights(Polynomial([1.0]), Q, 0.0, theta, N)
    return WeightSequence(ws.values, 0.0, float(theta), "theta_shift", ws.P, Q)


def _series_log(P: Polynomial, N: int) -> np.ndarray:
    # log P with n L_n P_0 = n P_n - sum_{k=1}^{n-1} k L_k P_{n-k}
    Pc = np.zeros(N + 1, dtype=LD)
    c = P.coeffs[: N + 1]
    Pc[: len(c)] = c
    L = np.zeros(N + 1, dtype=LD)
    L[0] = np.log(Pc[0])
    d = P.degree
    for n in range(1, N + 1):
        s = n * Pc[n]
        for k in range(max(1, n - d), n):
            s -= k * L[k] * Pc[n - k]
        L[n] = s / (n * Pc[0])
    return L


def _series_exp(S: np.ndarray) -> np.ndarray:
    # E = exp(S): n E_n = sum_{k=1}^n k S_k E_{n-k}
    N = len(S) - 1
    E = np.zeros(N + 1, dtype=LD)
    E[0] = np.exp(S[0])
    kS = np.arange(N + 1) * S
    for n in range(1, N + 1):
        E[n] = np.dot(kS[1 : n + 1], E[n - 1 :: -1]) / n
    return E


def series_oracle(P: Polynomial, Q: Polynomial, alpha: float, theta: float,
                  N: int) -> WeightSequence:
    """Same coefficients as :func:`omega_weights`, via exp(alpha log P + theta Q).

    Quadratic in N; meant for verification only.
    """
    if P[0] <= 0.0:
        raise LogBranchError("series logarithm needs P(0) > 0")
    S = LD(alpha) * _series_log(P, N)
    q = Q.coeffs[: N + 1]
    S[: len(q)] += LD(theta) * q.astype(LD)
    E = _series_exp(S).astype(float)
    return WeightSequence(E, float(alpha), float(theta), "omega", P, Q)


def default_weight_count(tau: float) -> int:
    """Number of weights for which the geometric tail at ``exp(-tau)`` is negligible."""
    return int(max(math.ceil(10.0 / tau), 10_000))


def consistency_defect(weights: WeightSequence | np.ndarray, alpha: float, theta: float,
                       tau: float, tail_tol: float = 1e-14) -> float:
    """
    ``|tau**-alpha * exp(-theta*tau) * w(exp(-tau)) - 1|``.

    Since ``delta(exp(-tau)) = tau + O(tau**3)`` the factor ``exp(theta*delta)``
    behaves like ``exp(+theta*tau)``; multiplying by ``exp(-theta*tau)`` removes it.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    w = np.asarray(weights, dtype=float)
    N = len(w) - 1
    q = math.exp(-tau)
    # |w_j| decays like j**(-alpha-1), so the last weight bounds the tail terms
    tail = abs(w[-1]) * q ** (N + 1) / (1.0 - q)
    if tail > tail_tol:
        raise TruncationError(
            f"{N + 1} weights leave a tail of about {tail:.2e} at tau={tau}; use more weights")
    powers = np.exp(-tau * np.arange(N + 1))
    value = math.fsum(w * powers)
    return abs(tau ** (-alpha) * math.exp(-theta * tau) * value - 1.0)
