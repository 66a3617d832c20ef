"""
Fully discrete theta-schemes for the subdiffusion problem
``d_t^alpha u - u_xx = f``, ``u(0) = v``, zero Dirichlet data.

With ``w = u - v`` and ``g = f - f(0)`` every step solves

    (tau^-a w_0 M + t_0 A) W^n = - tau^-a M sum_{j>=1} w_j W^{n-j}
                                 - A sum_{j>=1} t_j W^{n-j}
                                 + sum_j t_j M g_h^{n-j}
                                 + c_n (M f_h^0 - A v_h)

where ``w_j`` are the coefficients of ``delta^a exp(theta delta)``, ``t_j``
those of ``exp(theta delta)`` (``delta`` the BDF2 polynomial), M and A the
mass and stiffness matrices, and ``c_1 = theta + 3/2`` for the corrected
scheme, ``c_n = 1`` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import fem1d
from .fem1d import GAUSS_W, GAUSS_X, Mesh1D, TridiagonalMatrix
from .series import BDF2, omega_weights, shift_weights


class MissingHistoryError(IndexError):
    pass


@dataclass(frozen=True)
class SmoothData:
    """Initial value in the domain of the Laplacian; discretized by Ritz projection."""
    v: Callable
    dv: Callable


@dataclass(frozen=True)
class IndicatorData:
    """Characteristic function of (c, d); discretized by L2 projection."""
    c: float
    d: float

    def __call__(self, x):
        x = np.asarray(x)
        return ((x > self.c) & (x < self.d)).astype(float)


@dataclass(frozen=True)
class ProblemSpec:
    a: float
    b: float
    T: float
    alpha: float
    initial: SmoothData | IndicatorData
    source: Callable | None = None  # f(x, t), vectorized in x

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.T > 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class SchemeConfig:
    alpha: float
    theta: float
    tau: float
    N: int
    corrected: bool = True
    # shift weights with |t_j| below this are dropped; None keeps all of them
    shift_cutoff: float | None = None

    def __post_init__(self):
        if not -1.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (-1, 1), got {self.theta}")
        if not self.tau > 0 or self.N < 1:
            raise ValueError("need tau > 0 and N >= 1")

    @classmethod
    def uniform(cls, alpha, theta, t_end, N, **kw) -> "SchemeConfig":
        return cls(alpha, theta, t_end / N, N, **kw)

    @cached_property
    def omega(self):
        return omega_weights(BDF2, BDF2, self.alpha, self.theta, self.N)

    @cached_property
    def shift(self):
        return shift_weights(BDF2, self.theta, self.N)

    @cached_property
    def shift_values(self) -> np.ndarray:
        t = np.array(self.shift.values)
        if self.shift_cutoff is not None:
            t[np.abs(t) < self.shift_cutoff] = 0.0
        return t

    @cached_property
    def reversed_weights(self) -> np.ndarray:
        # row 0: w_N..w_1, row 1: t_N..t_1
        return np.stack([self.omega.values[:0:-1], self.shift_values[:0:-1]])

    def block_factor(self, n: int) -> float:
        if self.corrected and n == 1:
            return self.theta + 1.5
        return 1.0


@dataclass(frozen=True)
class Space:
    mesh: Mesh1D
    mass: TridiagonalMatrix
    stiffness: TridiagonalMatrix

    @classmethod
    def build(cls, a: float, b: float, M: int) -> "Space":
        mesh = Mesh1D(a, b, M)
        return cls(mesh, *fem1d.assemble(mesh))


def _history_sum(weights, history, n: int) -> np.ndarray:
    # sum_{j=0}^{n} weights[j] * history[n - j]
    if len(history) < n + 1:
        raise MissingHistoryError(f"need history 0..{n}, have {len(history)} entries")
    if len(weights) < n + 1:
        raise MissingHistoryError(f"need weights 0..{n}, have {len(weights)}")
    H = np.asarray(history[: n + 1], dtype=float)
    return np.asarray(weights[: n + 1], dtype=float) @ H[::-1]


def discrete_shift(shift, history, n: int) -> np.ndarray:
    """``sum_{j=0}^n t_j phi^{n-j}``: approximates phi at the shifted time level."""
    return _history_sum(shift, history, n)


def discrete_frac_derivative(omega, tau: float, alpha: float, history, n: int) -> np.ndarray:
    """``tau**-alpha * sum_{j=0}^n w_j phi^{n-j}``."""
    return tau ** (-alpha) * _history_sum(omega, history, n)


@dataclass
class Trajectory:
    config: SchemeConfig
    problem: ProblemSpec
    space: Space
    W: np.ndarray                 # (N + 1, M); row 0 is zero
    v_h: np.ndarray
    block: np.ndarray = field(repr=False)   # M f_h^0 - A v_h
    gload: np.ndarray = field(repr=False)   # (N + 1, M) rows M g_h^k, row 0 zero
    filled: int = 0                         # W[0..filled] are known
    has_source: bool = False

    @property
    def times(self) -> np.ndarray:
        return self.config.tau * np.arange(self.config.N + 1)

    def U(self, n: int) -> np.ndarray:
        return self.W[n] + self.v_h


def discretize_initial(problem: ProblemSpec, space: Space) -> np.ndarray:
    init = problem.initial
    if isinstance(init, SmoothData):
        return fem1d.ritz_project(space.mesh, init.dv, space.stiffness)
    return fem1d.l2_project(space.mesh, indicator=(init.c, init.d), mass=space.mass)


def init_trajectory(config: SchemeConfig, problem: ProblemSpec, space: Space) -> Trajectory:
    if abs(config.alpha - problem.alpha) > 0.0:
        raise ValueError("scheme and problem disagree on alpha")
    mesh = space.mesh
    M, N = mesh.M, config.N
    v_h = discretize_initial(problem, space)
    gload = np.zeros((N + 1, M))
    f0 = np.zeros(M)
    if problem.source is not None:
        f = problem.source
        f0 = fem1d.load_vector(mesh, lambda x: f(x, 0.0))
        for k in range(1, N + 1):
            tk = k * config.tau
            gload[k] = fem1d.load_vector(mesh, lambda x: f(x, tk)) - f0
    block = f0 - space.stiffness @ v_h
    W = np.zeros((N + 1, M))
    return Trajectory(config, problem, space, W, v_h, block, gload,
                      has_source=problem.source is not None)


def _system(config: SchemeConfig, space: Space) -> TridiagonalMatrix:
    return (space.mass.scaled(config.tau ** (-config.alpha) * config.omega[0])
            + space.stiffness.scaled(config.shift_values[0]))


def step(config: SchemeConfig, problem: ProblemSpec, space: Space, state: Trajectory,
         n: int, system: TridiagonalMatrix | None = None) -> np.ndarray:
    """Compute W^n from W^0..W^{n-1}, store it in ``state`` and return it."""
    if n < 1:
        raise ValueError("W^0 = 0 is fixed; steps start at n = 1")
    if state.filled < n - 1:
        raise MissingHistoryError(f"W^{n - 1} not computed yet")
    if system is None:
        system = _system(config, space)
    # reversed weights against the contiguous block W[0..n-1]
    wt = config.reversed_weights[:, -n:]
    hist_w, hist_t = wt @ state.W[:n]
    rhs = (-(config.tau ** (-config.alpha)) * (space.mass @ hist_w)
           - space.stiffness @ hist_t
           + config.block_factor(n) * state.block)
    if state.has_source:
        # g^0 = 0, so the row gload[0] contributes nothing
        rhs += wt[1] @ state.gload[:n] + config.shift_values[0] * state.gload[n]
    state.W[n] = fem1d.solve_tridiagonal(system, rhs)
    state.filled = max(state.filled, n)
    return state.W[n]


def solve(config: SchemeConfig, problem: ProblemSpec, space: Space) -> Trajectory:
    traj = init_trajectory(config, problem, space)
    system = _system(config, space)
    for n in range(1, config.N + 1):
        step(config, problem, space, traj, n, system)
    return traj


def residual(traj: Trajectory, n: int) -> float:
    """
    Relative residual of the discrete equation at step n.

    Both sides are re-evaluated from the stored trajectory through the plain
    convolution operators. The normalization is the same expression with every
    weight, matrix entry and nodal value replaced by its absolute value, which
    is the natural rounding scale: stiffness rows cancel to O(h) on smooth data.
    """
    cfg, sp = traj.config, traj.space
    W, G = traj.W, traj.gload
    w, t = cfg.omega.values, cfg.shift_values
    scale_tau = cfg.tau ** (-cfg.alpha)
    c = cfg.block_factor(n)
    r = (sp.mass @ discrete_frac_derivative(w, cfg.tau, cfg.alpha, W, n)
         + sp.stiffness @ discrete_shift(t, W, n)
         - discrete_shift(t, G, n) - c * traj.block)
    absW = np.abs(W[: n + 1])
    scale = (_abs(sp.mass) @ (scale_tau * discrete_shift(np.abs(w), absW, n))
             + _abs(sp.stiffness) @ discrete_shift(np.abs(t), absW, n)
             + discrete_shift(np.abs(t), np.abs(G[: n + 1]), n) + abs(c) * np.abs(traj.block))
    top = np.max(scale)
    if top == 0.0:
        return 0.0
    return float(np.max(np.abs(r)) / top)


def _abs(T: TridiagonalMatrix) -> TridiagonalMatrix:
    return TridiagonalMatrix(np.abs(T.sub), np.abs(T.diag), np.abs(T.sup))


def l2_error(mesh: Mesh1D, U: np.ndarray, exact: Callable) -> float:
    """L2 norm of (P1 function with interior values U) - exact, by 4-point Gauss."""
    full = np.concatenate(([0.0], np.asarray(U, dtype=float), [0.0]))
    xq = mesh.quad_points
    Uq = full[:-1, None] * (1.0 - GAUSS_X) + full[1:, None] * GAUSS_X
    e = Uq - np.broadcast_to(exact(xq), xq.shape)
    return float(np.sqrt(mesh.h * np.sum((e * e) @ GAUSS_W)))


def l2_norm(mesh: Mesh1D, U: np.ndarray) -> float:
    return l2_error(mesh, U, lambda x: 0.0)
