"""
Piecewise-linear finite elements for -u'' on an interval with zero Dirichlet data.

Everything lives on interior nodes only; boundary values are implicitly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

# 4-point Gauss-Legendre rule mapped to [0, 1]
_gx, _gw = np.polynomial.legendre.leggauss(4)
GAUSS_X = 0.5 * (_gx + 1.0)
GAUSS_W = 0.5 * _gw


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class Mesh1D:
    a: float
    b: float
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("need at least one interior node")
        if not self.b > self.a:
            raise ValueError("empty interval")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.M + 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        """All M + 2 nodes including both endpoints."""
        return self.a + self.h * np.arange(self.M + 2)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @cached_property
    def quad_points(self) -> np.ndarray:
        """Gauss points, shape (M + 1 elements, 4)."""
        return self.nodes[:-1, None] + self.h * GAUSS_X[None, :]


@dataclass(frozen=True)
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix stored as (sub, diag, super)."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.sub) != n - 1 or len(self.sup) != n - 1:
            raise ValueError("off-diagonals must have length len(diag) - 1")
        for arr in (self.sub, self.diag, self.sup):
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.diag)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Product with a vector, or with each row of a (K, M) stack."""
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[..., :-1] += self.sup * x[..., 1:]
        y[..., 1:] += self.sub * x[..., :-1]
        return y

    __matmul__ = matvec

    def __add__(self, other: "TridiagonalMatrix") -> "TridiagonalMatrix":
        return TridiagonalMatrix(self.sub + other.sub, self.diag + other.diag, self.sup + other.sup)

    def scaled(self, c: float) -> "TridiagonalMatrix":
        return TridiagonalMatrix(c * self.sub, c * self.diag, c * self.sup)

    def toarray(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def is_symmetric(self) -> bool:
        return np.array_equal(self.sub, self.sup)

    @cached_property
    def factor(self) -> np.ndarray:
        """Banded Cholesky factor (LAPACK upper form); raises if not SPD."""
        if not self.is_symmetric():
            raise NotPositiveDefiniteError("matrix is not symmetric")
        ab = np.zeros((2, self.size))
        ab[0, 1:] = self.sup
        ab[1] = self.diag
        try:
            c = scipy.linalg.cholesky_banded(ab, lower=False)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError(str(exc)) from None
        c.setflags(write=False)
        return c

    def pivots(self) -> np.ndarray:
        """Elimination pivots d_i; all positive iff the matrix is SPD."""
        return self.factor[1] ** 2


def assemble(mesh: Mesh1D) -> tuple[TridiagonalMatrix, TridiagonalMatrix]:
    """P1 mass and stiffness matrices on the interior nodes."""
    h, M = mesh.h, mesh.M
    mass = TridiagonalMatrix(np.full(M - 1, h / 6), np.full(M, 2 * h / 3), np.full(M - 1, h / 6))
    stiff = TridiagonalMatrix(np.full(M - 1, -1 / h), np.full(M, 2 / h), np.full(M - 1, -1 / h))
    return mass, stiff


def solve_tridiagonal(T: TridiagonalMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve ``T x = rhs`` for SPD tridiagonal T in O(M) using its cached factor."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != T.size:
        raise ValueError(f"rhs has length {rhs.shape[0]}, matrix has size {T.size}")
    return scipy.linalg.cho_solve_banded((T.factor, False), rhs)


def hat(mesh: Mesh1D, k: int):
    """The interior basis function attached to interior node k (0-based)."""
    xk, h = mesh.interior[k], mesh.h

    def phi(x):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(x) - xk) / h)

    return phi


def load_vector(mesh: Mesh1D, f) -> np.ndarray:
    """``b_i = int f phi_i`` with 4-point Gauss on every element."""
    xq = mesh.quad_points
    fq = np.broadcast_to(np.asarray(f(xq), dtype=float), xq.shape)
    # on element e = [x_e, x_{e+1}], the left node's hat is 1 - s and the right's is s
    wl = mesh.h * GAUSS_W * (1.0 - GAUSS_X)
    wr = mesh.h * GAUSS_W * GAUSS_X
    left = fq @ wl      # contributes to node e
    right = fq @ wr     # contributes to node e + 1
    # all-node vector, boundary entries dropped
    b = np.zeros(mesh.M + 2)
    b[:-1] += left
    b[1:] += right
    return b[1:-1]


def indicator_load(mesh: Mesh1D, c: float, d: float) -> np.ndarray:
    """``b_i = int_c^d phi_i`` exactly, for c < d inside the mesh interval."""
    if not (mesh.a <= c < d <= mesh.b):
        raise ValueError("indicator support must be a subinterval of the mesh")
    h = mesh.h
    xi = mesh.interior
    # antiderivative of the reference hat, normalized so that H(-1) = 0, H(1) = 1
    def H(s):
        s = np.clip(s, -1.0, 1.0)
        return np.where(s < 0, 0.5 * (1 + s) ** 2, 1.0 - 0.5 * (1 - s) ** 2)

    return h * (H((d - xi) / h) - H((c - xi) / h))


def l2_project(mesh: Mesh1D, f=None, indicator: tuple[float, float] | None = None,
               mass: TridiagonalMatrix | None = None) -> np.ndarray:
    """
    L2 projection onto the interior P1 space.

    Pass either a callable ``f`` (integrated by Gauss quadrature) or
    ``indicator=(c, d)`` for the characteristic function of (c, d), which is
    integrated exactly.
    """
    if (f is None) == (indicator is None):
        raise ValueError("give exactly one of f or indicator")
    if mass is None:
        mass, _ = assemble(mesh)
    b = indicator_load(mesh, *indicator) if indicator is not None else load_vector(mesh, f)
    return solve_tridiagonal(mass, b)


def ritz_project(mesh: Mesh1D, dv, stiffness: TridiagonalMatrix | None = None) -> np.ndarray:
    """Ritz projection from the derivative ``dv``: solve ``A x = (v', phi_i')``."""
    if stiffness is None:
        _, stiffness = assemble(mesh)
    xq = mesh.quad_points
    dq = np.broadcast_to(np.asarray(dv(xq), dtype=float), xq.shape)
    # phi' is +1/h on the element left of its node and -1/h on the right one
    elem = (dq @ GAUSS_W)  # = (1/h) * int_e v'
    b = elem[:-1] - elem[1:]
    return solve_tridiagonal(stiffness, b)


def interpolate(mesh: Mesh1D, v) -> np.ndarray:
    return np.asarray(v(mesh.interior), dtype=float)


def evaluate(mesh: Mesh1D, U: np.ndarray, x) -> np.ndarray:
    """Evaluate the P1 function with interior values U (zero at the ends) at x."""
    full = np.concatenate(([0.0], np.asarray(U, dtype=float), [0.0]))
    return np.interp(x, mesh.nodes, full)
