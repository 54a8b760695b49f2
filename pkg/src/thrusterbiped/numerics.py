"""Small dense linear algebra, rotation utilities and fixed-step integration.

Everything here is a pure function. System sizes never exceed ~16, so all
solvers are plain dense routines with partial pivoting.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SingularMatrixError",
    "IntegrationError",
    "rot_x",
    "rot_y",
    "skew",
    "so3_exp",
    "so3_step",
    "dexpinv",
    "orthonormalize",
    "is_rotation",
    "rk4_step",
    "lu_factor",
    "lu_solve",
    "solve_linear",
    "fd_jacobian",
]

PIVOT_TOL = 1e-12


class SingularMatrixError(ValueError):
    """Raised when elimination hits a pivot below PIVOT_TOL."""

    def __init__(self, pivot_index: int, pivot_value: float):
        self.pivot_index = pivot_index
        self.pivot_value = pivot_value
        super().__init__(
            f"singular matrix: pivot {pivot_index} has magnitude {abs(pivot_value):.3e}"
        )


class IntegrationError(RuntimeError):
    """Raised when an RK4 stage evaluates to a non-finite value."""

    def __init__(self, stage: int):
        self.stage = stage
        super().__init__(f"non-finite derivative at RK4 stage {stage}")


def rot_x(angle: float) -> np.ndarray:
    """Right-handed rotation about the x axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    """Right-handed rotation about the y axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def skew(v) -> np.ndarray:
    """Skew-symmetric matrix such that skew(v) @ w == cross(v, w)."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def so3_exp(w) -> np.ndarray:
    """Exponential map: rotation by axis-angle vector w (Rodrigues)."""
    w = np.asarray(w, dtype=float)
    theta2 = float(w @ w)
    theta = np.sqrt(theta2)
    K = skew(w)
    if theta < 1e-8:
        # series keeps full precision near zero
        a = 1.0 - theta2 / 6.0
        b = 0.5 - theta2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta2
    return np.eye(3) + a * K + b * (K @ K)


def dexpinv(theta, omega) -> np.ndarray:
    """Inverse right-trivialized tangent of exp on SO(3), truncated to O(theta^3).

    Gives the coordinate velocity of the exponential chart: for R(t) = R0 exp([s]x)
    with body rate omega, s satisfies ds/dt = dexpinv(s, omega). The truncation
    is sufficient for 4th-order one-step integrators.
    """
    theta = np.asarray(theta, dtype=float)
    omega = np.asarray(omega, dtype=float)
    c1 = np.cross(theta, omega)
    return omega + 0.5 * c1 + np.cross(theta, c1) / 12.0


def orthonormalize(R) -> np.ndarray:
    """Project a near-rotation onto SO(3) by Gram-Schmidt on the columns."""
    R = np.asarray(R, dtype=float)
    c0 = R[:, 0] / np.linalg.norm(R[:, 0])
    c1 = R[:, 1] - (R[:, 1] @ c0) * c0
    c1 /= np.linalg.norm(c1)
    c2 = np.cross(c0, c1)
    return np.column_stack((c0, c1, c2))


def is_rotation(R, tol: float = 1e-9) -> bool:
    R = np.asarray(R)
    if R.shape != (3, 3):
        return False
    return (
        np.max(np.abs(R.T @ R - np.eye(3))) < tol
        and abs(np.linalg.det(R) - 1.0) < tol
    )


def so3_step(R, omega_body, dt: float) -> np.ndarray:
    """Propagate dR/dt = R [omega]x over dt (exact for constant body rate)."""
    return orthonormalize(np.asarray(R) @ so3_exp(np.asarray(omega_body) * dt))


def _check_stage(k, stage: int):
    if not np.all(np.isfinite(k)):
        raise IntegrationError(stage)
    return k


def rk4_step(f, x, t: float, dt: float):
    """Classical 4th-order Runge-Kutta update for dx/dt = f(x, t).

    Raises IntegrationError carrying the 1-based stage index if any stage
    derivative is non-finite.
    """
    h = 0.5 * dt
    k1 = _check_stage(f(x, t), 1)
    k2 = _check_stage(f(x + h * k1, t + h), 2)
    k3 = _check_stage(f(x + h * k2, t + h), 3)
    k4 = _check_stage(f(x + dt * k3, t + dt), 4)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def lu_factor(A):
    """LU factorization with partial pivoting; returns (LU, piv)."""
    LU = np.array(A, dtype=float)
    n = LU.shape[0]
    if LU.shape != (n, n):
        raise ValueError(f"matrix must be square, got {LU.shape}")
    piv = np.arange(n)
    for k in range(n):
        i = k + int(np.argmax(np.abs(LU[k:, k])))
        if abs(LU[i, k]) < PIVOT_TOL:
            raise SingularMatrixError(k, LU[i, k])
        if i != k:
            LU[[k, i]] = LU[[i, k]]
            piv[[k, i]] = piv[[i, k]]
        LU[k + 1 :, k] /= LU[k, k]
        LU[k + 1 :, k + 1 :] -= np.outer(LU[k + 1 :, k], LU[k, k + 1 :])
    return LU, piv


def lu_solve(LU, piv, b) -> np.ndarray:
    n = LU.shape[0]
    x = np.asarray(b, dtype=float)[piv].copy()
    for k in range(1, n):  # forward, unit lower triangle
        x[k] -= LU[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):  # backward
        x[k] = (x[k] - LU[k, k + 1 :] @ x[k + 1 :]) / LU[k, k]
    return x


def solve_linear(A, b) -> np.ndarray:
    """Solve A x = b by pivoted LU with one step of iterative refinement."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    LU, piv = lu_factor(A)
    x = lu_solve(LU, piv, b)
    x += lu_solve(LU, piv, b - A @ x)
    return x


def fd_jacobian(f, x, h=None) -> np.ndarray:
    """Central-difference Jacobian of f at x.

    Per-coordinate step defaults to 1e-6 * (1 + |x_i|), which balances
    truncation against round-off at the scales used here. Scalar inputs and
    outputs are handled transparently (the result is then 1x1).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    if h is None:
        steps = 1e-6 * (1.0 + np.abs(x))
    else:
        steps = np.full(n, float(h))
    cols = []
    for i in range(n):
        xp = x.copy()
        xm = x.copy()
        xp[i] += steps[i]
        xm[i] -= steps[i]
        fp = np.atleast_1d(np.asarray(f(xp if n > 1 else xp[0]), dtype=float))
        fm = np.atleast_1d(np.asarray(f(xm if n > 1 else xm[0]), dtype=float))
        cols.append((fp - fm) / (2.0 * steps[i]))
    return np.column_stack(cols)
