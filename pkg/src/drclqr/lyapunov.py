"""Infinite-horizon Gramian accumulation and discrete Sylvester solves.

Two pieces of machinery used by the controller-assembly and residual code:

* :func:`gramian` computes G = sum_{t>=0} (A^t)' Q A^t, the open-loop
  infinite-horizon state-cost accumulator, by the squaring (doubling)
  recursion.  G exists iff A is stable and satisfies A'GA + Q = G.
* :func:`solve_dsylvester` solves the discrete Sylvester equation
  A'XB + C = X by one dense vectorized linear solve.  The equation has a
  unique solution iff no eigenvalue product lambda_i(A)*mu_j(B) equals 1.

Problem sizes here are desk scale (n of a few tens at most), so the O(n^6)
Kronecker solve is perfectly serviceable and trivially auditable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, SingularPencil, Unstable
from .model import StabilityCertificate, spectral_norm, spectral_radius

__all__ = ["Gramian", "gramian", "solve_dsylvester", "gramian_power_bound"]

# |lambda*mu - 1| at or below this means the Sylvester pencil is singular.
PENCIL_TOL = 1e-10


@dataclass(frozen=True)
class Gramian:
    """G = sum_{t>=0} (A^t)' Q A^t together with its fixed-point defect.

    ``defect`` is ||A'GA + Q - G|| (spectral norm), reported so callers can
    see how tightly the accumulation converged.
    """

    G: np.ndarray
    defect: float


def gramian(A, Q, tol: float = 1e-13) -> Gramian:
    """Accumulate G = sum_{t>=0} (A^t)' Q A^t by repeated squaring.

    Starting from G_0 = Q, A_0 = A, the recursion

        G_{j+1} = G_j + A_j' G_j A_j,    A_{j+1} = A_j @ A_j

    doubles the number of series terms captured per step; it stops when
    ||A_j||^2 * ||G_j|| <= tol, i.e. when the next contribution cannot move
    the sum.  The result is symmetrized (the recursion preserves symmetry up
    to round-off) and the Lyapunov defect ||A'GA + Q - G|| is reported.

    Raises :class:`Unstable` when spectral_radius(A) >= 1: the series
    diverges and G is undefined.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if A.shape[0] != A.shape[1] or A.shape != Q.shape:
        raise DimensionMismatch(f"gramian needs square A and Q of equal shape, got {A.shape} and {Q.shape}")
    sr = spectral_radius(A)
    if sr >= 1.0:
        raise Unstable(f"spectral radius {sr:.6g} >= 1; the Gramian series diverges")

    G = Q.copy()
    Aj = A.copy()
    while spectral_norm(Aj) ** 2 * spectral_norm(G) > tol:
        G = G + Aj.T @ G @ Aj
        Aj = Aj @ Aj
    G = (G + G.T) / 2.0
    defect = spectral_norm(A.T @ G @ A + Q - G)
    return Gramian(G=G, defect=defect)


def solve_dsylvester(A, B, C) -> np.ndarray:
    """Solve the discrete Sylvester equation  A'XB + C = X  for X.

    Vectorizing column-major turns the equation into

        (I - kron(B', A')) vec(X) = vec(C),

    a dense n^2 x n^2 solve.  Uniqueness requires lambda_i(A) * mu_j(B) != 1
    for every eigenvalue pair; :class:`SingularPencil` is raised when any
    product comes within ``PENCIL_TOL`` of 1.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n) or C.shape != (n, n):
        raise DimensionMismatch(
            f"solve_dsylvester needs three n x n matrices, got {A.shape}, {B.shape}, {C.shape}"
        )

    lam = np.linalg.eigvals(A)
    mu = np.linalg.eigvals(B)
    products = np.outer(lam, mu)
    closest = float(np.min(np.abs(products - 1.0)))
    if closest <= PENCIL_TOL:
        raise SingularPencil(
            f"eigenvalue product within {closest:.3e} of 1; A'XB + C = X has no unique solution"
        )

    coeff = np.eye(n * n) - np.kron(B.T, A.T)
    x = np.linalg.solve(coeff, C.flatten(order="F"))
    return x.reshape((n, n), order="F")


def gramian_power_bound(cert: StabilityCertificate, normQ: float, m: int) -> float:
    """Certified upper bound on ||G A^m||.

    With ||A^k|| <= tau e^{-rho k} the series for G A^m telescopes into

        ||G A^m|| <= tau^2 ||Q|| e^{-rho m} / (1 - e^{-2 rho}),

    which is what this returns.  Each increment of m multiplies the bound by
    e^{-rho}.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    decay = float(np.exp(-2.0 * cert.rho))
    return cert.tau**2 * normQ * float(np.exp(-cert.rho * m)) / (1.0 - decay)
