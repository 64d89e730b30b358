"""Finite-order disturbance-response controllers (DRC).

An H-order DRC chooses the input as a linear function of the H most recent
disturbances,

    u_t = L_1 w_{t-1} + L_2 w_{t-2} + ... + L_H w_{t-H} ,

with each L_k an n_u x n_x block.  For a stable plant the optimal blocks solve
one symmetric positive-definite linear system

    M L + J = 0 ,

where M and J are built from the plant, the weights, and the infinite-horizon
Gramian G (see :func:`assemble` for the block formulas).  The module also
constructs the policy induced by a state-feedback gain K, whose blocks are
K(A+BK)^{k-1}, and evaluates the defect that truncating that infinite policy
at order H leaves in the first H block rows of the stationarity condition.
That defect decays exponentially in H, which is what makes low-order DRCs
good approximations of state feedback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import InvalidHorizon, NotPositiveDefinite, Unstable
from .lyapunov import Gramian, solve_dsylvester
from .model import LQRSystem, spectral_radius

__all__ = [
    "DRCPolicy",
    "DRCSystemMatrices",
    "assemble",
    "solve_drc",
    "induced_drc",
    "truncation_residual",
]


@dataclass(frozen=True)
class DRCPolicy:
    """An H-order disturbance-response controller: blocks L_1 ... L_H."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=float)) for b in self.blocks)
        if not blocks:
            raise InvalidHorizon("a DRC policy needs at least one block")
        shape = blocks[0].shape
        for i, b in enumerate(blocks, start=1):
            if b.shape != shape:
                raise InvalidHorizon(
                    f"block {i} has shape {b.shape}, expected {shape} like block 1"
                )
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @property
    def H(self) -> int:
        return len(self.blocks)

    @property
    def n_u(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def n_x(self) -> int:
        return self.blocks[0].shape[1]

    @property
    def first(self) -> np.ndarray:
        """L_1, the block that approximates the optimal state-feedback gain."""
        return self.blocks[0]

    def stacked(self) -> np.ndarray:
        """The blocks stacked vertically into an (H*n_u) x n_x matrix."""
        return np.vstack(self.blocks)

    @staticmethod
    def from_stacked(L, H: int) -> "DRCPolicy":
        """Unstack an (H*n_u) x n_x solve result into its H blocks."""
        L = np.atleast_2d(np.asarray(L, dtype=float))
        if H < 1 or L.shape[0] % H != 0:
            raise InvalidHorizon(f"cannot split {L.shape[0]} rows into {H} equal blocks")
        n_u = L.shape[0] // H
        return DRCPolicy(blocks=tuple(L[k * n_u : (k + 1) * n_u] for k in range(H)))


@dataclass(frozen=True)
class DRCSystemMatrices:
    """The assembled pair (M, J) whose solve M L = -J yields the optimal DRC."""

    M: np.ndarray
    J: np.ndarray
    H: int

    @property
    def n_u(self) -> int:
        return self.M.shape[0] // self.H


def _gram_matrix(G) -> np.ndarray:
    return G.G if isinstance(G, Gramian) else np.atleast_2d(np.asarray(G, dtype=float))


def assemble(sys: LQRSystem, G, H: int) -> DRCSystemMatrices:
    """Build the order-H system matrices M ((H n_u) sq.) and J ((H n_u) x n_x).

    With G the infinite-horizon Gramian of (A, Q), block (k, m) of M is

        B'GB + R                                    k = m
        B'G A^{k-m} B + S A^{k-m-1} B               k > m
        B'(A^{m-k})'G B + B'(A^{m-k-1})' S'         k < m

    and block k of J is  B'G A^k + S A^{k-1}.  Powers of A are computed once,
    incrementally, and reused across blocks.  M is symmetric by construction
    up to round-off (the k < m formula is the transpose of the k > m one).
    """
    if H < 1:
        raise InvalidHorizon(f"H must be >= 1, got {H}")
    Gm = _gram_matrix(G)
    A, B, S = sys.A, sys.B, sys.S
    n_u = sys.n_u

    # A^0 .. A^H, built incrementally
    powers = [np.eye(sys.n_x)]
    for _ in range(H):
        powers.append(powers[-1] @ A)

    BtG = B.T @ Gm
    M = np.empty((H * n_u, H * n_u))
    for k in range(1, H + 1):
        for m in range(1, H + 1):
            if k == m:
                block = BtG @ B + sys.R
            elif k > m:
                d = k - m
                block = BtG @ powers[d] @ B + S @ powers[d - 1] @ B
            else:
                d = m - k
                block = B.T @ powers[d].T @ Gm @ B + B.T @ powers[d - 1].T @ S.T
            M[(k - 1) * n_u : k * n_u, (m - 1) * n_u : m * n_u] = block

    J = np.vstack([BtG @ powers[k] + S @ powers[k - 1] for k in range(1, H + 1)])
    return DRCSystemMatrices(M=M, J=J, H=H)


def solve_drc(matrices: DRCSystemMatrices) -> DRCPolicy:
    """Solve M L = -J for the optimal order-H policy.

    M is positive definite under the standing assumption (its smallest
    eigenvalue is floored by that of the Schur complement R - S Q^{-1} S'),
    so the solve is a Cholesky factorization.  A factorization failure means
    an assumption was violated upstream and raises
    :class:`NotPositiveDefinite` with a lambda_min estimate; there is no
    least-squares fallback, by design.
    """
    M = (matrices.M + matrices.M.T) / 2.0
    try:
        chol = scipy.linalg.cho_factor(M, check_finite=False)
    except np.linalg.LinAlgError as exc:
        lam = float(np.linalg.eigvalsh(M)[0])
        raise NotPositiveDefinite(
            f"assembled M is not positive definite (lambda_min ~ {lam:.6g})",
            lambda_min=lam,
        ) from exc
    L = scipy.linalg.cho_solve(chol, -matrices.J, check_finite=False)
    return DRCPolicy.from_stacked(L, matrices.H)


def induced_drc(K, sys: LQRSystem, H: int) -> DRCPolicy:
    """First H blocks of the infinite-order policy induced by a gain K.

    Block k is K (A + BK)^{k-1}; block 1 is K itself, exactly.  Truncating at
    order H is what the approximation bounds in the bounds module quantify.
    """
    if H < 1:
        raise InvalidHorizon(f"H must be >= 1, got {H}")
    K = np.atleast_2d(np.asarray(K, dtype=float))
    A_cl = sys.A + sys.B @ K
    blocks = []
    right = np.eye(sys.n_x)  # (A+BK)^{k-1}, starts at identity so block 1 = K
    for _ in range(H):
        blocks.append(K @ right)
        right = right @ A_cl
    return DRCPolicy(blocks=tuple(blocks))


def truncation_residual(sys: LQRSystem, G, K, H: int) -> list:
    """Defect blocks left by the truncated induced policy, in closed form.

    Substituting the first H blocks of the induced infinite-order policy of
    the optimal gain K into the order-H stationarity condition leaves

        M @ stacked(induced) + J = E ,

    where block k of E collects the discarded tail.  Reindexing the tail sum
    collapses it into a discrete Sylvester fixed point: with

        W = -(A'GB + S') K,     Y = A'Y(A+BK) + W   (solved for Y),

    block k equals  B' (A')^{H-k} Y (A+BK)^H.  The Sylvester solve is exact
    up to the linear solver, so this is the reference path; a brute-force
    tail summation is kept in the test suite as the independent oracle.

    Requires A and A+BK both stable (the tail otherwise diverges).
    """
    if H < 1:
        raise InvalidHorizon(f"H must be >= 1, got {H}")
    Gm = _gram_matrix(G)
    K = np.atleast_2d(np.asarray(K, dtype=float))
    A, B = sys.A, sys.B
    A_cl = A + B @ K
    for name, M in (("A", A), ("A+BK", A_cl)):
        sr = spectral_radius(M)
        if sr >= 1.0:
            raise Unstable(f"{name} has spectral radius {sr:.6g} >= 1; tail sum diverges")

    W = -(A.T @ Gm @ B + sys.S.T) @ K
    Y = solve_dsylvester(A, A_cl, W)

    right = Y @ np.linalg.matrix_power(A_cl, H)
    blocks = [None] * H
    T = right
    for k in range(H, 0, -1):  # T = (A')^{H-k} Y (A+BK)^H as k walks down
        blocks[k - 1] = B.T @ T
        T = A.T @ T
    return blocks
