"""Independent oracles the tests compare production code against.

Everything here deliberately takes a different computational route from the
package: value iteration instead of the fixed-point DARE solver, Kronecker
and plain series summation instead of the doubling Gramian, brute-force tail
summation instead of the Sylvester closed form, power growth instead of
eigenvalues.  Slow is fine; independent is the point.
"""

import numpy as np

from drclqr import LQRSystem, spectral_radius


def value_iteration_dare(sys_, steps=200):
    """Finite-horizon backward recursion in Joseph form.

    Each step computes the one-step gain and propagates
    P <- Acl'PAcl + Q + K'RK + K'S + S'K, which is algebraically the same
    fixed point as the production solver but a different code path (explicit
    closed-loop form, numpy solve instead of Cholesky).
    """
    P = sys_.Q.copy()
    K = None
    for _ in range(steps):
        inner = sys_.R + sys_.B.T @ P @ sys_.B
        K = -np.linalg.solve(inner, sys_.B.T @ P @ sys_.A + sys_.S)
        A_cl = sys_.A + sys_.B @ K
        P = A_cl.T @ P @ A_cl + sys_.Q + K.T @ sys_.R @ K + K.T @ sys_.S + sys_.S.T @ K
        P = (P + P.T) / 2.0
    return P, K


def kron_gramian(A, Q):
    """Direct vectorized solve of G = A'GA + Q (O(n^6), test use only)."""
    n = A.shape[0]
    coeff = np.eye(n * n) - np.kron(A.T, A.T)
    g = np.linalg.solve(coeff, Q.flatten(order="F"))
    return g.reshape((n, n), order="F")


def series_gramian(A, Q, tail=1e-14):
    """Explicit series sum_{t>=0} (A^t)'QA^t, cut when ||A^t||^2 ||Q|| <= tail."""
    G = np.zeros_like(Q)
    At = np.eye(A.shape[0])
    nq = np.linalg.norm(Q, 2)
    for _ in range(100000):
        G = G + At.T @ Q @ At
        At = At @ A
        if np.linalg.norm(At, 2) ** 2 * nq <= tail:
            break
    return G


def series_dsylvester(A, B, C, tol=1e-14, max_terms=100000):
    """X = sum_{j>=0} (A')^j C B^j, the expansion of A'XB + C = X."""
    X = np.zeros_like(C)
    term = C.copy()
    for _ in range(max_terms):
        X = X + term
        term = A.T @ term @ B
        if np.linalg.norm(term, 2) <= tol * (1.0 + np.linalg.norm(X, 2)):
            break
    return X + term


def series_truncation_residual(sys_, G, K, H, tol=1e-16, max_terms=100000):
    """Brute-force tail sum of the truncation defect blocks.

    Block k accumulates -B'(A')^{H-k+j} (A'GB + S') K (A+BK)^{H+j} over
    j >= 0, stopping when the term norm falls below tol relative to the sum.
    """
    Gm = G.G if hasattr(G, "G") else G
    A, B = sys_.A, sys_.B
    A_cl = A + B @ K
    core = -(A.T @ Gm @ B + sys_.S.T) @ K
    blocks = []
    for k in range(1, H + 1):
        left = np.linalg.matrix_power(A.T, H - k)
        right = np.linalg.matrix_power(A_cl, H)
        total = np.zeros((B.shape[1], A.shape[0]))
        for _ in range(max_terms):
            term = B.T @ left @ core @ right
            total = total + term
            if np.linalg.norm(term, 2) <= tol * max(1e-30, np.linalg.norm(total, 2)):
                break
            left = A.T @ left
            right = right @ A_cl
        blocks.append(total)
    return blocks


def power_growth_radius(M, k=2000):
    """||M^k||^{1/k}: converges to the spectral radius from the norm side."""
    P = np.linalg.matrix_power(M, k)
    return float(np.linalg.norm(P, 2) ** (1.0 / k))


def random_system(rng, n_max=6, m_max=3, sr_range=(0.285, 0.95), margin=0.1):
    """A random accepted system with spectral radius drawn from sr_range.

    The joint weight block is W W' + margin*I, sliced into Q, R, S, so it is
    positive definite by construction with eigenvalue floor >= margin.
    """
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    A = rng.normal(size=(n, n))
    sr = spectral_radius(A)
    while sr == 0.0:
        A = rng.normal(size=(n, n))
        sr = spectral_radius(A)
    A = A * (rng.uniform(*sr_range) / sr)
    B = rng.normal(size=(n, m))
    W = rng.normal(size=(n + m, n + m))
    joint = W @ W.T + margin * np.eye(n + m)
    return LQRSystem(A=A, B=B, Q=joint[:n, :n], R=joint[n:, n:], S=joint[n:, :n])


def random_unstable_system(rng, n=3, m=1, sr=1.3, margin=0.1):
    """Like random_system but with spectral radius pushed above 1."""
    A = rng.normal(size=(n, n))
    A = A * (sr / spectral_radius(A))
    B = rng.normal(size=(n, m))
    W = rng.normal(size=(n + m, n + m))
    joint = W @ W.T + margin * np.eye(n + m)
    return LQRSystem(A=A, B=B, Q=joint[:n, :n], R=joint[n:, n:], S=joint[n:, :n])
