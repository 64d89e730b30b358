"""Closed-form approximation bounds and the instability witness.

Every bound takes a :class:`BoundInputs` value object (certificate constants
plus the handful of spectral norms the formulas use) rather than recomputing
norms internally, so a sweep over H evaluates every bound with one consistent
certificate: the constants in front of the exponential must not vary with H.

The bounds:

* :func:`gain_gap_bound` — certified bound on ||K - L_1^{(H)}||, the gap
  between the optimal state-feedback gain and the first block of the optimal
  H-order DRC.  Decays like e^{-rho H}.
* :func:`cost_gap_bound` — bound on the average-cost excess of the truncated
  induced policy of a gain K over the cost of K itself; with K the optimal
  gain (:func:`optimal_cost_gap_bound`) it also bounds the optimal H-order
  DRC's cost gap, because the optimal DRC can only improve on the truncated
  policy.  Decays like e^{-2 rho H}.
* :func:`prestabilized_gain_gap_bound` — the gain gap bound evaluated on the
  transformed (pre-stabilized) quantities; bounds ||bar K - L_1^{(H)}||.

:func:`instability_witness` builds the classic hard plant (2's on the
diagonal, 1's on the superdiagonal, input only through the last coordinate)
on which no DRC of order H <= n can keep the state covariance bounded, and
compares the exact covariance against the closed-form lower bound that
certifies the blow-up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import drc_state_covariance
from .drc import DRCPolicy
from .exceptions import InvalidHorizon, NotPositiveDefinite, Singular
from .model import LQRSystem, StabilityCertificate, spectral_norm

__all__ = [
    "BoundInputs",
    "schur_lambda_min",
    "gain_gap_bound",
    "cost_gap_bound",
    "optimal_cost_gap_bound",
    "prestabilized_gain_gap_bound",
    "witness_plant",
    "instability_witness",
]

# Absolute slack on lambda_min in the witness PSD comparison.  The covariance
# entries grow like 4^t, so a relative tolerance would be vacuous.
WITNESS_PSD_TOL = 1e-8


@dataclass(frozen=True)
class BoundInputs:
    """Certificate plus norms: everything the closed-form bounds consume.

    ``cert`` must be valid simultaneously for the open loop A and the closed
    loop A + BK whose gain norm is ``normK``; ``lam`` is
    lambda_min(R - S Q^{-1} S'), the Schur-complement floor.
    """

    cert: StabilityCertificate
    normB: float
    normQ: float
    normS: float
    normR: float
    normK: float
    lam: float
    n_x: int

    def __post_init__(self):
        for name in ("normB", "normQ", "normS", "normR", "normK"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.lam <= 0:
            raise NotPositiveDefinite(
                f"lambda_min(R - S Q^{{-1}} S') = {self.lam:.6g} <= 0", lambda_min=self.lam
            )
        if self.n_x < 1:
            raise ValueError(f"n_x must be >= 1, got {self.n_x}")

    @classmethod
    def from_system(cls, sys: LQRSystem, K, cert: StabilityCertificate) -> "BoundInputs":
        K = np.atleast_2d(np.asarray(K, dtype=float))
        return cls(
            cert=cert,
            normB=spectral_norm(sys.B),
            normQ=spectral_norm(sys.Q),
            normS=spectral_norm(sys.S),
            normR=spectral_norm(sys.R),
            normK=spectral_norm(K),
            lam=schur_lambda_min(sys),
            n_x=sys.n_x,
        )


def schur_lambda_min(sys: LQRSystem) -> float:
    """lambda_min(R - S Q^{-1} S').

    Never smaller than lambda_min of the joint weight block, so it is
    positive for every accepted system; it floors lambda_min(M) for every
    assembled DRC system matrix, which is what puts it in the denominator of
    the gain gap bound.
    """
    eigs_Q = np.linalg.eigvalsh(sys.Q)
    if eigs_Q[0] <= 1e-14 * max(1.0, float(eigs_Q[-1])):
        raise Singular(f"Q is numerically singular (lambda_min = {eigs_Q[0]:.3e})")
    schur = sys.R - sys.S @ np.linalg.solve(sys.Q, sys.S.T)
    return float(np.linalg.eigvalsh((schur + schur.T) / 2.0)[0])


def gain_gap_bound(inp: BoundInputs, H: int) -> float:
    """Certified bound on ||K - L_1^{(H)}||: C e^{-rho H} with explicit C.

        2 tau^3 (||B||^2 ||K|| ||Q|| + ||B|| ||K|| ||S||) e^{-rho H}
        -----------------------------------------------------------
                 lam (1 - e^{-2 rho})^{5/2}

    Successive H multiply the bound by exactly e^{-rho}.
    """
    if H < 1:
        raise InvalidHorizon(f"H must be >= 1, got {H}")
    tau, rho = inp.cert.tau, inp.cert.rho
    decay2 = 1.0 - float(np.exp(-2.0 * rho))
    numer = 2.0 * tau**3 * (inp.normB**2 * inp.normK * inp.normQ + inp.normB * inp.normK * inp.normS)
    return numer * float(np.exp(-rho * H)) / (inp.lam * decay2**2.5)


def cost_gap_bound(inp: BoundInputs, H: int) -> float:
    """Bound on the cost excess of the order-H truncation of a gain's policy.

        n_x^2 e^{-2 rho H} ( ||R|| + 4 tau^4 (||B|| ||K||^2 + ||K||)
                                     (||B|| ||Q|| + ||S||) / (1 - e^{-2 rho})^3 )

    Successive H multiply the bound by exactly e^{-2 rho}.
    """
    if H < 1:
        raise InvalidHorizon(f"H must be >= 1, got {H}")
    tau, rho = inp.cert.tau, inp.cert.rho
    decay2 = 1.0 - float(np.exp(-2.0 * rho))
    inner = inp.normR + 4.0 * tau**4 * (inp.normB * inp.normK**2 + inp.normK) * (
        inp.normB * inp.normQ + inp.normS
    ) / decay2**3
    return inp.n_x**2 * float(np.exp(-2.0 * rho * H)) * inner


def optimal_cost_gap_bound(inp: BoundInputs, H: int) -> float:
    """Bound on C(optimal H-order DRC) - C(optimal gain).

    The same expression as :func:`cost_gap_bound` with ``inp`` built from the
    optimal gain: the optimal DRC costs no more than the truncated induced
    policy the bound covers.
    """
    return cost_gap_bound(inp, H)


def prestabilized_gain_gap_bound(inp_bar: BoundInputs, H: int) -> float:
    """Gain gap bound on the pre-stabilized system.

    ``inp_bar`` carries the transformed quantities: norms of bar Q, bar S and
    of bar K = K - K0, the Schur floor lambda_min(R - bar S bar Q^{-1} bar S'),
    and a certificate valid for both A + B K0 and A + B K.  Bounds
    ||bar K - L_1^{(H)}|| for the DRC synthesized on the transformed system.
    With K0 = 0 it reduces to :func:`gain_gap_bound` on the original system.
    """
    return gain_gap_bound(inp_bar, H)


# ---------------------------------------------------------------------------
# Instability witness
# ---------------------------------------------------------------------------

def witness_plant(n: int) -> LQRSystem:
    """The order-n plant no low-order DRC can stabilize.

    A has 2's on the diagonal and 1's on the superdiagonal; the input enters
    only through the last coordinate (B = e_n).  Weights are identity (they
    play no role in the covariance analysis; they just make the instance a
    valid system).
    """
    if n < 1:
        raise InvalidHorizon(f"n must be >= 1, got {n}")
    A = 2.0 * np.eye(n) + np.diag(np.ones(n - 1), 1)
    B = np.zeros((n, 1))
    B[n - 1, 0] = 1.0
    return LQRSystem(A=A, B=B, Q=np.eye(n), R=np.eye(1), S=np.zeros((1, n)))


def instability_witness(n: int, H: int, policy: DRCPolicy, t: int):
    """Lower-bound matrix for the witness plant's covariance, plus a check.

    Returns ``(lower_bound, holds)`` where

        lower_bound = (e_1' A^H (A^H)' e_1) * sum_{k=H}^{t} A^{k-H} e_1 e_1'
                      (A^{k-H})'

    and ``holds`` is whether the exact state covariance dominates it in the
    PSD order, i.e. lambda_min(covariance - lower_bound) >= -1e-8.  The
    covariance is evaluated after t+1 disturbances so that both sides count
    the same noise terms w_0 ... w_t.

    The construction relies on the input having no effect on the first
    coordinate for the first H steps: e_1' A^{H-k} B = 0 for 1 <= k <= H.
    That holds exactly while the exponent stays <= n - 2 and is asserted for
    that range; at H = n the k = 1 term is 1, an edge the caller accepts when
    asking for the maximal order (n = 1 being the extreme case).
    """
    if H < 1 or H > n:
        raise InvalidHorizon(f"the witness covers 1 <= H <= n, got H={H}, n={n}")
    if t < H:
        raise InvalidHorizon(f"t must be >= H, got t={t}, H={H}")
    if policy.H != H or policy.n_u != 1 or policy.n_x != n:
        raise InvalidHorizon(
            f"policy must be order {H} with 1 x {n} blocks, got order "
            f"{policy.H} with {policy.n_u} x {policy.n_x}"
        )
    sys = witness_plant(n)
    A = sys.A

    power = np.eye(n)  # walks through A^0 .. A^H
    for j in range(min(H, n - 1)):
        assert power[0, n - 1] == 0.0, f"structural fact broken at exponent {j}"
        power = power @ A
    for _ in range(min(H, n - 1), H):
        power = power @ A
    c = float(power[0, :] @ power[0, :])  # e_1' A^H (A^H)' e_1

    e1 = np.zeros(n)
    e1[0] = 1.0
    bound = np.zeros((n, n))
    v = e1
    for _ in range(H, t + 1):
        bound += np.outer(v, v)
        v = A @ v
    bound *= c

    cov = drc_state_covariance(sys, policy, t + 1)
    lam_min = float(np.linalg.eigvalsh(cov - bound)[0])
    return bound, lam_min >= -WITNESS_PSD_TOL
