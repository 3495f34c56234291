"""Classical and Bures chi-squared divergences."""

from typing import NamedTuple

import numpy as np

from . import tolerances as tol
from .errors import DimMismatch, SupportViolation, ValidationError
from .operators import Eigensystem, as_state, eigh, full_rank_state


def as_prob(p) -> np.ndarray:
    """Validate a probability vector: nonnegative entries summing to one."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValidationError("probability vector must be one-dimensional and nonempty")
    if np.any(p < 0):
        raise ValidationError(f"negative probability {p.min():.3e}")
    if abs(p.sum() - 1) > tol.PROB_SUM:
        raise ValidationError(f"probabilities sum to {float(p.sum())!r}")
    return p


def check_support(p, q=None):
    """Raise SupportViolation if ``q`` (or, with ``q=None``, any outcome) needs ``p_i < p_floor``."""
    low = p < tol.P_FLOOR
    if q is not None:
        if len(p) != len(q):
            raise DimMismatch(f"lengths {len(p)} and {len(q)} differ")
        low &= q > 0
    if np.any(low):
        i = int(np.argmax(low))
        raise SupportViolation(f"outcome {i} has hypothesis probability {p[i]:.3e}")


def chi2_divergence(p, q) -> float:
    """``sum_i (q_i - p_i)^2 / p_i``; outcomes with ``p_i = q_i = 0`` are skipped."""
    p, q = as_prob(p), as_prob(q)
    check_support(p, q)
    m = p >= tol.P_FLOOR
    return float(np.sum((q[m] - p[m]) ** 2 / p[m]))


def kl_divergence(p, q) -> float:
    """``sum_i p_i ln(p_i / q_i)`` with the convention ``0 ln 0 = 0``."""
    p, q = as_prob(p), as_prob(q)
    if len(p) != len(q):
        raise DimMismatch(f"lengths {len(p)} and {len(q)} differ")
    m = p > 0
    if np.any(q[m] <= 0):
        raise SupportViolation("p puts mass where q vanishes")
    return float(np.sum(p[m] * np.log(p[m] / q[m])))


def apply_omega(sigma, x, regularize_deficient=True) -> np.ndarray:
    """Solve ``(sigma Y + Y sigma)/2 = X`` for ``Y``.

    In the eigenbasis of sigma this is ``Y_ab = 2 X_ab / (lambda_a + lambda_b)``.
    """
    sigma, _ = full_rank_state(sigma, regularize_deficient)
    x = np.asarray(x, dtype=complex)
    if x.shape != sigma.matrix.shape:
        raise DimMismatch(f"shapes {x.shape} and {sigma.matrix.shape} differ")
    lam, u = sigma.eigensystem
    xt = u.conj().T @ x @ u
    yt = 2 * xt / (lam[:, None] + lam[None, :])
    return u @ yt @ u.conj().T


class BuresResult(NamedTuple):
    value: float
    omega_rho: np.ndarray
    optimal_basis: Eigensystem
    regularized: bool


def bures_chi2(sigma, rho, regularize_deficient=True) -> BuresResult:
    """``Tr[(rho - sigma) Omega_sigma(rho - sigma)]``, with ``Omega_sigma(rho)`` and its eigenbasis.

    The eigenbasis of ``Omega_sigma(rho)`` is the projective measurement that
    attains the value as a classical chi-squared divergence.
    """
    rho = as_state(rho)
    sigma, applied = full_rank_state(sigma, regularize_deficient)
    if rho.dim != sigma.dim:
        raise DimMismatch(f"dimensions {sigma.dim} and {rho.dim} differ")
    diff = rho.matrix - sigma.matrix
    value = np.trace(diff @ apply_omega(sigma, diff)).real
    omega_rho = apply_omega(sigma, rho.matrix)
    omega_rho = (omega_rho + omega_rho.conj().T) / 2
    return BuresResult(max(float(value), 0.0), omega_rho, eigh(omega_rho), applied)


def omega_superoperator(sigma, regularize_deficient=True) -> np.ndarray:
    """Matrix of ``Omega_sigma`` acting on row-major vectorized operators.

    ``X -> (sigma X + X sigma)/2`` becomes ``(sigma (x) 1 + 1 (x) sigma^T)/2``
    under ``vec``; this returns its inverse via a dense solve, independently of
    the eigenbasis route used by :func:`apply_omega`.
    """
    sigma, _ = full_rank_state(sigma, regularize_deficient)
    s = sigma.matrix
    eye = np.eye(sigma.dim)
    half = (np.kron(s, eye) + np.kron(eye, s.T)) / 2
    return np.linalg.inv(half)


def bures_chi2_vectorized(sigma, rho, regularize_deficient=True) -> float:
    """``<rho| Omega |rho> - 1`` computed with :func:`omega_superoperator`."""
    rho = as_state(rho)
    r = rho.matrix.reshape(-1)
    om = omega_superoperator(sigma, regularize_deficient)
    return float((r.conj() @ om @ r).real - 1)


def lemma1_optimal_basis(sigma, rho, regularize_deficient=True):
    """Projective measurement in the eigenbasis of ``Omega_sigma(rho)``.

    Its induced classical chi-squared divergence equals the Bures value, the
    maximum over all POVMs.
    """
    from .povm import Povm

    res = bures_chi2(sigma, rho, regularize_deficient)
    return Povm.from_basis(res.optimal_basis.vectors, prefix="omega")
