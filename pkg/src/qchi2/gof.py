"""Divergence rate of the optimal goodness-of-fit measurement and planning formulas."""

import math
from typing import NamedTuple

import numpy as np

from . import tolerances as tol
from .chi2stat import critical_value
from .divergences import as_prob, chi2_divergence, check_support
from .operators import as_state, regularize


class DivergenceRateResult(NamedTuple):
    xi: float
    mu_S: float
    S: np.ndarray
    regularized: bool
    rank_deficient: bool


class UpperBoundResult(NamedTuple):
    matrix: np.ndarray
    xi: float


class SampleSize(NamedTuple):
    n: int
    raw: float
    xi: float
    critical_value: float


def s_matrix(eigenvalues) -> np.ndarray:
    """``diag(lambda) - lambda lambda^T``, expressed in the eigenbasis of the state.

    The negated matrix generates a classical Markov semigroup: it is PSD and
    annihilates the all-ones vector.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    return np.diag(lam) - np.outer(lam, lam)


def _spectrum(sigma, regularize_deficient):
    sigma = as_state(sigma)
    deficient = not sigma.is_full_rank
    applied = False
    if regularize_deficient and deficient:
        sigma, applied = regularize(sigma)
    return np.clip(sigma.eigenvalues, 0.0, None), applied, deficient


def divergence_rate(sigma, regularize_deficient=False) -> DivergenceRateResult:
    """Worst-case chi-squared divergence per squared Frobenius distance.

    ``xi = 1 / (1 + mu)`` with ``mu`` the largest eigenvalue of
    :func:`s_matrix`.  Only the spectrum of ``sigma`` enters and no inversion
    takes place, so rank-deficient states are handled exactly; pass
    ``regularize_deficient=True`` to evaluate the regularized state instead.
    """
    lam, applied, deficient = _spectrum(sigma, regularize_deficient)
    s = s_matrix(lam)
    mu = float(np.linalg.eigvalsh(s)[-1])
    mu = max(mu, 0.0)
    return DivergenceRateResult(1.0 / (1.0 + mu), mu, s, applied, deficient)


def upper_bound_matrix(sigma, regularize_deficient=False) -> UpperBoundResult:
    """Second route to the divergence rate.

    Builds ``P diag(1/(1+lambda)) P`` where ``P`` projects out the direction
    ``sqrt(lambda/(1+lambda))`` and returns it with its smallest eigenvalue
    above ``tolerances.EPS_RANK`` (the projected-out direction is the zero mode).
    """
    lam, _, _ = _spectrum(sigma, regularize_deficient)
    w = np.sqrt(lam / (1 + lam))
    w = w / np.linalg.norm(w)
    p = np.eye(len(lam)) - np.outer(w, w)
    m = p @ np.diag(1 / (1 + lam)) @ p
    m = (m + m.T) / 2
    ev = np.linalg.eigvalsh(m)
    nonzero = ev[ev > tol.EPS_RANK]
    return UpperBoundResult(m, float(nonzero[0]))


def expected_statistic(p, q, n) -> float:
    """Exact mean of the Pearson statistic for ``n`` multinomial(q) draws tested against ``p``.

    ``(n - 1) chi2(p, q) + sum_i q_i/p_i - 1``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    p, q = as_prob(p), as_prob(q)
    check_support(p, q)
    mask = p >= tol.P_FLOOR
    return float((n - 1) * chi2_divergence(p, q) + np.sum(q[mask] / p[mask]) - 1)


def statistic_variance_null(p, n) -> float:
    """Variance of the Pearson statistic when the data follow ``p`` itself."""
    if n < 1:
        raise ValueError("n must be at least 1")
    p = as_prob(p)
    check_support(p, None)
    r = len(p)
    return float(2 * (r - 1) + (np.sum(1 / p) - r * r - 2 * r + 2) / n)


def required_samples(sigma, df, epsilon, alpha) -> SampleSize:
    """Shots for the mean statistic to reach the critical value at distance ``epsilon``.

    Solves ``df + n epsilon^2 xi = chi2_alpha`` for ``n`` and rounds up.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    xi = divergence_rate(sigma).xi
    crit = critical_value(df, alpha)
    raw = (crit - df) / (epsilon**2 * xi)
    return SampleSize(max(1, math.ceil(raw)), raw, xi, crit)
