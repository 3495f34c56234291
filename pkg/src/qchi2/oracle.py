"""Brute-force verifiers for the closed forms.

Each verifier searches (randomly, then by local polishing where useful) for a
counterexample to one closed-form claim and returns an :class:`OracleReport`.
Nothing here calls the closed form it checks except to compare against it.
"""

from dataclasses import dataclass, field

import numpy as np

from .divergences import bures_chi2, chi2_divergence, lemma1_optimal_basis
from .errors import SingularTotal, ValidationError
from .operators import as_state, full_rank_state, traceless_hermitian_basis, validate_density
from .povm import (
    Povm,
    induced_distribution,
    is_informationally_complete,
    optimal_povm,
    validate_povm,
)

POVM_RETRIES = 16


@dataclass(frozen=True)
class SweepConfig:
    trials: int = 1000
    seed: int = 0
    dim: int = 2

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be positive")


@dataclass
class OracleReport:
    claim: str
    closed_form: float
    empirical: float
    gap: float
    trials: int
    seed: int
    verdict: bool
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.verdict)

    def to_dict(self):
        return {
            "claim": self.claim,
            "closed_form": self.closed_form,
            "empirical": self.empirical,
            "gap": self.gap,
            "trials": self.trials,
            "seed": self.seed,
            "verdict": self.verdict,
            "details": self.details,
        }


def _rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def _ginibre(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# -- random objects ----------------------------------------------------------


def random_density(dim, seed, rank=None):
    """Random state ``G G^dag / Tr`` from a complex Gaussian ``dim x rank`` matrix."""
    rng = _rng(seed)
    g = _ginibre(rng, (dim, rank or dim))
    m = g @ g.conj().T
    return validate_density(m / np.trace(m).real)


def _normalize_total(a):
    # E_i = T^{-1/2} A_i T^{-1/2} with T = sum_i A_i, batched over leading axes
    t = a.sum(axis=-3)
    w, v = np.linalg.eigh(t)
    if np.any(w[..., 0] <= 1e-12 * w[..., -1]):
        raise SingularTotal("sum of random PSD matrices is numerically singular")
    inv_sqrt = np.einsum("...ik,...k,...jk->...ij", v, 1 / np.sqrt(w), v.conj())
    e = inv_sqrt[..., None, :, :] @ a @ inv_sqrt[..., None, :, :]
    return (e + np.swapaxes(e, -1, -2).conj()) / 2


def random_povm_batch(dim, n_elements, count, rng):
    """``count`` random POVMs as an array of shape ``(count, n_elements, dim, dim)``."""
    g = _ginibre(rng, (count, n_elements, dim, dim))
    a = g @ np.swapaxes(g, -1, -2).conj()
    return _normalize_total(a)


def random_povm(dim, n_elements, seed, require_complete=False) -> Povm:
    """Random POVM, reproducible from ``seed``.

    On a singular total, or an incomplete POVM when ``require_complete`` is
    set, the next seed is tried, up to ``POVM_RETRIES`` times.
    """
    if n_elements < 2:
        raise ValidationError("a POVM needs at least two elements")
    for attempt in range(POVM_RETRIES):
        try:
            elems = random_povm_batch(dim, n_elements, 1, _rng(seed + attempt))[0]
        except SingularTotal:
            continue
        povm = validate_povm(elems)
        if require_complete and not is_informationally_complete(povm).complete:
            continue
        return povm
    raise SingularTotal(f"no usable random POVM after {POVM_RETRIES} seeds from {seed}")


def random_traceless_direction(dim, seed):
    """Hermitian, traceless, unit-Frobenius-norm matrix, uniform on that sphere."""
    rng = _rng(seed)
    return _directions(traceless_hermitian_basis(dim), rng, 1)[0]


def _directions(basis, rng, count):
    x = rng.standard_normal((count, len(basis)))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return np.einsum("tb,bij->tij", x, basis)


# -- structural matrices -----------------------------------------------------


def directional_form(povm, sigma, x) -> float:
    """``sum_i Tr[E_i X]^2 / Tr[E_i sigma]``: the chi-squared divergence per ``eps^2`` along ``X``."""
    sigma = as_state(sigma)
    p = np.einsum("kij,ji->k", povm.elements, sigma.matrix).real
    t = np.einsum("kij,ji->k", povm.elements, np.asarray(x)).real
    m = p > 0
    return float(np.sum(t[m] ** 2 / p[m]))


def directional_form_matrix(povm, sigma) -> np.ndarray:
    """The directional form as a real symmetric matrix in traceless Hermitian coordinates."""
    sigma = as_state(sigma)
    basis = traceless_hermitian_basis(sigma.dim)
    p = np.einsum("kij,ji->k", povm.elements, sigma.matrix).real
    m = p > 0
    rows = np.einsum("kij,bji->kb", povm.elements[m], basis).real / np.sqrt(p[m])[:, None]
    return rows.T @ rows


def l_matrix(povm, sigma) -> np.ndarray:
    """``L_ij = delta_ij Tr[E_i sigma] - Tr[E_i E_j sigma]``; PSD with zero row sums."""
    sigma = as_state(sigma)
    e = povm.elements
    cross = np.einsum("iab,jbc,ca->ij", e, e, sigma.matrix)
    p = np.einsum("kij,ji->k", e, sigma.matrix).real
    return np.diag(p) - cross


# -- verifiers ---------------------------------------------------------------


def _batch_chi2(elems, sigma, rho):
    p = np.einsum("tkij,ji->tk", elems, sigma).real
    q = np.einsum("tkij,ji->tk", elems, rho).real
    return np.sum((q - p) ** 2 / p, axis=1)


def verify_lemma1(sigma, rho, config=SweepConfig()) -> OracleReport:
    """Random POVMs never beat the Bures value; the Omega eigenbasis attains it.

    POVM sizes cycle through ``D .. D^2 + 2`` over the trials.
    """
    sigma, _ = full_rank_state(sigma)
    rho = as_state(rho)
    d = sigma.dim
    bures = bures_chi2(sigma, rho).value
    cand = lemma1_optimal_basis(sigma, rho)
    achieved = chi2_divergence(
        induced_distribution(cand, sigma), induced_distribution(cand, rho)
    )
    rng = _rng(config.seed)
    sizes = list(range(d, d * d + 3))
    best = -np.inf
    done = 0
    chunk = 2000
    while done < config.trials:
        for s in sizes:
            if done >= config.trials:
                break
            count = min(chunk // len(sizes) + 1, config.trials - done)
            elems = random_povm_batch(d, s, count, rng)
            best = max(best, float(_batch_chi2(elems, sigma.matrix, rho.matrix).max()))
            done += count
    tol_dom = 1e-9
    tol_sat = 1e-10 * max(1.0, bures)
    verdict = best <= bures + tol_dom and abs(achieved - bures) <= tol_sat
    return OracleReport(
        claim="Bures chi2 is the maximum classical chi2 over POVMs, attained by the Omega eigenbasis",
        closed_form=bures,
        empirical=max(best, achieved),
        gap=bures - best,
        trials=config.trials,
        seed=config.seed,
        verdict=bool(verdict),
        details={"best_random": best, "candidate": achieved, "candidate_gap": achieved - bures},
    )


def polish_minimum(q, x0, step=0.1, iterations=500):
    """Projected gradient descent of ``x^T Q x`` on the unit sphere.

    The step is halved whenever a move fails to decrease the value.
    """
    x = x0 / np.linalg.norm(x0)
    f = float(x @ q @ x)
    for _ in range(iterations):
        y = x - step * 2 * (q @ x)
        y /= np.linalg.norm(y)
        fy = float(y @ q @ y)
        if fy < f:
            x, f = y, fy
        else:
            step /= 2
            if step < 1e-12:
                break
    return x, f


def verify_xi(sigma, config=SweepConfig()) -> OracleReport:
    """Minimize the directional chi-squared form of the optimal POVM over traceless ``X``.

    Random unit directions are evaluated first; the best few are then
    polished.  The minimum must not fall below the divergence rate and must
    come within 2% of it.
    """
    sigma, applied = full_rank_state(sigma)
    opt = optimal_povm(sigma)
    q = directional_form_matrix(opt.povm, sigma)
    rng = _rng(config.seed)
    x = rng.standard_normal((config.trials, q.shape[0]))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    vals = np.einsum("ti,ij,tj->t", x, q, x)
    random_min = float(vals.min())
    starts = x[np.argsort(vals)[: min(8, config.trials)]]
    polished = min(polish_minimum(q, s)[1] for s in starts)
    found = min(random_min, polished)
    xi = opt.xi
    verdict = xi * (1 - 1e-6) <= found <= xi * 1.02
    return OracleReport(
        claim="optimal POVM attains the divergence rate in the worst direction",
        closed_form=xi,
        empirical=found,
        gap=(found - xi) / xi,
        trials=config.trials,
        seed=config.seed,
        verdict=bool(verdict),
        details={
            "random_min": random_min,
            "polished_min": polished,
            "regularized": applied,
            "basis_construction": opt.bases.construction,
        },
    )


def split_element(povm, index=0):
    """Move the largest rank-one component of element ``index`` into a new last element."""
    e = povm.elements[index]
    w, v = np.linalg.eigh(e)
    if np.sum(w > 1e-12) < 2:
        raise ValidationError(f"element {index} has rank below 2")
    top = w[-1] * np.outer(v[:, -1], v[:, -1].conj())
    elems = list(povm.elements)
    elems[index] = e - top
    elems.append(top)
    labels = list(povm.labels) + [f"{povm.labels[index]}'"]
    return validate_povm(elems, labels)


def _fisher_operator(elems, sigma):
    # sum_i |E_i><E_i| / <E_i|sigma> on row-major vectorized operators
    vecs = elems.reshape(len(elems), -1)
    p = np.einsum("kij,ji->k", elems, sigma).real
    return np.einsum("ka,k,kb->ab", vecs, 1 / p, vecs.conj())


def verify_split_dominance(povm, sigma, config=SweepConfig(), index=0) -> OracleReport:
    """Splitting a mixed element never lowers the directional form.

    Checks that the operator ``sum |E><E| / <E|sigma>`` grows in the PSD
    order, then evaluates both forms at random traceless directions.
    """
    sigma = as_state(sigma)
    after = split_element(povm, index)
    before_op = _fisher_operator(povm.elements, sigma.matrix)
    after_op = _fisher_operator(after.elements, sigma.matrix)
    diff = after_op - before_op
    min_eig = float(np.linalg.eigvalsh((diff + diff.conj().T) / 2)[0])
    rng = _rng(config.seed)
    xs = _directions(traceless_hermitian_basis(sigma.dim), rng, config.trials)
    worst = min(
        directional_form(after, sigma, x) - directional_form(povm, sigma, x) for x in xs
    )
    verdict = min_eig >= -1e-9 and worst >= -1e-12
    return OracleReport(
        claim="splitting a POVM element into rank-one parts cannot decrease the chi2 form",
        closed_form=0.0,
        empirical=min_eig,
        gap=min_eig,
        trials=config.trials,
        seed=config.seed,
        verdict=bool(verdict),
        details={"min_form_increase": worst},
    )
