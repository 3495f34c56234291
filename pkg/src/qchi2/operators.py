"""Dense complex-matrix primitives: density matrices, eigensystems, vectorization.

Operators are plain ``numpy`` arrays of shape ``(D, D)``.  A validated quantum
state is wrapped in :class:`DensityMatrix`, which freezes the array and caches
its eigensystem.

Vectorization follows ``|A> = (A (x) 1)|I>`` with ``|I> = sum_k |kk>``, which
for row-major storage is just ``A.reshape(-1)``; then ``<vec A|vec B> =
Tr[A^dag B]``.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import tolerances as tol
from .errors import (
    ConvergenceFailure,
    DimMismatch,
    NotHermitian,
    NotPSD,
    SingularSigma,
    TraceNotOne,
)


class Eigensystem(NamedTuple):
    """Eigenvalues in descending order and matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def as_hermitian(m, tol_herm=None):
    """Return ``(M + M^dag)/2`` as a complex array after checking Hermiticity.

    Raises
    ------
    NotHermitian
        If the matrix is not square or deviates from its adjoint by more than
        ``tol_herm`` in any entry.
    """
    tol_herm = tol.HERM if tol_herm is None else tol_herm
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol_herm:
        raise NotHermitian(f"matrix deviates from its adjoint by {dev:.3e}")
    return (m + m.conj().T) / 2


def eigh(m):
    """Deterministic Hermitian eigendecomposition.

    Eigenvalues are sorted in descending order (ties keep LAPACK's order) and
    each eigenvector is rotated so that its first non-negligible component is
    real and positive.
    """
    h = as_hermitian(m)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        k = int(np.argmax(np.abs(col) > 1e-12))
        v[:, j] = col * (abs(col[k]) / col[k])
    return Eigensystem(w, v)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated quantum state. Construct through :func:`validate_density`."""

    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def eigensystem(self) -> Eigensystem:
        return eigh(self.matrix)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eigensystem.values

    @property
    def is_full_rank(self) -> bool:
        return bool(self.eigenvalues[-1] >= tol.EPS_RANK)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def validate_density(m) -> DensityMatrix:
    """Check that ``m`` is a Hermitian, PSD, unit-trace matrix.

    The input is symmetrized before the PSD and trace checks.
    """
    if isinstance(m, DensityMatrix):
        return m
    h = as_hermitian(m)
    w = np.linalg.eigvalsh(h)
    if w[0] < -tol.PSD:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} is below -{tol.PSD:g}")
    tr = np.trace(h).real
    if abs(tr - 1) > tol.TRACE:
        raise TraceNotOne(f"trace is {float(tr)!r}")
    return DensityMatrix(_frozen(h))


as_state = validate_density


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return validate_density(np.outer(psi, psi.conj()))


def maximally_mixed(dim) -> DensityMatrix:
    return validate_density(np.eye(dim) / dim)


def regularize(sigma, delta=None):
    """Mix a rank-deficient state with the identity.

    Returns ``(state, applied)``.  A state whose smallest eigenvalue is below
    ``tolerances.EPS_RANK`` is replaced by ``(1 - D delta) sigma + delta 1``;
    full-rank states are returned unchanged.
    """
    sigma = as_state(sigma)
    if sigma.is_full_rank:
        return sigma, False
    delta = tol.REG_DELTA if delta is None else delta
    d = sigma.dim
    m = (1 - d * delta) * sigma.matrix + delta * np.eye(d)
    return DensityMatrix(_frozen((m + m.conj().T) / 2)), True


def full_rank_state(sigma, regularize_deficient=True):
    """``sigma`` ready for inversion-like operations, plus the regularization flag."""
    sigma = as_state(sigma)
    if sigma.is_full_rank:
        return sigma, False
    if not regularize_deficient:
        raise SingularSigma(
            f"state has eigenvalue {sigma.eigenvalues[-1]:.3e} < {tol.EPS_RANK:g} "
            "and regularization is disabled"
        )
    return regularize(sigma)


def frobenius_distance(a, b) -> float:
    """``sqrt(Tr[(A-B)^dag (A-B)])``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise DimMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.linalg.norm(a - b))


def vec(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return a.reshape(-1).copy()


def devec(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise DimMismatch(f"length {v.size} is not a perfect square")
    return v.reshape(d, d).copy()


def traceless_hermitian_basis(dim) -> np.ndarray:
    """Orthonormal (Frobenius) basis of the traceless Hermitian ``dim x dim`` matrices.

    Returns an array of shape ``(dim**2 - 1, dim, dim)``: the symmetric and
    antisymmetric off-diagonal units followed by generalized Gell-Mann
    diagonals.
    """
    out = []
    s = 1 / np.sqrt(2)
    for i in range(dim):
        for j in range(i + 1, dim):
            a = np.zeros((dim, dim), dtype=complex)
            a[i, j] = a[j, i] = s
            out.append(a)
            b = np.zeros((dim, dim), dtype=complex)
            b[i, j] = -1j * s
            b[j, i] = 1j * s
            out.append(b)
    for k in range(1, dim):
        diag = np.zeros(dim)
        diag[:k] = 1
        diag[k] = -k
        out.append(np.diag(diag / np.linalg.norm(diag)).astype(complex))
    return np.array(out).reshape(-1, dim, dim)
