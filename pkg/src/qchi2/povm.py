"""POVMs, measurement designs, unbiased bases and the optimal goodness-of-fit measurement."""

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import tolerances as tol
from .errors import (
    CompletenessUnreachable,
    CompletenessViolated,
    DimMismatch,
    ElementNotPSD,
    InvalidPovm,
    ValidationError,
)
from .operators import Eigensystem, as_hermitian, as_state, eigh, regularize

# elements with every entry at most this large are treated as absent
ZERO_ELEMENT = 1e-15
FALLBACK_RETRIES = 32


@dataclass(frozen=True, eq=False)
class Povm:
    """Validated POVM; ``elements`` has shape ``(r, D, D)``."""

    elements: np.ndarray
    labels: tuple = ()

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    def __len__(self):
        return self.size

    @classmethod
    def from_basis(cls, vectors, prefix="e"):
        """Von Neumann measurement onto the orthonormal columns of ``vectors``."""
        v = np.asarray(vectors, dtype=complex)
        elems = np.einsum("ik,jk->kij", v, v.conj())
        labels = [f"{prefix}{k}" for k in range(v.shape[1])]
        return validate_povm(elems, labels)


def validate_povm(elems, labels=None) -> Povm:
    """Check PSD elements summing to the identity.

    Elements that are identically zero are dropped together with their labels;
    at least two elements must remain.
    """
    elems = [as_hermitian(e) for e in elems]
    if not elems:
        raise InvalidPovm("a POVM needs at least one element")
    d = elems[0].shape[0]
    if any(e.shape != (d, d) for e in elems):
        raise DimMismatch("POVM elements have different dimensions")
    if labels is None:
        labels = [f"E{i}" for i in range(len(elems))]
    if len(labels) != len(elems):
        raise InvalidPovm("number of labels differs from number of elements")
    kept = [(e, l) for e, l in zip(elems, labels) if np.max(np.abs(e)) > ZERO_ELEMENT]
    for i, (e, _) in enumerate(kept):
        w = np.linalg.eigvalsh(e)[0]
        if w < -tol.PSD:
            raise ElementNotPSD(i, w)
    total = sum(e for e, _ in kept) if kept else np.zeros((d, d))
    dev = float(np.max(np.abs(total - np.eye(d))))
    if dev > tol.POVM_SUM:
        raise CompletenessViolated(dev)
    if len(kept) < 2:
        raise InvalidPovm("a POVM needs at least two outcomes")
    arr = np.array([e for e, _ in kept])
    arr.setflags(write=False)
    return Povm(arr, tuple(str(l) for _, l in kept))


def induced_distribution(povm: Povm, state) -> np.ndarray:
    """Born-rule outcome probabilities ``Tr[E_i rho]``.

    Negative values down to ``-P_FLOOR`` are rounding noise; they are clamped
    to zero and the vector renormalized.
    """
    state = as_state(state)
    if state.dim != povm.dim:
        raise DimMismatch(f"POVM dimension {povm.dim} vs state dimension {state.dim}")
    p = np.einsum("kij,ji->k", povm.elements, state.matrix).real
    if p.min() < -tol.P_FLOOR:
        raise ValidationError(f"negative outcome probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


class ICResult(NamedTuple):
    complete: bool
    rank: int


def _ic_rank(mats, dim):
    rows = np.asarray(mats).reshape(len(mats), dim * dim)
    s = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(s > tol.IC_RANK * s[0]))


def is_informationally_complete(povm: Povm) -> ICResult:
    """Rank of the span of the elements; complete iff it equals ``D^2``."""
    rank = _ic_rank(povm.elements, povm.dim)
    return ICResult(rank == povm.dim**2, rank)


@dataclass(frozen=True, eq=False)
class MeasurementDesign:
    """Several POVMs, each measured on a fixed fraction of the shots."""

    groups: tuple
    fractions: tuple

    def __post_init__(self):
        if len(self.groups) != len(self.fractions) or not self.groups:
            raise ValidationError("a design needs one fraction per group")
        dims = {g.dim for g in self.groups}
        if len(dims) != 1:
            raise DimMismatch("design groups have different dimensions")
        f = np.asarray(self.fractions, dtype=float)
        if np.any(f < 0) or not np.any(f > 0):
            raise ValidationError("fractions must be nonnegative and not all zero")
        if abs(f.sum() - 1) > 1e-12:
            raise ValidationError(f"fractions sum to {float(f.sum())!r}")

    @classmethod
    def single(cls, povm: Povm):
        return cls((povm,), (1.0,))

    @property
    def dim(self) -> int:
        return self.groups[0].dim

    def flatten(self) -> Povm:
        """One POVM with every group element weighted by its fraction."""
        elems, labels = [], []
        for gi, (g, f) in enumerate(zip(self.groups, self.fractions)):
            if f == 0:
                continue
            elems.extend(f * g.elements)
            labels.extend(f"g{gi}:{l}" for l in g.labels)
        return validate_povm(elems, labels)


def degrees_of_freedom(design) -> int:
    """Number of independent frequencies: ``sum_g (r_g - 1)`` over groups that receive shots."""
    if isinstance(design, Povm):
        return design.size - 1
    return sum(g.size - 1 for g, f in zip(design.groups, design.fractions) if f > 0)


@dataclass(frozen=True, eq=False)
class BasisFamily:
    """Orthonormal bases unbiased with respect to the computational basis.

    ``bases[l][:, m]`` is vector ``m`` of basis ``l``.  ``construction`` is
    ``"quadratic"`` for the deterministic quadratic-phase family and
    ``"random"`` for the seeded fallback, in which case ``seed`` is set.
    """

    bases: np.ndarray
    construction: str
    seed: Optional[int] = None
    offdiagonal_frame_min: float = field(default=float("nan"))

    def __len__(self):
        return len(self.bases)

    def __iter__(self):
        return iter(self.bases)


def _phase_bases(phases):
    """Fourier bases preceded by diagonal phases ``exp(2 pi i phases[l, k])``."""
    count, d = phases.shape
    k = np.arange(d)
    fourier = np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)
    return np.exp(2j * np.pi * phases)[:, :, None] * fourier[None, :, :]


def quadratic_phases(dim, count):
    """``l k^2 / dim`` for odd ``dim`` and ``l k^2 / (2 dim)`` for even ``dim``, ``l = 0..count-1``.

    For prime ``dim`` these are mutually unbiased bases.
    """
    denom = dim if dim % 2 else 2 * dim
    k = np.arange(dim)
    return np.outer(np.arange(count), k * k) / denom


def offdiagonal_frame_min(bases) -> float:
    """Smallest eigenvalue of ``sum |P><P|`` restricted to off-diagonal operators.

    ``P`` runs over the projectors of all vectors.  The value is 1 exactly
    when the bases, together with the computational basis, resolve every
    off-diagonal direction with equal weight.
    """
    bases = np.asarray(bases)
    d = bases.shape[-1]
    vecs = np.concatenate(list(bases), axis=1)
    proj = np.einsum("in,jn->nij", vecs.conj(), vecs).reshape(-1, d * d)
    off = ~np.eye(d, dtype=bool).reshape(-1)
    w = proj[:, off]
    frame = w.conj().T @ w
    return float(np.linalg.eigvalsh(frame)[0])


def _complete_with_computational(bases, d):
    projs = [np.diag(e) for e in np.eye(d)]
    for b in bases:
        projs.extend(np.outer(b[:, m], b[:, m].conj()) for m in range(d))
    return _ic_rank(np.array(projs), d) == d * d


def unbiased_bases(dim, count=None) -> BasisFamily:
    """``count`` orthonormal bases (default ``dim``) whose vectors all have modulus ``1/sqrt(dim)``.

    The quadratic-phase family is tried first.  When ``count == dim`` and that
    family, joined with the computational basis, is not informationally
    complete, up to ``FALLBACK_RETRIES`` seeded random phase families are drawn
    and the complete one that spreads weight most evenly over off-diagonal
    directions is kept.
    """
    count = dim if count is None else count
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be positive")
    bases = _phase_bases(quadratic_phases(dim, count))
    if count != dim or dim == 1 or _complete_with_computational(bases, dim):
        frame = offdiagonal_frame_min(bases) if dim > 1 else 1.0
        return BasisFamily(bases, "quadratic", None, frame)
    best = None
    for seed in range(FALLBACK_RETRIES):
        rng = np.random.Generator(np.random.Philox(seed))
        cand = _phase_bases(rng.random((count, dim)))
        if not _complete_with_computational(cand, dim):
            continue
        frame = offdiagonal_frame_min(cand)
        if best is None or frame > best.offdiagonal_frame_min:
            best = BasisFamily(cand, "random", seed, frame)
    if best is None:
        raise CompletenessUnreachable(
            f"no informationally complete unbiased family found for D={dim}"
        )
    return best


@dataclass(frozen=True, eq=False)
class OptimalPovm:
    """The optimal goodness-of-fit measurement for a hypothesis state.

    ``design`` holds the eigenbasis of sigma (fraction ``1 - xi``) followed by
    ``D`` unbiased bases (fraction ``xi/D`` each); ``povm`` is its flattened
    form.  ``exact`` is true when the unbiased family resolves all
    off-diagonal directions evenly, which is what makes the worst-case
    divergence equal ``xi``.
    """

    design: MeasurementDesign
    povm: Povm
    xi: float
    eigensystem: Eigensystem
    bases: BasisFamily
    regularized: bool
    rank_deficient: bool

    @property
    def exact(self) -> bool:
        return abs(self.bases.offdiagonal_frame_min - 1) < 1e-9

    @property
    def df(self) -> int:
        return degrees_of_freedom(self.design)


def optimal_povm(sigma, regularize_deficient=False) -> OptimalPovm:
    """Eigenbasis measurement plus unbiased bases, weighted by the divergence rate.

    The unbiased group elements sum to ``xi * 1``.  For a pure state ``xi = 1``
    and the eigenbasis group keeps fraction zero (it is then absent from the
    flattened POVM).
    """
    from .gof import divergence_rate

    sigma = as_state(sigma)
    if sigma.dim < 2:
        raise ValidationError("optimal POVM needs dimension at least 2")
    deficient = not sigma.is_full_rank
    applied = False
    if regularize_deficient and deficient:
        sigma, applied = regularize(sigma)
    rate = divergence_rate(sigma)
    xi = rate.xi
    eig = sigma.eigensystem
    d = sigma.dim
    family = unbiased_bases(d, d)
    u = eig.vectors
    groups = [Povm.from_basis(u, prefix="eig")]
    fractions = [max(0.0, 1.0 - xi)]
    for l, b in enumerate(family.bases):
        groups.append(Povm.from_basis(u @ b, prefix=f"u{l}:"))
        fractions.append(xi / d)
    design = MeasurementDesign(tuple(groups), tuple(fractions))
    return OptimalPovm(design, design.flatten(), xi, eig, family, applied, deficient)


_KET = {
    "0": np.array([1, 0]),
    "1": np.array([0, 1]),
    "+": np.array([1, 1]) / np.sqrt(2),
    "-": np.array([1, -1]) / np.sqrt(2),
    "+i": np.array([1, 1j]) / np.sqrt(2),
    "-i": np.array([1, -1j]) / np.sqrt(2),
}


def qubit_six_element_povm(xi) -> Povm:
    """``(1-xi)|0><0|, (1-xi)|1><1|`` and ``xi/2`` times the x and y eigenprojectors.

    Written in the eigenbasis of the hypothesis state.
    """
    weights = [1 - xi, 1 - xi, xi / 2, xi / 2, xi / 2, xi / 2]
    labels = ["0", "1", "+", "-", "+i", "-i"]
    elems = [w * np.outer(_KET[l], _KET[l].conj()) for w, l in zip(weights, labels)]
    return validate_povm(elems, labels)


def pauli_design() -> MeasurementDesign:
    """Qubit x, y and z eigenbasis measurements with equal shot fractions."""
    groups = tuple(
        Povm.from_basis(np.column_stack([_KET[a], _KET[b]]), prefix=name)
        for name, a, b in (("x", "+", "-"), ("y", "+i", "-i"), ("z", "0", "1"))
    )
    return MeasurementDesign(groups, (1 / 3, 1 / 3, 1 / 3))


def computational_povm(dim) -> Povm:
    return Povm.from_basis(np.eye(dim), prefix="k")


def eigenbasis_povm(sigma) -> Povm:
    return Povm.from_basis(eigh(as_state(sigma).matrix).vectors, prefix="eig")
