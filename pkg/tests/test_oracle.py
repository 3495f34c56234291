import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qchi2.divergences import chi2_divergence
from qchi2.errors import ValidationError
from qchi2.operators import maximally_mixed, pure_state, validate_density
from qchi2.oracle import (
    SweepConfig,
    directional_form,
    directional_form_matrix,
    random_density,
    random_povm,
    random_traceless_direction,
    split_element,
    verify_lemma1,
    verify_split_dominance,
    verify_xi,
)
from qchi2.povm import induced_distribution, is_informationally_complete, optimal_povm, validate_povm

seeds = st.integers(0, 2**31)


@given(st.integers(2, 5), st.integers(2, 8), seeds)
def test_random_povm_is_valid(d, r, seed):
    p = random_povm(d, r, seed)
    assert p.size == r
    validate_povm(p.elements)


def test_random_povm_reproducible_and_complete():
    a, b = random_povm(3, 9, 4, require_complete=True), random_povm(3, 9, 4, require_complete=True)
    assert np.array_equal(a.elements, b.elements)
    assert is_informationally_complete(a).complete
    with pytest.raises(ValidationError):
        random_povm(2, 1, 0)


def test_random_direction_invariants():
    for seed in range(10_000):
        x = random_traceless_direction(3, seed)
        assert abs(np.trace(x)) <= 1e-14
        assert abs(np.linalg.norm(x) - 1) <= 1e-14
        assert np.array_equal(x, x.conj().T)


def test_qubit_directions_are_pauli_combinations():
    paulis = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    x = random_traceless_direction(2, 3)
    coef = [np.trace(p @ x).real / 2 for p in paulis]
    assert np.allclose(sum(c * p for c, p in zip(coef, paulis)), x, atol=1e-14)


@given(st.integers(2, 5), seeds)
def test_small_displacements_stay_valid(d, seed):
    s = random_density(d, seed)
    x = random_traceless_direction(d, seed + 1)
    validate_density(s.matrix + s.eigenvalues[-1] * x)


def test_lemma1_commuting_pair():
    sigma, rho = np.diag([0.6, 0.3, 0.1]), np.diag([0.2, 0.5, 0.3])
    rep = verify_lemma1(sigma, rho, SweepConfig(2000, 1, 3))
    assert rep.verdict and abs(rep.details["candidate_gap"]) <= 1e-12
    assert rep.details["best_random"] <= rep.closed_form


def test_lemma1_identical_states():
    s = random_density(2, 8)
    rep = verify_lemma1(s, s, SweepConfig(500, 0, 2))
    assert rep.verdict and rep.closed_form < 1e-14 and rep.details["best_random"] < 1e-14


def test_lemma1_random_qubit_pair():
    rep = verify_lemma1(random_density(2, 21), random_density(2, 22), SweepConfig(10_000, 3, 2))
    assert rep.gap >= -1e-9 and abs(rep.details["candidate_gap"]) <= 1e-10
    assert rep.verdict


def test_oracle_reports_are_deterministic():
    s, r = random_density(3, 1), random_density(3, 2)
    assert verify_lemma1(s, r, SweepConfig(300, 5, 3)).to_dict() == verify_lemma1(s, r, SweepConfig(300, 5, 3)).to_dict()
    assert verify_xi(s, SweepConfig(300, 5, 3)).to_dict() == verify_xi(s, SweepConfig(300, 5, 3)).to_dict()


def test_xi_maximally_mixed_qubit():
    rep = verify_xi(maximally_mixed(2), SweepConfig(1000, 0, 2))
    assert abs(rep.closed_form - 2 / 3) < 1e-12 and rep.verdict


def test_xi_pure_state_regularized():
    rep = verify_xi(pure_state([1, 0]), SweepConfig(1000, 0, 2))
    assert rep.details["regularized"]
    assert abs(rep.empirical - 1) <= 0.02 and rep.verdict


@pytest.mark.parametrize("d", [2, 3, 5])
def test_xi_is_the_smallest_form_eigenvalue_for_prime_dimensions(d):
    s = random_density(d, 30 + d)
    opt = optimal_povm(s)
    w = np.linalg.eigvalsh(directional_form_matrix(opt.povm, s))
    assert abs(w[0] - opt.xi) <= 1e-10


def test_xi_composite_dimension_is_not_attained():
    # the composite-dimension unbiased family is complete but not optimal;
    # the oracle must say so rather than pass
    rep = verify_xi(random_density(4, 1), SweepConfig(500, 0, 4))
    assert rep.details["basis_construction"] == "random"
    assert not rep.verdict and rep.empirical < rep.closed_form


@given(st.integers(2, 4), seeds, st.sampled_from([1e-3, 1e-4]))
def test_directional_form_is_the_chi2_limit(d, seed, eps):
    s = random_density(d, seed)
    x = random_traceless_direction(d, seed + 1)
    povm = random_povm(d, d * d, seed + 2)
    form = directional_form(povm, s, x)
    p = induced_distribution(povm, s)
    t = np.einsum("kij,ji->k", povm.elements, x).real
    # the chi2 divergence along X is exactly quadratic in eps
    fd = chi2_divergence(p, p + eps * t) / eps**2
    assert abs(fd - form) <= 1e-6 * form
    assert abs(form - x.reshape(-1).conj() @ _operator(povm, s) @ x.reshape(-1)) <= 1e-10 * max(1, form)


def _operator(povm, s):
    v = povm.elements.reshape(povm.size, -1)
    p = induced_distribution(povm, s)
    return (v.T / p) @ v.conj()


def test_split_symmetric_half():
    povm = validate_povm([np.eye(2) / 2, np.eye(2) / 2])
    after = split_element(povm, 0)
    assert after.size == 3
    rep = verify_split_dominance(povm, random_density(2, 0), SweepConfig(1000, 0, 2))
    assert rep.verdict and rep.details["min_form_increase"] >= -1e-12


def test_split_needs_rank_two():
    with pytest.raises(ValidationError):
        split_element(validate_povm([np.diag([1, 0]), np.diag([0, 1])]), 0)


def test_split_random_rank_two_element_many_states():
    povm = random_povm(3, 4, 17)
    for seed in range(100):
        rep = verify_split_dominance(povm, random_density(3, seed), SweepConfig(50, seed, 3))
        assert rep.verdict
