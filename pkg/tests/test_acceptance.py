"""Acceptance criteria, one test per criterion.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.  Reference values are computed here from
independent routes (scipy quantiles, exact enumeration) rather than taken from
the library under test.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.stats import binom, chi2

from qchi2.chi2stat import (
    chi2_pdf,
    chi2_upper_tail,
    critical_value,
)
from qchi2.divergences import bures_chi2, chi2_divergence, lemma1_optimal_basis
from qchi2.gof import (
    divergence_rate,
    expected_statistic,
    required_samples,
    statistic_variance_null,
    upper_bound_matrix,
)
from qchi2.operators import maximally_mixed, pure_state, validate_density
from qchi2.oracle import (
    SweepConfig,
    random_density,
    random_povm,
    verify_lemma1,
    verify_split_dominance,
    verify_xi,
)
from qchi2.povm import (
    computational_povm,
    induced_distribution,
    optimal_povm,
    qubit_six_element_povm,
)
from qchi2.simulator import SimulationPlan, sample_record, simulate_statistics


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f} s, limit {self.limit} s"


@pytest.mark.criterion(1, "closed-form xi reproduction")
def test_closed_form_xi():
    with Timer(1.0):
        cases = [(pure_state([1, 0]), 1.0), (pure_state([0.6, 0.8j, 0]), 1.0)]
        for d in range(2, 9):
            p = np.zeros(d)
            p[:2] = 0.5
            cases.append((validate_density(np.diag(p)), 2 / 3))
            cases.append((maximally_mixed(d), d / (d + 1)))
        for k in range(5, 11):
            l1 = k / 10
            cases.append((validate_density(np.diag([l1, 1 - l1])), 1 / (1 + 2 * l1 * (1 - l1))))
        for state, expected in cases:
            assert abs(divergence_rate(state).xi - expected) <= 1e-9


@pytest.mark.criterion(2, "divergence rate equals the upper-bound matrix eigenvalue")
def test_xi_route_equivalence():
    with Timer(30.0):
        worst = 0.0
        for d in range(2, 9):
            for t in range(1000):
                sigma = random_density(d, 10_000 * d + t)
                xi = divergence_rate(sigma).xi
                worst = max(worst, abs(xi - upper_bound_matrix(sigma).xi))
                assert 2 / 3 - 1e-9 <= xi <= 1
        assert worst <= 1e-9


@pytest.mark.criterion(3, "Bures chi2 saturation and domination")
def test_lemma1():
    with Timer(300.0):
        for d in (2, 3, 4):
            for t in range(200):
                sigma = random_density(d, 20_000 * d + t)
                rho = random_density(d, 30_000 * d + t)
                povm = lemma1_optimal_basis(sigma, rho)
                achieved = chi2_divergence(
                    induced_distribution(povm, sigma), induced_distribution(povm, rho)
                )
                assert abs(achieved - bures_chi2(sigma, rho).value) <= 1e-9
            for t in range(10):
                sigma = random_density(d, 20_000 * d + t)
                rho = random_density(d, 30_000 * d + t)
                rep = verify_lemma1(sigma, rho, SweepConfig(10_000, 40_000 * d + t, d))
                assert rep.details["best_random"] <= rep.closed_form + 1e-9
                assert rep.verdict


@pytest.mark.criterion(4, "optimal POVM attains the divergence rate")
def test_xi_achievability():
    with Timer(300.0):
        for d in (2, 3):
            for t in range(50):
                sigma = random_density(d, 50_000 * d + t)
                rep = verify_xi(sigma, SweepConfig(2000, t, d))
                assert rep.closed_form * (1 - 1e-6) <= rep.empirical <= rep.closed_form * 1.02, rep


@pytest.mark.criterion(5, "null calibration of the qubit protocol")
def test_null_calibration():
    with Timer(120.0):
        sigma = validate_density(np.diag([0.7, 0.3]))
        xi = divergence_rate(sigma).xi
        povm = qubit_six_element_povm(xi)
        n, trials = 10_000, 10_000
        stats, df = simulate_statistics(sigma, sigma, povm, n, trials, seed=5)
        assert df == 5
        mean = stats.mean()
        var = stats.var(ddof=1)
        assert abs(mean - df) <= 3 * math.sqrt(var / trials)
        rate = np.mean(stats >= chi2.ppf(0.95, df))
        assert abs(rate - 0.05) <= 0.01
        # standard error of the sample variance from the fourth central moment
        m4 = np.mean((stats - mean) ** 4)
        se_var = math.sqrt((m4 - var**2) / trials)
        target = statistic_variance_null(induced_distribution(povm, sigma), n)
        assert abs(var - target) <= 3 * se_var


@pytest.mark.criterion(6, "alternative mean law")
def test_alternative_mean():
    with Timer(120.0):
        p, q, n = np.array([0.5, 0.5]), np.array([0.75, 0.25]), 100
        # exact mean by enumerating the binomial
        k = np.arange(n + 1)
        w = binom.pmf(k, n, q[0])
        exact = float(np.sum(w * ((k - n * p[0]) ** 2 / (n * p[0]) + (n - k - n * p[1]) ** 2 / (n * p[1]))))
        assert abs(exact - 25.75) < 1e-9
        assert abs(expected_statistic(p, q, n) - exact) < 1e-12
        sigma = validate_density(np.diag(p))
        rho = validate_density(np.diag(q))
        trials = 1_000_000
        stats, _ = simulate_statistics(sigma, rho, computational_povm(2), n, trials, seed=6)
        se = stats.std(ddof=1) / math.sqrt(trials)
        assert abs(stats.mean() - exact) <= 3 * se


@pytest.mark.criterion(7, "sample-size formula and power at that size")
def test_sample_size():
    with Timer(120.0):
        sigma = pure_state([1, 0])
        eps = 0.1
        crit = chi2.ppf(0.95, 3)
        assert math.ceil((crit - 3) / eps**2) == 482
        n = required_samples(sigma, 3, eps, 0.05)
        assert n.n == 482
        # worst direction: a pure state rotated off sigma at Frobenius distance eps
        s = eps / math.sqrt(2)
        rho = pure_state([math.sqrt(1 - s * s), s])
        assert abs(np.linalg.norm(rho.matrix - sigma.matrix) - eps) < 1e-12
        design = optimal_povm(sigma).design
        stats, df = simulate_statistics(sigma, rho, design, n.n, 4000, seed=7)
        rate = float(np.mean(stats >= critical_value(df, 0.05)))
        assert rate > 0.4, rate


@pytest.mark.criterion(8, "element splitting never lowers the chi2 form")
def test_split_dominance():
    with Timer(60.0):
        for t in range(100):
            d = 2 + t % 3
            povm = random_povm(d, 3, 60_000 + t)
            sigma = random_density(d, 70_000 + t)
            rep = verify_split_dominance(povm, sigma, SweepConfig(200, t, d))
            assert rep.empirical >= -1e-9
            assert rep.verdict


@pytest.mark.criterion(9, "chi2 distribution machinery")
def test_chi2_machinery():
    for df in range(1, 65):
        for alpha in (0.2, 0.05, 0.01, 0.001):
            x = critical_value(df, alpha)
            assert abs(chi2_upper_tail(x, df) - alpha) <= 1e-9
            assert abs(x - chi2.ppf(1 - alpha, df)) <= 1e-8 * x
    for x in np.linspace(0, 40, 81):
        assert abs(chi2_upper_tail(x, 2) - math.exp(-x / 2)) <= 1e-12
        assert abs(chi2_pdf(x, 2) - 0.5 * math.exp(-x / 2)) <= 1e-12
    for alpha in (0.2, 0.05, 0.01, 0.001):
        assert abs(critical_value(2, alpha) + 2 * math.log(alpha)) <= 1e-12 * 20


@pytest.mark.criterion(10, "simulate output is byte-identical across runs")
def test_simulate_determinism(tmp_path):
    from qchi2 import io

    sigma = validate_density(np.diag([0.7, 0.3]))
    design = optimal_povm(sigma).design
    (tmp_path / "design.json").write_text(json.dumps(io.design_to_json(design)))
    (tmp_path / "rho.json").write_text(json.dumps(io.state_to_json(sigma)))
    plan = {"design": "design.json", "rho": "rho.json", "n": 1001, "seed": 42,
            "prng": "philox4x32-10/numpy-random53/v1"}
    (tmp_path / "plan.json").write_text(json.dumps(plan))
    outputs = []
    for name in ("a.json", "b.json"):
        subprocess.run(
            [sys.executable, "-m", "qchi2", "simulate", "plan.json", "--out", name],
            cwd=tmp_path, check=True,
        )
        outputs.append((tmp_path / name).read_bytes())
    assert outputs[0] == outputs[1]
    # and the in-process sampler agrees with the file
    rec = sample_record(SimulationPlan(design, sigma, 1001, 42))
    doc = json.loads(outputs[0])
    assert [g["counts"] for g in doc["groups"]] == [c.tolist() for c in rec.counts]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
