"""Quantum chi-squared goodness-of-fit testing.

Validate states and measurements, compute classical and Bures chi-squared
divergences, build the measurement with the best worst-case divergence rate
for a hypothesis state, simulate experiments and run the Pearson test.
"""

from .chi2stat import (
    Decision,
    ExperimentRecord,
    TestReport,
    chi2_lower_tail,
    chi2_pdf,
    chi2_upper_tail,
    critical_value,
    run_test,
    test_statistic,
)
from .divergences import (
    apply_omega,
    bures_chi2,
    chi2_divergence,
    kl_divergence,
    lemma1_optimal_basis,
)
from .gof import (
    divergence_rate,
    expected_statistic,
    required_samples,
    statistic_variance_null,
    upper_bound_matrix,
)
from .operators import (
    DensityMatrix,
    Eigensystem,
    devec,
    eigh,
    frobenius_distance,
    validate_density,
    vec,
)
from .povm import (
    MeasurementDesign,
    Povm,
    degrees_of_freedom,
    induced_distribution,
    is_informationally_complete,
    optimal_povm,
    unbiased_bases,
    validate_povm,
)
from .simulator import SimulationPlan, power_curve, sample_record

__version__ = "0.1.0"

__all__ = [
    "Decision",
    "ExperimentRecord",
    "TestReport",
    "chi2_lower_tail",
    "chi2_pdf",
    "chi2_upper_tail",
    "critical_value",
    "run_test",
    "test_statistic",
    "apply_omega",
    "bures_chi2",
    "chi2_divergence",
    "kl_divergence",
    "lemma1_optimal_basis",
    "divergence_rate",
    "expected_statistic",
    "required_samples",
    "statistic_variance_null",
    "upper_bound_matrix",
    "DensityMatrix",
    "Eigensystem",
    "devec",
    "eigh",
    "frobenius_distance",
    "validate_density",
    "vec",
    "MeasurementDesign",
    "Povm",
    "degrees_of_freedom",
    "induced_distribution",
    "is_informationally_complete",
    "optimal_povm",
    "unbiased_bases",
    "validate_povm",
    "SimulationPlan",
    "power_curve",
    "sample_record",
]
