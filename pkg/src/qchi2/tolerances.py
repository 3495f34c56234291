"""Numerical tolerances shared by all modules.

Read these through the module (``tolerances.PSD``) rather than importing the
names, so that a runtime override (CLI ``--tol-psd``) is seen everywhere.
The PSD tolerance can also be set with the ``QCHI2_TOL_PSD`` environment
variable at import time.
"""

import os

#: max |M_ij - conj(M_ji)| accepted as Hermitian
HERM = 1e-12
#: most negative eigenvalue accepted as positive semidefinite
PSD = float(os.environ.get("QCHI2_TOL_PSD", "1e-10"))
#: |Tr rho - 1|
TRACE = 1e-12
#: max entrywise deviation of sum_i E_i from the identity
POVM_SUM = 1e-10
#: probability vectors must sum to one within this
PROB_SUM = 1e-10
#: hypothesis probabilities below this are treated as zero
P_FLOOR = 1e-12
#: eigenvalues below this make a state rank deficient
EPS_RANK = 1e-10
#: mixing weight of the identity used to regularize rank-deficient states
REG_DELTA = 1e-9
#: relative singular-value cutoff for informational completeness
IC_RANK = 1e-8


def snapshot():
    """Current tolerance values, for embedding in run manifests."""
    return {
        "herm": HERM,
        "psd": PSD,
        "trace": TRACE,
        "povm_sum": POVM_SUM,
        "prob_sum": PROB_SUM,
        "p_floor": P_FLOOR,
        "eps_rank": EPS_RANK,
        "reg_delta": REG_DELTA,
        "ic_rank": IC_RANK,
    }
