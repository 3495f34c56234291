"""Chi-squared distribution, Pearson statistic and the accept/reject decision."""

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import tolerances as tol
from .errors import ConvergenceFailure, CountMismatch, DomainEdge, SupportViolation, ValidationError

_EPS = 1e-16
_MAX_ITER = 10_000


# -- regularized incomplete gamma --------------------------------------------


def _log_prefactor(a, x):
    return -x + a * math.log(x) - math.lgamma(a)


def _gamma_p_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(_log_prefactor(a, x))
    raise ConvergenceFailure(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_q_cf(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1 - a
    c = 1 / tiny
    d = 1 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) < _EPS:
            return h * math.exp(_log_prefactor(a, x))
    raise ConvergenceFailure(f"incomplete gamma fraction did not converge (a={a}, x={x})")


def gamma_p(a, x):
    """Regularized lower incomplete gamma ``P(a, x)``."""
    if x <= 0:
        return 0.0
    if x < a + 1:
        return _gamma_p_series(a, x)
    return 1.0 - _gamma_q_cf(a, x)


def gamma_q(a, x):
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if x <= 0:
        return 1.0
    if x < a + 1:
        return 1.0 - _gamma_p_series(a, x)
    return _gamma_q_cf(a, x)


# -- chi-squared distribution ------------------------------------------------


def _check_df(df):
    if int(df) != df or df < 1:
        raise ValidationError(f"degrees of freedom must be a positive integer, got {df}")


def chi2_pdf(x, df):
    """Density ``x^(df/2 - 1) e^(-x/2) / (2^(df/2) Gamma(df/2))``."""
    _check_df(df)
    if x < 0:
        return 0.0
    if x == 0:
        if df == 1:
            raise DomainEdge("the df=1 density diverges at x=0")
        return 0.5 if df == 2 else 0.0
    k = df / 2
    return math.exp((k - 1) * math.log(x) - x / 2 - k * math.log(2) - math.lgamma(k))


def chi2_upper_tail(x, df):
    """Probability mass above ``x``: ``Q(df/2, x/2)``."""
    _check_df(df)
    return gamma_q(df / 2, x / 2)


def chi2_lower_tail(x, df):
    """Probability mass below ``x``: ``P(df/2, x/2)``."""
    _check_df(df)
    return gamma_p(df / 2, x / 2)


def critical_value(df, alpha):
    """The ``x`` whose upper tail mass is ``alpha``.

    Bisection on ``[0, df + 40 sqrt(df) + 100]`` followed by Newton steps.
    """
    _check_df(df)
    if not 0 < alpha < 1:
        raise ValidationError("alpha must lie in (0, 1)")
    lo, hi = 0.0, df + 40 * math.sqrt(df) + 100
    if chi2_upper_tail(hi, df) > alpha:
        raise ConvergenceFailure(f"alpha={alpha} lies beyond the search bracket for df={df}")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_upper_tail(mid, df) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6 * max(1.0, hi):
            break
    x = 0.5 * (lo + hi)
    for _ in range(50):
        f = chi2_upper_tail(x, df) - alpha
        dens = chi2_pdf(x, df)
        if dens <= 0:
            break
        step = f / dens
        nx = min(max(x + step, lo), hi)
        if abs(nx - x) <= 4e-16 * max(1.0, abs(x)):
            x = nx
            break
        x = nx
    if abs(chi2_upper_tail(x, df) - alpha) > 1e-10:
        raise ConvergenceFailure(f"critical value did not converge (df={df}, alpha={alpha})")
    return x


# -- experiment records and the test -----------------------------------------


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    """Click counts per design group.

    ``counts[g][i]`` is the number of times outcome ``i`` of group ``g`` was
    seen.  Groups with a zero shot total carry no information and are ignored
    by the test.
    """

    design: object
    counts: tuple
    totals: Optional[tuple] = None

    def __post_init__(self):
        counts = tuple(np.asarray(c, dtype=np.int64) for c in self.counts)
        if len(counts) != len(self.design.groups):
            raise CountMismatch(
                f"{len(counts)} count groups for a design with {len(self.design.groups)} groups"
            )
        for g, (c, povm) in enumerate(zip(counts, self.design.groups)):
            if c.shape != (povm.size,):
                raise CountMismatch(f"group {g}: expected {povm.size} counts, got {c.shape}")
            if np.any(c < 0):
                raise CountMismatch(f"group {g} has negative counts")
        sums = tuple(int(c.sum()) for c in counts)
        if self.totals is not None and tuple(int(t) for t in self.totals) != sums:
            raise CountMismatch(f"counts sum to {sums}, declared totals {tuple(self.totals)}")
        if sum(sums) == 0:
            raise CountMismatch("record contains no shots")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "totals", sums)

    @property
    def n_total(self) -> int:
        return sum(self.totals)


class Decision(str, enum.Enum):
    ACCEPT = "accept"
    REJECT_HIGH = "reject_high"
    REJECT_LOW = "reject_low"


@dataclass(frozen=True)
class TestReport:
    __test__ = False

    statistic: float
    df: int
    alpha: float
    critical_value: float
    p_value: float
    lower_tail: float
    decision: Decision
    small_count_warning: bool
    two_sided: bool
    critical_value_low: Optional[float] = None

    def to_dict(self):
        return {
            "statistic": self.statistic,
            "df": self.df,
            "alpha": self.alpha,
            "critical_value": self.critical_value,
            "critical_value_low": self.critical_value_low,
            "p_value": self.p_value,
            "lower_tail": self.lower_tail,
            "decision": self.decision.value,
            "small_count_warning": self.small_count_warning,
            "two_sided": self.two_sided,
        }


def hypothesis_distributions(design, sigma):
    """Outcome probabilities of every design group under ``sigma``."""
    from .povm import induced_distribution

    return [induced_distribution(g, sigma) for g in design.groups]


def pearson_statistic(counts, p):
    """``sum_i (n_i - n p_i)^2 / (n p_i)`` along the last axis.

    ``counts`` may carry leading batch axes; ``p`` must be supported
    everywhere (``p_i >= P_FLOOR``).
    """
    counts = np.asarray(counts, dtype=float)
    n = counts.sum(axis=-1, keepdims=True)
    expected = n * p
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = (counts - expected) ** 2 / expected
    return np.where(n[..., 0] > 0, terms.sum(axis=-1), 0.0)


def _statistic_parts(record, sigma, regularize_deficient=False):
    from .operators import regularize

    if regularize_deficient:
        sigma, _ = regularize(sigma)
    ps = hypothesis_distributions(record.design, sigma)
    stat, df, warn = 0.0, 0, False
    for g, (c, p, n) in enumerate(zip(record.counts, ps, record.totals)):
        if n == 0:
            continue
        if np.any(p < tol.P_FLOOR):
            i = int(np.argmin(p))
            raise SupportViolation(
                f"group {g} outcome {i} has hypothesis probability {p[i]:.3e}"
            )
        stat += float(pearson_statistic(c, p))
        df += len(p) - 1
        warn |= bool(np.any(n * p < 5))
    return stat, df, warn


def test_statistic(record, sigma, regularize_deficient=False) -> float:
    """Pearson statistic summed over the design groups that received shots."""
    return _statistic_parts(record, sigma, regularize_deficient)[0]


test_statistic.__test__ = False


def decide(statistic, df, alpha=0.05, two_sided=False):
    """Accept/reject decision and tail masses for an observed statistic."""
    upper = chi2_upper_tail(statistic, df)
    lower = chi2_lower_tail(statistic, df)
    if two_sided:
        crit = critical_value(df, alpha / 2)
        crit_low = critical_value(df, 1 - alpha / 2)
        if upper <= alpha / 2:
            decision = Decision.REJECT_HIGH
        elif lower <= alpha / 2:
            decision = Decision.REJECT_LOW
        else:
            decision = Decision.ACCEPT
    else:
        crit = critical_value(df, alpha)
        crit_low = None
        decision = Decision.REJECT_HIGH if statistic >= crit else Decision.ACCEPT
    return decision, upper, lower, crit, crit_low


def run_test(record, sigma, alpha=0.05, two_sided=False, regularize_deficient=False) -> TestReport:
    """Pearson goodness-of-fit test of ``record`` against the hypothesis state ``sigma``.

    One-sided: reject when the statistic reaches the critical value.  Two-sided
    splits ``alpha`` equally and also rejects statistics that are too small.
    The reported p-value is always the upper-tail mass.
    """
    if not 0 < alpha < 1:
        raise ValidationError("alpha must lie in (0, 1)")
    stat, df, warn = _statistic_parts(record, sigma, regularize_deficient)
    decision, upper, lower, crit, crit_low = decide(stat, df, alpha, two_sided)
    return TestReport(stat, df, alpha, crit, upper, lower, decision, warn, two_sided, crit_low)
