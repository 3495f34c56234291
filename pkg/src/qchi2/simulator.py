"""Seeded simulation of measurement records.

Random numbers come from the Philox4x32-10 counter-based generator (numpy's
``Philox`` bit generator keyed by the seed), read as 53-bit uniform doubles.
A batch of trials consumes one stream row by row: trial ``t`` of a batch uses
row ``t`` of a ``(trials, sum_g (r_g - 1))`` uniform array, columns ordered by
group and then outcome.  A single record is trial 0 of a batch with the same
seed.

Each group's counts are a multinomial draw built from conditional binomials,
each sampled by inverting its CDF at one uniform.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from . import tolerances as tol
from .chi2stat import (
    ExperimentRecord,
    critical_value,
    hypothesis_distributions,
    pearson_statistic,
)
from .errors import SupportViolation
from .povm import MeasurementDesign, Povm, induced_distribution
from .operators import as_state

PRNG_NAME = "philox4x32-10/numpy-random53/v1"


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def allocate_shots(fractions, n_total):
    """Split ``n_total`` shots by fraction with largest-remainder rounding.

    Ties in the remainder go to the earlier group.
    """
    f = np.asarray(fractions, dtype=float)
    raw = f * n_total
    k = np.floor(raw).astype(np.int64)
    short = int(n_total - k.sum())
    order = sorted(range(len(f)), key=lambda g: (-(raw[g] - k[g]), g))
    for g in order[:short]:
        k[g] += 1
    return k


def multinomial_inverse_cdf(q, k, u):
    """Multinomial counts of size ``k`` from ``q`` driven by uniforms ``u``.

    ``u`` has shape ``(..., len(q) - 1)``; outcome ``i`` is drawn as a
    binomial on the shots left over after outcomes ``< i``, with the
    conditional probability ``q_i / sum_{j >= i} q_j``.
    """
    q = np.asarray(q, dtype=float)
    u = np.asarray(u, dtype=float)
    r = len(q)
    out = np.zeros(u.shape[:-1] + (r,), dtype=np.int64)
    remaining = np.full(u.shape[:-1], int(k), dtype=np.int64)
    tail = np.cumsum(q[::-1])[::-1]
    for i in range(r - 1):
        cond = 0.0 if tail[i] <= 0 else min(1.0, q[i] / tail[i])
        draw = binom.ppf(u[..., i], remaining, cond)
        draw = np.clip(np.nan_to_num(draw, nan=0.0), 0, remaining).astype(np.int64)
        out[..., i] = draw
        remaining = remaining - draw
    out[..., r - 1] = remaining
    return out


def _as_design(design):
    return MeasurementDesign.single(design) if isinstance(design, Povm) else design


def sample_counts(design, rho, n_total, trials=1, seed=0):
    """Batched counts: a list with one ``(trials, r_g)`` integer array per group."""
    design = _as_design(design)
    rho = as_state(rho)
    shots = allocate_shots(design.fractions, n_total)
    qs = [induced_distribution(g, rho) for g in design.groups]
    widths = [len(q) - 1 for q in qs]
    u = make_rng(seed).random((trials, sum(widths)))
    out, col = [], 0
    for q, w, k in zip(qs, widths, shots):
        out.append(multinomial_inverse_cdf(q, k, u[:, col : col + w]))
        col += w
    return out


@dataclass(frozen=True, eq=False)
class SimulationPlan:
    design: MeasurementDesign
    rho: object
    n_total: int
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "design", _as_design(self.design))
        object.__setattr__(self, "rho", as_state(self.rho))
        if int(self.n_total) < 1:
            raise ValueError("n_total must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def shots(self):
        return allocate_shots(self.design.fractions, self.n_total)


def sample_record(plan: SimulationPlan) -> ExperimentRecord:
    counts = sample_counts(plan.design, plan.rho, plan.n_total, 1, plan.seed)
    return ExperimentRecord(plan.design, tuple(c[0] for c in counts))


def batch_statistics(design, sigma, counts):
    """Pearson statistic and degrees of freedom for every trial of a batch."""
    ps = hypothesis_distributions(design, sigma)
    stat = np.zeros(counts[0].shape[0])
    df = 0
    for g, (c, p) in enumerate(zip(counts, ps)):
        if c[0].sum() == 0:
            continue
        if np.any(p < tol.P_FLOOR):
            raise SupportViolation(f"group {g} has an outcome with zero hypothesis probability")
        stat = stat + pearson_statistic(c, p)
        df += len(p) - 1
    return stat, df


def simulate_statistics(sigma, rho, design, n_total, trials, seed=0):
    """Statistics of ``trials`` seeded experiments drawn from ``rho`` and tested against ``sigma``."""
    design = _as_design(design)
    counts = sample_counts(design, rho, n_total, trials, seed)
    return batch_statistics(design, sigma, counts)


def power_curve(sigma, rho, design, alpha, n_grid, trials=1000, seed=0, two_sided=False):
    """Monte Carlo rejection rate at each sample size in ``n_grid``.

    Grid point ``j`` uses seed ``seed + j``.
    """
    if trials < 100:
        raise ValueError("power curves need at least 100 trials")
    out = []
    for j, n in enumerate(n_grid):
        stats, df = simulate_statistics(sigma, rho, design, int(n), trials, seed + j)
        if two_sided:
            hi, lo = critical_value(df, alpha / 2), critical_value(df, 1 - alpha / 2)
            rate = float(np.mean((stats >= hi) | (stats <= lo)))
        else:
            rate = float(np.mean(stats >= critical_value(df, alpha)))
        out.append((int(n), rate))
    return out
