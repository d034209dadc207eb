"""Percentile bootstrap confidence intervals for the NPPR estimate.

No closed-form variance of the weighted-mean estimator exists (the
covariances between pointwise estimates at different times are unknown), so
the interval comes from re-estimating on with-replacement resamples of the
pooled rows. Rows travel intact: group and status are never reassigned, and
group sizes vary across resamples.

Quantile rule: plain empirical quantile with ceiling rank, i.e. the
ceil(q*B)-th order statistic. This is exactly reproducible across
languages, unlike interpolating quantile definitions.

Randomness: each resample draws from its own child of
numpy.random.SeedSequence(seed), so results are independent of execution
order and reproducible for a fixed seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimationError
from .nppr import nppr_fit
from .survival import Dataset


@dataclass(frozen=True)
class BootstrapConfig:
    n_resamples: int = 500
    level: float = 0.95
    seed: int = 0
    min_success_fraction: float = 0.5

    def __post_init__(self):
        if self.n_resamples < 2:
            raise ValueError("n_resamples must be >= 2")
        if not 0.0 < self.level < 1.0:
            raise ValueError("level must be in (0, 1)")


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    n_effective: int = 0  # resamples in which estimation succeeded; 0 for analytic CIs


def empirical_quantile(sorted_values: np.ndarray, q: float) -> float:
    """Ceiling-rank empirical quantile of an ascending-sorted array."""
    n = sorted_values.shape[0]
    rank = min(max(math.ceil(q * n), 1), n)
    return float(sorted_values[rank - 1])


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    ci_beta: ConfidenceInterval
    ci_rr: ConfidenceInterval
    betas: np.ndarray  # successful resample estimates, in resample order
    n_effective: int
    n_failed: int


def percentile_bootstrap(
    data: Dataset, config: BootstrapConfig, weighting: str = "cumhaz"
) -> BootstrapResult:
    """Percentile bootstrap interval for beta, with the derived rr interval.

    Re-estimates with the same ``weighting`` as the point estimate.
    Resamples where estimation fails (empty event-time window) are skipped
    and counted. Raises EstimationError when estimation fails on the
    original data or when fewer than ``min_success_fraction`` of the
    resamples succeed.
    """
    nppr_fit(data, weighting)  # the interval is meaningless if the point estimate is undefined

    n = len(data)
    children = np.random.SeedSequence(config.seed).spawn(config.n_resamples)
    betas: list[float] = []
    n_failed = 0
    for child in children:
        rng = np.random.default_rng(child)
        idx = rng.integers(0, n, size=n)
        try:
            betas.append(nppr_fit(data.take(idx), weighting).estimate.beta)
        except EstimationError:
            n_failed += 1

    n_effective = len(betas)
    if n_effective < config.min_success_fraction * config.n_resamples:
        raise EstimationError(
            f"only {n_effective} of {config.n_resamples} bootstrap resamples "
            "produced an estimate"
        )

    ordered = np.sort(np.asarray(betas))
    alpha = (1.0 - config.level) / 2.0
    lo = empirical_quantile(ordered, alpha)
    hi = empirical_quantile(ordered, 1.0 - alpha)
    ci_beta = ConfidenceInterval(lo, hi, config.level, n_effective)
    ci_rr = ConfidenceInterval(math.exp(-hi), math.exp(-lo), config.level, n_effective)
    return BootstrapResult(
        ci_beta=ci_beta,
        ci_rr=ci_rr,
        betas=np.asarray(betas),
        n_effective=n_effective,
        n_failed=n_failed,
    )
