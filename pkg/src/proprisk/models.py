"""Parametric models: the exponentiated-uniform (EU) family behind the
parametric proportional-risk competitor, the Weibull PH family used for
data generation, censored-data ML fitting with delta-method intervals, and
a one-parameter Cox fit for cross-validation.

EU distribution: F(t) = (theta*t)^alpha on (0, 1/theta], density
alpha * theta^alpha * t^(alpha-1). Two groups sharing alpha with
group-specific theta have exactly proportional CDFs with
RR = (theta1/theta0)^alpha.

Weibull PH: F(t) = 1 - exp(-(t/lambda)^k), shared shape k, group scales.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .bootstrap import ConfidenceInterval
from .survival import Dataset


@dataclass(frozen=True)
class EuParams:
    alpha: float
    theta1: float
    theta0: float

    def theta(self, group: int) -> float:
        return self.theta1 if group == 1 else self.theta0


@dataclass(frozen=True)
class WeibullPhParams:
    k: float
    lambda1: float
    lambda0: float

    def scale(self, group: int) -> float:
        return self.lambda1 if group == 1 else self.lambda0


def eu_cdf(params: EuParams, group: int, t):
    """(theta*t)^alpha, clamped to [0, 1] outside the support."""
    theta = params.theta(group)
    ts = np.asarray(t, dtype=float)
    out = np.clip(np.where(ts > 0, (theta * np.maximum(ts, 0.0)) ** params.alpha, 0.0), 0.0, 1.0)
    return out if ts.ndim else float(out)


def eu_quantile(params: EuParams, group: int, u):
    """Inverse EU CDF, t = u^(1/alpha) / theta for u in (0, 1)."""
    us = np.asarray(u, dtype=float)
    if np.any(us <= 0.0) or np.any(us >= 1.0):
        raise ValueError("u must be in (0, 1)")
    out = us ** (1.0 / params.alpha) / params.theta(group)
    return out if us.ndim else float(out)


def weibull_ph_cdf(params: WeibullPhParams, group: int, t):
    """1 - exp(-(t/lambda)^k) for t >= 0, 0 for t < 0."""
    lam = params.scale(group)
    ts = np.asarray(t, dtype=float)
    out = np.where(ts >= 0, -np.expm1(-((np.maximum(ts, 0.0) / lam) ** params.k)), 0.0)
    return out if ts.ndim else float(out)


def weibull_ph_quantile(params: WeibullPhParams, group: int, u):
    """Inverse Weibull CDF, t = lambda * (-log(1-u))^(1/k) for u in (0, 1)."""
    us = np.asarray(u, dtype=float)
    if np.any(us <= 0.0) or np.any(us >= 1.0):
        raise ValueError("u must be in (0, 1)")
    out = params.scale(group) * (-np.log1p(-us)) ** (1.0 / params.k)
    return out if us.ndim else float(out)


def eu_log_likelihood(data: Dataset, params: EuParams) -> float:
    """Censored-data log-likelihood of the two-group EU model.

    Events contribute the log density, censored rows the log survival
    probability. Any observed time beyond its group's support boundary
    1/theta makes the likelihood zero; -inf is returned so optimizers can
    treat it as an ordinary (terrible) value.
    """
    theta = np.where(data.group == 1, params.theta1, params.theta0)
    x = theta * data.time
    if np.any(x > 1.0):
        return -math.inf
    events = data.status == 1
    with np.errstate(divide="ignore", invalid="ignore"):
        ll = np.count_nonzero(events) * math.log(params.alpha)
        ll += params.alpha * float(np.sum(np.log(theta[events])))
        ll += (params.alpha - 1.0) * float(np.sum(np.log(data.time[events])))
        # x**alpha can underflow to 0 for extreme alpha probes; that is fine
        cens = x[~events] ** params.alpha
        ll += float(np.sum(np.log1p(-np.minimum(cens, 1.0))))
    return float(ll) if not math.isnan(ll) else -math.inf


@dataclass(frozen=True)
class PprFit:
    """ML fit of the EU model with the delta-method interval for the effect.

    ``beta`` is -log(rr), the same scale the non-parametric estimator uses.
    ``converged`` reflects the optimizer; the interval can still be
    unavailable (NaN endpoints, see ``ci_reason``) when the estimate sits on
    the support boundary or the observed information is not negative-definite
    there, which happens routinely for this non-regular likelihood.
    """

    params: EuParams
    beta: float
    rr: float
    ci_beta: ConfidenceInterval
    converged: bool
    loglik: float
    reason: str = ""
    ci_reason: str = ""

    @property
    def ci_available(self) -> bool:
        return math.isfinite(self.ci_beta.lower) and math.isfinite(self.ci_beta.upper)


def _fd_hessian(f, x: np.ndarray, rel_step: float = 1e-4, max_step: np.ndarray | None = None) -> np.ndarray:
    """Central finite-difference Hessian; symmetric by construction.

    ``max_step`` caps each coordinate's step, keeping the stencil inside a
    constrained parameter's feasible region.
    """
    n = x.shape[0]
    h = rel_step * np.maximum(np.abs(x), 1e-12)
    if max_step is not None:
        h = np.minimum(h, max_step)
    hess = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            hess[i, j] = hess[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return hess


def _ppr_fit(
    params: EuParams,
    loglik: float,
    level: float,
    converged: bool,
    reason: str = "",
    ci: ConfidenceInterval | None = None,
    ci_reason: str = "",
) -> PprFit:
    try:
        log_rr = params.alpha * math.log(params.theta1 / params.theta0)
    except (ValueError, ZeroDivisionError):
        log_rr = math.nan
    return PprFit(
        params=params,
        beta=-log_rr,
        rr=math.exp(log_rr),
        ci_beta=ci if ci is not None else ConfidenceInterval(math.nan, math.nan, level),
        converged=converged,
        loglik=loglik,
        reason=reason,
        ci_reason=ci_reason,
    )


def fit_ppr(data: Dataset, level: float = 0.95, max_iter: int = 2000) -> PprFit:
    """Maximum-likelihood fit of the EU model by Nelder-Mead.

    The search runs on log parameters with each theta_g capped at its
    support bound 1/max(t in group g); times outside the support make the
    likelihood -inf, and the starts 0.9/max(t) are feasible. The interval
    for beta = -log RR comes from the multivariate delta method on the
    inverse observed information, with the Hessian taken by central
    differences in the original parameters; no interval is reported when
    the estimate sits on the boundary (the information is undefined there).
    """
    # canonical row order makes the fit exactly invariant to input permutation
    order = np.lexsort((data.status, data.group, data.time))
    data = data.take(order)
    t1, s1 = data.group_arrays(1)
    t0, s0 = data.group_arrays(0)
    if not (t1.size and t0.size):
        return _ppr_fit(EuParams(1.0, 1.0, 1.0), math.nan, level, False, "a group is empty")
    bound1 = 1.0 / float(t1.max())
    bound0 = 1.0 / float(t0.max())
    start = EuParams(1.0, 0.9 * bound1, 0.9 * bound0)
    if not (np.any(s1 == 1) or np.any(s0 == 1)):
        return _ppr_fit(start, math.nan, level, False, "no events")

    def unpack(z: np.ndarray) -> EuParams:
        return EuParams(math.exp(z[0]), min(math.exp(z[1]), bound1), min(math.exp(z[2]), bound0))

    def nll(z: np.ndarray) -> float:
        # exp overflow at |z| ~ 700 would feed NaN to the simplex; reject long before
        if np.any(np.abs(z) > 50.0):
            return math.inf
        return -eu_log_likelihood(data, unpack(z))

    x0 = np.log([start.alpha, start.theta1, start.theta0])
    f0 = nll(x0)
    res = optimize.minimize(
        nll,
        x0,
        method="Nelder-Mead",
        options=dict(
            maxiter=max_iter,
            maxfev=4 * max_iter,
            fatol=1e-10 * max(1.0, abs(f0)),
            xatol=1e-6,
        ),
    )
    params = unpack(res.x)
    loglik = -float(res.fun)
    if not res.success or not math.isfinite(loglik):
        return _ppr_fit(params, loglik, level, False, "optimizer did not converge")

    def ll_raw(p: np.ndarray) -> float:
        return eu_log_likelihood(data, EuParams(p[0], p[1], p[2]))

    # keep the stencil inside the support: theta_g + h must stay below 1/max(t_g)
    gap = np.array([math.inf, bound1 - params.theta1, bound0 - params.theta0])
    rel_gap = np.min(gap[1:] / np.array([params.theta1, params.theta0]))
    if rel_gap < 1e-7:
        return _ppr_fit(params, loglik, level, True, ci_reason="estimate at support boundary")
    hess = _fd_hessian(
        ll_raw,
        np.array([params.alpha, params.theta1, params.theta0]),
        max_step=0.45 * gap,
    )
    if not np.all(np.isfinite(hess)) or np.any(np.linalg.eigvalsh(hess) >= 0):
        return _ppr_fit(params, loglik, level, True, ci_reason="observed information not positive-definite")

    cov = np.linalg.inv(-hess)
    grad = np.array(
        [
            math.log(params.theta1) - math.log(params.theta0),
            params.alpha / params.theta1,
            -params.alpha / params.theta0,
        ]
    )
    var_log_rr = float(grad @ cov @ grad)
    if not math.isfinite(var_log_rr) or var_log_rr <= 0:
        return _ppr_fit(params, loglik, level, True, ci_reason="delta-method variance not positive")

    beta = -params.alpha * math.log(params.theta1 / params.theta0)
    z = stats.norm.ppf(0.5 + level / 2.0)
    half = z * math.sqrt(var_log_rr)
    return _ppr_fit(
        params,
        loglik,
        level,
        True,
        ci=ConfidenceInterval(beta - half, beta + half, level),
    )


@dataclass(frozen=True)
class CoxFit:
    log_hr: float
    hr: float
    ci_hr: ConfidenceInterval
    converged: bool
    reason: str = ""


def _cox_event_table(data: Dataset):
    """Per distinct event time: total events, group-1 events, at-risk sizes."""
    order = np.argsort(data.time, kind="stable")
    t = data.time[order]
    e = data.status[order]
    g = data.group[order]
    uniq, first_idx = np.unique(t, return_index=True)
    d = np.add.reduceat(e, first_idx)
    d1 = np.add.reduceat(e * g, first_idx)
    at_risk = t.shape[0] - first_idx
    n1 = np.cumsum(g[::-1])[::-1]  # group-1 subjects with time >= t, per row
    n1_at = n1[first_idx]
    keep = d > 0
    return d[keep], d1[keep], at_risk[keep], n1_at[keep]


def cox_two_group(data: Dataset, level: float = 0.95) -> CoxFit:
    """Cox partial-likelihood fit of the single group indicator.

    Newton iteration with Breslow tie handling; Wald interval from the
    observed information. Monotone likelihoods (all of one group's events
    before any of the other's in risk-set terms) do not converge and are
    reported as such.
    """
    d, d1, n_at, n1_at = _cox_event_table(data)
    if d.size == 0 or np.sum(d1) == 0 or np.sum(d1) == np.sum(d):
        return CoxFit(math.nan, math.nan, ConfidenceInterval(math.nan, math.nan, level), False, "a group has no events")

    n0_at = n_at - n1_at
    b = 0.0
    for _ in range(60):
        w1 = n1_at * math.exp(b)
        p = w1 / (n0_at + w1)
        score = float(np.sum(d1 - d * p))
        info = float(np.sum(d * p * (1.0 - p)))
        if info <= 0 or not math.isfinite(info):
            return CoxFit(b, math.exp(b), ConfidenceInterval(math.nan, math.nan, level), False, "singular information")
        step = score / info
        b += step
        if abs(b) > 30:
            return CoxFit(b, math.exp(b), ConfidenceInterval(math.nan, math.nan, level), False, "monotone likelihood")
        if abs(step) < 1e-12:
            break
    else:
        return CoxFit(b, math.exp(b), ConfidenceInterval(math.nan, math.nan, level), False, "did not converge")

    se = 1.0 / math.sqrt(info)
    z = stats.norm.ppf(0.5 + level / 2.0)
    ci = ConfidenceInterval(math.exp(b - z * se), math.exp(b + z * se), level)
    return CoxFit(log_hr=b, hr=math.exp(b), ci_hr=ci, converged=True)
