"""Synthetic two-group survival data under the proportional-risk (EU) and
proportional-hazards (Weibull) generating models, with censoring-rate
calibration.

Per participant: group ~ Bernoulli(1/2) by inverse transform, event time T
from the group's model CDF by inverse transform, censoring time
C ~ Uniform(0, c_max); observed time is min(T, C) and status is 1 iff
T <= C. One c_max per scenario, calibrated so that P(C < T) hits the target
rate with T drawn from the equal-probability mixture of the two groups.

Randomness: replicate r of a scenario draws from
SeedSequence(scenario.seed, spawn_key=(r, 0)); replicates are reproducible
independently of execution order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate, optimize

from .models import (
    EuParams,
    WeibullPhParams,
    eu_cdf,
    eu_quantile,
    weibull_ph_cdf,
    weibull_ph_quantile,
)
from .survival import Dataset


class Model(str, Enum):
    PPR_EU = "ppr_eu"
    WEIBULL_PH = "weibull_ph"


ModelParams = Union[EuParams, WeibullPhParams]

# Parameter grid of the two generating models: shared shape, control-group
# scale, and the treatment scale for each nominal effect beta (rr = exp(-beta)).
EFFECTS = (0.0, 0.5, 0.25, -0.25, -0.5)
CENSOR_RATES = (0.30, 0.50, 0.70)
SAMPLE_SIZES = (500, 100, 50)

EU_ALPHA = 0.859
EU_THETA0 = 0.009
EU_THETA1 = {0.0: 0.009, 0.5: 0.005, 0.25: 0.007, -0.25: 0.012, -0.5: 0.016}

WEIBULL_K = 0.916
WEIBULL_LAMBDA0 = 88.296
WEIBULL_LAMBDA1 = {0.0: 88.296, 0.5: 145.575, 0.25: 113.374, -0.25: 68.765, -0.5: 53.554}


def standard_params(model: Model, effect_beta: float) -> ModelParams:
    """Bundled generating-model parameters for one nominal effect."""
    if model is Model.PPR_EU:
        return EuParams(EU_ALPHA, EU_THETA1[effect_beta], EU_THETA0)
    return WeibullPhParams(WEIBULL_K, WEIBULL_LAMBDA1[effect_beta], WEIBULL_LAMBDA0)


@dataclass(frozen=True)
class Scenario:
    """One cell of the simulation grid."""

    model: Model
    effect_beta: float
    params: ModelParams
    censor_rate: float
    n_participants: int
    censor_cmax: float
    seed: int = 0


def _model_cdf(model: Model, params: ModelParams, group: int, t):
    if model is Model.PPR_EU:
        return eu_cdf(params, group, t)
    return weibull_ph_cdf(params, group, t)


def _model_quantile(model: Model, params: ModelParams, group: int, u):
    if model is Model.PPR_EU:
        return eu_quantile(params, group, u)
    return weibull_ph_quantile(params, group, u)


def censoring_probability(model: Model, params: ModelParams, c_max: float) -> float:
    """P(C < T) for C ~ Uniform(0, c_max), T from the 50/50 group mixture.

    Equals (1/c) * integral_0^c S_mix(u) du, evaluated by adaptive
    quadrature with breakpoints at the EU support endpoints.
    """

    def s_mix(u: float) -> float:
        return 1.0 - 0.5 * (
            _model_cdf(model, params, 1, u) + _model_cdf(model, params, 0, u)
        )

    points = None
    if model is Model.PPR_EU:
        ends = [1.0 / params.theta1, 1.0 / params.theta0]
        points = [e for e in ends if 0.0 < e < c_max] or None
    value, _ = integrate.quad(s_mix, 0.0, c_max, points=points, limit=200)
    return value / c_max


def calibrate_censoring(model: Model, params: ModelParams, target_rate: float) -> float:
    """Uniform upper bound c_max achieving the target censoring rate.

    P(C < T) decreases monotonically from 1 (c_max -> 0) to 0, so the root
    is bracketed by doubling and solved by brentq; the achieved probability
    matches the target far inside the 1e-4 tolerance.
    """
    if not 0.0 < target_rate < 1.0:
        raise ValueError("target_rate must be in (0, 1)")
    lo, hi = 1e-8, 1.0
    while censoring_probability(model, params, hi) > target_rate:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("censoring target unreachable")
    c_max = optimize.brentq(
        lambda c: censoring_probability(model, params, c) - target_rate,
        lo,
        hi,
        xtol=1e-9,
        rtol=1e-12,
    )
    return float(c_max)


def make_scenario(
    model: Model,
    effect_beta: float,
    censor_rate: float,
    n_participants: int,
    seed: int = 0,
    censor_cmax: float | None = None,
    params: ModelParams | None = None,
) -> Scenario:
    """Scenario from the bundled parameter grid, calibrating c_max on demand."""
    if params is None:
        params = standard_params(Model(model), effect_beta)
    if censor_cmax is None:
        censor_cmax = calibrate_censoring(Model(model), params, censor_rate)
    return Scenario(
        model=Model(model),
        effect_beta=effect_beta,
        params=params,
        censor_rate=censor_rate,
        n_participants=n_participants,
        censor_cmax=censor_cmax,
        seed=seed,
    )


def simulate_dataset(scenario: Scenario, replicate_seed: int) -> Dataset:
    """One simulated study; deterministic given (scenario.seed, replicate_seed)."""
    rng = np.random.default_rng(
        np.random.SeedSequence(scenario.seed, spawn_key=(replicate_seed, 0))
    )
    n = scenario.n_participants
    u = rng.random((3, n))
    group = (u[0] > 0.5).astype(np.int64)  # inverse transform of Bernoulli(1/2)

    t_event = np.empty(n)
    for g in (0, 1):
        mask = group == g
        if np.any(mask):
            t_event[mask] = _model_quantile(scenario.model, scenario.params, g, u[1][mask])

    t_censor = scenario.censor_cmax * u[2]
    status = (t_event <= t_censor).astype(np.int64)
    time = np.minimum(t_event, t_censor)
    return Dataset.from_columns(time, status, group)


# ---------------------------------------------------------------------------
# Scenario (de)serialization: the JSON grid format mirrors Scenario 1:1.
# ---------------------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    if scenario.model is Model.PPR_EU:
        params = {
            "alpha": scenario.params.alpha,
            "theta1": scenario.params.theta1,
            "theta0": scenario.params.theta0,
        }
    else:
        params = {
            "k": scenario.params.k,
            "lambda1": scenario.params.lambda1,
            "lambda0": scenario.params.lambda0,
        }
    return {
        "model": scenario.model.value,
        "effect_beta": scenario.effect_beta,
        "params": params,
        "censor_rate": scenario.censor_rate,
        "n_participants": scenario.n_participants,
        "censor_cmax": scenario.censor_cmax,
        "seed": scenario.seed,
    }


def scenario_from_dict(obj: dict) -> Scenario:
    model = Model(obj["model"])
    p = obj["params"]
    if model is Model.PPR_EU:
        params: ModelParams = EuParams(p["alpha"], p["theta1"], p["theta0"])
    else:
        params = WeibullPhParams(p["k"], p["lambda1"], p["lambda0"])
    return make_scenario(
        model=model,
        effect_beta=float(obj["effect_beta"]),
        censor_rate=float(obj["censor_rate"]),
        n_participants=int(obj["n_participants"]),
        seed=int(obj.get("seed", 0)),
        censor_cmax=obj.get("censor_cmax"),
        params=params,
    )


def load_grid(path) -> list[Scenario]:
    """Scenario list from a JSON grid file (a list of scenario objects)."""
    with open(path) as fh:
        raw = json.load(fh)
    if isinstance(raw, dict):
        raw = [raw]
    return [scenario_from_dict(obj) for obj in raw]


def save_grid(scenarios: list[Scenario], path) -> None:
    with open(path, "w") as fh:
        json.dump([scenario_to_dict(s) for s in scenarios], fh, indent=1)
        fh.write("\n")


def reseed(scenarios: list[Scenario], base_seed: int) -> list[Scenario]:
    """Derive a distinct per-scenario seed from one base seed."""
    out = []
    for i, s in enumerate(scenarios):
        derived = int(np.random.SeedSequence(base_seed, spawn_key=(i,)).generate_state(1)[0])
        out.append(replace(s, seed=derived))
    return out


def default_grid_path() -> Path:
    return Path(__file__).parent / "data" / "default_grid.json"


def default_grid() -> list[Scenario]:
    """The bundled 90-cell grid: both models x 5 effects x 3 censoring
    rates x 3 sample sizes, with precomputed censoring bounds."""
    return load_grid(default_grid_path())


def build_default_grid() -> list[Scenario]:
    """Recompute the bundled grid from the parameter constants (slow path,
    calibrates every cell; used to regenerate the shipped JSON)."""
    scenarios = []
    for model in (Model.PPR_EU, Model.WEIBULL_PH):
        for effect in EFFECTS:
            params = standard_params(model, effect)
            for rate in CENSOR_RATES:
                c_max = calibrate_censoring(model, params, rate)
                for n in SAMPLE_SIZES:
                    scenarios.append(
                        Scenario(model, effect, params, rate, n, c_max, seed=0)
                    )
    return scenarios
