"""Regenerate the bundled synthetic two-arm trial dataset.

The original case-study data (reconstructed from a published trial's
survival curves) cannot be redistributed, so the repository ships a
synthetic stand-in of the same shape: 2,373 treatment and 2,371 control
subjects, proportional-risk event times with a true log relative risk of
0.32, heavy late censoring, and times rounded to two decimals so tied
times occur at realistic rates.
"""
import math

import numpy as np

from proprisk.models import EuParams, eu_quantile
from proprisk.reporting import write_dataset_csv
from proprisk.survival import Dataset

N1, N0 = 2373, 2371
TRUE_BETA = 0.32
ALPHA = 0.859
THETA0 = 0.009
SEED = 20240214
OUT = "src/proprisk/data/synthetic_trial.csv"


def main():
    theta1 = THETA0 * math.exp(-TRUE_BETA / ALPHA)
    params = EuParams(ALPHA, theta1, THETA0)
    rng = np.random.default_rng(np.random.SeedSequence(SEED))

    group = np.concatenate([np.ones(N1, dtype=int), np.zeros(N0, dtype=int)])
    n = N1 + N0
    t_event = np.empty(n)
    for g in (0, 1):
        mask = group == g
        t_event[mask] = eu_quantile(params, g, rng.random(mask.sum()))
    # staggered-entry administrative censoring, 8 to 28 months of follow-up
    t_censor = rng.uniform(8.0, 28.0, size=n)

    time = np.round(np.minimum(t_event, t_censor), 2)
    time = np.maximum(time, 0.01)  # rounding must not produce zero times
    status = (t_event <= t_censor).astype(int)

    order = rng.permutation(n)
    data = Dataset.from_columns(time[order], status[order], group[order])
    write_dataset_csv(data, OUT)
    n_ev1 = int(np.sum(data.status[data.group == 1]))
    n_ev0 = int(np.sum(data.status[data.group == 0]))
    print(f"wrote {OUT}: {n} rows, events {n_ev1}/{N1} treatment, {n_ev0}/{N0} control")


if __name__ == "__main__":
    main()
