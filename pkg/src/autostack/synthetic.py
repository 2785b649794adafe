"""Schema-faithful synthetic stand-ins for the three case-study files.

The genuine datasets are downloaded by hand. These generators write CSV
files with the same header, delimiter, response encoding and column types
(and roughly the same class imbalance), filled with random values that
carry a modest logistic signal. They exist so the full harness can be
exercised end to end; numbers obtained on them say nothing about the
genuine data.
"""

from __future__ import annotations

import csv
import os

import numpy as np

CREDIT_COLUMNS = (
    ["LIMIT_BAL", "SEX", "EDUCATION", "MARRIAGE", "AGE"]
    + ["PAY_0"] + [f"PAY_{i}" for i in range(2, 7)]
    + [f"BILL_AMT{i}" for i in range(1, 7)]
    + [f"PAY_AMT{i}" for i in range(1, 7)]
)

CLAIMS_COLUMNS = (
    ["ps_ind_01", "ps_ind_02_cat", "ps_ind_03", "ps_ind_04_cat", "ps_ind_05_cat"]
    + [f"ps_ind_{i:02d}_bin" for i in range(6, 14)]
    + ["ps_ind_14", "ps_ind_15", "ps_ind_16_bin", "ps_ind_17_bin", "ps_ind_18_bin"]
    + ["ps_reg_01", "ps_reg_02", "ps_reg_03"]
    + [f"ps_car_{i:02d}_cat" for i in range(1, 12)]
    + ["ps_car_11", "ps_car_12", "ps_car_13", "ps_car_14", "ps_car_15"]
    + [f"ps_calc_{i:02d}" for i in range(1, 15)]
    + [f"ps_calc_{i:02d}_bin" for i in range(15, 21)]
)

MARKETING_COLUMNS = [
    "age", "job", "marital", "education", "default", "balance", "housing", "loan",
    "contact", "day", "month", "duration", "campaign", "pdays", "previous", "poutcome",
]

_JOBS = ["admin.", "blue-collar", "entrepreneur", "housemaid", "management", "retired",
         "self-employed", "services", "student", "technician", "unemployed", "unknown"]
_MONTHS = ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]


def _labels(rng, signal, positive_rate):
    latent = signal + rng.logistic(size=signal.size)
    cut = np.quantile(latent, 1.0 - positive_rate)
    return (latent > cut).astype(int)


def _credit(rng, n):
    limit = rng.gamma(2.0, 80_000, n).round(-4) + 10_000
    pay = np.clip(rng.poisson(0.6, (n, 6)) - 1 - (rng.random((n, 6)) < 0.2), -2, 8)
    bill = np.maximum(0, rng.normal(50_000, 60_000, (n, 6))).round()
    paid = np.maximum(0, rng.exponential(5_000, (n, 6))).round()
    age = rng.integers(21, 75, n)
    signal = 0.9 * pay[:, 0] + 0.3 * pay[:, 1] - 0.000004 * limit - 0.00003 * paid[:, 0]
    y = _labels(rng, signal, 6636 / 30000)
    cols = np.column_stack([limit, rng.integers(1, 3, n), rng.integers(0, 7, n), rng.integers(0, 4, n),
                            age, pay, bill, paid])
    rows = [[i + 1] + [int(v) for v in r] + [int(t)] for i, (r, t) in enumerate(zip(cols, y))]
    return ["ID"] + CREDIT_COLUMNS + ["default"], rows


def _claims(rng, n):
    values = []
    signal = np.zeros(n)
    for j, name in enumerate(CLAIMS_COLUMNS):
        if name.endswith("_cat"):
            col = rng.integers(-1, 8, n)
        elif name.endswith("_bin"):
            col = (rng.random(n) < 0.3).astype(int)
        elif name.startswith(("ps_reg", "ps_car_1")):
            col = np.round(rng.random(n) * 1.5, 6)
        else:
            col = rng.integers(0, 12, n)
        if j % 9 == 0:
            signal += 0.15 * (col - np.mean(col)) / (np.std(col) + 1e-9)
        values.append(col)
    y = _labels(rng, signal, 21694 / 595212)
    rows = [[i + 1, int(t)] + [v[i] for v in values] for i, t in enumerate(y)]
    return ["id", "target"] + CLAIMS_COLUMNS, rows


def _marketing(rng, n):
    duration = rng.exponential(250, n).round().astype(int)
    balance = rng.normal(1300, 3000, n).round().astype(int)
    poutcome = rng.choice(["unknown", "failure", "other", "success"], n, p=[0.8, 0.1, 0.05, 0.05])
    contact = rng.choice(["cellular", "telephone", "unknown"], n, p=[0.65, 0.06, 0.29])
    signal = 0.006 * duration + 2.0 * (poutcome == "success") - 0.8 * (contact == "unknown")
    y = _labels(rng, signal, 5289 / 45211)
    pdays = np.where(poutcome == "unknown", -1, rng.integers(1, 400, n))
    cols = [
        rng.integers(18, 90, n), rng.choice(_JOBS, n), rng.choice(["married", "single", "divorced"], n),
        rng.choice(["primary", "secondary", "tertiary", "unknown"], n), rng.choice(["no", "yes"], n, p=[0.98, 0.02]),
        balance, rng.choice(["yes", "no"], n), rng.choice(["no", "yes"], n, p=[0.84, 0.16]), contact,
        rng.integers(1, 32, n), rng.choice(_MONTHS, n), duration, rng.integers(1, 10, n), pdays,
        np.where(poutcome == "unknown", 0, rng.integers(1, 6, n)), poutcome,
    ]
    rows = [[c[i].item() if hasattr(c[i], "item") else c[i] for c in cols] + ["yes" if y[i] else "no"]
            for i in range(n)]
    return MARKETING_COLUMNS + ["y"], rows


_GENERATORS = {"credit_risk": _credit, "claims": _claims, "marketing": _marketing}


def write_surrogate(case: str, path, n_rows: int, seed: int = 0) -> str:
    """Write a surrogate CSV for ``case`` and return its path."""
    if case not in _GENERATORS:
        raise KeyError(f"unknown case study {case!r}")
    rng = np.random.default_rng(seed)
    header, rows = _GENERATORS[case](rng, n_rows)
    path = os.fspath(path)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if case == "marketing":
            writer = csv.writer(fh, delimiter=";", quoting=csv.QUOTE_NONNUMERIC)
        else:
            writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path
