"""Synthetic stand-in for the Bitcoin determinants data set.

Three files mimic the three kinds of source:

* ``bitcoin.csv``  BPI, VC, ETR, HR (every calendar day)
* ``trends.csv``   ABI, ABV (every calendar day)
* ``markets.csv``  GP, Yuan, BV, USV (business days, with holidays)

The window is 2015-01-01 .. 2016-12-30. Markets are closed on 2015-01-01
and have no earlier value to carry forward, so that day drops out of the
joined sample and 729 daily observations remain. The numbers are simulated
and carry no economic content; they only exercise the pipeline.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path

import numpy as np

from .io import write_csv
from ..model import Dataset

START, END = dt.date(2015, 1, 1), dt.date(2016, 12, 30)
MARKET_HOLIDAYS = (
    dt.date(2015, 1, 1),
    dt.date(2015, 4, 3),
    dt.date(2015, 12, 25),
    dt.date(2016, 1, 1),
    dt.date(2016, 3, 25),
    dt.date(2016, 12, 26),
)
REGRESSORS = ("VC", "ETR", "GP", "ABI", "ABV", "HR", "Yuan", "BV", "USV")
MARKET_COLUMNS = ("GP", "Yuan", "BV", "USV")
FIXTURE_SEED = 20150101


def _ar1_log(rng, n, level, phi, sd):
    x = np.empty(n)
    x[0] = 0.0
    for t in range(1, n):
        x[t] = phi * x[t - 1] + sd * rng.standard_normal()
    return level * np.exp(x)


def make_fixture(directory, seed=FIXTURE_SEED):
    """Write the three fixture CSV files into ``directory``."""
    rng = np.random.default_rng(seed)
    days = np.arange(np.datetime64(START), np.datetime64(END) + 1)
    n = days.size
    t = np.arange(n) / n

    vc = _ar1_log(rng, n, 0.02, 0.9, 0.15)
    etr = _ar1_log(rng, n, 4.0, 0.95, 0.10)
    gp = _ar1_log(rng, n, 1200.0, 0.995, 0.008)
    abi = np.clip(_ar1_log(rng, n, 20.0, 0.9, 0.25), 1.0, 100.0)
    abv = np.clip(_ar1_log(rng, n, 15.0, 0.9, 0.30), 1.0, 100.0)
    hr = 3e5 * np.exp(1.6 * t + 0.05 * rng.standard_normal(n))
    yuan = 6.2 * np.exp(0.1 * t + np.cumsum(0.001 * rng.standard_normal(n)))
    bv = _ar1_log(rng, n, 18.0, 0.97, 0.06)
    usv = _ar1_log(rng, n, 16.0, 0.97, 0.07)

    logs = np.log(np.column_stack([vc, etr, gp, abi, abv, hr, yuan, bv, usv]))
    slopes = np.array([-0.05, 0.3, -0.2, 0.05, 0.03, 0.4, 1.0, 0.1, 0.1])
    centered = logs - logs.mean(axis=0)
    # heteroskedastic error whose spread grows with attention in India
    spread = 0.05 + 0.04 * (centered[:, 3] - centered[:, 3].min())
    log_bpi = 5.9 + centered @ slopes + spread * rng.standard_normal(n)
    bpi = np.exp(log_bpi)

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    btc = Dataset(days, {"BPI": bpi, "VC": vc, "ETR": etr, "HR": hr})
    trends = Dataset(days, {"ABI": np.round(abi, 1), "ABV": np.round(abv, 1)})
    open_days = np.array([
        d.astype(dt.date).weekday() < 5 and d.astype(dt.date) not in MARKET_HOLIDAYS
        for d in days
    ])
    markets = Dataset(days[open_days], {
        "GP": np.round(gp, 2)[open_days],
        "Yuan": np.round(yuan, 4)[open_days],
        "BV": np.round(bv, 2)[open_days],
        "USV": np.round(usv, 2)[open_days],
    })
    write_csv(btc, directory / "bitcoin.csv")
    write_csv(trends, directory / "trends.csv")
    write_csv(markets, directory / "markets.csv")
    return [directory / "bitcoin.csv", directory / "markets.csv", directory / "trends.csv"]
