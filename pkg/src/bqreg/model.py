"""Domain types shared by every estimator, and design-matrix construction."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateSampleError, DomainError, MissingColumnError, UsageError

INTERCEPT = "C"

# Quantiles outside this band are rejected by the estimators; extreme
# quantiles are unstable at sample sizes in the hundreds.
TAU_MIN, TAU_MAX = 0.01, 0.99

DEFAULT_TAU_GRID = tuple(round(0.1 * k, 1) for k in range(1, 10))

_LAG_RE = re.compile(r"^lag\((\d+)\)$")


def check_tau(tau, *, lo=TAU_MIN, hi=TAU_MAX):
    """Validate a quantile level and return it as a float."""
    tau = float(tau)
    if not (0.0 < tau < 1.0) or not (lo <= tau <= hi):
        raise UsageError(f"quantile level {tau!r} outside [{lo}, {hi}]")
    return tau


def parse_transform(token):
    """Parse ``log``, ``diff`` or ``lag(k)`` into a normalized tuple."""
    token = token.strip().replace(" ", "")
    if token in ("log", "diff"):
        return (token,)
    m = _LAG_RE.match(token)
    if m and int(m.group(1)) >= 1:
        return ("lag", int(m.group(1)))
    raise UsageError(f"unknown transform {token!r}; expected log, diff or lag(k)")


def format_transform(t):
    return f"lag({t[1]})" if t[0] == "lag" else t[0]


@dataclass(frozen=True)
class Dataset:
    """Date-indexed named numeric columns of equal length.

    ``labels`` maps a column key to a display name (transforms annotate it).
    Columns produced by lag or diff transforms may carry leading NaN values;
    :func:`build_design` drops those rows.
    """

    dates: np.ndarray
    columns: Mapping[str, np.ndarray]
    labels: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        n = dates.shape[0]
        if n < 1:
            raise DegenerateSampleError("dataset has no observations")
        if n > 1 and not np.all(dates[1:] > dates[:-1]):
            raise UsageError("dates must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            arr = np.array(values, dtype=float)
            if arr.shape != (n,):
                raise UsageError(f"column {name!r} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            cols[str(name)] = arr
        dates.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "labels", dict(self.labels))

    @property
    def n(self):
        return self.dates.shape[0]

    @property
    def names(self):
        return list(self.columns)

    def label(self, name):
        return self.labels.get(name, name)

    def column(self, name):
        try:
            return self.columns[name]
        except KeyError:
            raise MissingColumnError(name) from None

    def take(self, rows):
        """Return a new dataset restricted to ``rows`` (mask or indices)."""
        return Dataset(
            self.dates[rows],
            {k: v[rows] for k, v in self.columns.items()},
            self.labels,
        )

    def replace(self, columns=None, labels=None):
        return Dataset(
            self.dates,
            {**self.columns, **(columns or {})},
            {**self.labels, **(labels or {})},
        )

    def equals(self, other):
        return (
            isinstance(other, Dataset)
            and np.array_equal(self.dates, other.dates)
            and list(self.columns) == list(other.columns)
            and all(
                np.array_equal(self.columns[k], other.columns[k], equal_nan=True)
                for k in self.columns
            )
        )


@dataclass(frozen=True)
class InstrumentBlock:
    """One endogenous regressor plus extra excluded instruments.

    The one-period lag of the response is always used as an excluded
    instrument, so ``instruments`` may be empty.
    """

    endogenous: str
    instruments: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "instruments", tuple(self.instruments))


@dataclass(frozen=True)
class ModelSpec:
    response: str
    regressors: tuple
    intercept: bool = True
    transforms: Mapping[str, tuple] = field(default_factory=dict)
    instrument_block: InstrumentBlock | None = None

    def __post_init__(self):
        regs = tuple(self.regressors)
        object.__setattr__(self, "regressors", regs)
        if not regs and not self.intercept:
            raise UsageError("model has no regressors and no intercept")
        if len(set(regs)) != len(regs):
            raise UsageError("duplicate regressor names")
        if self.response in regs:
            raise UsageError(f"response {self.response!r} listed among regressors")
        tf = {}
        for col, items in dict(self.transforms).items():
            if isinstance(items, str):
                items = [items]
            tf[col] = tuple(parse_transform(t) if isinstance(t, str) else tuple(t) for t in items)
        object.__setattr__(self, "transforms", tf)
        ib = self.instrument_block
        if ib is not None:
            if ib.endogenous not in regs:
                raise UsageError(f"endogenous variable {ib.endogenous!r} is not a regressor")
            clash = set(ib.instruments) & (set(regs) | {self.response})
            if clash:
                raise UsageError(f"instruments overlap the model variables: {sorted(clash)}")

    @property
    def columns(self):
        """Every dataset column the model touches, response first."""
        cols = [self.response, *self.regressors]
        if self.instrument_block is not None:
            cols += [c for c in self.instrument_block.instruments if c not in cols]
        return cols

    @property
    def n_params(self):
        return len(self.regressors) + int(self.intercept)


@dataclass(frozen=True)
class PosteriorChain:
    tau: float
    beta_draws: np.ndarray
    sigma_draws: np.ndarray
    burn_in: int
    thin: int
    seed: int
    regressor_names: tuple

    def __post_init__(self):
        beta = np.asarray(self.beta_draws, dtype=float)
        sigma = np.asarray(self.sigma_draws, dtype=float)
        if beta.ndim != 2 or beta.shape[0] < 1:
            raise UsageError("beta_draws must be a non-empty S x p matrix")
        if sigma.shape != (beta.shape[0],):
            raise UsageError("sigma_draws must have one entry per draw")
        if not np.all(sigma > 0):
            raise UsageError("sigma draws must be positive")
        if len(self.regressor_names) != beta.shape[1]:
            raise UsageError("regressor_names do not match beta_draws columns")
        beta.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, "beta_draws", beta)
        object.__setattr__(self, "sigma_draws", sigma)
        object.__setattr__(self, "regressor_names", tuple(self.regressor_names))

    @property
    def n_draws(self):
        return self.beta_draws.shape[0]


def stars_for(prob):
    """Significance stars: 3 below 1%, 2 below 5%, 1 below 10%."""
    if prob is None or not np.isfinite(prob):
        return 0
    if prob < 0.01:
        return 3
    if prob < 0.05:
        return 2
    if prob < 0.10:
        return 1
    return 0


@dataclass(frozen=True)
class CoefficientRow:
    estimator: str
    regressor: str
    tau: float | None
    estimate: float
    interval_lo: float
    interval_hi: float
    prob: float | None

    def __post_init__(self):
        if not self.interval_lo <= self.estimate <= self.interval_hi:
            raise UsageError(f"{self.key}: estimate {self.estimate!r} outside its interval "
                             f"[{self.interval_lo!r}, {self.interval_hi!r}]")
        if self.prob is not None and not 0.0 <= self.prob <= 1.0:
            raise UsageError(f"{self.key}: prob {self.prob!r} outside [0, 1]")

    @property
    def stars(self):
        return stars_for(self.prob)

    @property
    def key(self):
        return (self.estimator, self.regressor, self.tau)


class CoefficientTable:
    """Ordered collection of coefficient rows keyed by (estimator, regressor, tau)."""

    def __init__(self, rows: Sequence[CoefficientRow] = ()):
        self._rows = {}
        for row in rows:
            self.add(row)

    def add(self, row):
        if row.key in self._rows:
            raise UsageError(f"duplicate coefficient row {row.key}")
        self._rows[row.key] = row

    def extend(self, rows):
        for row in rows:
            self.add(row)

    @property
    def rows(self):
        return list(self._rows.values())

    def get(self, estimator, regressor, tau=None):
        return self._rows[(estimator, regressor, tau)]

    def estimators(self):
        return list(dict.fromkeys(r.estimator for r in self._rows.values()))

    def __len__(self):
        return len(self._rows)

    def __iter__(self):
        return iter(self._rows.values())


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    df: int
    p_value: float
    note: str = ""

    __test__ = False  # keep pytest from collecting this class

    def __post_init__(self):
        if self.df < 0:
            raise UsageError("degrees of freedom must be nonnegative")
        if not (0.0 <= self.p_value <= 1.0):
            raise UsageError(f"p-value {self.p_value!r} outside [0, 1]")


def _log(values, name, dates):
    bad = np.flatnonzero(np.isfinite(values) & (values <= 0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"log of non-positive value {values[i]!r} in column {name!r} "
                          f"at row {i} ({dates[i]})")
    with np.errstate(invalid="ignore"):
        return np.log(values)


def _lag(values, k):
    out = np.full_like(values, np.nan)
    if k < values.size:
        out[k:] = values[:-k]
    return out


def _diff(values):
    out = np.full_like(values, np.nan)
    out[1:] = values[1:] - values[:-1]
    return out


def transform_column(values, transforms, name="", dates=None):
    """Apply a sequence of parsed transforms to one column.

    Lags and differences leave NaN in the leading rows they make undefined.
    """
    values = np.array(values, dtype=float)
    label = name
    for t in transforms:
        if t[0] == "log":
            values = _log(values, name, dates if dates is not None else np.arange(values.size))
            label = f"log({label})"
        elif t[0] == "lag":
            values = _lag(values, t[1])
            label = f"lag{t[1]}({label})"
        elif t[0] == "diff":
            values = _diff(values)
            label = f"d({label})"
        else:
            raise ValueError(f"unknown transform {t!r}")
    return values, label


def apply_transforms(dataset, spec):
    """Return a dataset with the transforms of ``spec`` applied.

    Transformed columns keep their keys, so ``spec`` still refers to them;
    their display labels record the transforms (``log(GP)``, ``lag1(x)``,
    ``d(x)``).
    """
    columns, labels = {}, {}
    for name, transforms in spec.transforms.items():
        if name not in dataset.columns:
            raise MissingColumnError(name)
        values, label = transform_column(dataset.column(name), transforms,
                                         dataset.label(name), dataset.dates)
        columns[name] = values
        labels[name] = label
    return dataset.replace(columns, labels)


def design_rows(dataset, columns):
    """Boolean mask of rows where every listed column is finite."""
    mask = np.ones(dataset.n, dtype=bool)
    for name in columns:
        mask &= np.isfinite(dataset.column(name))
    return mask


def build_design(dataset: Dataset, spec: ModelSpec):
    """Materialize ``(X, y, names)`` for ``spec``.

    The transforms of ``spec`` are applied first. Column order is the
    intercept (when requested) followed by ``spec.regressors``. Rows left
    undefined by lag or diff transforms are dropped from X and y together.
    """
    for name in [spec.response, *spec.regressors]:
        if name not in dataset.columns:
            raise MissingColumnError(name)
    dataset = apply_transforms(dataset, spec)
    rows = design_rows(dataset, [spec.response, *spec.regressors])
    return _assemble(dataset, spec, rows)


def _assemble(dataset, spec, rows):
    n = int(rows.sum())
    if n == 0:
        raise DegenerateSampleError("no observations left after dropping undefined rows")
    cols, names = [], []
    if spec.intercept:
        cols.append(np.ones(n))
        names.append(INTERCEPT)
    for name in spec.regressors:
        cols.append(dataset.column(name)[rows])
        names.append(dataset.label(name))
    X = np.column_stack(cols)
    y = np.array(dataset.column(spec.response)[rows])
    return X, y, names
