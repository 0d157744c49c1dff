"""Datasets: CSV ingestion, response scaling, cutpoint grids, synthetic benchmarks, splits."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    pass


class ConstantCovariateWarning(UserWarning):
    """A covariate takes a single value and can never be split on."""


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]
    truth: np.ndarray | None = field(default=None, compare=False)  # noiseless f(x), synthetic only

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DataError(f"shape mismatch: X {X.shape}, y {y.shape}")
        if X.shape[0] < 2 or X.shape[1] < 1:
            raise DataError(f"need n >= 2 rows and p >= 1 covariates, got {X.shape}")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise DataError("missing or non-finite values are not supported")
        if len(self.names) != X.shape[1]:
            raise DataError(f"{len(self.names)} names for {X.shape[1]} covariates")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> Dataset:
        truth = None if self.truth is None else self.truth[rows]
        return Dataset(self.X[rows], self.y[rows], self.names, truth)

    def column(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown covariate {name!r}; columns are {list(self.names)}") from None


@dataclass(frozen=True)
class Standardization:
    """Affine map sending ``[min(y), max(y)]`` onto ``[-0.5, 0.5]``."""

    shift: float
    scale: float

    @classmethod
    def fit(cls, y) -> Standardization:
        y = np.asarray(y, dtype=float)
        lo, hi = float(y.min()), float(y.max())
        if not hi > lo:
            raise DataError("cannot standardise a constant response")
        return cls(lo, hi - lo)

    def standardize(self, y):
        return (np.asarray(y, dtype=float) - self.shift) / self.scale - 0.5

    def unstandardize(self, z):
        return (np.asarray(z, dtype=float) + 0.5) * self.scale + self.shift


def load_csv(path, response: str | None = None) -> Dataset:
    """Read a numeric CSV with a header row; ``response`` defaults to the last column."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if len(raw) != len(header):
                raise DataError(f"{path}: row {lineno} has {len(raw)} fields, header has {len(header)}")
            values = []
            for name, cell in zip(header, raw):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at row {lineno}, column {name!r}"
                    ) from None
            rows.append(values)
    if response is None:
        response = header[-1]
    if response not in header:
        raise DataError(f"{path}: response column {response!r} not found")
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(rows)}")
    table = np.array(rows, dtype=float)
    j = header.index(response)
    keep = [i for i in range(len(header)) if i != j]
    if not keep:
        raise DataError(f"{path}: no covariate columns besides {response!r}")
    return Dataset(table[:, keep], table[:, j], tuple(header[i] for i in keep))


def make_grid(X, n_cut: int = 100) -> list[np.ndarray]:
    """Per-covariate cutpoints at equally spaced interior quantiles.

    Covariates with at most ``n_cut`` distinct splits get every midpoint
    between consecutive distinct values instead.  Every cutpoint lies in
    ``[min, max)`` so both sides of a split can be non-empty.
    """
    if n_cut < 1:
        raise ValueError(f"n_cut must be >= 1, got {n_cut}")
    X = np.asarray(X, dtype=float)
    grids = []
    levels = np.arange(1, n_cut + 1) / (n_cut + 1)
    for j in range(X.shape[1]):
        col = X[:, j]
        uniq = np.unique(col)
        if uniq.size < 2:
            warnings.warn(f"covariate {j} is constant; it will never be split on", ConstantCovariateWarning)
            grids.append(np.empty(0))
            continue
        if uniq.size - 1 <= n_cut:
            cuts = 0.5 * (uniq[:-1] + uniq[1:])
        else:
            cuts = np.unique(np.quantile(col, levels))
            cuts = cuts[cuts < uniq[-1]]
        grids.append(cuts)
    return grids


# -- synthetic benchmarks ---------------------------------------------------

SYNTHETIC = ("F1", "F2", "F3", "F4")


def synthetic_truth(which: str, X) -> np.ndarray:
    """Noiseless benchmark surface; columns are X1, X2, ... (0-based here)."""
    X = np.asarray(X, dtype=float)
    x1, x2, x3, x4, x5 = (X[:, i] for i in range(5))
    if which in ("F1", "F4"):
        return (
            10 * np.sin(np.pi * x1 * x2)
            + 5 * x1**2 * (x3 - 0.5)
            + 10 * x1**3 * x3 * x4
            + 5 * x1**4 * x5
        )
    if which == "F2":
        return (
            10 * np.sin(np.pi * x1 * x2)
            + 5 * x2**2 * (x3 - 0.5)
            + 10 * x1**3 * x3 * x4
            + 5 * x1**4 * x5
        )
    if which == "F3":
        x6 = X[:, 5]
        return (
            10 * np.sin(np.pi * x6 * x2)
            + 5 * x6**2 * (x3 - 0.5)
            + 10 * x6**3 * x3 * x4
            + 5 * x6**4 * x5
        )
    raise ValueError(f"unknown synthetic function {which!r}; choose from {SYNTHETIC}")


def gen_synthetic(which: str, n: int, noise_sd: float = 1.0, seed=None) -> Dataset:
    """Uniform(0, 1) covariates (10 of them, 5 for F4) and ``y = f(x) + N(0, noise_sd^2)``."""
    if which not in SYNTHETIC:
        raise ValueError(f"unknown synthetic function {which!r}; choose from {SYNTHETIC}")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    p = 5 if which == "F4" else 10
    X = rng.uniform(0.0, 1.0, size=(n, p))
    f = synthetic_truth(which, X)
    y = f + noise_sd * rng.standard_normal(n)
    return Dataset(X, y, tuple(f"X{i + 1}" for i in range(p)), truth=f)


# -- resampling -------------------------------------------------------------


def trim_to_multiple(n: int, k: int, seed=None) -> np.ndarray:
    """Sorted random subset of ``range(n)`` whose size is a multiple of ``k``."""
    keep = n - n % k
    rng = np.random.default_rng(seed)
    return np.sort(rng.permutation(n)[:keep])


def holdout(n: int, fraction: float, seed=None) -> list[tuple[np.ndarray, np.ndarray]]:
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"holdout fraction must lie in (0, 1), got {fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fraction * n))
    return [(np.sort(perm[:n_train]), np.sort(perm[n_train:]))]


def kfold(n: int, k: int, seed=None) -> list[tuple[np.ndarray, np.ndarray]]:
    if k < 2:
        raise ValueError(f"kfold needs k >= 2, got {k}")
    if n % k:
        raise DataError(f"n={n} is not divisible by k={k}; trim the data first (trim_to_multiple)")
    perm = np.random.default_rng(seed).permutation(n)
    folds = perm.reshape(k, n // k)
    out = []
    for i in range(k):
        test = np.sort(folds[i])
        train = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        out.append((train, test))
    return out


def split(n: int, mode: str, value, seed=None) -> list[tuple[np.ndarray, np.ndarray]]:
    """``mode`` is ``"holdout"`` (``value`` = train fraction) or ``"kfold"`` (``value`` = k)."""
    if mode == "holdout":
        return holdout(n, float(value), seed)
    if mode == "kfold":
        return kfold(n, int(value), seed)
    raise ValueError(f"unknown split mode {mode!r}")

