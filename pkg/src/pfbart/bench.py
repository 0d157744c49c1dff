"""Benchmark harness: BART versus fixed-layer variants on synthetic and CSV data."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from pfbart.constraints import FixedLayerPolicy
from pfbart.data import Dataset, gen_synthetic, holdout, kfold, trim_to_multiple
from pfbart.sampler import SamplerConfig, derive_seed, predict, run_chain


@dataclass(frozen=True)
class Setting:
    name: str
    change_prior: bool
    allow_prune: bool
    swap_flag: bool = False

    def policy(self, fixed_vars: Sequence[int]) -> FixedLayerPolicy:
        return FixedLayerPolicy(
            tuple(fixed_vars),
            swap_flag=self.swap_flag,
            allow_prune=self.allow_prune,
            change_prior=self.change_prior,
        )


# single fixed layer: change-prior x prune
TABLE1 = (
    Setting("SET1", change_prior=False, allow_prune=True),
    Setting("SET2", change_prior=False, allow_prune=False),
    Setting("SET3", change_prior=True, allow_prune=True),
    Setting("SET4", change_prior=True, allow_prune=False),
)

# several fixed layers: change-prior x prune x swap
TABLE3 = (
    Setting("SET1", change_prior=True, allow_prune=True, swap_flag=False),
    Setting("SET2", change_prior=True, allow_prune=True, swap_flag=True),
    Setting("SET3", change_prior=False, allow_prune=False, swap_flag=False),
    Setting("SET4", change_prior=False, allow_prune=False, swap_flag=True),
    Setting("SET5", change_prior=True, allow_prune=False, swap_flag=False),
    Setting("SET6", change_prior=True, allow_prune=False, swap_flag=True),
    Setting("SET7", change_prior=False, allow_prune=True, swap_flag=False),
    Setting("SET8", change_prior=False, allow_prune=True, swap_flag=True),
)

GRIDS = {"table1": TABLE1, "table3": TABLE3}

DESK_CONFIG = SamplerConfig(n_trees=50, burn_in=250, n_draws=500)

BART = "BART"


def select_settings(grid: str, names: Iterable[str] | None = None) -> tuple[Setting, ...]:
    try:
        settings = GRIDS[grid]
    except KeyError:
        raise ValueError(f"unknown setting grid {grid!r}; choose from {sorted(GRIDS)}") from None
    if names is None:
        return settings
    by_name = {s.name: s for s in settings}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise ValueError(f"settings {missing} not in grid {grid!r}")
    return tuple(by_name[n] for n in names)


@dataclass(frozen=True)
class BenchRecord:
    setting: str
    replication: int
    rmse: float
    relative_rmse: float
    seed: int
    seconds: float
    config_hash: str


COLUMNS = tuple(f.name for f in fields(BenchRecord))


def rmse(predicted, truth) -> float:
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.shape != truth.shape or predicted.size == 0:
        raise ValueError(f"rmse needs equal non-empty lengths, got {predicted.shape} and {truth.shape}")
    d = predicted - truth
    return math.sqrt(float(d @ d) / d.size)


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _map(fn: Callable, jobs: Sequence, n_jobs: int) -> list:
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


# -- synthetic comparison ---------------------------------------------------


def fit_predict(train: Dataset, X_test, config: SamplerConfig) -> tuple[np.ndarray, float]:
    """Posterior-mean predictions at ``X_test`` and the wall time spent."""
    t0 = time.perf_counter()
    trace = run_chain(train, config)
    mean, _, _ = predict(trace, X_test)
    return mean, time.perf_counter() - t0


def synthetic_cell(which, n, noise_sd, seed, replication, config, policy, chain_seed):
    """One (replication, method) cell; returns ``(test rmse vs f(x), seconds)``."""
    data = gen_synthetic(which, n, noise_sd, seed=derive_seed(seed, replication, 0))
    (train_rows, test_rows), = holdout(data.n, 0.5, seed=derive_seed(seed, replication, 1))
    train, test = data.subset(train_rows), data.subset(test_rows)
    mean, seconds = fit_predict(train, test.X, replace(config, policy=policy, seed=chain_seed))
    return rmse(mean, test.truth), seconds


def _synthetic_job(args):
    return synthetic_cell(*args)


def synthetic_experiment(
    which: str,
    n_reps: int,
    n: int,
    config: SamplerConfig = DESK_CONFIG,
    settings: Sequence[Setting] = TABLE1[:1],
    fixed_vars: Sequence[int] = (0,),
    noise_sd: float = 1.0,
    seed: int = 0,
    n_jobs: int = 1,
) -> list[BenchRecord]:
    """Plain BART plus each setting on ``n_reps`` fresh datasets.

    Every replication draws a new dataset, splits it 50/50, and fits all
    methods to the same training half with their own RNG substreams.  Test
    RMSE is measured against the noiseless surface.
    """
    methods: list[tuple[str, FixedLayerPolicy | None]] = [(BART, None)]
    methods += [(s.name, s.policy(fixed_vars)) for s in settings]
    chash = config_hash(
        {"which": which, "n": n, "noise_sd": noise_sd, "seed": seed, "fixed_vars": list(fixed_vars),
         "config": config.to_dict(), "settings": [asdict(s) for s in settings]}
    )
    jobs, keys = [], []
    for rep in range(n_reps):
        for k, (name, policy) in enumerate(methods):
            chain_seed = derive_seed(seed, rep, 2, k)
            jobs.append((which, n, noise_sd, seed, rep, config, policy, chain_seed))
            keys.append((rep, k, name, chain_seed))
    results = _map(_synthetic_job, jobs, n_jobs)
    return _records(keys, results, chash)


def _records(keys, results, chash) -> list[BenchRecord]:
    by_rep: dict[int, float] = {}
    for (rep, k, _name, _seed), (err, _secs) in zip(keys, results):
        if k == 0:
            by_rep[rep] = err
    return [
        BenchRecord(name, rep, err, err / by_rep[rep], chain_seed, secs, chash)
        for (rep, k, name, chain_seed), (err, secs) in zip(keys, results)
    ]


# -- per-covariate fixing sweep ---------------------------------------------


def cv_rmse(dataset: Dataset, folds, config: SamplerConfig, policy, seeds) -> tuple[float, float]:
    """Pooled out-of-fold RMSE against the observed response."""
    pred = np.empty(dataset.n)
    covered = np.zeros(dataset.n, dtype=bool)
    total = 0.0
    for (train_rows, test_rows), s in zip(folds, seeds):
        mean, secs = fit_predict(
            dataset.subset(train_rows), dataset.X[test_rows], replace(config, policy=policy, seed=s)
        )
        pred[test_rows] = mean
        covered[test_rows] = True
        total += secs
    return rmse(pred[covered], dataset.y[covered]), total


def _sweep_job(args):
    dataset, shuffle, k, seed, config, policy, method_index = args
    rows = trim_to_multiple(dataset.n, k, seed=derive_seed(seed, shuffle, 0))
    data = dataset.subset(rows)
    folds = kfold(data.n, k, seed=derive_seed(seed, shuffle, 1))
    seeds = [derive_seed(seed, shuffle, 2, method_index, f) for f in range(k)]
    return cv_rmse(data, folds, config, policy, seeds)


def covariate_sweep(
    dataset: Dataset,
    k: int = 10,
    n_shuffles: int = 10,
    config: SamplerConfig = DESK_CONFIG,
    setting: Setting = TABLE1[0],
    seed: int = 0,
    n_jobs: int = 1,
    covariates: Sequence[int] | None = None,
) -> list[BenchRecord]:
    """Relative CV RMSE of fixing each covariate alone at the root.

    For each shuffle the data are trimmed to a multiple of ``k`` and split
    into ``k`` folds; plain BART and every single-covariate policy are
    cross-validated on those same folds.  ``seed`` in each record is the
    shuffle's root seed (fold chains derive from it).
    """
    covariates = range(dataset.p) if covariates is None else covariates
    methods: list[tuple[str, FixedLayerPolicy | None]] = [(BART, None)]
    methods += [(f"fix:{dataset.names[v]}", setting.policy((v,))) for v in covariates]
    chash = config_hash(
        {"k": k, "n_shuffles": n_shuffles, "seed": seed, "config": config.to_dict(),
         "setting": asdict(setting), "names": list(dataset.names), "n": dataset.n,
         "data": hashlib.sha256(np.ascontiguousarray(np.column_stack([dataset.X, dataset.y])).tobytes()).hexdigest()}
    )
    jobs, keys = [], []
    for s in range(n_shuffles):
        for i, (name, policy) in enumerate(methods):
            jobs.append((dataset, s, k, seed, config, policy, i))
            keys.append((s, i, name, derive_seed(seed, s)))
    results = _map(_sweep_job, jobs, n_jobs)
    return _records(keys, results, chash)


# -- results ----------------------------------------------------------------


def summarize(table: Sequence[BenchRecord]) -> dict[str, dict[str, float]]:
    """Median RMSE and median relative RMSE per setting, in first-seen order."""
    groups: dict[str, list[BenchRecord]] = {}
    for r in table:
        groups.setdefault(r.setting, []).append(r)
    return {
        name: {
            "median_rmse": float(np.median([r.rmse for r in rs])),
            "median_relative_rmse": float(np.median([r.relative_rmse for r in rs])),
            "n": len(rs),
        }
        for name, rs in groups.items()
    }


def emit_results(table: Sequence[BenchRecord], fmt: str, path, timing: bool = True) -> None:
    """Write records as CSV or JSON with columns in :data:`COLUMNS` order.

    With ``timing=False`` the wall-clock column is left empty (CSV) or null
    (JSON) so that repeated runs produce identical files.
    """
    if not table:
        raise ValueError("refusing to write an empty result table")
    rows = []
    for r in table:
        d = asdict(r)
        if not timing:
            d["seconds"] = None
        rows.append(d)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for d in rows:
            w.writerow(["" if d[c] is None else (repr(d[c]) if isinstance(d[c], float) else d[c]) for c in COLUMNS])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps(rows, indent=1) + "\n"
    else:
        raise ValueError(f"unknown result format {fmt!r}")
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results(path) -> list[BenchRecord]:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for d in rows:
        secs = d["seconds"]
        out.append(
            BenchRecord(
                str(d["setting"]),
                int(d["replication"]),
                float(d["rmse"]),
                float(d["relative_rmse"]),
                int(d["seed"]),
                math.nan if secs in (None, "") else float(secs),
                str(d["config_hash"]),
            )
        )
    return out
