"""Command-line interface.

Every sub-command accepts ``--config FILE``: a flat ``key = value`` file
whose keys are the long flag names without the leading dashes.  Values
given on the command line win over the file, which wins over the
defaults.  Each run writes a manifest in the same format next to its main
output, so ``pfbart <command> --config <manifest>`` repeats it exactly.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from pfbart import __version__
from pfbart.bench import (
    DESK_CONFIG,
    GRIDS,
    covariate_sweep,
    emit_results,
    select_settings,
    summarize,
    synthetic_experiment,
)
from pfbart.constraints import FixedLayerPolicy
from pfbart.data import SYNTHETIC, DataError, load_csv
from pfbart.priors import Hyperparams
from pfbart.sampler import SamplerConfig, load_trace, predict, run_chain, save_trace, variable_frequency

log = logging.getLogger("pfbart")


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _names(text: str) -> list[str]:
    return [s.strip() for s in str(text).split(",") if s.strip()]


def _probs(text: str) -> list[float]:
    return [float(s) for s in _names(text)]


@dataclass(frozen=True)
class Option:
    key: str
    parse: Callable[[str], Any]
    default: Any
    help: str
    flag: bool = False  # boolean switch on the command line
    shown: str | None = None  # default as printed in --help, when not the literal value

    def format(self, value) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (list, tuple)):
            return ",".join(str(v) for v in value)
        return str(value)


def _sampler_options(trees: int, burn_in: int, draws: int) -> list[Option]:
    return [
        Option("trees", int, trees, "number of trees m"),
        Option("burn-in", int, burn_in, "discarded sweeps"),
        Option("draws", int, draws, "kept sweeps"),
        Option("seed", int, 0, "root RNG seed"),
        Option("alpha", float, 0.95, "split prior base"),
        Option("beta", float, 2.0, "split prior depth decay"),
        Option("k", float, 2.0, "leaf prior shrinkage multiple"),
        Option("nu", float, 3.0, "noise prior degrees of freedom"),
        Option("q", float, 0.90, "noise prior calibration quantile"),
        Option("n-cut", int, 100, "cutpoints per covariate"),
        Option("move-probs", _probs, [0.25, 0.25, 0.10, 0.40], "grow,prune,swap,change probabilities"),
    ]


_POLICY = [
    Option("fix", _names, [], "comma-separated covariate names pinned to the top layers, in order", shown="none"),
    Option("swap", _bool, False, "fixed variables may appear at any fixed layer", flag=True),
    Option("no-prune", _bool, False, "forbid pruning nodes inside the fixed layers", flag=True),
    Option("cp", _bool, False, "split with probability alpha in fixed layers, shift the decay below", flag=True),
]

_BENCH_OUT = [
    Option("out", str, None, "result file"),
    Option("format", str, "csv", "csv or json"),
    Option("jobs", int, 1, "concurrent benchmark cells"),
    Option("timing", _bool, False, "fill the seconds column (makes output time-dependent)", flag=True),
]

_DESK = (DESK_CONFIG.n_trees, DESK_CONFIG.burn_in, DESK_CONFIG.n_draws)

COMMANDS: dict[str, tuple[str, list[Option]]] = {
    "train": (
        "fit a model to a CSV and save its trace",
        [
            Option("data", str, None, "training CSV"),
            Option("response", str, None, "response column", shown="last column"),
            Option("out", str, None, "trace file to write"),
            *_sampler_options(200, 500, 1000),
            *_POLICY,
        ],
    ),
    "predict": (
        "posterior mean and 5-95 percentile band for the rows of a CSV",
        [
            Option("trace", str, None, "trace file from train"),
            Option("data", str, None, "CSV with the training covariates (by name)"),
            Option("out", str, None, "predictions CSV to write"),
        ],
    ),
    "synth-bench": (
        "BART versus fixed-layer settings on a synthetic benchmark",
        [
            Option("fn", str, "F1", "synthetic function: " + ", ".join(SYNTHETIC)),
            Option("reps", int, 20, "replications (fresh datasets)"),
            Option("n", int, 1000, "rows per dataset before the 50/50 split"),
            Option("noise", float, 1.0, "noise standard deviation"),
            Option("grid", str, "table1", "setting grid: " + ", ".join(sorted(GRIDS))),
            Option("settings", _names, ["SET1"], "settings from the grid to run"),
            Option("fix", _names, ["X1"], "covariates pinned to the top layers, in order"),
            *_sampler_options(*_DESK),
            *_BENCH_OUT,
        ],
    ),
    "sweep": (
        "relative CV RMSE of fixing each covariate alone",
        [
            Option("data", str, None, "CSV to cross-validate"),
            Option("response", str, None, "response column", shown="last column"),
            Option("folds", int, 10, "cross-validation folds"),
            Option("shuffles", int, 10, "independent reshuffles"),
            Option("grid", str, "table1", "setting grid"),
            Option("setting", str, "SET1", "setting used for every fixed covariate"),
            Option("covariates", _names, [], "subset of covariates to sweep", shown="all"),
            *_sampler_options(*_DESK),
            *_BENCH_OUT,
        ],
    ),
    "freq": (
        "per-covariate split frequency of a saved trace",
        [
            Option("trace", str, None, "trace file from train"),
            Option("out", str, None, "CSV to write", shown="stdout"),
        ],
    ),
}

REQUIRED = {
    "train": ("data", "out"),
    "predict": ("trace", "data", "out"),
    "synth-bench": ("out",),
    "sweep": ("data", "out"),
    "freq": ("trace",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfbart", description="Bayesian additive regression trees with fixed top layers.")
    parser.add_argument("--version", action="version", version=f"pfbart {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, (help_text, options) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", default=None, help="key = value file mirroring these flags")
        p.add_argument("--manifest", default=None, help="manifest path (default: <out>.manifest)")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        for opt in options:
            dest = opt.key.replace("-", "_")
            shown = opt.shown or opt.format(opt.default) or "unset"
            if opt.flag:
                p.add_argument(f"--{opt.key}", dest=dest, action="store_const", const=True,
                               default=None, help=f"{opt.help} (default: {shown})")
            else:
                p.add_argument(f"--{opt.key}", dest=dest, default=None, help=f"{opt.help} (default: {shown})")
    return parser


def read_config_file(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


@dataclass
class RunConfig:
    command: str
    values: dict[str, Any]
    manifest: Path | None

    def __getitem__(self, key):
        return self.values[key]

    def manifest_text(self) -> str:
        options = {o.key: o for o in COMMANDS[self.command][1]}
        lines = [f"# pfbart {__version__}", f"command = {self.command}"]
        lines += [f"{k} = {options[k].format(self.values[k])}" for k in options]
        return "\n".join(lines) + "\n"


def parse_config(argv: list[str]) -> RunConfig:
    """Resolve defaults, the optional config file, and flags into a RunConfig."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if not exc.code:
            raise
        raise UsageError("invalid command line") from None
    if ns.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    options = COMMANDS[ns.command][1]
    known = {o.key: o for o in options}
    values: dict[str, Any] = {o.key: o.default for o in options}

    if ns.config:
        file_values = read_config_file(ns.config)
        cmd = file_values.pop("command", ns.command)
        if cmd != ns.command:
            raise UsageError(f"{ns.config} was written for '{cmd}', not '{ns.command}'")
        for key, text in file_values.items():
            if key not in known:
                raise UsageError(f"{ns.config}: unknown key {key!r}")
            values[key] = _parse(known[key], text)
    for opt in options:
        raw = getattr(ns, opt.key.replace("-", "_"))
        if raw is not None:
            values[opt.key] = raw if opt.flag else _parse(opt, raw)

    missing = [k for k in REQUIRED[ns.command] if not values.get(k)]
    if missing:
        raise UsageError(f"{ns.command}: missing required option(s) " + ", ".join("--" + k for k in missing))
    manifest = ns.manifest
    if manifest is None and values.get("out"):
        manifest = str(values["out"]) + ".manifest"
    cfg = RunConfig(ns.command, values, Path(manifest) if manifest else None)
    _validate(cfg)
    if ns.verbose:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    return cfg


def _parse(opt: Option, text):
    if text == "" and opt.default is None:
        return None
    try:
        return opt.parse(text)
    except ValueError as exc:
        raise UsageError(f"--{opt.key}: {exc}") from None


def _validate(cfg: RunConfig) -> None:
    v = cfg.values
    if "move-probs" in v:
        sampler_config(cfg, FixedLayerPolicy())  # raises on bad sampler values
    if cfg.command in ("synth-bench", "sweep"):
        if v["format"] not in ("csv", "json"):
            raise UsageError(f"--format must be csv or json, got {v['format']!r}")
        if v["jobs"] < 1:
            raise UsageError("--jobs must be >= 1")
        try:
            if cfg.command == "synth-bench":
                select_settings(v["grid"], v["settings"])
            else:
                select_settings(v["grid"], [v["setting"]])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if cfg.command == "synth-bench":
        if v["fn"] not in SYNTHETIC:
            raise UsageError(f"--fn must be one of {SYNTHETIC}, got {v['fn']!r}")
        if v["reps"] < 1 or v["n"] < 4:
            raise UsageError("--reps must be >= 1 and --n >= 4")
        p = 5 if v["fn"] == "F4" else 10
        _resolve(v["fix"], tuple(f"X{i + 1}" for i in range(p)))
    if cfg.command == "sweep" and v["folds"] < 2:
        raise UsageError("--folds must be >= 2")
    if cfg.command == "sweep" and v["shuffles"] < 1:
        raise UsageError("--shuffles must be >= 1")


def _resolve(names: list[str], header) -> tuple[int, ...]:
    header = list(header)
    bad = [n for n in names if n not in header]
    if bad:
        raise UsageError(f"unknown covariate(s) {', '.join(bad)}; available: {', '.join(header)}")
    return tuple(header.index(n) for n in names)


def sampler_config(cfg: RunConfig, policy: FixedLayerPolicy | None) -> SamplerConfig:
    v = cfg.values
    try:
        hp = Hyperparams(alpha=v["alpha"], beta=v["beta"], m=v["trees"], k=v["k"], nu=v["nu"], q=v["q"])
        return SamplerConfig(
            n_trees=v["trees"],
            burn_in=v["burn-in"],
            n_draws=v["draws"],
            move_probs=tuple(v["move-probs"]),
            seed=v["seed"],
            hyperparams=hp,
            policy=policy,
            n_cut=v["n-cut"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def policy_from(cfg: RunConfig, header) -> FixedLayerPolicy:
    v = cfg.values
    return FixedLayerPolicy(
        _resolve(v["fix"], header),
        swap_flag=v["swap"],
        allow_prune=not v["no-prune"],
        change_prior=v["cp"],
    )


# -- sub-commands -----------------------------------------------------------


def cmd_train(cfg: RunConfig) -> None:
    data = load_csv(cfg["data"], cfg["response"])
    policy = policy_from(cfg, data.names)
    trace = run_chain(data, sampler_config(cfg, policy))
    save_trace(trace, cfg["out"])
    log.info("wrote trace with %d draws to %s", len(trace), cfg["out"])


def load_covariates(path, names) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        missing = [n for n in names if n not in header]
        if missing:
            raise DataError(
                f"{path}: covariates do not match the trace; missing {', '.join(missing)} "
                f"(trace has {len(names)} covariates, file has columns {', '.join(header)})"
            )
        cols = [header.index(n) for n in names]
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            try:
                rows.append([float(raw[c]) for c in cols])
            except (ValueError, IndexError):
                raise DataError(f"{path}: bad or missing numeric value at row {lineno}") from None
    return np.array(rows, dtype=float).reshape(len(rows), len(names))


def cmd_predict(cfg: RunConfig) -> None:
    trace = load_trace(cfg["trace"])
    X = load_covariates(cfg["data"], trace.names)
    mean, q05, q95 = predict(trace, X)
    with open(cfg["out"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "mean", "q05", "q95"])
        for i in range(len(mean)):
            w.writerow([i, repr(float(mean[i])), repr(float(q05[i])), repr(float(q95[i]))])


def _report(table) -> None:
    for name, s in summarize(table).items():
        log.info("%-12s median rmse %.4f  median relative %.4f  (n=%d)",
                 name, s["median_rmse"], s["median_relative_rmse"], s["n"])


def cmd_synth_bench(cfg: RunConfig) -> None:
    v = cfg.values
    p = 5 if v["fn"] == "F4" else 10
    fixed = _resolve(v["fix"], tuple(f"X{i + 1}" for i in range(p)))
    table = synthetic_experiment(
        v["fn"], v["reps"], v["n"],
        config=sampler_config(cfg, None),
        settings=select_settings(v["grid"], v["settings"]),
        fixed_vars=fixed, noise_sd=v["noise"], seed=v["seed"], n_jobs=v["jobs"],
    )
    emit_results(table, v["format"], v["out"], timing=v["timing"])
    _report(table)


def cmd_sweep(cfg: RunConfig) -> None:
    v = cfg.values
    data = load_csv(v["data"], v["response"])
    covs = _resolve(v["covariates"], data.names) if v["covariates"] else None
    table = covariate_sweep(
        data, k=v["folds"], n_shuffles=v["shuffles"], config=sampler_config(cfg, None),
        setting=select_settings(v["grid"], [v["setting"]])[0], seed=v["seed"],
        n_jobs=v["jobs"], covariates=covs,
    )
    emit_results(table, v["format"], v["out"], timing=v["timing"])
    _report(table)


def cmd_freq(cfg: RunConfig) -> None:
    trace = load_trace(cfg["trace"])
    freq = variable_frequency(trace)
    if not freq.any():
        log.warning("trace contains no splits; all frequencies are zero")
    out = open(cfg["out"], "w", newline="") if cfg["out"] else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["covariate", "frequency"])
        for name, f in zip(trace.names, freq):
            w.writerow([name, repr(float(f))])
    finally:
        if out is not sys.stdout:
            out.close()


DISPATCH = {
    "train": cmd_train,
    "predict": cmd_predict,
    "synth-bench": cmd_synth_bench,
    "sweep": cmd_sweep,
    "freq": cmd_freq,
}


def dispatch(cfg: RunConfig) -> int:
    try:
        DISPATCH[cfg.command](cfg)
    except UsageError as exc:
        print(f"pfbart {cfg.command}: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError) as exc:
        print(f"pfbart {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    if cfg.manifest is not None:
        cfg.manifest.write_text(cfg.manifest_text())
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        if str(exc) != "invalid command line":
            print(f"pfbart: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
