"""Config-driven experiment runner: polynomial suite, benchmark functions, SIR sweeps.

A run is a list of *cells*, one per (experiment, model, target). Every cell gets
its own random stream derived from the master seed and the cell key, so results
never depend on which other cells were requested. Report bodies are
deterministic; wall-clock times live in a separate ``timing`` section.

Config files are flat ``key = value`` text. ``#`` starts a comment and lists
are comma separated::

    experiment = SYNTH
    models = PANN, CCP, PDCLOW, PDC, AVG, LR, RF, GB
    functions = Currin, Lim
    seed = 0
"""
from __future__ import annotations

import csv
import json
import logging
import time
import zlib
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from . import baselines, benchmarks, metamodel, metrics, mnn, polynomials, sir
from .dataset import Dataset
from .trainer import TrainConfig, train

log = logging.getLogger(__name__)

EXPERIMENTS = ("FIG1_DEMO", "POLY", "SYNTH", "SIR_DURATION", "SIR_LAG")
MNN_MODELS = mnn.KINDS
BASELINE_MODELS = baselines.KINDS
ALL_MODELS = MNN_MODELS + BASELINE_MODELS
SIR_BASELINES = ("AVG", "LR", "RF", "GB")
SCALES = ("DESK", "FULL")
FIG1_FUNCTIONS = ("x + 1", "x^2 - x")

# sample sizes per scale; epochs are the same at both scales
SCALE_SIZES = {
    "DESK": {"samples_poly": 10_000, "samples_synth": 20_000, "samples_fig1": 10_000,
             "test_samples": 1_000, "simulations": 5_000, "baseline_rows": 10_000},
    "FULL": {"samples_poly": 10_000, "samples_synth": 100_000, "samples_fig1": 10_000,
             "test_samples": 1_000, "simulations": 100_000, "baseline_rows": 100_000},
}
DEFAULT_EPOCHS = {"FIG1_DEMO": 30, "POLY": 30, "SYNTH": 100, "SIR_DURATION": 5, "SIR_LAG": 5}
STEP_COUNTS = (24, 30, 40, 60, 120)

SIR_CSV_HEADER = ["model", "T", "L", "steps", "split", "rrse", "r2", "mae", "nan_count"]


class ConfigError(ValueError):
    pass


def _tuple(v, cast=str):
    if isinstance(v, str):
        v = [p.strip() for p in v.split(",")]
    return tuple(cast(p) for p in v if str(p).strip() != "")


@dataclass
class ExperimentConfig:
    experiments: tuple[str, ...]
    models: tuple[str, ...]
    seed: int = 0
    scale: str = "DESK"
    nan_policy: str = "propagate"
    polynomials: tuple[str, ...] = ()  # empty: the whole shipped manifest
    functions: tuple[str, ...] = ()  # empty: all nine benchmark functions
    durations: tuple[int, ...] = (2, 6, 12, 24, 30, 40, 60, 120)
    lags: tuple[int, ...] = (1, 2, 3, 4, 5)
    lag_duration: int = 120
    train_mu: float = 0.0
    train_sigma: float = 5.0
    fig1_test_means: tuple[float, ...] = (-5.0, -3.0, 0.0, 3.0, 5.0)
    hidden: int = 64
    epochs: int | None = None
    samples: int | None = None
    test_samples: int | None = None
    simulations: int | None = None
    test_simulations: int | None = None
    baseline_rows: int | None = None

    def __post_init__(self):
        self.experiments = tuple(e.upper() for e in _tuple(self.experiments))
        self.models = tuple(m.upper() for m in _tuple(self.models))
        self.scale = self.scale.upper()
        self.polynomials = _tuple(self.polynomials)
        self.functions = _tuple(self.functions)
        self.durations = _tuple(self.durations, int)
        self.lags = _tuple(self.lags, int)
        self.fig1_test_means = _tuple(self.fig1_test_means, float)
        self.validate()

    def validate(self):
        if not self.experiments:
            raise ConfigError("no experiment given")
        for e in self.experiments:
            if e not in EXPERIMENTS:
                raise ConfigError(f"unknown experiment {e!r}; choose from {EXPERIMENTS}")
        if not self.models:
            raise ConfigError("no models given")
        for m in self.models:
            if m not in ALL_MODELS:
                raise ConfigError(f"unknown model {m!r}; choose from {ALL_MODELS}")
        if any(e.startswith("SIR") for e in self.experiments) and "FFNN_RELU" in self.models:
            raise ConfigError("FFNN_RELU is not a SIR baseline; use AVG, LR, RF or GB")
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be one of {SCALES}")
        if self.nan_policy not in metrics.NAN_POLICIES:
            raise ConfigError(f"nan_policy must be one of {metrics.NAN_POLICIES}")
        for name in self.functions:
            if name not in benchmarks.BENCHMARKS:
                raise ConfigError(f"unknown benchmark function {name!r}")
        for text in self.polynomials:
            try:
                polynomials.parse_polynomial(text)
            except polynomials.PolynomialParseError as exc:
                raise ConfigError(str(exc)) from None
        for T in self.durations:
            if T < 2:
                raise ConfigError("durations must be at least 2")
        for L in self.lags:
            if L < 1 or self.lag_duration // L <= 1:
                raise ConfigError(f"lag {L} leaves T//L <= 1 at T={self.lag_duration}")
        if not self.train_sigma > 0:
            raise ConfigError("train_sigma must be positive")
        for k in ("epochs", "samples", "test_samples", "simulations", "test_simulations", "baseline_rows"):
            v = getattr(self, k)
            if v is not None and (int(v) != v or v < 1):
                raise ConfigError(f"{k} must be a positive integer")
        if self.hidden < 1:
            raise ConfigError("hidden must be positive")

    # -- derived sizes ----------------------------------------------------
    def size(self, key: str) -> int:
        return SCALE_SIZES[self.scale][key]

    def epochs_for(self, experiment: str) -> int:
        return int(self.epochs) if self.epochs is not None else DEFAULT_EPOCHS[experiment]

    def n_samples(self, experiment: str) -> int:
        if self.samples is not None:
            return int(self.samples)
        return self.size({"POLY": "samples_poly", "SYNTH": "samples_synth", "FIG1_DEMO": "samples_fig1"}[experiment])

    def n_test(self) -> int:
        return int(self.test_samples or self.size("test_samples"))

    def n_simulations(self) -> int:
        return int(self.simulations or self.size("simulations"))

    def n_test_simulations(self) -> int:
        return int(self.test_simulations or max(1, self.n_simulations() // 5))

    def n_baseline_rows(self) -> int:
        return int(self.baseline_rows or self.size("baseline_rows"))

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)


_INT_KEYS = {"seed", "lag_duration", "hidden", "epochs", "samples", "test_samples", "simulations",
             "test_simulations", "baseline_rows"}
_FLOAT_KEYS = {"train_mu", "train_sigma"}
_KEY_ALIASES = {"experiment": "experiments", "model": "models", "nan-policy": "nan_policy"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the flat ``key = value`` format (see module docstring)."""
    known = {f.name for f in fields(ExperimentConfig)}
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        key = _KEY_ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                value = int(value)
            elif key in _FLOAT_KEYS:
                value = float(value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad number for {key!r}: {value!r}") from None
        values[key] = value
    for req in ("experiments", "models"):
        if req not in values:
            raise ConfigError(f"config is missing {req!r}")
    return ExperimentConfig(**values)


def shipped_configs() -> list[str]:
    root = resources.files("polymnn.configs")
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_config(path_or_name) -> ExperimentConfig:
    """Read a config file, or a shipped one by bare name (e.g. ``sir_lag``)."""
    p = Path(path_or_name)
    if p.exists():
        return parse_config(p.read_text(encoding="utf-8"))
    name = str(path_or_name)
    if name in shipped_configs():
        return parse_config(resources.files("polymnn.configs").joinpath(name + ".cfg").read_text(encoding="utf-8"))
    raise ConfigError(f"no config file {path_or_name!r} (shipped: {shipped_configs()})")


# -- seeding ---------------------------------------------------------------
def derive_seed(master: int, *key) -> int:
    """Stable 32-bit seed for a key; independent of request order."""
    words = [zlib.crc32(str(k).encode("utf-8")) for k in key]
    return int(np.random.SeedSequence([int(master), *words]).generate_state(1)[0])


# -- report ----------------------------------------------------------------
@dataclass
class RunReport:
    config: dict
    cells: list[dict] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def body(self) -> dict:
        return {"format": "polymnn.report/1", "config": self.config, "cells": self.cells}

    def body_json(self) -> str:
        return json.dumps(self.body(), sort_keys=True, indent=1)

    def to_json(self) -> str:
        return json.dumps({**self.body(), "timing": self.timing}, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        d = json.loads(text)
        if d.get("format") != "polymnn.report/1":
            raise ValueError("not a run report")
        return cls(d["config"], d["cells"], d.get("timing", {}))

    def __eq__(self, other):
        # compare serialized forms so NaN cells compare equal to themselves
        return isinstance(other, RunReport) and self.to_json() == other.to_json()

    def find(self, experiment: str, model: str | None = None, target: str | None = None) -> list[dict]:
        return [c for c in self.cells if c["experiment"] == experiment
                and (model is None or c["model"] == model) and (target is None or c["target"] == target)]

    def cell(self, experiment: str, model: str, target: str) -> dict:
        found = self.find(experiment, model, target)
        if not found:
            raise KeyError(f"no cell ({experiment}, {model}, {target})")
        return found[0]


def _metrics_dict(r: metrics.MetricsReport) -> dict:
    return r.to_dict()


def _new_cell(experiment, model, target, **extra) -> dict:
    return {"experiment": experiment, "model": model, "target": target, "status": "ok", "error": None,
            "params": None, "n_order": None, "nan_flag": False, "history": None,
            "metrics": {"validation": None, "test": {}}, **extra}


def _finish(cell: dict) -> dict:
    flags = []
    ms = [cell["metrics"]["validation"], *cell["metrics"]["test"].values()]
    for m in ms:
        if m is not None:
            flags.append(metrics.MetricsReport.from_dict(m).has_nan)
    if cell["history"] and cell["history"]["nan_epochs"]:
        flags.append(True)
    cell["nan_flag"] = bool(any(flags)) or cell["status"] != "ok"
    return cell


def _history_dict(h) -> dict:
    return {"train_mse": h.train_mse, "val_mse": h.val_mse, "val_rrse": h.val_rrse, "val_r2": h.val_r2,
            "nan_epochs": h.nan_epochs}


# -- regression cells (POLY, SYNTH, FIG1) ----------------------------------
def _fit_regressor(model: str, order: int, data: Dataset, cfg: ExperimentConfig, epochs: int, seed: int):
    """Fit on ``data`` (last 20% validates). Returns (predict, val_set, params, history)."""
    tc = TrainConfig(epochs=epochs, seed=seed)
    train_set, val_set = data.split_tail(tc.validation_fraction)
    if model in MNN_MODELS:
        net = mnn.build(model, data.n_features, cfg.hidden, 1, order, np.random.default_rng(seed))
        net, hist = train(net, data, tc)
        return net.predict, val_set, net.param_count, hist
    if model == "FFNN_RELU":
        fitted, hist = baselines.fit_relu_ffnn(train_set, config=tc, validation=val_set)
        return fitted.predict, val_set, None, hist
    fitted = baselines.fit_baseline(model, train_set, seed=seed)
    return fitted.predict, val_set, None, None


def _regression_cell(experiment, model, target, order, data, tests, cfg, key):
    cell = _new_cell(experiment, model, target, n_order=order if model in MNN_MODELS else None)
    seed = derive_seed(cfg.seed, *key)
    predict, val_set, n_params, hist = _fit_regressor(model, order, data, cfg, cfg.epochs_for(experiment), seed)
    cell["params"] = n_params
    cell["history"] = _history_dict(hist) if hist is not None else None
    with np.errstate(all="ignore"):
        cell["metrics"]["validation"] = _metrics_dict(metrics.evaluate(val_set.y, predict(val_set.X), cfg.nan_policy))
        for label, ds in tests:
            cell["metrics"]["test"][label] = _metrics_dict(metrics.evaluate(ds.y, predict(ds.X), cfg.nan_policy))
    return cell


def _poly_targets(cfg):
    texts = cfg.polynomials or tuple(polynomials.load_manifest())
    return [(t, polynomials.parse_polynomial(t)) for t in texts]


def _poly_jobs(cfg: ExperimentConfig):
    spec = polynomials.GaussianSpec(cfg.train_mu, cfg.train_sigma)
    for text, expr in _poly_targets(cfg):
        def data(text=text, expr=expr):
            train_set = polynomials.sample_gaussian_dataset(
                expr, spec, cfg.n_samples("POLY"), derive_seed(cfg.seed, "POLY", "data", text, spec.label))
            tests = [(s.label, polynomials.sample_gaussian_dataset(
                expr, s, cfg.n_test(), derive_seed(cfg.seed, "POLY", "test", text, s.label)))
                for s in polynomials.ood_test_grid()]
            return train_set, tests
        yield text, max(polynomials.polynomial_order(expr), 1), data


def _synth_jobs(cfg: ExperimentConfig):
    for name in cfg.functions or tuple(benchmarks.BENCHMARKS):
        def data(name=name):
            train_set, test_set = benchmarks.split_datasets(
                name, cfg.n_samples("SYNTH"), derive_seed(cfg.seed, "SYNTH", "data", name))
            return train_set, [("test", test_set)]
        yield name, benchmarks.get(name).order, data


def _fig1_jobs(cfg: ExperimentConfig):
    train_spec = polynomials.ALT_TRAIN_SPEC
    for text in FIG1_FUNCTIONS:
        expr = polynomials.parse_polynomial(text)

        def data(text=text, expr=expr):
            train_set = polynomials.sample_gaussian_dataset(
                expr, train_spec, cfg.n_samples("FIG1_DEMO"), derive_seed(cfg.seed, "FIG1", "data", text))
            tests = []
            for mu in cfg.fig1_test_means:
                s = polynomials.GaussianSpec(mu, 1.0)
                tests.append((s.label, polynomials.sample_gaussian_dataset(
                    expr, s, cfg.n_test(), derive_seed(cfg.seed, "FIG1", "test", text, s.label))))
            return train_set, tests
        yield text, polynomials.polynomial_order(expr), data


# -- SIR cells -------------------------------------------------------------
class BaselineStep:
    """Three per-compartment regressors packaged as a lag-``L`` step model (no softmax)."""

    def __init__(self, models, lag: int):
        self.models = list(models)
        self.lag = lag

    def predict_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return np.stack([m.predict(X) for m in self.models], axis=1)


@dataclass
class SirData:
    train: sir.SimulationSet
    test: sir.SimulationSet

    def at(self, T: int) -> tuple[sir.SimulationSet, sir.SimulationSet]:
        return (sir.SimulationSet(self.train.states[:, :T + 1], self.train.beta, self.train.gamma),
                sir.SimulationSet(self.test.states[:, :T + 1], self.test.beta, self.test.gamma))


def sir_data(cfg: ExperimentConfig, T_max: int) -> SirData:
    """Trajectories at the longest duration; shorter ones are prefixes of these."""
    return SirData(sir.generate(cfg.n_simulations(), sir.TRAIN, T_max, derive_seed(cfg.seed, "SIR", "train")),
                   sir.generate(cfg.n_test_simulations(), sir.TEST, T_max, derive_seed(cfg.seed, "SIR", "test")))


def _sir_cell(model: str, T: int, L: int, data: SirData, cfg: ExperimentConfig, epochs: int) -> dict:
    cell = _new_cell("SIR", model, f"T={T},L={L}", T=T, L=L, steps=T // L)
    seed = derive_seed(cfg.seed, "SIR", model, T, L)
    sims, test = data.at(T)
    tc = TrainConfig(epochs=epochs, seed=seed)
    n_val = min(max(int(round(len(sims) * tc.validation_fraction)), 1), len(sims) - 1)
    val = sims.subset(slice(len(sims) - n_val, None))
    if model in MNN_MODELS:
        meta = metamodel.build_metamodel(model, L, np.random.default_rng(seed), n_h=cfg.hidden)
        meta, hist = metamodel.train_teacher_forced(meta, sims, tc)
        cell["params"] = meta.param_count
        cell["n_order"] = meta.order
        cell["history"] = _history_dict(hist)
        step_model = meta
    else:
        X, Y = sims.subset(slice(0, len(sims) - n_val)).pairs(L)
        X, Y = X.reshape(-1, 5), Y.reshape(-1, 3)
        rows = np.random.default_rng(seed).permutation(len(X))[:cfg.n_baseline_rows()]
        rows.sort()
        fitted = [baselines.fit_baseline(model, Dataset(X[rows], Y[rows, c]), seed=derive_seed(seed, c))
                  for c in range(3)]
        step_model = BaselineStep(fitted, L)
    with np.errstate(all="ignore"):
        cell["metrics"]["validation"] = _metrics_dict(metamodel.evaluate_rollout(step_model, val, cfg.nan_policy))
        cell["metrics"]["test"]["TEST"] = _metrics_dict(metamodel.evaluate_rollout(step_model, test, cfg.nan_policy))
    return cell


def sir_grid(cfg: ExperimentConfig) -> list[tuple[str, int, int]]:
    """(experiment, T, L) points; T=120, L=1 appears in both sweeps when both run."""
    grid = []
    if "SIR_DURATION" in cfg.experiments:
        grid += [("SIR_DURATION", T, 1) for T in cfg.durations]
    if "SIR_LAG" in cfg.experiments:
        grid += [("SIR_LAG", cfg.lag_duration, L) for L in cfg.lags]
    return grid


# -- run -------------------------------------------------------------------
def _guarded(fn, cell_stub: dict, timing: dict, cell_id: str) -> dict:
    t0 = time.perf_counter()
    try:
        cell = fn()
    except Exception as exc:  # a failing cell is recorded, the run continues
        log.warning("cell %s failed: %s", cell_id, exc)
        cell = {**cell_stub, "status": "error", "error": f"{type(exc).__name__}: {exc}"}
    timing[cell_id] = time.perf_counter() - t0
    return _finish(cell)


def run(config: ExperimentConfig) -> RunReport:
    config.validate()
    report = RunReport(config.to_dict())
    reg_jobs = {"FIG1_DEMO": _fig1_jobs, "POLY": _poly_jobs, "SYNTH": _synth_jobs}
    for exp in config.experiments:
        if exp not in reg_jobs:
            continue
        models = [m for m in config.models]
        for target, order, make_data in reg_jobs[exp](config):
            try:
                data, tests = make_data()
            except Exception as exc:
                for model in models:
                    cid = f"{exp}|{model}|{target}"
                    report.cells.append(_finish({**_new_cell(exp, model, target), "status": "error",
                                                 "error": f"{type(exc).__name__}: {exc}"}))
                    report.timing[cid] = 0.0
                continue
            for model in models:
                cid = f"{exp}|{model}|{target}"
                log.info("running %s", cid)
                report.cells.append(_guarded(
                    lambda: _regression_cell(exp, model, target, order, data, tests, config, (exp, model, target)),
                    _new_cell(exp, model, target), report.timing, cid))

    grid = sir_grid(config)
    if grid:
        T_max = max(T for _, T, _ in grid)
        data = sir_data(config, T_max)
        done: dict[tuple, dict] = {}
        for exp, T, L in grid:
            epochs = config.epochs_for(exp)
            for model in config.models:
                key = (model, T, L)
                if key not in done:
                    cid = f"SIR|{model}|T={T},L={L}"
                    log.info("running %s", cid)
                    done[key] = _guarded(lambda: _sir_cell(model, T, L, data, config, epochs),
                                         _new_cell("SIR", model, f"T={T},L={L}", T=T, L=L, steps=T // L),
                                         report.timing, cid)
                report.cells.append({**done[key], "experiment": exp})
    return report


# -- derived tables --------------------------------------------------------
def _rrse(cell: dict, split: str) -> float:
    if cell["status"] != "ok":
        return float("nan")
    m = cell["metrics"]["validation"] if split == "validation" else next(iter(cell["metrics"]["test"].values()))
    return float(m["rrse"])


def best_mnn_rrse(cells: list[dict], split: str = "test") -> float:
    vals = [_rrse(c, split) for c in cells if c["model"] in MNN_MODELS]
    vals = [v for v in vals if np.isfinite(v)]
    return min(vals) if vals else float("nan")


def compare_steps_vs_lag(report: RunReport, split: str = "test") -> list[tuple[int, float, float]]:
    """Rows ``(steps, best MNN RRSE at L=1, best MNN RRSE at fixed T)`` joined on ``T//L``."""
    dur = [c for c in report.find("SIR_DURATION") if c["L"] == 1]
    lag = report.find("SIR_LAG")
    if not dur or not lag:
        raise ValueError("report needs both SIR_DURATION and SIR_LAG sweeps")
    rows = []
    for steps in sorted({c["steps"] for c in dur} & {c["steps"] for c in lag}):
        if steps not in STEP_COUNTS:
            continue
        a = best_mnn_rrse([c for c in dur if c["steps"] == steps], split)
        b = best_mnn_rrse([c for c in lag if c["steps"] == steps], split)
        rows.append((steps, a, b))
    if not rows:
        raise ValueError("no shared step counts between the two sweeps")
    return rows


# -- output ----------------------------------------------------------------
def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return path


def _split_rows(cell: dict):
    if cell["metrics"]["validation"] is not None:
        yield "validation", cell["metrics"]["validation"]
    for label, m in cell["metrics"]["test"].items():
        yield label, m


def emit_report(report: RunReport, out_dir, formats=("json", "csv")) -> list[Path]:
    """Write ``report.json`` and per-experiment CSV tables into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        p = out / "report.json"
        p.write_text(report.to_json() + "\n", encoding="utf-8")
        written.append(p)
    if "csv" in formats:
        for exp in EXPERIMENTS:
            cells = report.find(exp)
            if not cells:
                continue
            if exp.startswith("SIR"):
                rows = []
                for c in cells:
                    for split, m in _split_rows(c):
                        rows.append([c["model"], c["T"], c["L"], c["steps"], "test" if split == "TEST" else split,
                                     m["rrse"], m["r2"], m["mae"], m["nan_count"]])
                written.append(_write_csv(out / f"{exp.lower()}.csv", SIR_CSV_HEADER, rows))
            else:
                rows = [[c["model"], c["target"], split, m["mse"], m["rrse"], m["r2"], m["mae"], m["nan_count"]]
                        for c in cells for split, m in _split_rows(c)]
                written.append(_write_csv(out / f"{exp.lower()}.csv",
                                          ["model", "target", "split", "mse", "rrse", "r2", "mae", "nan_count"], rows))
        written += emit_plots(report, out)
    return written


def emit_plots(report: RunReport, out_dir) -> list[Path]:
    """Plot-ready CSVs: one row per (model, x-axis point, metric)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    poly = report.find("POLY")
    if poly:
        rows = [[c["model"], c["target"], label, m["rrse"]] for c in poly for label, m in c["metrics"]["test"].items()]
        written.append(_write_csv(out / "plot_poly_boxplot.csv", ["model", "polynomial", "distribution", "rrse"], rows))
    for exp, axis in (("SIR_DURATION", "T"), ("SIR_LAG", "L")):
        cells = report.find(exp)
        if not cells:
            continue
        rows = []
        for c in cells:
            for split, m in _split_rows(c):
                for metric in ("rrse", "r2", "mae"):
                    rows.append([c["model"], c[axis], "test" if split == "TEST" else split, metric, m[metric]])
        written.append(_write_csv(out / f"plot_{exp.lower()}.csv", ["model", axis, "split", "metric", "value"], rows))
    if report.find("SIR_DURATION") and report.find("SIR_LAG"):
        rows = []
        for split in ("validation", "test"):
            try:
                for steps, a, b in compare_steps_vs_lag(report, split):
                    rows.append([steps, split, a, b])
            except ValueError:
                pass
        if rows:
            written.append(_write_csv(out / "plot_steps_vs_lag.csv",
                                      ["steps", "split", "fixed_lag_rrse", "fixed_duration_rrse"], rows))
    return written
