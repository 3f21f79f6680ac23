"""The eleven acceptance criteria, each at its stated tolerance and time limit.

Run with pytest (one line per criterion is printed in the terminal summary) or
directly as a script::

    python tests/test_acceptance.py          # all criteria
    python tests/test_acceptance.py 1 5 11   # a selection

Criteria 7, 8-9 and 10 train real models at desk scale and take minutes to
hours. Their reports are written to ``results/acceptance/`` (override with
``POLYMNN_ACCEPTANCE_OUT``) so the numbers can be inspected afterwards.
"""
from __future__ import annotations

import os
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import BENCHMARK_EXPRS, benchmark_oracle, central_gradient, gradient_violation, sir_exact  # noqa: E402
from polymnn import benchmarks, experiments, metamodel, metrics, mnn, sir  # noqa: E402
from polymnn.autodiff import Graph  # noqa: E402

try:
    from conftest import ACCEPTANCE
except ImportError:  # running as a script
    ACCEPTANCE = {}

OUT = Path(os.environ.get("POLYMNN_ACCEPTANCE_OUT", Path(__file__).resolve().parents[1] / "results" / "acceptance"))

TABLE3 = {
    "PANN": ["1.3K", "1.3K", "1.3K", "1.3K", "1.3K"],
    "CCP": ["3.6K", "8.2K", "17.4K", "35.9K", "72.7K"],
    "PDCLOW": ["7.1K", "32.4K", "138K", "571K", "2.3M"],
    "PDC": ["44.5K", "119K", "325K", "958K", "3.1M"],
}
TREES = ("RF", "GB")
SIR_BASELINES = ("AVG", "LR", "RF", "GB")

_runs: dict[str, experiments.RunReport] = {}
_run_seconds: dict[str, float] = {}


def _timed(limit: float, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    dt = time.perf_counter() - t0
    if dt >= limit:
        ok = False
        detail += f"; over time limit ({dt:.1f} s >= {limit:g} s)"
    return ok, f"{detail} [{dt:.1f} s]"


def _report(name: str, cfg: experiments.ExperimentConfig) -> experiments.RunReport:
    """Run a config once per session and keep the report on disk."""
    if name not in _runs:
        t0 = time.perf_counter()
        rep = experiments.run(cfg)
        _run_seconds[name] = time.perf_counter() - t0
        experiments.emit_report(rep, OUT / name)
        _runs[name] = rep
    return _runs[name]


def _test_rrse(cell: dict, label: str | None = None) -> float:
    if cell["status"] != "ok":
        return float("nan")
    tests = cell["metrics"]["test"]
    return float(tests[label]["rrse"] if label else next(iter(tests.values()))["rrse"])


def _val_rrse(cell: dict) -> float:
    return float(cell["metrics"]["validation"]["rrse"]) if cell["status"] == "ok" else float("nan")


# -- 1 ---------------------------------------------------------------------
def criterion_1():
    wrong = []
    for kind, texts in TABLE3.items():
        for L, text in zip(range(1, 6), texts):
            meta = metamodel.build_metamodel(kind, L, rng=0)
            shown = mnn.format_count(meta.param_count)
            if shown != text:
                wrong.append(f"{kind}/L={L}: {shown} != {text}")
    pdc1 = metamodel.build_metamodel("PDC", 1, rng=0).param_count
    pann = metamodel.build_metamodel("PANN", 5, rng=0).param_count
    if pdc1 != 44547 or pann != 1347:
        wrong.append(f"PDC/L=1 {pdc1}, PANN {pann}")
    return not wrong, "20 cells match" if not wrong else "; ".join(wrong)


# -- 2 ---------------------------------------------------------------------
def criterion_2():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for kind in mnn.KINDS:
        for order in (1, 2, 3, 5, 7):
            n_i, n_h, n_o = (int(v) for v in rng.integers(1, 4, size=3))
            model = mnn.build(kind, n_i, n_h, n_o, order, rng=rng)
            x = rng.uniform(-1, 1, size=(n_i, 20))
            w = rng.normal(size=(n_o, 20))

            def f():
                return float(np.sum(w * model.forward(x)))

            g = Graph()
            out = model.graph_forward(g, g.params(model.params), g.leaf(x))
            grads = g.backward(g.total(g.hadamard(out, g.leaf(w))))
            num = central_gradient(f, model.params)
            worst = max(worst, max(gradient_violation(grads[k], num[k], rel=1e-5) for k in model.params))
    return worst <= 1.0, f"20 nets, worst tolerance ratio {worst:.3g} (pass <= 1)"


# -- 3 ---------------------------------------------------------------------
def criterion_3():
    rng = np.random.default_rng(3)
    worst, worst_cf = 0.0, 0.0
    for k in range(100):
        x0 = sir.sample_initial_state(int(rng.integers(1 << 31))).as_array()
        beta, gamma = sir.sample_rates("TEST" if k % 2 else "TRAIN", int(rng.integers(1 << 31)))
        for L in range(1, 6):
            traj = sir.simulate_many(x0[None, :], np.array([beta]), np.array([gamma]), 2 * L)[0]
            _, dst = sir.lagged_pairs(traj, L)
            exact = np.array([float(v) for v in sir_exact(*x0, beta, gamma, L)])
            worst = max(worst, float(np.max(np.abs(dst[0] - exact))))
            if L == 2:
                cf = np.array(sir.lag2_closed_form(*x0, beta, gamma))
                worst_cf = max(worst_cf, float(np.max(np.abs(cf - exact))))
    ok = worst <= 1e-12 and worst_cf <= 1e-12
    return ok, f"max |composition - target| {worst:.2e}, closed form {worst_cf:.2e} (tol 1e-12)"


# -- 4 ---------------------------------------------------------------------
def criterion_4():
    sims = sir.generate(500, "TRAIN", 120, seed=4)
    sims2 = sir.generate(500, "TEST", 120, seed=5)
    states = np.concatenate([sims.states, sims2.states])
    drift = float(np.max(np.abs(states.sum(axis=2) - 1.0)))
    s_up = int(np.sum(np.diff(states[:, :, 0], axis=1) > 0))
    r_down = int(np.sum(np.diff(states[:, :, 2], axis=1) < 0))
    ok = drift <= 1e-12 and s_up == 0 and r_down == 0
    return ok, f"1000 trajectories: max |sum - 1| {drift:.1e}, s increases {s_up}, r decreases {r_down}"


# -- 5 ---------------------------------------------------------------------
def criterion_5():
    rng = np.random.default_rng(5)
    gap = 0.0
    for _ in range(200):
        y = rng.normal(size=int(rng.integers(2, 50))) * rng.uniform(0.1, 10)
        yh = y + rng.normal(size=y.size) * rng.uniform(0, 3)
        gap = max(gap, abs(metrics.rrse(y, yh) ** 2 - (1 - metrics.r2(y, yh))))
    y = rng.normal(size=30)
    checks = {
        "identity": gap <= 1e-12,
        "perfect": metrics.rrse(y, y) == 0.0,
        "mean": abs(metrics.rrse(y, np.full_like(y, y.mean())) - 1.0) <= 1e-12,
        "rrse example": abs(metrics.rrse([1, 2, 3], [1, 2, 4]) - np.sqrt(0.5)) <= 1e-10,
        "r2 example": abs(metrics.r2([1, 2, 3], [1, 2, 4]) - 0.5) <= 1e-10,
        "mae example": abs(metrics.mae([1, 2, 3], [1, 2, 4]) - 1 / 3) <= 1e-10,
    }
    bad = [k for k, v in checks.items() if not v]
    return not bad, f"max |rrse^2 - (1 - r2)| {gap:.1e}" + (f"; failed: {bad}" if bad else "")


# -- 6 ---------------------------------------------------------------------
def criterion_6():
    worst = 0.0
    for name in benchmarks.BENCHMARKS:
        X = benchmarks.sample_domain(name, 1000, seed=6)
        got = benchmarks.eval_benchmark(name, X)
        want = benchmark_oracle(name)(X)
        scale = np.maximum(np.abs(want), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(got - want) / scale)))
    fixed = [
        benchmarks.eval_benchmark("Currin", [0.0, 0.0]) == 4.9,
        benchmarks.eval_benchmark("Beale", [3.0, 0.5]) == 0.0,
        benchmarks.eval_benchmark("GoldsteinPrice", [0.0, -1.0]) == 3.0,
        benchmarks.eval_benchmark("Bukin6", [-10.0, 1.0]) == 0.0,
        benchmarks.eval_benchmark("CamelThreeHump", [0.0, 0.0]) == 0.0,
    ]
    ok = worst <= 1e-12 and all(fixed) and len(BENCHMARK_EXPRS) == 9
    return ok, f"9 x 1000 points, max relative error {worst:.1e}; fixed points {sum(fixed)}/5 exact"


# -- 7 ---------------------------------------------------------------------
def criterion_7():
    parts, ok = [], True
    for seed in (0, 1, 2):
        cfg = experiments.load_config("fig1")
        cfg.seed = seed
        cfg.fig1_test_means = (5.0,)
        rep = _report(f"fig1_seed{seed}", cfg)
        ffnn = _test_rrse(rep.cell("FIG1_DEMO", "FFNN_RELU", "x^2 - x"), "N(5,1)")
        ccp = _test_rrse(rep.cell("FIG1_DEMO", "CCP", "x^2 - x"), "N(5,1)")
        ok &= ffnn > 1.0 and ccp < 0.2
        parts.append(f"seed {seed}: FFNN {ffnn:.3g} CCP {ccp:.2g}")
    return ok, "x^2 - x on N(5,1), need FFNN > 1 and CCP < 0.2: " + ", ".join(parts)


# -- 8, 9 ------------------------------------------------------------------
def _synth():
    return _report("synth", experiments.load_config("synth"))


def criterion_8():
    rep = _synth()
    pdc = rep.cell("SYNTH", "PDC", "Currin")
    val, test = _val_rrse(pdc), _test_rrse(pdc)
    ok = val < 0.01 and test < 0.05
    parts = [f"Currin PDC val {val:.2e} test {test:.2e}"]
    for name in ("Lim", "Colville"):
        mnn_worst = max(_test_rrse(rep.cell("SYNTH", k, name)) for k in mnn.KINDS)
        tree_best = min(_test_rrse(rep.cell("SYNTH", k, name)) for k in TREES)
        good = bool(mnn_worst < tree_best)
        ok &= good
        parts.append(f"{name} worst MNN {mnn_worst:.3g} vs best tree {tree_best:.3g}")
    secs = _run_seconds.get("synth", 0.0)
    if secs >= 30 * 60:
        ok = False
        parts.append(f"run took {secs:.0f} s (limit 1800 s)")
    return ok, "; ".join(parts)


def criterion_9():
    rep = _synth()

    def gaps(kinds):
        vals = [abs(_test_rrse(c) - _val_rrse(c)) for c in rep.find("SYNTH") if c["model"] in kinds]
        finite = [v for v in vals if np.isfinite(v)]
        return (float(np.mean(finite)) if finite else float("nan")), len(vals) - len(finite)

    g_mnn, bad_mnn = gaps(mnn.KINDS)
    g_tree, bad_tree = gaps(TREES)
    # a non-finite MNN cell has no trustworthy validation score, so it counts against the claim
    ok = bad_mnn == 0 and g_mnn < g_tree
    return ok, (f"mean |test - val| RRSE: MNN {g_mnn:.3g} ({bad_mnn} non-finite), "
                f"trees {g_tree:.3g} ({bad_tree} non-finite)")


# -- 10 --------------------------------------------------------------------
def criterion_10():
    rep = _report("sir", experiments.load_config("sir"))
    secs = _run_seconds["sir"]
    lag = rep.find("SIR_LAG")

    def at(model, L):
        return _test_rrse([c for c in lag if c["model"] == model and c["L"] == L][0])

    mnn_l1 = {k: at(k, 1) for k in mnn.KINDS}
    base_l1 = {k: at(k, 1) for k in SIR_BASELINES}
    a = max(mnn_l1.values()) < min(base_l1.values())
    b_rows = {k: (at(k, 1), at(k, 5)) for k in ("CCP", "PDCLOW", "PDC")}
    b = all(l5 < l1 for l1, l5 in b_rows.values())
    rows = experiments.compare_steps_vs_lag(rep, "test")
    non_shared = [(s, fl, fd) for s, fl, fd in rows if s != 120]
    wins = sum(fd <= fl for _, fl, fd in non_shared)
    c = len(non_shared) == 4 and wins >= 3
    ok = a and b and c and secs < 2 * 3600
    fmt = lambda d: ", ".join(f"{k} {v:.3g}" for k, v in d.items())  # noqa: E731
    detail = (f"(a) {'ok' if a else 'no'}: MNN [{fmt(mnn_l1)}] vs baselines [{fmt(base_l1)}]; "
              f"(b) {'ok' if b else 'no'}: L1->L5 " + ", ".join(f"{k} {x:.3g}->{y:.3g}" for k, (x, y) in b_rows.items())
              + f"; (c) {'ok' if c else 'no'}: fixed-T at or below fixed-L at {wins}/{len(non_shared)} step counts "
              + ", ".join(f"{s}: {fd:.3g} vs {fl:.3g}" for s, fl, fd in non_shared)
              + f"; run {secs:.0f} s (limit 7200 s)")
    return ok, detail


# -- 11 --------------------------------------------------------------------
DETERMINISM_CONFIGS = {
    "POLY": "experiment = POLY\nmodels = PANN, CCP, PDCLOW, PDC, LR, FFNN_RELU\npolynomials = a b + c, a^3\n"
            "samples = 400\ntest_samples = 50\nepochs = 2\nseed = 11\n",
    "SYNTH": "experiment = SYNTH\nmodels = CCP, RF, GB, AVG\nfunctions = Currin, Beale\nsamples = 500\nepochs = 2\n"
             "seed = 11\n",
    "FIG1": "experiment = FIG1_DEMO\nmodels = FFNN_RELU, CCP\nsamples = 300\ntest_samples = 50\nepochs = 2\nseed = 11\n",
    "SIR": "experiments = SIR_DURATION, SIR_LAG\nmodels = PANN, PDC, RF, LR\ndurations = 12, 24\nlag_duration = 24\n"
           "lags = 1, 3\nsimulations = 20\ntest_simulations = 5\nepochs = 1\nbaseline_rows = 200\nseed = 11\n",
}


def criterion_11():
    same = []
    for name, text in DETERMINISM_CONFIGS.items():
        a = experiments.run(experiments.parse_config(text)).body_json().encode("utf-8")
        b = experiments.run(experiments.parse_config(text)).body_json().encode("utf-8")
        if a == b:
            same.append(name)
    ok = len(same) == len(DETERMINISM_CONFIGS)
    return ok, f"byte-identical report bodies for {', '.join(same) or 'none'} of {', '.join(DETERMINISM_CONFIGS)}"


CRITERIA = {
    1: (criterion_1, 1.0),
    2: (criterion_2, 30.0),
    3: (criterion_3, 5.0),
    4: (criterion_4, 10.0),
    5: (criterion_5, 1.0),
    6: (criterion_6, 5.0),
    7: (criterion_7, 5 * 60.0),
    8: (criterion_8, 30 * 60.0),
    9: (criterion_9, 30 * 60.0),
    10: (criterion_10, 2 * 3600.0),
    11: (criterion_11, 600.0),
}


@pytest.mark.slow
@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    fn, limit = CRITERIA[k]
    ok, detail = _timed(limit, fn)
    ACCEPTANCE[k] = (ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import logging

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    chosen = [int(a) for a in sys.argv[1:]] or sorted(CRITERIA)
    results = {}
    for k in chosen:
        fn, limit = CRITERIA[k]
        results[k] = _timed(limit, fn)
        print(f"criterion {k:2d}: {'PASS' if results[k][0] else 'FAIL'}  {results[k][1]}", flush=True)
    sys.exit(0 if all(ok for ok, _ in results.values()) else 1)
