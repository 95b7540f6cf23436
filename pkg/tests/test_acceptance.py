"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Criterion 5 runs the full independence sweeps (10 seeds, n=800) and takes
several minutes on one core. Criterion 10 needs the real UCI files; point
DEPMETER_HEART (directory with the raw *.data files), DEPMETER_WINE
(winequality-white.csv) and DEPMETER_AIR (the PRSA csv) at them.
"""
import os
import time
import warnings

import numpy as np
import pytest
from scipy import stats

from depmeter import indep_measures as im
from depmeter.bench import ExperimentSpec, cross_measure_correlation, monotonicity, run_sweep
from depmeter.bench.sweep import DEFAULT_ROOT_SEED, EXPECTED_FAIL, EXPECTED_PASS
from depmeter.ci_measures import ce_ci_measure, cmi_ksg_measure, pcor
from depmeter.core import GroupSpec, MeasureId as M, pairwise_distances
from depmeter.registry import all_descriptors, evaluate
from depmeter.samplers import cell_seed, kendall_tau_closed_form, experiment_grid, sample

from conftest import ACCEPTANCE_LINES, markov_chain
from oracles import ball_brute, bd_brute, cvm_grid, dcov_brute, instances, mdd_brute

SEEDS = 10
N = 800
GAUSS_CMI = 0.7246  # target as stated in the criterion; the closed form is 0.72542


def report(capsys, number, name, ok, detail=""):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print("\n" + line)
    return ok


def _exp_draws(experiment, cells, seeds=SEEDS, n=N):
    grid = experiment_grid(experiment, n=n)
    for cell in cells:
        yield cell, grid[cell].param, [
            sample(grid[cell].with_seed(cell_seed(DEFAULT_ROOT_SEED, experiment, cell, r)))
            for r in range(seeds)]


def test_c01_gaussian_ce(capsys):
    t0 = time.perf_counter()
    errs = {}
    for _, rho, draws in _exp_draws(1, [0, 3, 6, 9]):
        truth = 0.5 * np.log(1 - rho ** 2)
        errs[rho] = np.mean([abs(im.ce(d).value - truth) for d in draws])
    elapsed = time.perf_counter() - t0
    ok = all(e <= 0.10 for e in errs.values()) and elapsed < 30
    detail = " ".join(f"rho={k:.1f}:{v:.3f}" for k, v in errs.items()) + f" ({elapsed:.1f}s)"
    assert report(capsys, 1, "Gaussian CE oracle", ok, detail)


def test_c02_gaussian_ktau(capsys):
    errs = {}
    for _, rho, draws in _exp_draws(1, [0, 3, 6, 9]):
        mean = np.mean([im.kendall_tau(d).value for d in draws])
        errs[rho] = abs(mean - 2 / np.pi * np.arcsin(rho))
    ok = all(e <= 0.05 for e in errs.values())
    assert report(capsys, 2, "Kendall tau oracle", ok,
                  " ".join(f"rho={k:.1f}:{v:.4f}" for k, v in errs.items()))


def test_c03_partial_correlation(capsys):
    _, _, draws = next(_exp_draws(9, [0]))
    mean = np.mean([pcor(d, 0, 1, [2]).value for d in draws])
    assert report(capsys, 3, "partial correlation oracle", abs(mean - 0.875) <= 0.05,
                  f"mean={mean:.4f}")


def test_c04_cmi(capsys):
    _, _, draws = next(_exp_draws(9, [0]))
    chains = [markov_chain(N, 1000 + s) for s in range(SEEDS)]
    res = {}
    for name, f in (("cmi_ksg", cmi_ksg_measure), ("ce_ci", ce_ci_measure)):
        g = np.mean([f(d, 0, 1, [2], seed=s).value for s, d in enumerate(draws)])
        c = np.mean([f(d, 0, 1, [2], seed=s).value for s, d in enumerate(chains)])
        res[name] = (g, c)
    ok = all(abs(g - GAUSS_CMI) <= 0.10 and abs(c) <= 0.08 for g, c in res.values())
    detail = " ".join(f"{k}: gauss={g:.4f} chain={c:.4f}" for k, (g, c) in res.items())
    assert report(capsys, 4, "CMI oracles", ok, detail)


_SWEEPS: dict[int, tuple] = {}


def _sweep(e):
    if e not in _SWEEPS:
        t0 = time.perf_counter()
        table = run_sweep(ExperimentSpec(e, seeds=SEEDS, n=N))
        _SWEEPS[e] = (table, monotonicity(table), time.perf_counter() - t0)
    return _SWEEPS[e]


@pytest.mark.slow
@pytest.mark.parametrize("experiment", range(1, 9))
def test_c05_monotonicity(capsys, experiment):
    table, rep, elapsed = _sweep(experiment)
    bad = []
    for m, exps in EXPECTED_PASS.items():
        if experiment in exps and not rep.passed(m):
            bad.append(f"{m.value}={rep.row(m).spearman:.3f}")
    for m, exps in EXPECTED_FAIL.items():
        if experiment in exps and rep.passed(m):
            bad.append(f"{m.value} passes but should fail")
    rhos = " ".join(f"{r.measure.value}={r.spearman:.2f}" for r in rep.rows)
    assert report(capsys, 5, f"monotonicity, experiment {experiment}", not bad,
                  (("violations: " + ", ".join(bad) + "; ") if bad else "")
                  + f"{rhos} ({elapsed:.0f}s)")


@pytest.mark.slow
def test_c05_monotonicity_runtime(capsys):
    total = sum(_sweep(e)[2] for e in range(1, 9))
    assert report(capsys, 5, "sweep total runtime", total < 45 * 60, f"{total / 60:.1f} min")


def test_c06_brute_force(capsys):
    fails = []
    r = np.random.default_rng(600)
    g = GroupSpec.of((0, 1), (2,))
    for t in range(50):
        n = int(r.integers(5, 41))
        x = r.normal(size=(n, 2))
        y = x[:, :1] * r.normal(size=(n, 1)) if t % 2 else x[:, :1] ** 2 + r.normal(size=(n, 1))
        d = np.column_stack([x, y])
        if not np.isclose(im.dcov(d, g), dcov_brute(x, y), rtol=1e-12, atol=0):
            fails.append("dcov")
        if not np.isclose(im.ball_cov(d, g).value, ball_brute(x, y), rtol=1e-12, atol=1e-15):
            fails.append("ball")
        xv, yv = x[:, 0], y[:, 0]
        got = im.mdd_mdm(np.column_stack([xv, yv])).params["mdd_sq"]
        if not np.isclose(got, mdd_brute(xv, yv), rtol=1e-10, atol=1e-14):
            fails.append("mdd")
        if abs(im.cvm_product_copula(np.column_stack([xv, yv])).value
               - cvm_grid(np.column_stack([xv, yv]))) > 1e-3:
            fails.append("cvm")
    for score in ("chisq", "lr"):
        p = im.HHGParams(score)
        for x, y in instances(50, 40, 601):
            dx, dy = pairwise_distances(x), pairwise_distances(y)
            if not np.isclose(im.hhg_value(dx, dy, p), im.hhg_reference(dx, dy, p),
                              rtol=1e-12, atol=1e-12):
                fails.append(f"hhg-{score}")
    for t in range(50):
        n = int(r.integers(4, 9))
        x = r.integers(0, 6, n).astype(float)
        y = x + r.integers(-2, 3, n) if t % 2 else r.normal(size=n)
        exact = im.bergsma_dassios_exact(x, y)
        if not np.isclose(exact, bd_brute(x, y), rtol=0, atol=1e-12):
            fails.append("bd-exact")
        if abs(im.bergsma_dassios_value(x, y, seed=t) - exact) > 0.005:
            fails.append("bd-incomplete")
    for t in range(50):
        n = int(r.integers(10, 41))
        x = r.normal(size=n)
        y = x + r.normal(size=n)
        if abs(im.bergsma_dassios_value(x, y, seed=t) - im.bergsma_dassios_exact(x, y)) > 0.005:
            fails.append("bd-incomplete")
    assert report(capsys, 6, "brute-force equivalence", not fails,
                  "failures: " + ", ".join(sorted(set(fails))) if fails else "all matched")


RANK_BASED = [d.id for d in all_descriptors("indep") if d.rank_based and d.bivariate]
BIVARIATE = [d.id for d in all_descriptors("indep") if d.bivariate]
CI_ALL = [d.id for d in all_descriptors("ci")]


def test_c07_invariance(capsys):
    fails = set()
    r = np.random.default_rng(700)
    for t in range(100):
        n = 80
        x = r.normal(size=n)
        rho = r.uniform(-0.9, 0.9)
        d = np.column_stack([x, rho * x + np.sqrt(1 - rho ** 2) * r.normal(size=n)])
        moved = np.column_stack([np.exp(d[:, 0]), d[:, 1] ** 3 + 2 * d[:, 1]])
        perm = r.permutation(n)
        for m in BIVARIATE:
            a = evaluate(m, d, seed=7, m=20_000).value
            if m in RANK_BASED and evaluate(m, moved, seed=7, m=20_000).value != a:
                fails.add(f"{m.value}:monotone")
            if not np.isclose(evaluate(m, d[perm], seed=7, m=20_000).value, a,
                              rtol=1e-12, atol=1e-15):
                fails.add(f"{m.value}:permutation")
        z = r.normal(size=120)
        c = np.column_stack([z + r.normal(size=120), z + r.normal(size=120), z])
        cmoved = np.column_stack([np.exp(c[:, 0]), c[:, 1] ** 3, np.arctan(c[:, 2])])
        cperm = r.permutation(120)
        for m in CI_ALL:
            a = evaluate(m, c, x=0, y=1, z=[2], seed=3).value
            if not np.isclose(evaluate(m, c[cperm], x=0, y=1, z=[2], seed=3).value, a,
                              rtol=1e-9, atol=1e-12):
                fails.add(f"{m.value}:permutation")
            if m in (M.CODEC_CI, M.CE_CI) and \
                    evaluate(m, cmoved, x=0, y=1, z=[2], seed=3).value != a:
                fails.add(f"{m.value}:monotone")
    assert report(capsys, 7, "invariance suite (100 instances)", not fails,
                  "failures: " + ", ".join(sorted(fails)) if fails else
                  f"{len(RANK_BASED)} rank-based, {len(BIVARIATE)} bivariate, "
                  f"{len(CI_ALL)} CI measures")


def test_c08_copula_tau(capsys):
    worst = {}
    for e, family in ((3, "clayton"), (4, "gumbel")):
        errs = []
        for g in experiment_grid(e, n=2000):
            d = sample(g.with_seed(cell_seed(DEFAULT_ROOT_SEED, e, 0, int(g.param))))
            v = d.values
            tau = stats.kendalltau(v[:, 0], v[:, 1]).statistic
            errs.append(abs(tau - kendall_tau_closed_form(family, g.param)))
        worst[family] = max(errs)
    assert report(capsys, 8, "copula sampler tau", all(v <= 0.04 for v in worst.values()),
                  " ".join(f"{k} max err={v:.4f}" for k, v in worst.items()))


@pytest.mark.slow
def test_c09_clustering(capsys):
    table, _, _ = _sweep(1)
    rep = cross_measure_correlation(table, k=5)
    a = rep.same_cluster(M.CE, M.DHSIC, M.HOEFF)
    b = rep.same_cluster(M.BALL, M.HHG_CHISQ, M.HHG_LR)
    groups = " | ".join(",".join(sorted(m.value for m in c)) for c in rep.clusters())
    ok = a and b
    report(capsys, 9, "clustering (soft gate)", ok,
           f"root seed {DEFAULT_ROOT_SEED}: {groups}")
    if not ok:
        warnings.warn("experiment-1 clustering differs from the reference grouping")


def _env_path(name):
    p = os.environ.get(name)
    return p if p and os.path.exists(p) else None


def test_c10_real_data(capsys, tmp_path):
    from depmeter.cli import main
    paths = {k: _env_path(v) for k, v in (("heart", "DEPMETER_HEART"),
                                          ("wine", "DEPMETER_WINE"),
                                          ("air", "DEPMETER_AIR"))}
    missing = [k for k, v in paths.items() if v is None]
    if missing:
        report(capsys, 10, "real-data pipelines", False,
               f"data files not available for {', '.join(missing)} "
               f"(set DEPMETER_HEART, DEPMETER_WINE, DEPMETER_AIR)")
        pytest.fail(f"real data not available: {missing}")
    notes, ok = [], True
    assert main(["real", "heart", "--path", paths["heart"], "--out", str(tmp_path / "h")]) == 0
    lines = (tmp_path / "h" / "selection.csv").read_text().splitlines()
    ce = next(row.split(",") for row in lines if row.startswith("CE,"))
    ok &= len(lines) == 18
    notes.append(f"heart rows={len(lines) - 2} CE TP={ce[1]} FP={ce[2]}"
                 f"{'' if int(ce[1]) >= 9 else ' (below soft reference 9)'}")
    assert main(["real", "wine", "--path", paths["wine"], "--out", str(tmp_path / "w")]) == 0
    rows = (tmp_path / "w" / "wine_normalized.csv").read_text().splitlines()[1:]
    head = rows[0].split(",")
    i0, i1 = head.index("fixed acidity"), head.index("alcohol")
    pinned = all(float(r.split(",")[i0]) == 0.0 and float(r.split(",")[i1]) == 1.0
                 for r in rows[1:])
    ok &= pinned
    notes.append(f"wine pinned={pinned}")
    t0 = time.perf_counter()
    assert main(["real", "air", "--path", paths["air"], "--out", str(tmp_path / "a")]) == 0
    elapsed = time.perf_counter() - t0
    body = (tmp_path / "a" / "lag_trajectories.csv").read_text().splitlines()[2:]
    counts = {}
    for row in body:
        counts[row.split(",")[3]] = counts.get(row.split(",")[3], 0) + 1
    full = len(counts) == len(CI_ALL) and set(counts.values()) == {24}
    ok &= full and elapsed < 20 * 60
    notes.append(f"air measures={len(counts)} lags={sorted(set(counts.values()))} "
                 f"({elapsed:.0f}s)")
    assert report(capsys, 10, "real-data pipelines", ok, "; ".join(notes))
