"""Simulation sweeps over the experiment grids."""
from __future__ import annotations

import csv
import io
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..core import MeasureId
from ..errors import CapabilityError, DepmeterError, ParamRange, UnknownExperiment
from ..registry import check_capability, evaluate, registry_lookup, strength
from ..samplers import EXPERIMENTS, cell_seed, experiment_grid, sample

M = MeasureId
DEFAULT_ROOT_SEED = 20240
SWEEP_SCHEMA = "depmeter-sweep/1"
SWEEP_COLUMNS = ("experiment", "cell_param", "seed", "measure", "value", "elapsed_ms")

# Checkmarked (measure, experiment) cells of the monotonicity table, plus the
# single cell expected to fail. Blank cells mean "not applicable".
_FIRST_FIVE = (1, 2, 3, 4, 5)
EXPECTED_PASS: dict[MeasureId, tuple[int, ...]] = {
    M.CE: (1, 2, 3, 4, 5, 6, 7, 8),
    M.KTAU: _FIRST_FIVE,
    M.HOEFF: _FIRST_FIVE,
    M.BDTAU: _FIRST_FIVE,
    M.HHG_CHISQ: _FIRST_FIVE + (8,),
    M.HHG_LR: _FIRST_FIVE + (8,),
    M.BALL: _FIRST_FIVE + (8,),
    M.BET: (1, 2, 3, 4, 5, 6, 7, 8),
    M.QAD: _FIRST_FIVE,
    M.MIXED: _FIRST_FIVE + (6, 7),
    M.CODEC: _FIRST_FIVE,
    M.SUBCOP: _FIRST_FIVE + (6, 7),
    M.DCOR: _FIRST_FIVE + (8,),
    M.MDM: _FIRST_FIVE + (8,),
    M.DHSIC: (1, 2, 3, 4, 5, 6, 7, 8),
}
EXPECTED_FAIL: dict[MeasureId, tuple[int, ...]] = {M.QAD: (8,)}

CI_MEASURES = (M.CE_CI, M.PCOR, M.GCM, M.WGCM, M.CMI_KSG, M.CMI_MIXED, M.CODEC_CI, M.CDC, M.FCIT)


def reference_measures(experiment_id: int) -> list[MeasureId]:
    """Measures with a pass or fail mark for an independence experiment, in id order."""
    ms = [m for m in MeasureId
          if experiment_id in EXPECTED_PASS.get(m, ()) or experiment_id in EXPECTED_FAIL.get(m, ())]
    return ms


def default_measures(experiment_id: int) -> list[MeasureId]:
    if experiment_id in (9, 10):
        return list(CI_MEASURES)
    ms = reference_measures(experiment_id)
    if experiment_id in (6, 7):
        ms.append(M.JDCOV)
    return sorted(ms, key=lambda m: m.order)


def expected_trend(experiment_id: int) -> int:
    """+1 when dependence grows along the grid, -1 for the conditional designs."""
    return -1 if experiment_id in (9, 10) else 1


@dataclass(frozen=True)
class ExperimentSpec:
    experiment_id: int
    measures: tuple[MeasureId, ...] = ()
    seeds: int = 10
    n: int = 800
    root_seed: int = DEFAULT_ROOT_SEED
    out: str | None = None
    params: dict[str, dict[str, Any]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.experiment_id not in EXPERIMENTS:
            raise UnknownExperiment(f"experiment {self.experiment_id} is not defined (1-10)")
        if self.seeds < 1:
            raise ParamRange("seeds must be >= 1")
        ms = tuple(MeasureId.parse(m) for m in self.measures) or tuple(
            default_measures(self.experiment_id))
        ci = self.experiment_id in (9, 10)
        # the first cell fixes the design's column count and blocks
        cell = experiment_grid(self.experiment_id, n=10)[0]
        width = sample(cell.with_seed(0)).d
        for m in ms:
            desc = registry_lookup(m)
            if desc.ci != ci:
                kind = "conditional" if ci else "independence"
                raise CapabilityError(f"{m.value} cannot run in {kind} experiment "
                                      f"{self.experiment_id}")
            if not ci:
                check_capability(desc, width, cell.groups)
        object.__setattr__(self, "measures", ms)


@dataclass
class SweepTable:
    experiment_id: int
    params: list[float]
    measures: list[MeasureId]
    seeds: int
    records: list[dict[str, Any]]
    failures: list[dict[str, Any]] = field(default_factory=list)
    param_name: str = "param"

    def values(self, measure: MeasureId) -> np.ndarray:
        """cells x seeds array of estimates (NaN where a cell failed)."""
        out = np.full((len(self.params), self.seeds), np.nan)
        for r in self.records:
            if r["measure"] == measure:
                out[r["cell"], r["replicate"]] = r["value"]
        return out

    def means(self) -> dict[MeasureId, np.ndarray]:
        with warnings.catch_warnings():
            # cells where every replicate failed stay NaN
            warnings.simplefilter("ignore", RuntimeWarning)
            return {m: np.nanmean(self.values(m), axis=1) for m in self.measures}

    def directions(self) -> dict[MeasureId, str]:
        return {m: registry_lookup(m).direction for m in self.measures}

    def oriented_means(self) -> dict[MeasureId, np.ndarray]:
        """Mean trajectories on the larger-is-more-dependent scale."""
        return {m: oriented(v, m) for m, v in self.means().items()}

    def to_csv(self, path: str | os.PathLike | None = None, timing: bool = False) -> str:
        buf = io.StringIO()
        buf.write(f"# {SWEEP_SCHEMA}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in sorted(self.records, key=lambda r: (r["cell"], r["replicate"],
                                                      r["measure"].order)):
            w.writerow([self.experiment_id, repr(float(r["param"])), r["seed"],
                        r["measure"].value, repr(float(r["value"])),
                        f"{r['elapsed'] * 1000.0:.3f}" if timing else ""])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _evaluate_cell(task: tuple) -> tuple[list[dict], list[dict]]:
    exp_id, cell, param, replicate, seed, spec, measures, params, x, y, z = task
    data = sample(spec.with_seed(seed))
    recs, fails = [], []
    for m in measures:
        try:
            res = evaluate(m, data, groups=spec.groups, x=x, y=y, z=z, seed=seed,
                           **params.get(m.value, {}))
            recs.append({"cell": cell, "param": param, "replicate": replicate, "seed": seed,
                         "measure": m, "value": res.value, "elapsed": res.elapsed})
        except DepmeterError as exc:
            fails.append({"cell": cell, "param": param, "replicate": replicate, "seed": seed,
                          "measure": m, "error": f"{type(exc).__name__}: {exc}"})
    return recs, fails


class SweepFailed(DepmeterError):
    def __init__(self, failures: list[dict]):
        self.failures = failures
        first = failures[0]
        super().__init__(f"{len(failures)} estimator failures, first: {first['measure'].value} "
                         f"at {first['param']} seed {first['seed']}: {first['error']}")


def worker_count() -> int:
    """Process count, capped by the DEPMETER_THREADS environment variable."""
    cpus = os.cpu_count() or 1
    cap = os.environ.get("DEPMETER_THREADS")
    if cap:
        try:
            cpus = min(cpus, max(1, int(cap)))
        except ValueError as exc:
            raise ParamRange(f"DEPMETER_THREADS must be an integer, got {cap!r}") from exc
    return cpus


def run_sweep(spec: ExperimentSpec, allow_partial: bool = False,
              workers: int | None = None) -> SweepTable:
    """Sample every grid cell and seed and evaluate every requested measure."""
    grid = experiment_grid(spec.experiment_id, n=spec.n)
    ci = spec.experiment_id in (9, 10)
    x, y, z = (0, 1, [2]) if ci else (None, None, None)
    tasks = []
    for cell, g in enumerate(grid):
        for rep in range(spec.seeds):
            seed = cell_seed(spec.root_seed, spec.experiment_id, cell, rep)
            tasks.append((spec.experiment_id, cell, g.param, rep, seed, g, spec.measures,
                          spec.params, x, y, z))
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_cell, tasks))
    else:
        results = [_evaluate_cell(t) for t in tasks]
    records = [r for recs, _ in results for r in recs]
    failures = [f for _, fails in results for f in fails]
    if failures and not allow_partial:
        raise SweepFailed(failures)
    name = "alpha" if spec.experiment_id in (3, 4, 5, 7) else (
        "rho_xz" if ci else "rho")
    return SweepTable(spec.experiment_id, [g.param for g in grid], list(spec.measures),
                      spec.seeds, records, failures, name)


def oriented(values: np.ndarray, measure: MeasureId | str) -> np.ndarray:
    desc = registry_lookup(measure)
    return strength(values, desc.direction, desc.orientation)


def describe_spec(spec: ExperimentSpec) -> dict[str, Any]:
    return {"experiment_id": spec.experiment_id, "measures": [m.value for m in spec.measures],
            "seeds": spec.seeds, "n": spec.n, "root_seed": spec.root_seed,
            "params": spec.params}


def measure_list(names: Sequence[str] | None) -> tuple[MeasureId, ...]:
    return tuple(MeasureId.parse(n) for n in names) if names else ()
