"""Real-data protocols: threshold-based variable selection and lagged CI sweeps."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import DataMatrix, MeasureId
from ..errors import CapabilityError, DepmeterError, ParamRange, SchemaError
from ..registry import evaluate, registry_lookup, strength
from .sweep import CI_MEASURES, SweepTable


@dataclass
class SelectionRow:
    measure: MeasureId
    threshold: float
    selected: list[str]
    tp: int | None
    fp: int | None
    note: str = ""


@dataclass
class SelectionTable:
    target: str
    threshold_attr: str
    recommended: list[str]
    rows: list[SelectionRow]
    estimates: dict[MeasureId, dict[str, float]] = field(default_factory=dict)

    def row(self, measure: MeasureId | str) -> SelectionRow:
        mid = MeasureId.parse(measure)
        return next(r for r in self.rows if r.measure == mid)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# depmeter-selection/1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("measure", "TP", "FP", "threshold", "selected", "note"))
        for r in self.rows:
            w.writerow((r.measure.value, "" if r.tp is None else r.tp,
                        "" if r.fp is None else r.fp,
                        "" if np.isnan(r.threshold) else repr(r.threshold),
                        " ".join(r.selected), r.note))
        return buf.getvalue()


def _pair_estimate(values: np.ndarray, attr: int, target: int, measure: MeasureId,
                   seed: int) -> float:
    pair = values[:, [attr, target]]
    pair = pair[np.all(np.isfinite(pair), axis=1)]
    if pair.shape[0] < 10:
        return float("nan")
    try:
        # the attribute plays X and the target plays Y for asymmetric measures
        return evaluate(measure, DataMatrix(pair), seed=seed).value
    except DepmeterError:
        return float("nan")


def variable_selection(values: np.ndarray, names: Sequence[str], target: str,
                       threshold_attr: str, measures: Sequence[MeasureId | str],
                       recommended: Sequence[str], exclude: Sequence[str] = (),
                       seed: int = 0) -> SelectionTable:
    """Select attributes whose dependence with the target beats that of ``threshold_attr``.

    ``values`` may hold NaN for missing entries; each (attribute, target) pair
    is estimated on the rows where both are present. Comparison is strict, so
    the threshold attribute is never selected.
    """
    names = list(names)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != len(names):
        raise SchemaError("values and names disagree on the number of columns")
    for col in (target, threshold_attr, *recommended):
        if col not in names:
            raise SchemaError(f"unknown column {col!r}")
    ti = names.index(target)
    attrs = [a for a in names if a != target and a not in exclude]
    rec = set(recommended)
    rows, estimates = [], {}
    for m in (MeasureId.parse(m) for m in measures):
        desc = registry_lookup(m)
        if desc.ci:
            raise CapabilityError(f"{m.value} is not an independence measure")
        if not desc.bivariate:
            rows.append(SelectionRow(m, float("nan"), [], None, None,
                                     "not applicable to a pair of variables"))
            continue
        est = {a: _pair_estimate(values, names.index(a), ti, m, seed) for a in attrs}
        estimates[m] = est
        thr = est[threshold_attr]
        if np.isnan(thr):
            rows.append(SelectionRow(m, thr, [], None, None, "threshold estimate undefined"))
            continue
        s_thr = strength(thr, desc.direction, desc.orientation)
        chosen = [a for a in attrs
                  if np.isfinite(est[a]) and strength(est[a], desc.direction,
                                                      desc.orientation) > s_thr]
        tp = sum(a in rec for a in chosen)
        rows.append(SelectionRow(m, thr, chosen, tp, len(chosen) - tp))
    return SelectionTable(target, threshold_attr, list(recommended), rows, estimates)


def lagged_ci_sweep(data: DataMatrix | np.ndarray, factor_col: int, target_col: int,
                    lags: Sequence[int] = tuple(range(1, 25)),
                    measures: Sequence[MeasureId | str] = (), seed: int = 0) -> SweepTable:
    """CI of factor(t) and target(t + lag) given target(t), one row per lag."""
    values = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    if not np.all(np.isfinite(values[:, [factor_col, target_col]])):
        raise SchemaError("non-finite values in the factor or target column")
    n = values.shape[0]
    lags = [int(l) for l in lags]
    if min(lags) < 1 or max(lags) >= n / 2:
        raise ParamRange("lags must lie in [1, n/2)")
    ms = [MeasureId.parse(m) for m in measures] or list(CI_MEASURES)
    records, failures = [], []
    for cell, lag in enumerate(lags):
        x = values[:-lag, factor_col]
        y = values[lag:, target_col]
        z = values[:-lag, target_col]
        d = DataMatrix(np.column_stack([x, y, z]))
        for m in ms:
            try:
                r = evaluate(m, d, x=0, y=1, z=[2], seed=seed)
                records.append({"cell": cell, "param": lag, "replicate": 0, "seed": seed,
                                "measure": m, "value": r.value, "elapsed": r.elapsed})
            except DepmeterError as exc:
                failures.append({"cell": cell, "param": lag, "replicate": 0, "seed": seed,
                                 "measure": m, "error": f"{type(exc).__name__}: {exc}"})
    return SweepTable(0, [float(l) for l in lags], ms, 1, records, failures, "lag")

