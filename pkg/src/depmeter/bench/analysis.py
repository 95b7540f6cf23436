"""Monotonicity, cross-measure correlation and clustering of sweep trajectories."""
from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import stats
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from ..core import MeasureId
from ..errors import ParamRange
from ..registry import ABS, IDENTITY, STATISTIC, strength
from .sweep import SweepTable, expected_trend


@dataclass
class MonotonicityRow:
    measure: MeasureId
    spearman: float
    passed: bool
    reason: str = ""


@dataclass
class MonotonicityReport:
    threshold: float
    trend: int
    rows: list[MonotonicityRow]

    def row(self, measure: MeasureId | str) -> MonotonicityRow:
        mid = MeasureId.parse(measure)
        for r in self.rows:
            if r.measure == mid:
                return r
        raise KeyError(mid)

    def passed(self, measure: MeasureId | str) -> bool:
        return self.row(measure).passed

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# depmeter-monotonicity/1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("measure", "spearman", "threshold", "trend", "pass", "reason"))
        for r in self.rows:
            w.writerow((r.measure.value, "" if np.isnan(r.spearman) else repr(r.spearman),
                        self.threshold, self.trend, "pass" if r.passed else "fail", r.reason))
        return buf.getvalue()


def trajectory_spearman(params: Sequence[float], trajectory: Sequence[float]) -> float:
    t = np.asarray(trajectory, dtype=float)
    if np.ptp(t) == 0:
        return float("nan")
    return float(stats.spearmanr(params, t).statistic)


def monotonicity_from_trajectories(params: Sequence[float],
                                   trajectories: Mapping[MeasureId, Sequence[float]],
                                   directions: Mapping[MeasureId, str] | None = None,
                                   threshold: float = 0.9, trend: int = 1,
                                   orientations: Mapping[MeasureId, str] | None = None
                                   ) -> MonotonicityReport:
    """Spearman of the grid against each oriented mean trajectory.

    ``directions`` marks p-value measures (``"inverse"``); ``orientations``
    defaults to absolute values.
    """
    if len(params) < 3:
        raise ParamRange("monotonicity needs at least three grid points")
    rows = []
    for m, traj in trajectories.items():
        traj = np.asarray(traj, dtype=float)
        if np.any(~np.isfinite(traj)):
            rows.append(MonotonicityRow(m, float("nan"), False, "missing cells"))
            continue
        o = strength(traj, (directions or {}).get(m, STATISTIC),
                     (orientations or {}).get(m, ABS))
        rho = trajectory_spearman(params, o)
        if np.isnan(rho):
            rows.append(MonotonicityRow(m, rho, False, "constant trajectory"))
        else:
            rows.append(MonotonicityRow(m, rho, bool(trend * rho >= threshold)))
    return MonotonicityReport(threshold, trend, rows)


def monotonicity(table: SweepTable, threshold: float = 0.9) -> MonotonicityReport:
    return monotonicity_from_trajectories(table.params, table.oriented_means(), None,
                                          threshold, expected_trend(table.experiment_id),
                                          {m: IDENTITY for m in table.measures})


@dataclass
class ClusterReport:
    measures: list[MeasureId]
    corr: np.ndarray
    merges: np.ndarray  # scipy linkage matrix, n-1 rows
    assignment: np.ndarray  # cluster label per measure at the cut
    k: int
    method: str = "complete"
    constant: list[MeasureId] = field(default_factory=list)

    def clusters(self) -> list[set[MeasureId]]:
        out: dict[int, set[MeasureId]] = {}
        for m, c in zip(self.measures, self.assignment):
            out.setdefault(int(c), set()).add(m)
        return sorted(out.values(), key=lambda s: min(m.order for m in s))

    def same_cluster(self, *measures: MeasureId | str) -> bool:
        labels = {int(self.assignment[self.measures.index(MeasureId.parse(m))])
                  for m in measures}
        return len(labels) == 1

    def corr_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# depmeter-corr/1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measure"] + [m.value for m in self.measures])
        for m, row in zip(self.measures, self.corr):
            w.writerow([m.value] + [repr(float(v)) for v in row])
        return buf.getvalue()

    def dendrogram_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# depmeter-dendrogram/1 linkage={self.method} cut_k={self.k}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("step", "left", "right", "distance", "size"))
        names = [m.value for m in self.measures]
        for step, (a, b, dist, size) in enumerate(self.merges):
            names.append(f"node{len(self.measures) + step}")
            w.writerow((step, names[int(a)], names[int(b)], repr(float(dist)), int(size)))
        w.writerow(())
        w.writerow(("measure", "cluster"))
        for m, c in zip(self.measures, self.assignment):
            w.writerow((m.value, int(c)))
        return buf.getvalue()


def correlation_matrix(trajectories: Mapping[MeasureId, Sequence[float]]
                       ) -> tuple[list[MeasureId], np.ndarray, list[MeasureId]]:
    measures = sorted(trajectories, key=lambda m: m.order)
    T = np.array([np.asarray(trajectories[m], dtype=float) for m in measures])
    constant = [m for m, t in zip(measures, T) if np.ptp(t) == 0]
    if constant:
        warnings.warn(f"constant trajectories get zero correlation: "
                      f"{[m.value for m in constant]}", RuntimeWarning, stacklevel=3)
    corr = np.zeros((len(measures), len(measures)))
    live = [i for i, m in enumerate(measures) if m not in constant]
    if len(live) > 1:
        corr[np.ix_(live, live)] = np.corrcoef(T[live])
    np.fill_diagonal(corr, 1.0)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return measures, corr, constant


def cross_measure_correlation_from(trajectories: Mapping[MeasureId, Sequence[float]],
                                   k: int = 5, method: str = "complete") -> ClusterReport:
    if len(trajectories) < 2:
        raise ParamRange("need at least two measures")
    if len(next(iter(trajectories.values()))) < 3:
        raise ParamRange("need at least three grid points")
    measures, corr, constant = correlation_matrix(trajectories)
    dist = squareform(1.0 - corr, checks=False)
    Z = linkage(dist, method=method)
    labels = fcluster(Z, t=min(k, len(measures)), criterion="maxclust")
    # relabel clusters by first appearance in measure-id order
    first: dict[int, int] = {}
    for c in labels:
        first.setdefault(int(c), len(first) + 1)
    labels = np.array([first[int(c)] for c in labels])
    return ClusterReport(measures, corr, Z, labels, k, method, constant)


def cross_measure_correlation(table: SweepTable, k: int = 5,
                              method: str = "complete") -> ClusterReport:
    """Cluster the oriented mean trajectories; measures with failed cells are left out."""
    traj = table.oriented_means()
    broken = [m for m, t in traj.items() if not np.all(np.isfinite(t))]
    if broken:
        warnings.warn(f"trajectories with failed cells are not clustered: "
                      f"{[m.value for m in broken]}", RuntimeWarning, stacklevel=2)
    return cross_measure_correlation_from({m: t for m, t in traj.items() if m not in broken},
                                          k, method)
