"""Conditional-independence measures of X and Y given Z."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .core import (ArrayLike, DataMatrix, MeasureId, MeasureResult, RandomJitter, as_data,
                   canonical_order, make_pseudo_obs, max_ranks, pairwise_distances)
from .entropy_knn import EntropyParams, KnnIndex, ce_ci, cmi_ksg, cmi_mixed
from .errors import (CapabilityError, DegenerateRanks, DegenerateResiduals, ParamRange,
                     ShapeError, SingularConditioning)


@dataclass(frozen=True)
class Linear:
    """Ordinary least squares with an intercept."""


@dataclass(frozen=True)
class KnnRegression:
    k: int | None = None  # None means ceil(n ** 0.4)

    def resolve(self, n: int) -> int:
        k = math.ceil(n ** 0.4) if self.k is None else int(self.k)
        if not 1 <= k < n:
            raise ParamRange(f"kNN regression needs 1 <= k < n, got k={k}, n={n}")
        return k


RegressorSpec = Union[Linear, KnnRegression]


@dataclass(frozen=True)
class WeightFamily:
    """Sign weights on the quartile cells of Z.

    ``m=1`` is the constant weight. Otherwise the first ``m`` of the seven
    non-constant sign patterns over the four quartile cells are used (global
    sign flips give the same statistic, so seven is the full family).
    """

    m: int = 7

    def __post_init__(self) -> None:
        if not 1 <= self.m <= 7:
            raise ParamRange("weight family size must be in 1..7")

    def patterns(self) -> np.ndarray:
        if self.m == 1:
            return np.ones((1, 4))
        rows = []
        for bits in range(1, 8):
            # leading cell fixed at +1; halves pattern (+,+,-,-) comes first
            rows.append([1.0] + [(-1.0) ** ((bits >> s) & 1) for s in (2, 1, 0)])
        rows.sort(key=lambda r: (r != [1.0, 1.0, -1.0, -1.0], r[::-1]))
        return np.array(rows[: self.m])


def _result(mid: MeasureId, value: float, t0: float, **params) -> MeasureResult:
    return MeasureResult(mid, float(value), params, time.perf_counter() - t0)


def _cols(data: DataMatrix, x, y, z, need_z: bool = True, scalar_xy: bool = False
          ) -> tuple[list[int], list[int], list[int]]:
    x, y, z = [int(c) for c in np.atleast_1d(x)], [int(c) for c in np.atleast_1d(y)], \
        [] if z is None else [int(c) for c in np.atleast_1d(z)]
    if need_z and not z:
        raise CapabilityError("a conditioning set z is required")
    if not x or not y:
        raise CapabilityError("x and y must be nonempty")
    if scalar_xy and (len(x) != 1 or len(y) != 1):
        raise CapabilityError("x and y must be single columns")
    allc = x + y + z
    if len(set(allc)) != len(allc):
        raise ShapeError("x, y and z must be disjoint")
    if any(not 0 <= c < data.d for c in allc):
        raise ShapeError("column index out of range")
    return x, y, z


def _standardize(v: np.ndarray) -> np.ndarray:
    sd = v.std(axis=0)
    return (v - v.mean(axis=0)) / np.where(sd > 0, sd, 1.0)


# ---------------------------------------------------------------------------
# regression residuals

def _knn_fit_predict(z_train: np.ndarray, t_train: np.ndarray, z_test: np.ndarray, k: int,
                     exclude_self: bool = False) -> np.ndarray:
    tree = cKDTree(z_train)
    if not exclude_self:
        _, idx = tree.query(z_test, k=k)
        idx = idx.reshape(len(z_test), -1)
        return t_train[idx].mean(axis=1)
    _, idx = tree.query(z_test, k=k + 1)
    idx = idx.reshape(len(z_test), -1)
    own = np.arange(len(z_test))[:, None]
    # drop the point itself; if a duplicate displaced it, drop the farthest instead
    is_self = idx == own
    drop = np.where(is_self.any(axis=1), is_self.argmax(axis=1), k)
    keep = np.ones_like(idx, dtype=bool)
    keep[np.arange(len(idx)), drop] = False
    return t_train[idx[keep].reshape(len(idx), k)].mean(axis=1)


def residuals(target: np.ndarray, z: np.ndarray, reg: RegressorSpec) -> np.ndarray:
    """target minus its regression on z (leave-one-out for the kNN regressor)."""
    n = target.shape[0]
    if isinstance(reg, Linear):
        design = np.column_stack([np.ones(n), z])
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        return target - design @ coef
    k = reg.resolve(n)
    zs = _standardize(z)
    return target - _knn_fit_predict(zs, target, zs, k, exclude_self=True)


def _normalised_mean(r: np.ndarray) -> float:
    sd = r.std()
    if not sd > 0:
        raise DegenerateResiduals("residual products have zero variance")
    return float(np.sqrt(r.size) * r.mean() / sd)


def _residual_products(data: DataMatrix, x, y, z, reg) -> np.ndarray:
    zv = data.columns(z)
    eps = residuals(data.columns(x)[:, 0], zv, reg)
    delta = residuals(data.columns(y)[:, 0], zv, reg)
    return eps * delta


# ---------------------------------------------------------------------------
# estimators

def pcor_value(data: ArrayLike, x: int, y: int, z: Sequence[int] = ()) -> float:
    """Partial correlation from the Schur complement of the covariance matrix."""
    data = as_data(data)
    cols = [x, y] + list(z)
    cov = np.cov(data.columns(cols), rowvar=False)
    if not z:
        theta = cov
    else:
        czz = cov[2:, 2:]
        w = np.linalg.eigvalsh(czz)
        if w.min() <= 1e-12 * max(w.max(), 1.0):
            raise SingularConditioning("covariance of the conditioning set is singular")
        theta = cov[:2, :2] - cov[:2, 2:] @ np.linalg.solve(czz, cov[2:, :2])
    if theta[0, 0] <= 0 or theta[1, 1] <= 0:
        raise DegenerateResiduals("zero partial variance")
    return float(theta[0, 1] / np.sqrt(theta[0, 0] * theta[1, 1]))


def pcor_residual_value(data: ArrayLike, x: int, y: int, z: Sequence[int] = ()) -> float:
    """Partial correlation as the correlation of least-squares residuals."""
    data = as_data(data)
    zv = data.columns(list(z)) if z else np.empty((data.n, 0))
    ex = residuals(data.values[:, x], zv, Linear())
    ey = residuals(data.values[:, y], zv, Linear())
    denom = np.sqrt((ex @ ex) * (ey @ ey))
    if not denom > 0:
        raise DegenerateResiduals("zero partial variance")
    return float((ex @ ey) / denom)


def pcor(data: ArrayLike, x, y, z=()) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    xs, ys, zs = _cols(data, x, y, z, need_z=False, scalar_xy=True)
    return _result(MeasureId.PCOR, pcor_value(data, xs[0], ys[0], zs), t0)


def gcm(data: ArrayLike, x, y, z, reg: RegressorSpec = KnnRegression()) -> MeasureResult:
    """Generalised covariance measure sqrt(n) mean(R) / sd(R) of residual products R."""
    t0 = time.perf_counter()
    data = as_data(data)
    if data.n < 20:
        raise ParamRange("GCM needs n >= 20")
    xs, ys, zs = _cols(data, x, y, z, scalar_xy=True)
    r = _residual_products(data, xs, ys, zs, reg)
    return _result(MeasureId.GCM, _normalised_mean(r), t0, regressor=_describe(reg, data.n))


def _projection(zv: np.ndarray) -> np.ndarray:
    if zv.shape[1] == 1:
        return zv[:, 0]
    zs = _standardize(zv)
    _, _, vt = np.linalg.svd(zs - zs.mean(axis=0), full_matrices=False)
    return zs @ vt[0]


def quartile_cells(z: np.ndarray) -> np.ndarray:
    """Quartile cell 0..3 of each entry, by rank so ties stay together."""
    r = max_ranks(z)
    return np.minimum((4 * (r - 1)) // z.size, 3)


def wgcm(data: ArrayLike, x, y, z, reg: RegressorSpec = KnnRegression(),
         weights: WeightFamily = WeightFamily()) -> MeasureResult:
    """max over sign weights w(Z) of |sqrt(n) mean(w R) / sd(w R)|."""
    t0 = time.perf_counter()
    data = as_data(data)
    if data.n < 20:
        raise ParamRange("wGCM needs n >= 20")
    xs, ys, zs = _cols(data, x, y, z, scalar_xy=True)
    r = _residual_products(data, xs, ys, zs, reg)
    cells = quartile_cells(_projection(data.columns(zs)))
    best = max(abs(_normalised_mean(p[cells] * r)) for p in weights.patterns())
    return _result(MeasureId.WGCM, best, t0, regressor=_describe(reg, data.n), weights=weights.m)


def silverman_bandwidth(z: np.ndarray) -> np.ndarray:
    """Per-dimension rule-of-thumb bandwidth (4/(d+2))^(1/(d+4)) sd n^(-1/(d+4))."""
    n, d = z.shape
    sd = z.std(axis=0, ddof=1)
    return (4.0 / (d + 2)) ** (1.0 / (d + 4)) * sd * n ** (-1.0 / (d + 4))


def _weighted_dcov(W: np.ndarray, a: np.ndarray, b: np.ndarray, Wa: np.ndarray,
                   Wb: np.ndarray) -> np.ndarray:
    """sum_{k,l} w_k w_l A_kl B_kl for every weight row of W, A and B weight-centred."""
    first = np.einsum("ck,ck->c", W @ (a * b), W)
    second = np.einsum("ck,ck,ck->c", W, Wa, Wb)
    sa = np.einsum("ck,ck->c", W, Wa)
    sb = np.einsum("ck,ck->c", W, Wb)
    return first - 2.0 * second + sa * sb


def cdc_value(x: np.ndarray, y: np.ndarray, z: np.ndarray,
              bandwidth: float | Sequence[float] | None = None) -> float:
    """Conditional distance correlation averaged over the sample values of Z."""
    h = silverman_bandwidth(z) if bandwidth is None else np.broadcast_to(
        np.asarray(bandwidth, dtype=float), (z.shape[1],))
    if np.any(~(h > 0)):
        raise ParamRange("bandwidth must be positive")
    diff = (z[:, None, :] - z[None, :, :]) / h
    K = np.exp(-0.5 * np.sum(diff ** 2, axis=2))
    W = K / K.sum(axis=1, keepdims=True)
    a, b = pairwise_distances(x), pairwise_distances(y)
    # symmetric distance matrices, so (W a)[c, k] = sum_m w_cm a_mk
    Wa, Wb = W @ a, W @ b
    xy = _weighted_dcov(W, a, b, Wa, Wb)
    xx = _weighted_dcov(W, a, a, Wa, Wa)
    yy = _weighted_dcov(W, b, b, Wb, Wb)
    ok = (xx > 0) & (yy > 0)
    if not ok.any():
        raise DegenerateResiduals("conditional distance variance vanishes everywhere")
    return float(np.mean(np.where(ok, xy / np.sqrt(np.where(ok, xx * yy, 1.0)), 0.0)))


def cdc(data: ArrayLike, x, y, z, bandwidth: float | Sequence[float] | None = None
        ) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    xs, ys, zs = _cols(data, x, y, z)
    zv = data.columns(zs)
    value = cdc_value(data.columns(xs), data.columns(ys), zv, bandwidth)
    bw = silverman_bandwidth(zv) if bandwidth is None else bandwidth
    return _result(MeasureId.CDC, value, t0, bandwidth=np.atleast_1d(bw).tolist())


def _nearest_other(points: np.ndarray) -> np.ndarray:
    # compute on a canonical row order so the answer does not depend on row order
    order = canonical_order(points)
    nn_sorted = KnnIndex(points[order], "euclidean").nearest_other()
    out = np.empty(points.shape[0], dtype=np.int64)
    out[order] = order[nn_sorted]
    return out


def codec_ci_value(y: np.ndarray, xz: np.ndarray, z: np.ndarray) -> float:
    """T_n(Y, X | Z) from the nearest neighbours in Z and in (X, Z)."""
    r = max_ranks(y)
    N = _nearest_other(z)
    M = _nearest_other(xz)
    num = np.sum(np.minimum(r, r[M]) - np.minimum(r, r[N]))
    den = np.sum(r - np.minimum(r, r[N]))
    if den == 0:
        raise DegenerateRanks("denominator vanishes")
    return float(num / den)


def codec_ci(data: ArrayLike, x, y, z, seed: int = 0) -> MeasureResult:
    """Conditional dependence coefficient of Y on X given Z.

    Neighbours are found on the pseudo-observations of X and Z (ties
    jittered), so the value only depends on ranks.
    """
    t0 = time.perf_counter()
    data = as_data(data)
    if data.n < 3:
        raise ParamRange("CODEC needs n >= 3")
    xs, ys, zs = _cols(data, x, y, z)
    u = make_pseudo_obs(data.select(xs + zs), RandomJitter(seed)).u
    value = codec_ci_value(data.columns(ys)[:, 0] if len(ys) == 1 else
                           _projection(data.columns(ys)), u, u[:, len(xs):])
    return _result(MeasureId.CODEC_CI, value, t0, **RandomJitter(seed).describe())


def fcit_simplified(data: ArrayLike, x, y, z, reg: KnnRegression = KnnRegression(),
                    folds: int = 8, seed: int = 0) -> MeasureResult:
    """p-value of a paired one-sided t-test that (X, Z) predicts Y better than Z alone.

    Small values indicate conditional dependence.
    """
    t0 = time.perf_counter()
    data = as_data(data)
    if data.n < 80:
        raise ParamRange("FCIT needs n >= 80")
    if folds < 2:
        raise ParamRange("need at least two folds")
    xs, ys, zs = _cols(data, x, y, z)
    n = data.n
    if n // folds < 10:
        raise ParamRange(f"folds of size {n // folds} are too small")
    full = _standardize(data.columns(xs + zs))
    only_z = full[:, len(xs):]
    target = data.columns(ys)
    rng = np.random.default_rng(seed)
    assign = np.empty(n, dtype=np.int64)
    assign[canonical_order(data.values)] = rng.permutation(np.arange(n) % folds)
    mse_xz, mse_z = [], []
    for f in range(folds):
        test = assign == f
        train = ~test
        k = reg.resolve(int(train.sum()))
        for feats, out in ((full, mse_xz), (only_z, mse_z)):
            pred = _knn_fit_predict(feats[train], target[train], feats[test], k)
            out.append(float(np.mean((target[test] - pred) ** 2)))
    diff = np.subtract(mse_z, mse_xz)
    if np.all(diff == diff[0]):
        p = 0.5 if diff[0] == 0 else float(diff[0] < 0)
    else:
        p = float(stats.ttest_rel(mse_z, mse_xz, alternative="greater").pvalue)
    return _result(MeasureId.FCIT, p, t0, folds=folds, k=reg.resolve(n - n // folds), seed=seed)


def _describe(reg: RegressorSpec, n: int) -> str:
    if isinstance(reg, Linear):
        return "linear"
    return f"knn(k={reg.resolve(n)})"


# entropy-based estimators wrapped to the common calling convention

def ce_ci_measure(data: ArrayLike, x, y, z, params: EntropyParams = EntropyParams(),
                  seed: int = 0) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    xs, ys, zs = _cols(data, x, y, z)
    return _result(MeasureId.CE_CI, ce_ci(data, xs, ys, zs, params, seed), t0, k=params.k,
                   shared_ranking=True, **RandomJitter(seed).describe())


def cmi_ksg_measure(data: ArrayLike, x, y, z, params: EntropyParams = EntropyParams(),
                    seed: int = 0) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    xs, ys, zs = _cols(data, x, y, z)
    return _result(MeasureId.CMI_KSG, cmi_ksg(data, xs, ys, zs, params, seed), t0, k=params.k,
                   transform="standardize", seed=seed)


def cmi_mixed_measure(data: ArrayLike, x, y, z, params: EntropyParams = EntropyParams(),
                      seed: int = 0) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    xs, ys, zs = _cols(data, x, y, z)
    return _result(MeasureId.CMI_MIXED, cmi_mixed(data, xs, ys, zs, params, seed), t0,
                   k=params.k, transform="standardize")
