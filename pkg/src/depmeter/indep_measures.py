"""Independence measures.

Every public estimator takes a sample (and, where vectors are allowed, a
:class:`GroupSpec`) and returns a :class:`MeasureResult`. The ``*_value``
helpers return the bare float and are what the tests compare against
brute-force evaluations.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .core import (ArrayLike, AverageRank, DataMatrix, GroupSpec, MeasureId, MeasureResult,
                   RandomJitter, as_data, average_ranks, canonical_order, double_center, jitter_ranks,
                   make_pseudo_obs, max_ranks, pairwise_distances, u_center)
from .entropy_knn import EntropyParams, copula_entropy, vector_copula_entropy
from .errors import CapabilityError, DegenerateBlock, ParamRange, ShapeError


def _result(mid: MeasureId, value: float, t0: float, **params) -> MeasureResult:
    return MeasureResult(mid, float(value), params, time.perf_counter() - t0)


def _two_columns(data: ArrayLike, name: str) -> tuple[np.ndarray, np.ndarray]:
    data = as_data(data)
    if data.d != 2:
        raise CapabilityError(f"{name} is defined for exactly two columns, got {data.d}")
    return data.values[:, 0], data.values[:, 1]


def _groups(data: DataMatrix, groups: GroupSpec | None, min_blocks: int = 2,
            max_blocks: int | None = None) -> GroupSpec:
    g = GroupSpec.singletons(data.d) if groups is None else groups
    g.validate(data.d)
    if g.k < min_blocks or (max_blocks is not None and g.k > max_blocks):
        want = f"{min_blocks}" if max_blocks == min_blocks else f">= {min_blocks}"
        raise CapabilityError(f"expected {want} blocks, got {g.k}")
    return g


# ---------------------------------------------------------------------------
# copula entropy

def ce(data: ArrayLike, groups: GroupSpec | None = None, params: EntropyParams = EntropyParams(),
       seed: int = 0) -> MeasureResult:
    """Copula entropy of the columns, or of the blocks when ``groups`` has vectors."""
    t0 = time.perf_counter()
    data = as_data(data)
    g = _groups(data, groups)
    if all(len(b) == 1 for b in g.blocks):
        value = copula_entropy(data.select(g.columns), params, seed)
    else:
        value = vector_copula_entropy(data, g.blocks, params, seed)
    return _result(MeasureId.CE, value, t0, k=params.k, metric=params.metric, estimator="ksg",
                   **RandomJitter(seed).describe())


# ---------------------------------------------------------------------------
# rank statistics for a pair of scalars

def kendall_tau_value(x: np.ndarray, y: np.ndarray) -> float:
    """tau-a over the n(n-1)/2 pairs."""
    n = x.size
    sx = np.sign(x[:, None] - x[None, :])
    sy = np.sign(y[:, None] - y[None, :])
    # the full double sum counts each pair twice
    return float((sx * sy).sum() / (n * (n - 1)))


def kendall_tau(data: ArrayLike) -> MeasureResult:
    t0 = time.perf_counter()
    x, y = _two_columns(data, "Kendall's tau")
    return _result(MeasureId.KTAU, kendall_tau_value(x, y), t0, variant="tau-a")


def hoeffding_value(x: np.ndarray, y: np.ndarray) -> float:
    """Plug-in mean of (F_xy - F_x F_y)^2 at the sample points."""
    n = x.size
    fx = max_ranks(x) / n
    fy = max_ranks(y) / n
    below_x = x[None, :] <= x[:, None]
    below_y = y[None, :] <= y[:, None]
    fxy = (below_x & below_y).sum(axis=1) / n
    return float(np.mean((fxy - fx * fy) ** 2))


def hoeffding_d(data: ArrayLike) -> MeasureResult:
    t0 = time.perf_counter()
    x, y = _two_columns(data, "Hoeffding's D")
    return _result(MeasureId.HOEFF, hoeffding_value(x, y), t0)


def _bd_ranks(z: np.ndarray) -> np.ndarray:
    # the kernel depends on the data only through ranks; doubled average ranks
    # are integers, so the cancellations inside the sign are exact
    return 2.0 * average_ranks(z)


def _bd_a(z: np.ndarray, i, j, k, l) -> np.ndarray:
    z1, z2, z3, z4 = z[i], z[j], z[k], z[l]
    return np.sign(np.abs(z1 - z2) + np.abs(z3 - z4) - np.abs(z1 - z3) - np.abs(z2 - z4))


def bergsma_dassios_exact(x: np.ndarray, y: np.ndarray) -> float:
    """Average of a(x)a(y) over all n^4 index tuples; only for small n."""
    n = x.size
    if n > 60:
        raise ParamRange("exact enumeration is limited to n <= 60")
    x, y = _bd_ranks(x), _bd_ranks(y)
    idx = np.arange(n)
    total = 0.0
    # fix the first index and vectorise over the remaining three
    j, k, l = (a.ravel() for a in np.meshgrid(idx, idx, idx, indexing="ij"))
    for i in range(n):
        ii = np.full(j.size, i)
        total += float(np.sum(_bd_a(x, ii, j, k, l) * _bd_a(y, ii, j, k, l)))
    return total / n ** 4


def bergsma_dassios_value(x: np.ndarray, y: np.ndarray, m: int = 1_000_000, seed: int = 0,
                          chunk: int = 1 << 18) -> float:
    """Incomplete U-statistic over ``m`` 4-tuples drawn with replacement.

    Tuples index the rows sorted by (x, y) and, separately, by (y, x); the
    two estimates are averaged, which keeps the result invariant to row
    order and exactly symmetric in the two variables.
    """
    if m < 1:
        raise ParamRange("m must be positive")
    n = x.size
    rx, ry = _bd_ranks(x), _bd_ranks(y)
    sorts = [np.lexsort((ry, rx)), np.lexsort((rx, ry))]
    rng = np.random.default_rng(seed)
    total = 0.0
    done = 0
    while done < m:
        size = min(chunk, m - done)
        t = rng.integers(0, n, size=(4, size))
        for order in sorts:
            xs, ys = rx[order], ry[order]
            total += float(np.sum(_bd_a(xs, *t) * _bd_a(ys, *t)))
        done += size
    return total / (2 * m)


def bergsma_dassios(data: ArrayLike, m: int = 1_000_000, seed: int = 0,
                    exact: bool = False) -> MeasureResult:
    t0 = time.perf_counter()
    x, y = _two_columns(data, "Bergsma-Dassios tau*")
    if x.size < 4:
        raise ParamRange("need n >= 4")
    if exact:
        return _result(MeasureId.BDTAU, bergsma_dassios_exact(x, y), t0, exact=True)
    return _result(MeasureId.BDTAU, bergsma_dassios_value(x, y, m, seed), t0, m=m, seed=seed)


# ---------------------------------------------------------------------------
# distance-ball statistics

CHISQ = "chisq"
LIKELIHOOD_RATIO = "lr"


@dataclass(frozen=True)
class HHGParams:
    score: str = CHISQ

    def __post_init__(self) -> None:
        if self.score not in (CHISQ, LIKELIHOOD_RATIO):
            raise ParamRange(f"unknown HHG score {self.score!r}")


def _block_distances(data: DataMatrix, groups: GroupSpec | None, k: int | None = 2
                     ) -> list[np.ndarray]:
    g = _groups(data, groups, 2, k)
    return [pairwise_distances(b) for b in g.split(data)]


def hhg_value(dx: np.ndarray, dy: np.ndarray, params: HHGParams = HHGParams()) -> float:
    """Sum of per-pair 2x2 table scores, via O(n^2 log n) ball counts."""
    n = dx.shape[0]
    if n < 4:
        raise ParamRange("HHG needs n >= 4")
    axy, ax, ay = _kernels.dominance_counts(np.ascontiguousarray(dx, dtype=float),
                                            np.ascontiguousarray(dy, dtype=float))
    chisq, lr = _kernels.hhg_scores(axy, ax, ay)
    return chisq if params.score == CHISQ else lr


def hhg_tables_reference(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """The (A11, A12, A21, A22) counts of every ordered pair by a direct O(n^3) scan."""
    n = dx.shape[0]
    out = np.zeros((n, n, 4), dtype=np.int64)
    for i in range(n):
        others = np.arange(n) != i
        for j in range(n):
            if i == j:
                continue
            keep = others.copy()
            keep[j] = False
            inx = dx[i, keep] <= dx[i, j]
            iny = dy[i, keep] <= dy[i, j]
            out[i, j] = ((inx & iny).sum(), (inx & ~iny).sum(),
                         (~inx & iny).sum(), (~inx & ~iny).sum())
    return out


def hhg_reference(dx: np.ndarray, dy: np.ndarray, params: HHGParams = HHGParams()) -> float:
    """O(n^3) evaluation straight from the per-pair tables."""
    tables = hhg_tables_reference(dx, dy)
    n = dx.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a11, a12, a21, a22 = (float(v) for v in tables[i, j])
            r1, r2, c1, c2 = a11 + a12, a21 + a22, a11 + a21, a12 + a22
            if r1 == 0 or r2 == 0 or c1 == 0 or c2 == 0:
                continue
            m = n - 2
            if params.score == CHISQ:
                det = a11 * a22 - a12 * a21
                total += m * det * det / (r1 * r2 * c1 * c2)
            else:
                for o, e in ((a11, r1 * c1 / m), (a12, r1 * c2 / m),
                             (a21, r2 * c1 / m), (a22, r2 * c2 / m)):
                    if o > 0:
                        total += o * np.log(o / e)
    return total


def hhg(data: ArrayLike | None = None, params: HHGParams = HHGParams(),
        groups: GroupSpec | None = None,
        distances: tuple[np.ndarray, np.ndarray] | None = None) -> MeasureResult:
    """HHG statistic from data (two blocks) or from two distance matrices."""
    t0 = time.perf_counter()
    mid = MeasureId.HHG_CHISQ if params.score == CHISQ else MeasureId.HHG_LR
    if distances is not None:
        dx, dy = (np.asarray(d, dtype=float) for d in distances)
        if dx.shape != dy.shape or dx.ndim != 2 or dx.shape[0] != dx.shape[1]:
            raise ShapeError("distance matrices must be square and of equal size")
        return _result(mid, hhg_value(dx, dy, params), t0, score=params.score)
    data = as_data(data)
    px, py = _groups(data, groups, 2, 2).split(data)
    if data.n < 4:
        raise ParamRange("HHG needs n >= 4")
    chisq, lr = _kernels.hhg_from_points(np.ascontiguousarray(px), np.ascontiguousarray(py))
    return _result(mid, chisq if params.score == CHISQ else lr, t0, score=params.score)


def ball_cov_value(dists: Sequence[np.ndarray]) -> float:
    """Mean over (i, j) of (P_joint - prod_b P_b)^2 with ball probabilities P."""
    n = dists[0].shape[0]
    dists = [np.ascontiguousarray(d, dtype=float) for d in dists]
    if len(dists) == 2:
        joint, ax, ay = _kernels.dominance_counts(dists[0], dists[1])
        marg = [ax, ay]
    else:
        joint = _kernels.ball_joint_counts(np.stack(dists))
        marg = [_kernels.dominance_counts(d, d)[1] for d in dists]
    prod = np.ones((n, n))
    for a in marg:
        prod *= a / n
    return float(np.mean((joint / n - prod) ** 2))


def ball_cov(data: ArrayLike, groups: GroupSpec | None = None) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    blocks = _groups(data, groups).split(data)
    if len(blocks) == 2:
        value = _kernels.ball_from_points(*(np.ascontiguousarray(b) for b in blocks)) / data.n ** 2
    else:
        value = ball_cov_value([pairwise_distances(b) for b in blocks])
    return _result(MeasureId.BALL, value, t0, blocks=len(blocks))


# ---------------------------------------------------------------------------
# binary expansion

@dataclass(frozen=True)
class BetParams:
    depth: int = 3

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ParamRange("depth must be >= 1")


def _bit_products(u: np.ndarray, depth: int) -> np.ndarray:
    """All 2^depth products of the +-1 dyadic digits of u (column 0 is the empty product)."""
    scaled = np.minimum(np.floor(u[:, None] * 2.0 ** np.arange(1, depth + 1)), 2 ** depth)
    signs = 1.0 - 2.0 * (scaled % 2)
    out = np.ones((u.size, 1))
    for l in range(depth):
        out = np.hstack([out, out * signs[:, l:l + 1]])
    return out


def bet_value(u: np.ndarray, blocks: Sequence[Sequence[int]], depth: int = 3) -> float:
    """max |sum_i interaction_i| / n over interactions touching at least two blocks.

    Each block contributes the products of the +-1 dyadic digits of its
    coordinates, centred within the block.
    """
    n = u.shape[0]
    table = np.ones((n, 1))
    touched = np.zeros(1, dtype=np.int64)
    for b in blocks:
        feats = np.ones((n, 1))
        for c in b:
            p = _bit_products(u[:, c], depth)
            feats = (feats[:, :, None] * p[:, None, :]).reshape(n, -1)
        # centre so that within-block dependence cannot leak into cross-block terms
        feats[:, 1:] -= feats[:, 1:].mean(axis=0)
        nonempty = np.r_[0, np.ones(feats.shape[1] - 1, dtype=np.int64)]
        table = (table[:, :, None] * feats[:, None, :]).reshape(n, -1)
        touched = (touched[:, None] + nonempty[None, :]).ravel()
    keep = touched >= 2
    return float(np.abs(table[:, keep].sum(axis=0)).max() / n)


def bet(data: ArrayLike, params: BetParams = BetParams(),
        groups: GroupSpec | None = None) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    g = _groups(data, groups)
    if data.n < 4 ** params.depth:
        raise ParamRange(f"need n >= 4^depth = {4 ** params.depth}")
    u = make_pseudo_obs(data, AverageRank()).u
    return _result(MeasureId.BET, bet_value(u, g.blocks, params.depth), t0, depth=params.depth)


# ---------------------------------------------------------------------------
# checkerboard and empirical copula statistics

@dataclass(frozen=True)
class CheckerboardParams:
    resolution: int | None = None  # None means floor(sqrt(n))

    def resolve(self, n: int) -> int:
        N = int(np.floor(np.sqrt(n))) if self.resolution is None else int(self.resolution)
        if N < 2:
            raise ParamRange("checkerboard resolution must be >= 2")
        return N


def _abs_integral_linear(f0: np.ndarray, f1: np.ndarray, h: float) -> np.ndarray:
    """Exact integral of |f| over an interval of width h where f is linear from f0 to f1."""
    same = f0 * f1 >= 0
    denom = np.where(same, 1.0, np.abs(f0) + np.abs(f1))
    cross = h * (f0 ** 2 + f1 ** 2) / (2.0 * denom)
    return np.where(same, h * np.abs(f0 + f1) / 2.0, cross)


def qad_pair(u: np.ndarray, v: np.ndarray, N: int) -> tuple[float, float]:
    """(zeta(X->Y), zeta(Y->X)) of the resolution-N empirical checkerboard copula."""
    a = np.minimum((u * N).astype(np.int64), N - 1)
    b = np.minimum((v * N).astype(np.int64), N - 1)
    mass = np.zeros((N, N))
    np.add.at(mass, (a, b), 1.0)

    def zeta(m: np.ndarray) -> float:
        rows = m.sum(axis=1)
        ok = rows > 0
        # kernel at the grid nodes y = 0, 1/N, ..., 1 within each vertical strip
        k = np.zeros((N, N + 1))
        k[:, 1:] = np.cumsum(m, axis=1)
        k = k[ok] / rows[ok, None]
        f = k - np.arange(N + 1) / N
        per_strip = _abs_integral_linear(f[:, :-1], f[:, 1:], 1.0 / N).sum(axis=1)
        return 3.0 * float(per_strip.mean())

    return zeta(mass), zeta(mass.T)


def qad_zeta(data: ArrayLike, params: CheckerboardParams = CheckerboardParams()) -> MeasureResult:
    """zeta(X -> Y) of the first two columns; the reverse direction is in ``params``.

    Further columns are ignored, as in the reference implementation which
    reads the first two columns of a data frame.
    """
    t0 = time.perf_counter()
    data = as_data(data)
    if data.d < 2:
        raise CapabilityError("QAD needs two columns")
    if data.n < 9:
        raise ParamRange("QAD needs n >= 9")
    N = params.resolve(data.n)
    u = make_pseudo_obs(data.select([0, 1]), AverageRank()).u
    xy, yx = qad_pair(u[:, 0], u[:, 1], N)
    return _result(MeasureId.QAD, xy, t0, resolution=N, zeta_yx=yx, columns_used=[0, 1])


def cvm_value(u: np.ndarray) -> float:
    """n * integral of (C_n - Pi)^2 in closed form over pseudo-observations u."""
    n, d = u.shape
    cross = np.ones((n, n))
    for c in range(d):
        cross *= 1.0 - np.maximum(u[:, c, None], u[None, :, c])
    single = np.prod((1.0 - u ** 2) / 2.0, axis=1)
    return float(n * (cross.sum() / n ** 2 - 2.0 * single.sum() / n + 3.0 ** (-d)))


def cvm_product_copula(data: ArrayLike) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    if data.d < 2:
        raise CapabilityError("the product-copula statistic needs d >= 2")
    u = make_pseudo_obs(data, AverageRank()).u
    return _result(MeasureId.MIXED, cvm_value(u), t0, dims=data.d)


def _dense(col: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """0-based dense ranks and the empirical cdf at each distinct value."""
    vals, inv, counts = np.unique(col, return_inverse=True, return_counts=True)
    return inv.astype(np.int64), np.cumsum(counts) / col.size


def subcop_value(x: np.ndarray) -> float:
    """sup(S - Pi) - sup(Pi - S) over the grid of distinct sample values."""
    n, d = x.shape
    ranks, cdfs = zip(*(_dense(x[:, c]) for c in range(d)))
    if d == 2:
        grid = np.zeros((cdfs[0].size, cdfs[1].size))
        np.add.at(grid, (ranks[0], ranks[1]), 1.0)
        s = grid.cumsum(axis=0).cumsum(axis=1) / n
        diff = s - np.outer(cdfs[0], cdfs[1])
        return float(diff.max() - (-diff).max())
    if d == 3:
        hi, lo = _kernels.subcop_extremes_3d(ranks[0], ranks[1], ranks[2], cdfs[0].size,
                                             cdfs[1].size, cdfs[2].size, cdfs[0], cdfs[1],
                                             cdfs[2])
        return float(hi - lo)
    raise CapabilityError(f"subcopula measure supports 2 or 3 columns, got {d}")


def subcop_measure(data: ArrayLike) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    if data.d < 2:
        raise CapabilityError("subcopula measure needs two columns")
    return _result(MeasureId.SUBCOP, subcop_value(data.values), t0)


def codec_xi_value(x: np.ndarray, y: np.ndarray, seed: int = 0) -> float:
    n = x.size
    rng = np.random.default_rng(seed)
    order = np.argsort(jitter_ranks(x, rng, canonical_order(np.column_stack([x, y]))))
    r = max_ranks(y)[order]
    return float(1.0 - 3.0 * np.abs(np.diff(r)).sum() / (n ** 2 - 1.0))


def codec_xi(data: ArrayLike, seed: int = 0) -> MeasureResult:
    """xi_n(X, Y): how well Y is determined by X (asymmetric)."""
    t0 = time.perf_counter()
    x, y = _two_columns(data, "CODEC xi")
    return _result(MeasureId.CODEC, codec_xi_value(x, y, seed), t0, **RandomJitter(seed).describe())


# ---------------------------------------------------------------------------
# distance covariance family

def dcov_sq(a: np.ndarray, b: np.ndarray) -> float:
    """V-statistic squared distance covariance from two distance matrices."""
    return float(np.mean(double_center(a) * double_center(b)))


def dcor_value(a: np.ndarray, b: np.ndarray) -> float:
    """Squared distance correlation nu^2(X,Y) / sqrt(nu^2(X) nu^2(Y))."""
    A, B = double_center(a), double_center(b)
    vx, vy = np.mean(A * A), np.mean(B * B)
    if vx <= 0 or vy <= 0:
        raise DegenerateBlock("a block has zero distance variance")
    return float(np.mean(A * B) / np.sqrt(vx * vy))


def dcor(data: ArrayLike, groups: GroupSpec | None = None) -> MeasureResult:
    t0 = time.perf_counter()
    a, b = _block_distances(as_data(data), groups)
    return _result(MeasureId.DCOR, dcor_value(a, b), t0, form="squared V-statistic")


def dcov(data: ArrayLike, groups: GroupSpec | None = None) -> float:
    a, b = _block_distances(as_data(data), groups)
    return dcov_sq(a, b)


def _u_dvar(ut: np.ndarray) -> float:
    n = ut.shape[0]
    return float((ut * ut).sum() / (n * (n - 3)))


def jdcov_value(dists: Sequence[np.ndarray], c: float = 1.0) -> float:
    """Scale-free joint distance covariance, U-statistic form."""
    n = dists[0].shape[0]
    if n < 4:
        raise ParamRange("JdCov needs n >= 4")
    prod = np.ones((n, n))
    for a in dists:
        # U(x, x') = E|x - X| + E|X - x'| - |x - x'| - E|X - X'|
        ut = -u_center(a)
        v = _u_dvar(ut)
        if v <= 0:
            raise DegenerateBlock("a block has zero distance variance")
        prod *= ut / np.sqrt(v) + c
    np.fill_diagonal(prod, 0.0)
    d = len(dists)
    return float((prod.sum() - c ** d * n * (n - 1)) / (n * (n - 3)))


def jdcov_pairwise_value(dists: Sequence[np.ndarray]) -> float:
    """Sum over block pairs of the bias-corrected squared distance correlation."""
    uts = [u_center(a) for a in dists]
    vs = [_u_dvar(u) for u in uts]
    if min(vs) <= 0:
        raise DegenerateBlock("a block has zero distance variance")
    n = dists[0].shape[0]
    total = 0.0
    for i, j in itertools.combinations(range(len(dists)), 2):
        total += (uts[i] * uts[j]).sum() / (n * (n - 3)) / np.sqrt(vs[i] * vs[j])
    return float(total)


def jdcov(data: ArrayLike, groups: GroupSpec | None = None, c: float = 1.0,
          variant: str = "joint") -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    g = _groups(data, groups)
    dists = [pairwise_distances(b) for b in g.split(data)]
    if variant == "joint":
        value = jdcov_value(dists, c)
    elif variant == "pairwise":
        value = jdcov_pairwise_value(dists)
    else:
        raise ParamRange(f"unknown JdCov variant {variant!r}")
    return _result(MeasureId.JDCOV, value, t0, variant=variant, c=c)


def mdd_sq(a: np.ndarray, y: np.ndarray) -> float:
    """Squared martingale difference divergence of y given x (distance matrix a)."""
    y = y.reshape(y.shape[0], -1)
    yc = y - y.mean(axis=0)
    B = -(yc @ yc.T)
    return float(np.mean(double_center(a) * B))


def mdc_value(a: np.ndarray, y: np.ndarray) -> float:
    """Martingale difference correlation, the root of MDD^2 / sqrt(dVar^2(X) var^2(Y))."""
    y = y.reshape(y.shape[0], -1)
    yc = y - y.mean(axis=0)
    B = -(yc @ yc.T)
    A = double_center(a)
    va, vb = np.mean(A * A), np.mean(B * B)
    if vb <= 0:
        raise DegenerateBlock("Y is constant")
    if va <= 0:
        raise DegenerateBlock("X has zero distance variance")
    # MDD^2 is a quadratic form in the negative-type matrix -A, so never below 0
    return float(np.sqrt(max(np.mean(A * B), 0.0) / np.sqrt(va * vb)))


def mdd_mdm(data: ArrayLike, y_cols: Sequence[int] | None = None,
            x_cols: Sequence[int] | None = None, groups: GroupSpec | None = None) -> MeasureResult:
    """Conditional-mean dependence of Y on X.

    Reported as MDC in [0, 1]. Without explicit columns the first block is
    X and the second is Y.
    """
    t0 = time.perf_counter()
    data = as_data(data)
    if y_cols is None or x_cols is None:
        g = _groups(data, groups, 2, 2)
        x_cols, y_cols = g.blocks
    x = data.columns(x_cols)
    y = data.columns(y_cols)
    a = pairwise_distances(x)
    return _result(MeasureId.MDM, mdc_value(a, y), t0, x_cols=list(x_cols), y_cols=list(y_cols),
                   mdd_sq=mdd_sq(a, y))


def gaussian_gram(x: np.ndarray) -> np.ndarray:
    """exp(-d^2 / median(d^2)) with the median over nonzero squared distances."""
    d2 = pairwise_distances(x) ** 2
    pos = d2[np.triu_indices_from(d2, 1)]
    pos = pos[pos > 0]
    if pos.size == 0:
        raise DegenerateBlock("all observations of a block coincide")
    return np.exp(-d2 / np.median(pos))


def dhsic_value(grams: Sequence[np.ndarray]) -> float:
    n = grams[0].shape[0]
    joint = np.ones((n, n))
    marg = 1.0
    cross = np.ones(n)
    for k in grams:
        joint *= k
        marg *= k.mean()
        cross *= k.mean(axis=1)
    return float(joint.mean() + marg - 2.0 * cross.mean())


def dhsic(data: ArrayLike, groups: GroupSpec | None = None) -> MeasureResult:
    t0 = time.perf_counter()
    data = as_data(data)
    g = _groups(data, groups)
    if data.n < 4:
        raise ParamRange("dHSIC needs n >= 4")
    grams = [gaussian_gram(b) for b in g.split(data)]
    return _result(MeasureId.DHSIC, dhsic_value(grams), t0, kernel="gaussian",
                   bandwidth="median")
