"""k-nearest-neighbour entropy, copula entropy and conditional mutual information."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln

from .core import ArrayLike, RandomJitter, as_data, make_pseudo_obs, range_jitter
from .errors import CapabilityError, DegenerateGeometry, ParamRange, ShapeError

CHEBYSHEV = "chebyshev"
EUCLIDEAN = "euclidean"


class KnnIndex:
    """Exact neighbour queries over a point set.

    ``brute=True`` scans all pairs; otherwise a kd-tree answers the same
    queries. Both paths return identical results.
    """

    def __init__(self, points: np.ndarray, metric: str = CHEBYSHEV, brute: bool = False):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if metric not in (CHEBYSHEV, EUCLIDEAN):
            raise ParamRange(f"unknown metric {metric!r}")
        self.points = pts
        self.metric = metric
        self.brute = brute
        self._p = np.inf if metric == CHEBYSHEV else 2.0
        self._tree = None if brute else cKDTree(pts)

    def _dist_matrix(self) -> np.ndarray:
        diff = np.abs(self.points[:, None, :] - self.points[None, :, :])
        if self.metric == CHEBYSHEV:
            return diff.max(axis=2)
        return np.sqrt((diff ** 2).sum(axis=2))

    def kth_distance(self, k: int) -> np.ndarray:
        """Distance from each point to its k-th nearest other point."""
        n = self.points.shape[0]
        if not 1 <= k < n:
            raise ParamRange(f"k must be in [1, n-1], got k={k}, n={n}")
        if self.brute:
            # self sits at distance 0, so the (k+1)-th order statistic excludes it
            return np.sort(self._dist_matrix(), axis=1)[:, k]
        dist, _ = self._tree.query(self.points, k=k + 1, p=self._p)
        return dist[:, k]

    def nearest_other(self) -> np.ndarray:
        """Index of the nearest point other than itself (lowest index on ties)."""
        n = self.points.shape[0]
        d = self._dist_matrix() if self.brute or n <= 2000 else None
        if d is not None:
            np.fill_diagonal(d, np.inf)
            return np.argmin(d, axis=1)
        dist, idx = self._tree.query(self.points, k=min(n, 8), p=self._p)
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            cand = [(dist[i, j], idx[i, j]) for j in range(idx.shape[1]) if idx[i, j] != i]
            best = min(c[0] for c in cand)
            out[i] = min(c[1] for c in cand if c[0] == best)
        return out

    def count_within(self, radius: np.ndarray, strict: bool = False) -> np.ndarray:
        """Number of points (self included) within ``radius[i]`` of point i."""
        r = np.asarray(radius, dtype=float)
        if strict:
            r = np.nextafter(r, -np.inf)
        if self.brute:
            return (self._dist_matrix() <= r[:, None]).sum(axis=1)
        # negative radii (strict with r=0) contain nothing, not even self
        out = np.zeros(r.size, dtype=np.int64)
        ok = r >= 0
        if ok.any():
            out[ok] = self._tree.query_ball_point(self.points[ok], r[ok], p=self._p,
                                                  return_length=True)
        return out


@dataclass(frozen=True)
class EntropyParams:
    k: int = 3
    metric: str = CHEBYSHEV


def _log_unit_ball(d: int, metric: str) -> float:
    if metric == CHEBYSHEV:
        return d * np.log(2.0)
    return 0.5 * d * np.log(np.pi) - gammaln(0.5 * d + 1.0)


def knn_entropy(data: ArrayLike, params: EntropyParams = EntropyParams(),
                brute: bool = False, support: tuple[float, float] | None = None) -> float:
    """Kozachenko-Leonenko differential entropy in nats.

    With ``support=(lo, hi)`` (Chebyshev metric only) the data are known to
    live in the box ``[lo, hi]^d`` and each neighbour ball is clipped to that
    box before taking its volume; in the interior this is the plain
    ``log c_d + d log eps`` term.
    """
    x = as_data(data).values
    n, d = x.shape
    if not n > params.k:
        raise ParamRange(f"need n > k, got n={n}, k={params.k}")
    eps = KnnIndex(x, params.metric, brute=brute).kth_distance(params.k)
    if np.any(eps <= 0):
        raise DegenerateGeometry("duplicate points give a zero neighbour distance")
    base = digamma(n) - digamma(params.k)
    if support is None:
        return float(base + _log_unit_ball(d, params.metric) + d * np.mean(np.log(eps)))
    if params.metric != CHEBYSHEV:
        raise ParamRange("bounded support correction needs the Chebyshev metric")
    lo, hi = support
    side = np.minimum(x + eps[:, None], hi) - np.maximum(x - eps[:, None], lo)
    return float(base + np.mean(np.log(side).sum(axis=1)))


def ksg_total_correlation(u: np.ndarray, blocks: Sequence[Sequence[int]],
                          params: EntropyParams = EntropyParams(), brute: bool = False) -> float:
    """KSG estimate of the total correlation between column blocks of ``u``.

    The k-th neighbour distance is taken in the joint space and reused in
    every block, so the estimation errors of the joint and the block
    entropies largely cancel.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    if not n > params.k:
        raise ParamRange(f"need n > k, got n={n}, k={params.k}")
    cols = [c for b in blocks for c in b]
    eps = KnnIndex(u[:, cols], params.metric, brute=brute).kth_distance(params.k)
    if np.any(eps <= 0):
        raise DegenerateGeometry("duplicate points give a zero neighbour distance")
    acc = np.zeros(n)
    for b in blocks:
        # strict counts include the point itself, i.e. n_b + 1
        acc += digamma(KnnIndex(u[:, list(b)], params.metric, brute=brute)
                       .count_within(eps, strict=True))
    return float(digamma(params.k) + (len(blocks) - 1) * digamma(n) - acc.mean())


def copula_entropy(data: ArrayLike, params: EntropyParams = EntropyParams(),
                   seed: int = 0) -> float:
    """Copula entropy of the columns, non-positive in population.

    Computed on the rank pseudo-observations as minus the KSG total
    correlation: the joint neighbour radius is shared with the one-column
    counts, which removes the upward bias that the evenly spaced marginals
    give a plain entropy estimate.
    """
    data = as_data(data)
    if data.d < 2:
        raise ShapeError("copula entropy needs at least two columns")
    u = make_pseudo_obs(data, RandomJitter(seed)).u
    return -ksg_total_correlation(u, [[c] for c in range(data.d)], params)


def vector_copula_entropy(data: ArrayLike, blocks: Sequence[Sequence[int]],
                          params: EntropyParams = EntropyParams(), seed: int = 0) -> float:
    """Copula entropy between random vectors: minus the total correlation of the blocks."""
    data = as_data(data)
    u = make_pseudo_obs(data, RandomJitter(seed)).u
    return -ksg_total_correlation(u, blocks, params)


def _split_cols(x_cols, y_cols, z_cols, d: int) -> tuple[list[int], list[int], list[int]]:
    x, y, z = list(x_cols), list(y_cols), list(z_cols)
    allc = x + y + z
    if not x or not y or not z:
        raise CapabilityError("x, y and z column sets must all be nonempty")
    if len(set(allc)) != len(allc):
        raise ShapeError("x, y and z column sets must be disjoint")
    if any(not 0 <= c < d for c in allc):
        raise ShapeError("column index out of range")
    return x, y, z


def _prepare_cmi(values: np.ndarray, transform: str, seed: int, jitter: bool) -> np.ndarray:
    if transform == "rank":
        return make_pseudo_obs(values, RandomJitter(seed)).u
    if transform != "standardize":
        raise ParamRange(f"unknown transform {transform!r}")
    sd = values.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    v = (values - values.mean(axis=0)) / sd
    return range_jitter(v, seed) if jitter else v


def cmi_ksg(data: ArrayLike, x_cols, y_cols, z_cols, params: EntropyParams = EntropyParams(),
            seed: int = 0, transform: str = "standardize") -> float:
    """Frenzel-Pompe / KSG estimate of I(X;Y|Z) in nats.

    Neighbour counts are taken strictly inside the joint k-th neighbour
    distance and include the point itself.
    """
    data = as_data(data)
    x, y, z = _split_cols(x_cols, y_cols, z_cols, data.d)
    n = data.n
    if not n > params.k:
        raise ParamRange(f"need n > k, got n={n}, k={params.k}")
    # jitter the full matrix so the noise on a column does not depend on its role
    v = _prepare_cmi(data.values, transform, seed, jitter=True)
    eps = KnnIndex(v[:, x + y + z]).kth_distance(params.k)
    nz = KnnIndex(v[:, z]).count_within(eps, strict=True)
    nxz = KnnIndex(v[:, x + z]).count_within(eps, strict=True)
    nyz = KnnIndex(v[:, y + z]).count_within(eps, strict=True)
    terms = digamma(nz) - (digamma(nxz) + digamma(nyz))
    return float(digamma(params.k) + terms.mean())


def cmi_mixed(data: ArrayLike, x_cols, y_cols, z_cols, params: EntropyParams = EntropyParams(),
              seed: int = 0, transform: str = "standardize") -> float:
    """I(X;Y|Z) for data mixing discrete and continuous coordinates.

    Points whose k-th neighbour sits at distance zero use the tie-count
    correction of Mesner and Shalizi: k becomes the number of exact
    duplicates and every marginal count is the number of exact duplicates
    in that subspace. Other points are scored exactly as in :func:`cmi_ksg`.
    """
    data = as_data(data)
    x, y, z = _split_cols(x_cols, y_cols, z_cols, data.d)
    n = data.n
    if not n > params.k:
        raise ParamRange(f"need n > k, got n={n}, k={params.k}")
    v = _prepare_cmi(data.values, transform, seed, jitter=False)
    joint = KnnIndex(v[:, x + y + z])
    eps = joint.kth_distance(params.k)
    idx_z, idx_xz, idx_yz = KnnIndex(v[:, z]), KnnIndex(v[:, x + z]), KnnIndex(v[:, y + z])
    tied = eps == 0
    terms = np.empty(n)
    cont = ~tied
    if cont.any():
        e = eps.copy()
        nz = idx_z.count_within(e, strict=True)
        nxz = idx_xz.count_within(e, strict=True)
        nyz = idx_yz.count_within(e, strict=True)
        k_term = digamma(params.k)
        terms[cont] = (k_term + digamma(nz) - (digamma(nxz) + digamma(nyz)))[cont]
    if tied.any():
        zero = np.zeros(n)
        # duplicates other than the point itself
        kt = joint.count_within(zero) - 1
        nz = idx_z.count_within(zero) - 1
        nxz = idx_xz.count_within(zero) - 1
        nyz = idx_yz.count_within(zero) - 1
        terms[tied] = (digamma(kt) + digamma(nz) - (digamma(nxz) + digamma(nyz)))[tied]
    return float(terms.mean())


def ce_ci(data: ArrayLike, x_cols, y_cols, z_cols, params: EntropyParams = EntropyParams(),
          seed: int = 0) -> float:
    """``H_c(x,z) + H_c(y,z) - H_c(x,y,z)`` from one shared ranking."""
    data = as_data(data)
    x, y, z = _split_cols(x_cols, y_cols, z_cols, data.d)
    u = make_pseudo_obs(data, RandomJitter(seed)).u

    def hc(cols):
        return -ksg_total_correlation(u, [[c] for c in cols], params)

    return float(hc(x + z) + hc(y + z) - hc(x + y + z))
