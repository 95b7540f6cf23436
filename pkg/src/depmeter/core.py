"""Domain types and shared numeric helpers."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConstantColumn, ShapeError


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """An ``n x d`` sample, rows are observations and columns are variables.

    The array is copied and locked read-only, so instances can be shared.
    """

    values: np.ndarray
    column_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ShapeError(f"expected a 2-d array, got {arr.ndim} dimensions")
        n, d = arr.shape
        if n < 2 or d < 1:
            raise ShapeError(f"need n >= 2 rows and d >= 1 columns, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("data contains NaN or infinite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.column_names is not None:
            names = tuple(str(c) for c in self.column_names)
            if len(names) != d:
                raise ShapeError(f"{len(names)} column names for {d} columns")
            object.__setattr__(self, "column_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def columns(self, cols: Sequence[int]) -> np.ndarray:
        return self.values[:, list(cols)]

    def select(self, cols: Sequence[int]) -> "DataMatrix":
        names = None
        if self.column_names is not None:
            names = tuple(self.column_names[c] for c in cols)
        return DataMatrix(self.values[:, list(cols)], names)

    def column_index(self, key: int | str) -> int:
        if isinstance(key, (int, np.integer)):
            if not 0 <= key < self.d:
                raise ShapeError(f"column {key} out of range for d={self.d}")
            return int(key)
        if self.column_names is None or key not in self.column_names:
            raise ShapeError(f"unknown column {key!r}")
        return self.column_names.index(key)


ArrayLike = Union[DataMatrix, np.ndarray, Sequence[Sequence[float]]]


def as_data(data: ArrayLike) -> DataMatrix:
    if isinstance(data, DataMatrix):
        return data
    return DataMatrix(np.asarray(data, dtype=float))


@dataclass(frozen=True)
class AverageRank:
    """Ties share the mean of the ranks they span."""

    def describe(self) -> dict[str, Any]:
        return {"tie_policy": "average_rank"}


@dataclass(frozen=True)
class RandomJitter:
    """Ties are broken uniformly at random (seeded); distinct values keep their order."""

    seed: int = 0

    def describe(self) -> dict[str, Any]:
        return {"tie_policy": "random_jitter", "jitter_seed": self.seed}


TiePolicy = Union[AverageRank, RandomJitter]


@dataclass(frozen=True, eq=False)
class PseudoObs:
    u: np.ndarray
    tie_policy: TiePolicy

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def d(self) -> int:
        return self.u.shape[1]


def average_ranks(col: np.ndarray) -> np.ndarray:
    """1-based ranks, ties receive their average rank."""
    order = np.argsort(col, kind="mergesort")
    sorted_col = col[order]
    # boundaries of runs of equal values
    starts = np.flatnonzero(np.r_[True, sorted_col[1:] != sorted_col[:-1]])
    ends = np.r_[starts[1:], col.size]
    avg = (starts + ends + 1) / 2.0
    run_id = np.repeat(np.arange(starts.size), ends - starts)
    ranks = np.empty(col.size, dtype=float)
    ranks[order] = avg[run_id]
    return ranks


def max_ranks(col: np.ndarray) -> np.ndarray:
    """r_i = #{j : col_j <= col_i} (integer, 1-based)."""
    s = np.sort(col)
    return np.searchsorted(s, col, side="right").astype(np.int64)


def canonical_order(x: np.ndarray) -> np.ndarray:
    """Row order sorted lexicographically on all columns.

    Random tie-breaking keys are dealt out in this order, so shuffling the
    rows of the input does not change which observation gets which key.
    """
    x = np.asarray(x)
    if x.ndim == 1:
        return np.argsort(x, kind="mergesort")
    return np.lexsort(x.T[::-1])


def jitter_ranks(col: np.ndarray, rng: np.random.Generator,
                 order: np.ndarray | None = None) -> np.ndarray:
    """Ordinal ranks with ties broken by an independent uniform key."""
    key = np.empty(col.size)
    key[canonical_order(col) if order is None else order] = rng.random(col.size)
    order = np.lexsort((key, col))
    ranks = np.empty(col.size, dtype=float)
    ranks[order] = np.arange(1, col.size + 1)
    return ranks


def make_pseudo_obs(data: ArrayLike, policy: TiePolicy | None = None) -> PseudoObs:
    """Rank-transform each column to ``(r - 0.5) / n``."""
    data = as_data(data)
    policy = AverageRank() if policy is None else policy
    x = data.values
    n, d = x.shape
    u = np.empty((n, d), dtype=float)
    if isinstance(policy, RandomJitter):
        rng = np.random.default_rng(policy.seed)
        rows = canonical_order(x)
        for c in range(d):
            u[:, c] = jitter_ranks(x[:, c], rng, rows)
    else:
        for c in range(d):
            if np.all(x[:, c] == x[0, c]):
                raise ConstantColumn(f"column {c} is constant; ranks are undefined")
            u[:, c] = average_ranks(x[:, c])
    u = (u - 0.5) / n
    u.setflags(write=False)
    return PseudoObs(u, policy)


def range_jitter(x: np.ndarray, seed: int, scale: float = 1e-10) -> np.ndarray:
    """Add uniform noise of amplitude ``scale * range`` per column."""
    rng = np.random.default_rng(seed)
    span = np.ptp(x, axis=0)
    span = np.where(span > 0, span, 1.0)
    noise = np.empty(x.shape)
    noise[canonical_order(x)] = rng.random(x.shape)
    return x + scale * span * noise


@dataclass(frozen=True)
class GroupSpec:
    """Partition of (a subset of) the columns into random-vector blocks."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(tuple(int(c) for c in b) for b in self.blocks)
        if not blocks:
            raise ShapeError("GroupSpec needs at least one block")
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ShapeError("empty block in GroupSpec")
            if seen.intersection(b) or len(set(b)) != len(b):
                raise ShapeError("GroupSpec blocks must be disjoint")
            seen.update(b)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def singletons(cls, d: int) -> "GroupSpec":
        return cls(tuple((c,) for c in range(d)))

    @classmethod
    def of(cls, *blocks: Iterable[int]) -> "GroupSpec":
        return cls(tuple(tuple(b) for b in blocks))

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(c for b in self.blocks for c in b)

    def validate(self, d: int) -> None:
        bad = [c for c in self.columns if not 0 <= c < d]
        if bad:
            raise ShapeError(f"GroupSpec references columns {bad} outside 0..{d - 1}")

    def split(self, data: DataMatrix) -> list[np.ndarray]:
        self.validate(data.d)
        return [data.values[:, list(b)] for b in self.blocks]


class MeasureId(enum.Enum):
    CE = "CE"
    KTAU = "Ktau"
    HOEFF = "Hoeff"
    BDTAU = "BDtau"
    HHG_CHISQ = "HHG.chisq"
    HHG_LR = "HHG.lr"
    BALL = "Ball"
    BET = "BET"
    QAD = "QAD"
    MIXED = "mixed"
    SUBCOP = "subcop"
    CODEC = "CODEC"
    DCOR = "dCor"
    JDCOV = "JdCov"
    MDM = "MDM"
    DHSIC = "dHSIC"
    CE_CI = "CE_CI"
    PCOR = "PCor"
    GCM = "GCM"
    WGCM = "wGCM"
    CMI_KSG = "CMI_KSG"
    CMI_MIXED = "CMI_Mixed"
    CODEC_CI = "CODEC_CI"
    CDC = "CDC"
    FCIT = "FCIT"

    @classmethod
    def parse(cls, name: "str | MeasureId") -> "MeasureId":
        if isinstance(name, MeasureId):
            return name
        key = str(name).strip().lower().replace("-", "_").replace(".", "_")
        for m in cls:
            if key in (m.name.lower(), m.value.lower().replace(".", "_")):
                return m
        from .errors import CapabilityError

        raise CapabilityError(f"unknown measure {name!r}")

    @property
    def order(self) -> int:
        return list(MeasureId).index(self)


@dataclass(frozen=True)
class MeasureResult:
    id: MeasureId
    value: float
    params: dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0

    def __post_init__(self) -> None:
        if not np.isfinite(self.value):
            from .errors import NumericDegeneracy

            raise NumericDegeneracy(f"{self.id.value} produced a non-finite value")

    def to_json(self) -> dict[str, Any]:
        return {
            "measure": self.id.value,
            "value": float(self.value),
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "elapsed_ms": round(self.elapsed * 1000.0, 3),
        }


def _jsonable(v: Any) -> Any:
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (tuple, list)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    """Absolute differences for a single column, Euclidean otherwise."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] == 1:
        return np.abs(x - x.T)
    return cdist(x, x)


def double_center(a: np.ndarray) -> np.ndarray:
    row = a.mean(axis=0)
    return a - row[None, :] - row[:, None] + row.mean()


def u_center(a: np.ndarray) -> np.ndarray:
    """U-centering of a distance matrix (zero diagonal)."""
    n = a.shape[0]
    row = a.sum(axis=0)
    total = row.sum()
    out = a - row[None, :] / (n - 2) - row[:, None] / (n - 2) + total / ((n - 1) * (n - 2))
    np.fill_diagonal(out, 0.0)
    return out
