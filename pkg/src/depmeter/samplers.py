"""Seeded generators for the simulated designs.

Archimedean families are drawn with the Marshall-Olkin frailty construction:
``U_i = phi(E_i / V)`` with ``E_i`` iid Exp(1) and ``V`` the frailty whose
Laplace transform is the generator ``phi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .core import DataMatrix, GroupSpec
from .errors import NotPositiveDefinite, ParamRange, ShapeError, UnknownExperiment


@dataclass(frozen=True)
class Uniform01:
    def ppf(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u, dtype=float)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, 0.0, 1.0)


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self) -> None:
        if not self.sd > 0:
            raise ParamRange(f"Normal sd must be > 0, got {self.sd}")

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return stats.norm.ppf(u, loc=self.mean, scale=self.sd)

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return stats.norm.cdf(x, loc=self.mean, scale=self.sd)


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def __post_init__(self) -> None:
        if not self.rate > 0:
            raise ParamRange(f"Exponential rate must be > 0, got {self.rate}")

    def ppf(self, u: np.ndarray) -> np.ndarray:
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def cdf(self, x: np.ndarray) -> np.ndarray:
        return -np.expm1(-self.rate * np.clip(x, 0.0, None))


MarginalSpec = Union[Uniform01, Normal, Exponential]

# the non-uniform marginals used throughout the copula designs
DESIGN_MARGINALS_2 = (Normal(0.0, 2.0), Exponential(2.0))
DESIGN_MARGINALS_3 = (Normal(0.0, 2.0), Exponential(0.5), Exponential(2.0))


@dataclass(frozen=True, eq=False)
class MvNormal:
    cov: np.ndarray


@dataclass(frozen=True, eq=False)
class NormalCopula:
    cov: np.ndarray
    marginals: tuple = ()


@dataclass(frozen=True)
class ArchCopula:
    family: str  # "clayton" | "gumbel" | "frank"
    alpha: float
    dim: int = 2
    marginals: tuple = ()


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    model: Union[MvNormal, NormalCopula, ArchCopula]
    n: int
    seed: int = 0
    param: float = float("nan")  # the swept grid parameter, for reporting
    groups: GroupSpec | None = None
    label: str = ""

    @property
    def dim(self) -> int:
        m = self.model
        if isinstance(m, ArchCopula):
            return m.dim
        return np.asarray(m.cov).shape[0]

    def with_seed(self, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(self.model, self.n, seed, self.param, self.groups, self.label)

    def with_n(self, n: int) -> "GeneratorSpec":
        return GeneratorSpec(self.model, n, self.seed, self.param, self.groups, self.label)


def _check_cov(cov: np.ndarray) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ShapeError("covariance must be square")
    if not np.allclose(cov, cov.T):
        raise NotPositiveDefinite("covariance is not symmetric")
    if not np.allclose(np.diag(cov), 1.0):
        raise ParamRange("covariance must have unit diagonal")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("covariance is not positive definite") from exc
    return cov


def _mvnormal(cov: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    return rng.standard_normal((n, cov.shape[0])) @ chol.T


def positive_stable(a: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Positive stable variates with Laplace transform ``exp(-t**a)``, 0 < a <= 1.

    Chambers-Mallows-Stuck in Kanter's form; exact and rejection-free.
    """
    if a == 1.0:
        return np.ones(size)
    theta = rng.uniform(0.0, np.pi, size)
    w = rng.standard_exponential(size)
    return (np.sin(a * theta) / np.sin(theta) ** (1.0 / a)) * (
        np.sin((1.0 - a) * theta) / w
    ) ** ((1.0 - a) / a)


def _frank_conditional(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # conditional inversion; used for negative alpha where no frailty exists
    u = rng.random(n)
    p = rng.random(n)
    num = p * np.expm1(-alpha)
    den = np.exp(-alpha * u) * (1.0 - p) + p
    v = -np.log1p(num / den) / alpha
    return np.column_stack([u, v])


def archimedean_uniforms(family: str, alpha: float, dim: int, n: int,
                         rng: np.random.Generator) -> np.ndarray:
    family = family.lower()
    if dim not in (2, 3):
        raise ParamRange(f"Archimedean copulas are supported for dim 2 or 3, got {dim}")
    if family == "clayton":
        if not alpha > 0:
            raise ParamRange(f"Clayton alpha must be > 0, got {alpha}")
        v = rng.gamma(1.0 / alpha, 1.0, n)
        e = rng.standard_exponential((n, dim))
        return (1.0 + e / v[:, None]) ** (-1.0 / alpha)
    if family == "gumbel":
        if not alpha >= 1:
            raise ParamRange(f"Gumbel alpha must be >= 1, got {alpha}")
        v = positive_stable(1.0 / alpha, n, rng)
        e = rng.standard_exponential((n, dim))
        return np.exp(-((e / v[:, None]) ** (1.0 / alpha)))
    if family == "frank":
        if alpha == 0:
            raise ParamRange("Frank alpha must be nonzero")
        if alpha < 0:
            if dim != 2:
                raise ParamRange("negative Frank alpha is only defined for dim 2")
            return _frank_conditional(alpha, n, rng)
        v = stats.logser.rvs(-np.expm1(-alpha), size=n, random_state=rng).astype(float)
        e = rng.standard_exponential((n, dim))
        return -np.log1p(np.exp(-e / v[:, None]) * np.expm1(-alpha)) / alpha
    raise ParamRange(f"unknown Archimedean family {family!r}")


def apply_marginals(u: np.ndarray, marginals: Sequence[MarginalSpec]) -> DataMatrix:
    """Push uniform columns through the inverse CDFs of ``marginals``."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if len(marginals) != u.shape[1]:
        raise ShapeError(f"{len(marginals)} marginals for {u.shape[1]} columns")
    out = np.column_stack([m.ppf(u[:, c]) for c, m in enumerate(marginals)])
    return DataMatrix(out)


def sample(spec: GeneratorSpec) -> DataMatrix:
    if spec.n < 2:
        raise ParamRange("n must be >= 2")
    rng = np.random.default_rng(spec.seed)
    m = spec.model
    if isinstance(m, MvNormal):
        return DataMatrix(_mvnormal(_check_cov(m.cov), spec.n, rng))
    if isinstance(m, NormalCopula):
        cov = _check_cov(m.cov)
        u = stats.norm.cdf(_mvnormal(cov, spec.n, rng))
        margs = m.marginals or tuple(Uniform01() for _ in range(cov.shape[0]))
        return apply_marginals(u, margs)
    if isinstance(m, ArchCopula):
        u = archimedean_uniforms(m.family, m.alpha, m.dim, spec.n, rng)
        margs = m.marginals or tuple(Uniform01() for _ in range(m.dim))
        return apply_marginals(u, margs)
    raise TypeError(f"unsupported model {type(m).__name__}")


def kendall_tau_closed_form(family: str, alpha: float) -> float:
    """Population Kendall's tau of a bivariate Archimedean copula."""
    family = family.lower()
    if family == "clayton":
        return alpha / (alpha + 2.0)
    if family == "gumbel":
        return 1.0 - 1.0 / alpha
    if family == "frank":
        from scipy.integrate import quad

        d1 = quad(lambda t: t / np.expm1(t), 0.0, alpha)[0] / alpha
        return 1.0 - 4.0 / alpha * (1.0 - d1)
    raise ParamRange(f"unknown family {family!r}")


def _equicorr(d: int, rho: float) -> np.ndarray:
    c = np.full((d, d), rho)
    np.fill_diagonal(c, 1.0)
    return c


def ci_cov(rho_xz: float, rho_xy: float = 0.7, rho_yz: float = 0.6) -> np.ndarray:
    return np.array([[1.0, rho_xy, rho_xz],
                     [rho_xy, 1.0, rho_yz],
                     [rho_xz, rho_yz, 1.0]])


def quad_cov(rho: float, rho12: float = 0.8, rho34: float = 0.75) -> np.ndarray:
    return np.array([[1.0, rho12, rho, rho],
                     [rho12, 1.0, rho, rho],
                     [rho, rho, 1.0, rho34],
                     [rho, rho, rho34, 1.0]])


EXPERIMENTS = {
    1: "bivariate normal",
    2: "bivariate normal copula",
    3: "bivariate Clayton copula",
    4: "bivariate Gumbel copula",
    5: "bivariate Frank copula",
    6: "trivariate normal",
    7: "trivariate Gumbel copula",
    8: "quadvariate normal, two bivariate vectors",
    9: "trivariate normal (CI)",
    10: "trivariate normal copula (CI)",
}


def experiment_grid(experiment_id: int, n: int = 800, seed: int = 0) -> list[GeneratorSpec]:
    """The parameter sweep of one of the ten simulated designs."""
    if experiment_id not in EXPERIMENTS:
        raise UnknownExperiment(f"experiment {experiment_id} is not defined (1-10)")
    rhos = [round(0.1 * i, 1) for i in range(10)]
    alphas = [float(a) for a in range(1, 11)]
    label = EXPERIMENTS[experiment_id]
    specs: list[GeneratorSpec] = []

    def add(model, param, groups=None):
        specs.append(GeneratorSpec(model, n, seed, param, groups, label))

    if experiment_id == 1:
        for r in rhos:
            add(MvNormal(_equicorr(2, r)), r)
    elif experiment_id == 2:
        for r in rhos:
            add(NormalCopula(_equicorr(2, r), DESIGN_MARGINALS_2), r)
    elif experiment_id in (3, 4, 5):
        family = {3: "clayton", 4: "gumbel", 5: "frank"}[experiment_id]
        for a in alphas:
            add(ArchCopula(family, a, 2, DESIGN_MARGINALS_2), a)
    elif experiment_id == 6:
        for r in rhos:
            add(MvNormal(_equicorr(3, r)), r)
    elif experiment_id == 7:
        for a in alphas:
            add(ArchCopula("gumbel", a, 3, DESIGN_MARGINALS_3), a)
    elif experiment_id == 8:
        for r in rhos[:9]:
            add(MvNormal(quad_cov(r)), r, GroupSpec.of((0, 1), (2, 3)))
    elif experiment_id == 9:
        for r in rhos:
            add(MvNormal(ci_cov(r)), r)
    elif experiment_id == 10:
        for r in rhos:
            add(NormalCopula(ci_cov(r), DESIGN_MARGINALS_3), r)
    return specs


def cell_seed(root_seed: int, experiment_id: int, cell: int, replicate: int) -> int:
    """Per-cell seed, independent of evaluation order."""
    ss = np.random.SeedSequence([int(root_seed), int(experiment_id), int(cell), int(replicate)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
