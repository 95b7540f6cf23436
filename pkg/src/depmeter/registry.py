"""Measure descriptors, capability checks and uniform dispatch."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import ci_measures as cim
from . import indep_measures as im
from .core import ArrayLike, GroupSpec, MeasureId, MeasureResult, as_data
from .entropy_knn import EntropyParams
from .errors import CapabilityError

STATISTIC = "statistic"
INVERSE = "inverse"  # smaller values mean stronger dependence (p-values)
ABS = "abs"
NEGATE = "negate"  # population value is <= 0 and decreases with dependence
IDENTITY = "identity"  # already oriented


@dataclass(frozen=True)
class MeasureDescriptor:
    id: MeasureId
    kind: str  # "indep" or "ci"
    bivariate: bool
    multivariate: bool
    vector: bool
    direction: str = STATISTIC
    symmetric: bool = False
    rank_based: bool = False
    orientation: str = ABS
    defaults: dict[str, Any] = field(default_factory=dict)
    note: str = ""

    @property
    def ci(self) -> bool:
        return self.kind == "ci"

    def capabilities(self) -> dict[str, bool]:
        return {"bivariate": self.bivariate, "multivariate": self.multivariate,
                "vector_vs_vector": self.vector, "ci": self.ci}


def _indep(mid, biv, multi, vec, **kw) -> MeasureDescriptor:
    return MeasureDescriptor(mid, "indep", biv, multi, vec, **kw)


def _ci(mid, **kw) -> MeasureDescriptor:
    return MeasureDescriptor(mid, "ci", False, False, False, **kw)


M = MeasureId
_DESCRIPTORS = {d.id: d for d in [
    _indep(M.CE, True, True, True, symmetric=True, rank_based=True, orientation=NEGATE,
           defaults={"k": 3}),
    _indep(M.KTAU, True, False, False, symmetric=True, rank_based=True),
    _indep(M.HOEFF, True, False, False, symmetric=True, rank_based=True),
    _indep(M.BDTAU, True, False, False, symmetric=True, rank_based=True,
           defaults={"m": 1_000_000}),
    _indep(M.HHG_CHISQ, True, False, True, symmetric=True, defaults={"score": "chisq"}),
    _indep(M.HHG_LR, True, False, True, symmetric=True, defaults={"score": "lr"}),
    _indep(M.BALL, True, True, True, symmetric=True),
    _indep(M.BET, True, True, True, symmetric=True, rank_based=True, defaults={"depth": 3}),
    _indep(M.QAD, True, False, True, rank_based=True, defaults={"resolution": None},
           note="with more than two columns only the first two are used"),
    _indep(M.MIXED, True, True, False, symmetric=True, rank_based=True),
    _indep(M.SUBCOP, True, True, False, symmetric=True, rank_based=True,
           note="multivariate means exactly three columns"),
    _indep(M.CODEC, True, False, False, rank_based=True),
    _indep(M.DCOR, True, False, True, symmetric=True),
    _indep(M.JDCOV, False, True, False, defaults={"c": 1.0, "variant": "joint"}),
    _indep(M.MDM, True, False, True),
    _indep(M.DHSIC, True, True, True, symmetric=True),
    _ci(M.CE_CI, rank_based=True, defaults={"k": 3}),
    _ci(M.PCOR),
    _ci(M.GCM, defaults={"regressor": "knn"}),
    _ci(M.WGCM, defaults={"regressor": "knn", "weights": 7}),
    _ci(M.CMI_KSG, defaults={"k": 3}),
    _ci(M.CMI_MIXED, defaults={"k": 3}),
    _ci(M.CODEC_CI, rank_based=True),
    _ci(M.CDC, defaults={"bandwidth": None}),
    _ci(M.FCIT, direction=INVERSE, defaults={"folds": 8}),
]}


def strength(values, direction: str = STATISTIC, orientation: str = ABS):
    """Map estimates onto a scale where larger always means more dependent.

    Statistics use |value|; copula entropy, which is non-positive in
    population, is negated instead so that small positive estimates under
    independence stay at the bottom of the scale. p-value measures are
    negated after taking the absolute value.
    """
    v = np.asarray(values, dtype=float)
    if orientation == NEGATE:
        v = -v
    elif orientation == ABS:
        v = np.abs(v)
    return -v if direction == INVERSE else v


def registry_lookup(mid: MeasureId | str) -> MeasureDescriptor:
    return _DESCRIPTORS[MeasureId.parse(mid)]


def all_descriptors(kind: str | None = None) -> list[MeasureDescriptor]:
    return [d for d in _DESCRIPTORS.values() if kind is None or d.kind == kind]


def _arity(data_d: int, groups: GroupSpec | None) -> tuple[str, GroupSpec]:
    g = GroupSpec.singletons(data_d) if groups is None else groups
    g.validate(data_d)
    if g.k < 2:
        raise CapabilityError("an independence measure needs at least two blocks")
    if any(len(b) > 1 for b in g.blocks):
        if g.k != 2:
            raise CapabilityError("vector inputs are supported for exactly two blocks")
        return "vector", g
    return ("bivariate" if g.k == 2 else "multivariate"), g


def check_capability(desc: MeasureDescriptor, data_d: int, groups: GroupSpec | None = None,
                     z: Sequence[int] | None = None) -> str:
    if desc.ci:
        if not z:
            raise CapabilityError(f"{desc.id.value} needs a conditioning set z")
        return "ci"
    arity, _ = _arity(data_d, groups)
    if not getattr(desc, arity):
        raise CapabilityError(f"{desc.id.value} does not support {arity} input")
    return arity


def evaluate(mid: MeasureId | str, data: ArrayLike, groups: GroupSpec | None = None,
             x: Sequence[int] | int | None = None, y: Sequence[int] | int | None = None,
             z: Sequence[int] | None = None, seed: int = 0, **params) -> MeasureResult:
    """Evaluate one measure after enforcing its capability flags."""
    desc = registry_lookup(mid)
    data = as_data(data)
    if desc.ci:
        if x is None or y is None:
            raise CapabilityError(f"{desc.id.value} needs x and y columns")
        check_capability(desc, data.d, z=z)
        return _CI_CALLS[desc.id](data, x, y, list(z), seed, params)
    if x is not None or y is not None:
        xs = [int(c) for c in ([x] if isinstance(x, int) else x)]
        ys = [int(c) for c in ([y] if isinstance(y, int) else y)]
        groups = GroupSpec.of(xs, ys)
    check_capability(desc, data.d, groups)
    if groups is not None:
        cols = list(groups.columns)
        data = data.select(cols)
        remap = {c: i for i, c in enumerate(cols)}
        groups = GroupSpec(tuple(tuple(remap[c] for c in b) for b in groups.blocks))
        if all(len(b) == 1 for b in groups.blocks):
            groups = None
    return _INDEP_CALLS[desc.id](data, groups, seed, params)


def _entropy_params(params: dict) -> EntropyParams:
    return EntropyParams(k=int(params.get("k", 3)), metric=params.get("metric", "chebyshev"))


def _regressor(params: dict):
    reg = params.get("regressor", "knn")
    if reg == "linear":
        return cim.Linear()
    if reg == "knn":
        return cim.KnnRegression(params.get("knn_k"))
    raise CapabilityError(f"unknown regressor {reg!r}")


_INDEP_CALLS: dict[MeasureId, Callable] = {
    M.CE: lambda d, g, s, p: im.ce(d, g, _entropy_params(p), seed=s),
    M.KTAU: lambda d, g, s, p: im.kendall_tau(d),
    M.HOEFF: lambda d, g, s, p: im.hoeffding_d(d),
    M.BDTAU: lambda d, g, s, p: im.bergsma_dassios(d, m=int(p.get("m", 1_000_000)), seed=s),
    M.HHG_CHISQ: lambda d, g, s, p: im.hhg(d, im.HHGParams("chisq"), groups=g),
    M.HHG_LR: lambda d, g, s, p: im.hhg(d, im.HHGParams("lr"), groups=g),
    M.BALL: lambda d, g, s, p: im.ball_cov(d, g),
    M.BET: lambda d, g, s, p: im.bet(d, im.BetParams(int(p.get("depth", 3))), groups=g),
    M.QAD: lambda d, g, s, p: im.qad_zeta(d, im.CheckerboardParams(p.get("resolution"))),
    M.MIXED: lambda d, g, s, p: im.cvm_product_copula(d),
    M.SUBCOP: lambda d, g, s, p: im.subcop_measure(d),
    M.CODEC: lambda d, g, s, p: im.codec_xi(d, seed=s),
    M.DCOR: lambda d, g, s, p: im.dcor(d, g),
    M.JDCOV: lambda d, g, s, p: im.jdcov(d, g, c=float(p.get("c", 1.0)),
                                         variant=p.get("variant", "joint")),
    M.MDM: lambda d, g, s, p: im.mdd_mdm(d, groups=g),
    M.DHSIC: lambda d, g, s, p: im.dhsic(d, g),
}

_CI_CALLS: dict[MeasureId, Callable] = {
    M.CE_CI: lambda d, x, y, z, s, p: cim.ce_ci_measure(d, x, y, z, _entropy_params(p), seed=s),
    M.PCOR: lambda d, x, y, z, s, p: cim.pcor(d, x, y, z),
    M.GCM: lambda d, x, y, z, s, p: cim.gcm(d, x, y, z, _regressor(p)),
    M.WGCM: lambda d, x, y, z, s, p: cim.wgcm(d, x, y, z, _regressor(p),
                                              cim.WeightFamily(int(p.get("weights", 7)))),
    M.CMI_KSG: lambda d, x, y, z, s, p: cim.cmi_ksg_measure(d, x, y, z, _entropy_params(p),
                                                            seed=s),
    M.CMI_MIXED: lambda d, x, y, z, s, p: cim.cmi_mixed_measure(d, x, y, z,
                                                                _entropy_params(p), seed=s),
    M.CODEC_CI: lambda d, x, y, z, s, p: cim.codec_ci(d, x, y, z, seed=s),
    M.CDC: lambda d, x, y, z, s, p: cim.cdc(d, x, y, z, p.get("bandwidth")),
    M.FCIT: lambda d, x, y, z, s, p: cim.fcit_simplified(d, x, y, z,
                                                         folds=int(p.get("folds", 8)), seed=s),
}


def ci_dispatch(mid: MeasureId | str, data: ArrayLike, x, y, z, seed: int = 0,
                **params) -> MeasureResult:
    desc = registry_lookup(mid)
    if not desc.ci:
        raise CapabilityError(f"{desc.id.value} is not a conditional-independence measure")
    return evaluate(desc.id, data, x=x, y=y, z=z, seed=seed, **params)
