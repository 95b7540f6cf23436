"""Dependence and conditional-independence measures with a reproducible benchmark harness."""
from .core import (AverageRank, DataMatrix, GroupSpec, MeasureId, MeasureResult, PseudoObs,
                   RandomJitter, average_ranks, make_pseudo_obs)
from .errors import (CapabilityError, DepmeterError, NumericDegeneracy, ParamRange,
                     SchemaError, ShapeError)
from .registry import (MeasureDescriptor, all_descriptors, ci_dispatch, evaluate,
                       registry_lookup, strength)
from .samplers import ArchCopula, GeneratorSpec, MvNormal, NormalCopula, sample

__version__ = "0.1.0"

__all__ = [
    "ArchCopula", "AverageRank", "CapabilityError", "DataMatrix", "DepmeterError",
    "GeneratorSpec", "GroupSpec", "MeasureDescriptor", "MeasureId", "MeasureResult",
    "MvNormal", "NormalCopula", "NumericDegeneracy", "ParamRange", "PseudoObs",
    "RandomJitter", "SchemaError", "ShapeError", "all_descriptors", "average_ranks",
    "ci_dispatch", "evaluate", "make_pseudo_obs", "registry_lookup", "sample", "strength",
]
