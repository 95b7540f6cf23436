"""Loaders for the UCI heart disease, white wine quality and Beijing PM2.5 files.

Nothing is downloaded; :func:`download_help` prints where the files come from.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import DataMatrix
from .errors import NormalizationDegenerate, SchemaError, WindowMismatch, WindowMismatchWarning

HEART_ATTRIBUTES = (
    "id", "ccf", "age", "sex", "painloc", "painexer", "relrest", "pncaden", "cp", "trestbps",
    "htn", "chol", "smoke", "cigs", "years", "fbs", "dm", "famhist", "restecg", "ekgmo",
    "ekgday", "ekgyr", "dig", "prop", "nitr", "pro", "diuretic", "proto", "thaldur",
    "thaltime", "met", "thalach", "thalrest", "tpeakbps", "tpeakbpd", "dummy", "trestbpd",
    "exang", "xhypo", "oldpeak", "slope", "rldv5", "rldv5e", "ca", "restckm", "exerckm",
    "restef", "restwm", "exeref", "exerwm", "thal", "thalsev", "thalpul", "earlobe", "cmo",
    "cday", "cyr", "num", "lmt", "ladprox", "laddist", "diag", "cxmain", "ramus", "om1", "om2",
    "rcaprox", "rcadist", "lvx1", "lvx2", "lvx3", "lvx4", "lvf", "cathef", "junk", "name",
)
HEART_FILES = ("cleveland.data", "hungarian.data", "switzerland.data", "long-beach-va.data")
HEART_TARGET = "num"
HEART_THRESHOLD = "fbs"
HEART_RECOMMENDED = ("age", "sex", "cp", "trestbps", "chol", "fbs", "restecg", "thalach",
                     "exang", "oldpeak", "slope", "ca", "thal")
# identifiers and the record terminator carry no information about the patient
HEART_EXCLUDED = ("id", "ccf", "name")
HEART_MISSING = -9.0

WINE_COLUMNS = ("fixed acidity", "volatile acidity", "citric acid", "residual sugar",
                "chlorides", "free sulfur dioxide", "total sulfur dioxide", "density", "pH",
                "sulphates", "alcohol", "quality")
WINE_TARGET = "quality"
WINE_ZERO = "fixed acidity"
WINE_ONE = "alcohol"

BEIJING_COLUMNS = ("No", "year", "month", "day", "hour", "pm2.5", "DEWP", "TEMP", "PRES",
                   "cbwd", "Iws", "Is", "Ir")
BEIJING_START = (2010, 4, 2, 0)
BEIJING_ROWS = 1000


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    files: tuple[str, ...]
    delimiter: str
    columns: tuple[str, ...]
    kinds: dict[str, str] = field(default_factory=dict)
    missing: tuple[str, ...] = ()
    source: str = ""


HEART = DatasetDescriptor(
    "heart", HEART_FILES, "whitespace", HEART_ATTRIBUTES,
    {"name": "terminator"}, ("-9",),
    "https://archive.ics.uci.edu/dataset/45/heart+disease (the four *.data raw files)")
WINE = DatasetDescriptor(
    "wine", ("winequality-white.csv",), ";", WINE_COLUMNS, {}, (),
    "https://archive.ics.uci.edu/dataset/186/wine+quality")
BEIJING = DatasetDescriptor(
    "air", ("PRSA_data_2010.1.1-2014.12.31.csv",), ",", BEIJING_COLUMNS,
    {"year": "timestamp-part", "month": "timestamp-part", "day": "timestamp-part",
     "hour": "timestamp-part", "cbwd": "categorical-coded"}, ("NA",),
    "https://archive.ics.uci.edu/dataset/381/beijing+pm2+5+data")


def download_help() -> str:
    lines = ["Datasets are read from local files; fetch them from:"]
    for d in (HEART, WINE, BEIJING):
        lines.append(f"  {d.name}: {', '.join(d.files)}  <- {d.source}")
    return "\n".join(lines)


@dataclass(frozen=True, eq=False)
class Table:
    """A numeric table that may contain missing entries (NaN)."""

    values: np.ndarray
    names: tuple[str, ...]
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        if name not in self.names:
            raise SchemaError(f"unknown column {name!r}")
        return self.values[:, self.names.index(name)]

    def complete(self, columns: Sequence[str]) -> tuple[DataMatrix, int]:
        """Rows without missing values in ``columns``, and how many were dropped."""
        idx = [self.names.index(c) if c in self.names else -1 for c in columns]
        if -1 in idx:
            raise SchemaError(f"unknown columns {[c for c, i in zip(columns, idx) if i < 0]}")
        sub = self.values[:, idx]
        keep = np.all(np.isfinite(sub), axis=1)
        return DataMatrix(sub[keep], tuple(columns)), int((~keep).sum())


def _heart_paths(path) -> list[Path]:
    if isinstance(path, (list, tuple)):
        return [Path(p) for p in path]
    p = Path(path)
    if p.is_dir():
        found = [p / f for f in HEART_FILES if (p / f).exists()]
        if not found:
            raise SchemaError(f"no heart-disease raw files ({', '.join(HEART_FILES)}) in {p}")
        return found
    return [p]


def parse_heart_records(text: str, source: str = "") -> list[list[float]]:
    """Split whitespace tokens into 76-token records, each ending with ``name``."""
    records, current = [], []
    for tok in text.split():
        current.append(tok)
        if tok == "name":
            if len(current) != len(HEART_ATTRIBUTES):
                raise SchemaError(f"{source} record {len(records)}: {len(current)} tokens, "
                                  f"expected {len(HEART_ATTRIBUTES)}")
            try:
                records.append([float(t) for t in current[:-1]] + [np.nan])
            except ValueError as exc:
                raise SchemaError(f"{source} record {len(records)}: {exc}") from exc
            current = []
    if current:
        raise SchemaError(f"{source}: trailing record {len(records)} has {len(current)} tokens "
                          f"and no terminator")
    return records


def load_heart(path) -> Table:
    """The raw 76-attribute heart-disease records; -9 becomes NaN."""
    rows, per_file = [], {}
    for p in _heart_paths(path):
        try:
            text = p.read_text(encoding="latin-1")
        except OSError as exc:
            raise SchemaError(f"cannot read {p}: {exc}") from exc
        recs = parse_heart_records(text, p.name)
        per_file[p.name] = len(recs)
        rows.extend(recs)
    if not rows:
        raise SchemaError("no heart-disease records found")
    values = np.array(rows, dtype=float)
    values[values == HEART_MISSING] = np.nan
    meta = {"target": HEART_TARGET, "threshold_attr": HEART_THRESHOLD,
            "recommended": list(HEART_RECOMMENDED), "excluded": list(HEART_EXCLUDED),
            "records_per_file": per_file, "missing_sentinel": HEART_MISSING}
    return Table(values, HEART_ATTRIBUTES, meta)


def load_wine_white(path) -> Table:
    """Semicolon-delimited white wine file with its header row."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh, delimiter=";")
            header = [h.strip().strip('"') for h in next(reader)]
            if tuple(header) != WINE_COLUMNS:
                raise SchemaError(f"unexpected wine header {header}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(WINE_COLUMNS):
                    raise SchemaError(f"line {lineno}: {len(row)} fields")
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    raise SchemaError(f"line {lineno}: {exc}") from exc
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except StopIteration as exc:
        raise SchemaError("empty wine file") from exc
    meta = {"physicochemical": list(WINE_COLUMNS[:-1]), "sensory": WINE_TARGET}
    return Table(np.array(rows, dtype=float), WINE_COLUMNS, meta)


def normalize_anchor(values: Sequence[float], names: Sequence[str], zero: str = WINE_ZERO,
                     one: str = WINE_ONE) -> np.ndarray:
    """Affine rescale so that ``zero`` maps to 0 and ``one`` maps to 1."""
    v = np.asarray(values, dtype=float)
    names = list(names)
    lo, hi = v[names.index(zero)], v[names.index(one)]
    if hi == lo or not np.isfinite(hi - lo):
        raise NormalizationDegenerate(f"{zero!r} and {one!r} estimates coincide")
    return (v - lo) / (hi - lo)


def load_beijing_window(path, start: tuple[int, int, int, int] = BEIJING_START,
                        rows: int = BEIJING_ROWS) -> Table:
    """``rows`` consecutive hourly records from ``start`` (year, month, day, hour)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            missing = [c for c in BEIJING_COLUMNS[1:] if c not in header]
            if missing:
                raise SchemaError(f"Beijing file lacks columns {missing}")
            body = list(reader)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except StopIteration as exc:
        raise SchemaError("empty Beijing file") from exc
    col = {c: header.index(c) for c in BEIJING_COLUMNS[1:]}
    key = tuple(str(s) for s in start)
    first = next((i for i, r in enumerate(body)
                  if tuple(r[col[c]].strip() for c in ("year", "month", "day", "hour")) == key),
                 None)
    if first is None:
        raise WindowMismatch(f"start {start} not found")
    window = body[first:first + rows]
    if len(window) != rows:
        warnings.warn(f"window holds {len(window)} rows, expected {rows}",
                      WindowMismatchWarning, stacklevel=2)
    winds = sorted({r[col["cbwd"]].strip() for r in body})
    names = tuple(c for c in BEIJING_COLUMNS[1:])
    out = np.empty((len(window), len(names)))
    for i, r in enumerate(window):
        for j, c in enumerate(names):
            raw = r[col[c]].strip()
            if c == "cbwd":
                out[i, j] = winds.index(raw)
            else:
                out[i, j] = np.nan if raw in ("NA", "") else float(raw)
    bad = ~np.isfinite(out[:, [names.index("pm2.5"), names.index("PRES")]]).all(axis=1)
    if bad.any():
        raise WindowMismatch(f"{int(bad.sum())} rows in the window miss pm2.5 or PRES, "
                             f"first at window row {int(np.argmax(bad))}")
    meta = {"start": list(start), "rows": len(window), "cbwd_levels": winds,
            "target": "pm2.5", "factor": "PRES"}
    return Table(out, names, meta)
