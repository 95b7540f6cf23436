"""Command-line entry point: ``depmeter measure|bench|real|datasets``.

Exit codes: 0 success, 1 input/output problems, 2 capability or parameter
errors, 3 numeric degeneracy or a failed sweep.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import datasets as ds
from .bench.analysis import cross_measure_correlation, monotonicity
from .bench.selection import lagged_ci_sweep, variable_selection
from .bench.sweep import (CI_MEASURES, DEFAULT_ROOT_SEED, ExperimentSpec, SweepFailed,
                          describe_spec, measure_list, run_sweep)
from .core import DataMatrix, MeasureId
from .errors import (CapabilityError, ConstantColumn, DepmeterError, NumericDegeneracy,
                     ParamRange, SchemaError, ShapeError, UnknownExperiment)
from .registry import all_descriptors, evaluate, registry_lookup, strength

EXIT_IO = 1
EXIT_PARAM = 2
EXIT_NUMERIC = 3

CONFIG_KEYS = frozenset({
    "experiment", "measures", "seeds", "n", "root_seed", "out", "params", "allow_partial",
    "timing", "path", "recommended", "threshold_attr", "target", "lags", "seed",
})


class ConfigError(ParamRange):
    pass


def load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(cfg) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def _pick(args_value, cfg: dict, key: str, default=None):
    # command-line flags win over the config file
    if args_value is not None:
        return args_value
    return cfg.get(key, default)


def read_csv_matrix(path: str) -> DataMatrix:
    """Numeric CSV; a first row that does not parse as numbers is taken as a header."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path} holds no data")
    names = None
    try:
        [float(v) for v in rows[0]]
    except ValueError:
        names, rows = [h.strip() for h in rows[0]], rows[1:]
    try:
        values = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric entry ({exc})") from exc
    if values.ndim != 2:
        raise SchemaError(f"{path}: rows have differing lengths")
    return DataMatrix(values, names)


def _columns(spec: str | None, data: DataMatrix) -> list[int] | None:
    if spec is None:
        return None
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        out.append(data.column_index(int(tok) if tok.lstrip("-").isdigit() else tok))
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text)


def _echo_config(out: Path, cfg: dict) -> None:
    _write(out / "config.json", json.dumps(cfg, indent=2, sort_keys=True) + "\n")


def cmd_measure(args) -> int:
    data = read_csv_matrix(args.data)
    x, y, z = (_columns(args.x, data), _columns(args.y, data), _columns(args.z, data))
    desc = registry_lookup(args.measure)
    if desc.ci and not z:
        raise CapabilityError(f"{desc.id.value} needs --z")
    if desc.ci and (x is None or y is None):
        raise CapabilityError(f"{desc.id.value} needs --x and --y")
    if (x is None) != (y is None):
        raise CapabilityError("--x and --y must be given together")
    params = json.loads(args.params) if args.params else {}
    res = evaluate(desc.id, data, x=x, y=y, z=z, seed=args.seed, **params)
    print(json.dumps(res.to_json(), sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    cfg = load_config(args.config)
    exp = int(_pick(args.experiment, cfg, "experiment"))
    if (args.kind == "ci") != (exp in (9, 10)):
        raise UnknownExperiment(f"experiment {exp} is not a {args.kind} experiment")
    out = Path(_pick(args.out, cfg, "out", f"bench-{exp}"))
    spec = ExperimentSpec(
        exp, measure_list(_pick(args.measures, cfg, "measures")),
        seeds=int(_pick(args.seeds, cfg, "seeds", 10)), n=int(_pick(args.n, cfg, "n", 800)),
        root_seed=int(_pick(args.root_seed, cfg, "root_seed", DEFAULT_ROOT_SEED)),
        out=str(out), params=cfg.get("params", {}))
    allow_partial = bool(args.allow_partial or cfg.get("allow_partial", False))
    timing = bool(args.timing or cfg.get("timing", False))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SchemaError(f"cannot create {out}: {exc}") from exc
    echo = describe_spec(spec) | {"kind": args.kind, "allow_partial": allow_partial,
                                  "timing": timing}
    _echo_config(out, echo)
    table = run_sweep(spec, allow_partial=allow_partial)
    table.to_csv(out / "sweep.csv", timing=timing)
    _write(out / "monotonicity.csv", monotonicity(table).to_csv())
    complete = [m for m, t in table.means().items() if np.all(np.isfinite(t))]
    if len(complete) >= 2:
        clusters = cross_measure_correlation(table)
        _write(out / "corr_matrix.csv", clusters.corr_csv())
        _write(out / "dendrogram.csv", clusters.dendrogram_csv())
    if table.failures:
        _write(out / "failures.json", json.dumps(
            [f | {"measure": f["measure"].value} for f in table.failures], indent=2) + "\n")
        print(f"{len(table.failures)} cells failed (see failures.json)", file=sys.stderr)
    print(str(out))
    return 0


def _heart_report(path: str, out: Path, cfg: dict, seed: int) -> None:
    table = ds.load_heart(path)
    measures = measure_list(cfg.get("measures")) or tuple(
        d.id for d in all_descriptors("indep"))
    recommended = cfg.get("recommended", list(ds.HEART_RECOMMENDED))
    sel = variable_selection(table.values, table.names, cfg.get("target", ds.HEART_TARGET),
                             cfg.get("threshold_attr", ds.HEART_THRESHOLD), measures,
                             recommended, exclude=ds.HEART_EXCLUDED, seed=seed)
    _write(out / "selection.csv", sel.to_csv())


def wine_matrix(table: ds.Table, measures: Sequence[MeasureId], seed: int = 0
                ) -> tuple[list[str], dict[MeasureId, np.ndarray]]:
    """Dependence of each physicochemical attribute with quality, anchored to 0 and 1."""
    attrs = list(table.names[:-1])
    qi = table.names.index(ds.WINE_TARGET)
    rows = {}
    for m in measures:
        desc = registry_lookup(m)
        vals = []
        for a in attrs:
            pair = DataMatrix(table.values[:, [table.names.index(a), qi]])
            vals.append(evaluate(m, pair, seed=seed).value)
        rows[m] = ds.normalize_anchor(strength(vals, desc.direction, desc.orientation), attrs)
    return attrs, rows


def _wine_report(path: str, out: Path, cfg: dict, seed: int) -> None:
    table = ds.load_wine_white(path)
    measures = measure_list(cfg.get("measures")) or tuple(
        d.id for d in all_descriptors("indep") if d.bivariate)
    attrs, rows = wine_matrix(table, measures, seed)
    buf = io.StringIO()
    buf.write("# depmeter-wine/1\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["measure", *attrs])
    for m, v in rows.items():
        w.writerow([m.value, *(repr(float(t)) for t in v)])
    _write(out / "wine_normalized.csv", buf.getvalue())


def _air_report(path: str, out: Path, cfg: dict, seed: int) -> None:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        table = ds.load_beijing_window(path)
    for wmsg in caught:
        print(f"warning: {wmsg.message}", file=sys.stderr)
    data = DataMatrix(table.values[:, [table.names.index("PRES"), table.names.index("pm2.5")]],
                      ("PRES", "pm2.5"))
    lags = cfg.get("lags", list(range(1, 25)))
    measures = measure_list(cfg.get("measures")) or CI_MEASURES
    sweep = lagged_ci_sweep(data, 0, 1, lags=lags, measures=measures, seed=seed)
    sweep.to_csv(out / "lag_trajectories.csv")
    if sweep.failures:
        _write(out / "failures.json", json.dumps(
            [f | {"measure": f["measure"].value} for f in sweep.failures], indent=2) + "\n")


_REAL = {"heart": _heart_report, "wine": _wine_report, "air": _air_report}


def cmd_real(args) -> int:
    cfg = load_config(args.config)
    path = _pick(args.path, cfg, "path")
    if path is None:
        raise SchemaError(f"--path is required\n{ds.download_help()}")
    out = Path(_pick(args.out, cfg, "out", f"real-{args.dataset}"))
    seed = int(_pick(args.seed, cfg, "seed", 0))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SchemaError(f"cannot create {out}: {exc}") from exc
    _echo_config(out, dict(cfg) | {"dataset": args.dataset, "path": str(path), "seed": seed})
    _REAL[args.dataset](path, out, cfg, seed)
    print(str(out))
    return 0


def cmd_datasets(args) -> int:
    print(ds.download_help())
    return 0


def cmd_list(args) -> int:
    for d in all_descriptors():
        caps = ",".join(k for k, v in d.capabilities().items() if v)
        print(f"{d.id.value}\t{d.kind}\t{d.direction}\t{caps}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="depmeter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="evaluate one measure on a CSV file")
    m.add_argument("--data", required=True)
    m.add_argument("--measure", required=True)
    m.add_argument("--x", help="comma-separated column indices or names")
    m.add_argument("--y")
    m.add_argument("--z")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--params", help="JSON object of measure parameters")
    m.set_defaults(func=cmd_measure)

    b = sub.add_parser("bench", help="run a simulation sweep")
    b.add_argument("kind", choices=("indep", "ci"))
    b.add_argument("--experiment", type=int)
    b.add_argument("--seeds", type=int)
    b.add_argument("--n", type=int)
    b.add_argument("--root-seed", type=int)
    b.add_argument("--measures", nargs="+")
    b.add_argument("--out")
    b.add_argument("--config")
    b.add_argument("--allow-partial", action="store_true")
    b.add_argument("--timing", action="store_true", help="record elapsed_ms in sweep.csv")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("real", help="run a real-data pipeline")
    r.add_argument("dataset", choices=tuple(_REAL))
    r.add_argument("--path")
    r.add_argument("--out")
    r.add_argument("--seed", type=int)
    r.add_argument("--config")
    r.set_defaults(func=cmd_real)

    sub.add_parser("datasets", help="print where to get the data files").set_defaults(
        func=cmd_datasets)
    sub.add_parser("list", help="list measures and capabilities").set_defaults(func=cmd_list)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericDegeneracy, ConstantColumn, SweepFailed) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CapabilityError, ParamRange, UnknownExperiment, ShapeError, KeyError, ValueError,
            DepmeterError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
