"""CSV datasets, covariate transforms and JSON result files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import ModelSpec, ParamVector, SeriesData

MISSING = {"", "na", "nan", "null", "none"}


class DataValidationError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset(SeriesData):
    """A ``SeriesData`` that remembers covariate names and an optional date column."""

    covariate_names: tuple = ()
    dates: tuple | None = None

    def __post_init__(self):
        super().__post_init__()
        names = tuple(self.covariate_names) or tuple(f"x{i + 1}" for i in range(self.r))
        if len(names) != self.r:
            raise ValueError("one name per covariate column is required")
        object.__setattr__(self, "covariate_names", names)

    def rows(self, sl: slice) -> "Dataset":
        return Dataset(y=self.y[sl], X=self.X[sl], covariate_names=self.covariate_names,
                       dates=None if self.dates is None else self.dates[sl])

    def columns(self, idx) -> "Dataset":
        idx = list(idx)
        return Dataset(y=self.y, X=self.X[:, idx],
                       covariate_names=tuple(self.covariate_names[i] for i in idx),
                       dates=self.dates)


def _data_lines(fh):
    for lineno, line in enumerate(fh, start=1):
        if line.startswith("#"):
            continue
        yield lineno, line


def load_csv(path, y_col: str = "y", date_col: str = "date", rescale_percent: bool = False,
             covariates=None) -> Dataset:
    """Read a CSV with a header row; ``#`` lines are skipped.

    Every non-response, non-date column is a covariate unless ``covariates``
    names a subset. Missing or non-numeric cells and responses outside (0, 1)
    raise ``DataValidationError`` citing the file line.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataValidationError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        numbered = list(_data_lines(fh))
    reader = csv.reader([line for _, line in numbered])
    rows = list(reader)
    if not rows:
        raise DataValidationError(f"{path}: no header row")
    header = [h.strip() for h in rows[0]]
    if y_col not in header:
        raise DataValidationError(f"{path}: no response column {y_col!r} in header {header}")
    yi = header.index(y_col)
    di = header.index(date_col) if date_col in header else None
    if covariates is None:
        xcols = [i for i, h in enumerate(header) if i not in (yi, di)]
    else:
        missing = [c for c in covariates if c not in header]
        if missing:
            raise DataValidationError(f"{path}: covariates {missing} not in header")
        xcols = [header.index(c) for c in covariates]
    y, X, dates = [], [], []
    for (lineno, _), row in zip(numbered[1:], rows[1:]):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise DataValidationError(
                f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
        vals = []
        for i in [yi] + xcols:
            cell = row[i].strip()
            if cell.lower() in MISSING:
                raise DataValidationError(f"{path}:{lineno}: missing value in column {header[i]!r}")
            try:
                v = float(cell)
            except ValueError:
                raise DataValidationError(
                    f"{path}:{lineno}: column {header[i]!r} holds non-numeric {cell!r}") from None
            if not math.isfinite(v):
                raise DataValidationError(f"{path}:{lineno}: non-finite value in {header[i]!r}")
            vals.append(v)
        yv = vals[0] / 100.0 if rescale_percent else vals[0]
        if not 0.0 < yv < 1.0:
            hint = (" (boundary values are not supported by the model; shrink the data into "
                    "the open interval or use --rescale-percent for percentages)")
            raise DataValidationError(
                f"{path}:{lineno}: response {y_col}={vals[0]!r} is not strictly inside (0, 1){hint}")
        y.append(yv)
        X.append(vals[1:])
        if di is not None:
            dates.append(row[di].strip())
    if not y:
        raise DataValidationError(f"{path}: no data rows")
    return Dataset(y=np.array(y), X=np.array(X, dtype=float).reshape(len(y), len(xcols)),
                   covariate_names=tuple(header[i] for i in xcols),
                   dates=tuple(dates) if di is not None else None)


def save_csv(data: SeriesData, path, comment: str | None = None):
    """Write ``y`` plus covariates with round-trip (repr) precision."""
    names = list(getattr(data, "covariate_names", ()) or
                 [f"x{i + 1}" for i in range(data.r)])
    dates = getattr(data, "dates", None)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow((["date"] if dates else []) + ["y"] + names)
        for t in range(data.n):
            w.writerow(([dates[t]] if dates else []) + [repr(float(data.y[t]))]
                       + [repr(float(v)) for v in data.X[t]])


def read_matrix_csv(path, rows: int | None = None, columns=None) -> tuple[np.ndarray, list]:
    """Numeric CSV (header row, ``#`` comments skipped) as a matrix."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [line for _, line in _data_lines(fh)]
    table = list(csv.reader(lines))
    if not table:
        raise DataValidationError(f"{path}: empty file")
    header = [h.strip() for h in table[0]]
    keep = list(range(len(header))) if columns is None else [header.index(c) for c in columns]
    body = [r for r in table[1:] if any(c.strip() for c in r)]
    try:
        M = np.array([[float(r[i]) for i in keep] for r in body], dtype=float)
    except (ValueError, IndexError) as exc:
        raise DataValidationError(f"{path}: {exc}") from None
    M = M.reshape(len(body), len(keep))
    if rows is not None and M.shape[0] != rows:
        raise DataValidationError(f"{path}: expected {rows} rows, found {M.shape[0]}")
    return M, [header[i] for i in keep]


# --- covariate preparation -------------------------------------------------

def tcode_transform(x: np.ndarray, code: int) -> np.ndarray:
    """Stationarizing transform; the first entries become NaN.

    1: level, 2: first difference, 5: difference of logs,
    6: second difference of logs.
    """
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, np.nan)
    if code == 1:
        return x.copy()
    if code in (5, 6) and np.any(x <= 0.0):
        raise DataValidationError(f"tcode {code} takes logs but the series has nonpositive values")
    if code == 2:
        out[1:] = np.diff(x)
    elif code == 5:
        out[1:] = np.diff(np.log(x))
    elif code == 6:
        out[2:] = np.diff(np.log(x), n=2)
    else:
        raise DataValidationError(f"unsupported tcode {code}; use 1, 2, 5 or 6")
    return out


def lag_matrix(X: np.ndarray, names, lags: int) -> tuple[np.ndarray, list]:
    """Columns ``name_lag1 .. name_lagk`` for every input column (NaN-padded)."""
    n, r = X.shape
    cols, out_names = [], []
    for j, name in enumerate(names):
        for k in range(1, lags + 1):
            c = np.full(n, np.nan)
            c[k:] = X[:n - k, j]
            cols.append(c)
            out_names.append(f"{name}_lag{k}")
    M = np.column_stack(cols) if cols else np.zeros((n, 0))
    return M, out_names


def prepare_design(data: Dataset, tcodes: dict | None = None, lags: int = 0) -> Dataset:
    """Apply tcodes to covariates, expand lags 1..``lags``, drop incomplete rows."""
    X = data.X.copy()
    for name, code in (tcodes or {}).items():
        if name not in data.covariate_names:
            raise DataValidationError(f"tcode given for unknown covariate {name!r}")
        j = data.covariate_names.index(name)
        X[:, j] = tcode_transform(X[:, j], int(code))
    names = list(data.covariate_names)
    if lags > 0:
        X, names = lag_matrix(X, names, lags)
    ok = np.all(np.isfinite(X), axis=1)
    first = int(np.argmax(ok)) if ok.any() else data.n
    if not np.all(ok[first:]):
        raise DataValidationError("covariates have missing values after the leading rows")
    return Dataset(y=data.y[first:], X=X[first:], covariate_names=tuple(names),
                   dates=None if data.dates is None else data.dates[first:])


# --- JSON result files -------------------------------------------------------

def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def fit_to_dict(fit, level: float = 0.95, extra: dict | None = None) -> dict:
    from .fit import info_criteria, standard_errors_ci, wald_z

    names = fit.names
    ci = standard_errors_ci(fit, level)
    est = fit.gamma_hat.to_array()
    aic, bic, hqc = info_criteria(fit)
    params = []
    for j, name in enumerate(names):
        z, pv = wald_z(fit, j) if name != "lambda" else (math.nan, math.nan)
        params.append({"name": name, "estimate": float(est[j]), "se": _num(ci[j, 0]),
                       "ci_lower": _num(ci[j, 1]), "ci_upper": _num(ci[j, 2]),
                       "z": _num(z), "p_value": _num(pv)})
    out = {
        "tool": "uwarma",
        "version": __version__,
        "kind": "fit",
        "spec": fit.spec.to_dict(),
        "covariate_names": list(fit.covariate_names),
        "parameters": params,
        "level": level,
        "loglik": float(fit.loglik),
        "n": int(fit.n),
        "criteria": {"aic": aic, "bic": bic, "hqc": hqc},
        "diagnostics": {
            "converged": bool(fit.converged),
            "iterations": int(fit.iterations),
            "clamp_events": int(fit.clamp_events),
            "max_abs_score": float(np.max(np.abs(fit.grad))),
            "condition_number": _num(fit.condition_number),
            "flat_likelihood": bool(fit.flat_likelihood),
            "message": fit.message,
        },
    }
    if extra:
        out.update(extra)
    return out


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def save_json(obj, path):
    try:
        Path(path).write_text(dumps(obj), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def load_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


@dataclass
class LoadedModel:
    spec: ModelSpec
    gamma: ParamVector
    covariate_names: list
    meta: dict = field(default_factory=dict)


def load_model(path) -> LoadedModel:
    d = load_json(path)
    if d.get("tool") != "uwarma" or "spec" not in d:
        raise DataValidationError(f"{path} is not a uwarma result file")
    s = d["spec"]
    spec = ModelSpec(p=s["p"], q=s["q"], rho=s["rho"], link=s["link"], r=s["r"])
    gamma = ParamVector.from_array(spec, [p["estimate"] for p in d["parameters"]])
    return LoadedModel(spec=spec, gamma=gamma, covariate_names=d.get("covariate_names", []),
                       meta=d)


# --- Monte Carlo outputs -------------------------------------------------------

def write_study(summary, prefix) -> list[Path]:
    """``<prefix>_replicas.csv`` (long format), ``<prefix>_summary.csv`` and ``.json``."""
    prefix = Path(prefix)
    paths = [prefix.with_name(prefix.name + s)
             for s in ("_replicas.csv", "_summary.csv", "_summary.json")]
    with open(paths[0], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replica", "seed", "converged", "parameter", "true", "estimate", "se"])
        for i in range(summary.estimates.shape[0]):
            for j, name in enumerate(summary.names):
                w.writerow([i, int(summary.seeds[i]), int(summary.converged[i]), name,
                            repr(float(summary.true[j])), repr(float(summary.estimates[i, j])),
                            repr(float(summary.se[i, j]))])
    mean, sd, bias = summary.mean, summary.sd, summary.bias
    with open(paths[1], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["parameter", "mean", "sd", "true", "bias"])
        for j, name in enumerate(summary.names):
            w.writerow([name, f"{mean[j]:.6f}", f"{sd[j]:.6f}", f"{summary.true[j]:.6f}",
                        f"{bias[j]:.6f}"])
    doc = {
        "tool": "uwarma",
        "version": __version__,
        "kind": "mc",
        "config": summary.config.to_dict() if summary.config else None,
        "replicas": int(summary.estimates.shape[0]),
        "failures": summary.failures,
        "failed_seeds": {str(i): {"seed": int(summary.seeds[i]), "reason": msg}
                         for i, msg in sorted(summary.errors.items())},
        "parameters": [{"name": n, "true": float(summary.true[j]), "mean": _num(mean[j]),
                        "sd": _num(sd[j]), "bias": _num(bias[j])}
                       for j, n in enumerate(summary.names)],
    }
    mape = summary.mape()
    if mape is not None:
        doc["mape"] = {str(h): v for h, v in mape.items()}
    save_json(doc, paths[2])
    return paths
