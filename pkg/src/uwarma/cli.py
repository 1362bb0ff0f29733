"""``uwarma`` command line: simulate, fit, forecast, select, mc, rollfc.

Exit codes: 0 success, 2 usage, 3 data validation, 4 non-convergence
(outputs are still written and carry ``converged: false``).
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import shlex
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .core import BoundaryCollapseError, ModelSpec, ParamVector, simulate
from .data_io import (
    DataValidationError,
    Dataset,
    dumps,
    fit_to_dict,
    load_csv,
    load_model,
    prepare_design,
    read_matrix_csv,
    save_csv,
    save_json,
    write_study,
)
from .fit import FitOptions, backward_eliminate, fit_pmle
from .forecast import forecast_ahead
from .links import LinkKind
from .montecarlo import StudyConfig, run_estimation_study, run_forecast_study
from .rolling import RollingConfig, rolling_forecast

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOCONV = 0, 2, 3, 4

log = logging.getLogger("uwarma")


class UsageError(Exception):
    pass


def default_jobs() -> int:
    raw = os.environ.get("UWARMA_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"UWARMA_JOBS must be an integer, got {raw!r}") from None


def _provenance(argv) -> str:
    """Replay command; the output path is left out so reruns write identical bytes."""
    kept, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            kept.append(a)
    return f"uwarma {__version__}: " + shlex.join(["uwarma", *kept])


def _parse_tcodes(items) -> dict:
    out = {}
    for item in items or []:
        name, sep, code = item.partition("=")
        if not sep or not code.strip().isdigit():
            raise UsageError(f"--tcode expects NAME=CODE, got {item!r}")
        out[name.strip()] = int(code)
    return out


# --- argument parser -------------------------------------------------------------

def _model_args(p, with_order=True):
    if with_order:
        p.add_argument("--p", type=int, default=1, help="AR order")
        p.add_argument("--q", type=int, default=0, help="MA order")
    p.add_argument("--rho", type=float, default=0.5, help="quantile level modelled")
    p.add_argument("--link", default="logit", choices=[k.value for k in LinkKind])


def _data_args(p):
    p.add_argument("--data", required=True, help="CSV with a 'y' column")
    p.add_argument("--y-col", default="y")
    p.add_argument("--rescale-percent", action="store_true",
                   help="divide the response by 100 before validation")
    p.add_argument("--tcode", action="append", metavar="NAME=CODE",
                   help="covariate transform: 1 level, 2 diff, 5 diff log, 6 second diff log")


def _fit_args(p):
    p.add_argument("--level", type=float, default=0.95, help="confidence level")
    p.add_argument("--maxiter", type=int, default=1000)
    p.add_argument("--gtol", type=float, default=1e-6)
    p.add_argument("--ftol", type=float, default=1e-10)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uwarma", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"uwarma {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="draw a series from a given model")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--burnin", type=int, default=1000)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--phi", type=float, nargs="*", default=[])
    s.add_argument("--theta", type=float, nargs="*", default=[])
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--beta", type=float, nargs="*", default=[])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--xfile", help="covariate CSV with n + burnin rows, one column per beta")
    s.add_argument("--force", action="store_true", help="allow lambda < 1")
    s.add_argument("--out", required=True)
    _model_args(s, with_order=False)

    f = sub.add_parser("fit", help="estimate a model by partial likelihood")
    _data_args(f)
    _model_args(f)
    _fit_args(f)
    f.add_argument("--lags", type=int, default=0, help="use covariate lags 1..k instead of levels")
    f.add_argument("--out", required=True, help="result JSON")

    c = sub.add_parser("select", help="fit with backward elimination of covariates")
    _data_args(c)
    _model_args(c)
    _fit_args(c)
    c.add_argument("--lags", type=int, default=3)
    c.add_argument("--pmax", type=float, default=0.05)
    c.add_argument("--out", required=True, help="result JSON")

    fc = sub.add_parser("forecast", help="h-step forecasts from a saved result")
    fc.add_argument("--model", required=True, help="result JSON written by fit or select")
    fc.add_argument("--data", required=True, help="the in-sample data used for the fit")
    fc.add_argument("--h", type=int, required=True)
    fc.add_argument("--xfuture", help="CSV of future covariates, columns named as in the model")
    fc.add_argument("--out", required=True, help="CSV of step, yhat")

    m = sub.add_parser("mc", help="Monte Carlo study from a key=value config file")
    m.add_argument("--config", required=True)
    m.add_argument("--out", required=True, help="output prefix")
    m.add_argument("--jobs", type=int, default=None)

    r = sub.add_parser("rollfc", help="rolling-window forecast evaluation")
    _data_args(r)
    _model_args(r)
    r.add_argument("--window", type=int, default=287)
    r.add_argument("--h", type=int, default=6)
    r.add_argument("--step", type=int, default=1)
    r.add_argument("--lags", type=int, default=3)
    r.add_argument("--pmax", type=float, default=0.05)
    r.add_argument("--no-select", action="store_true", help="keep every covariate")
    r.add_argument("--jobs", type=int, default=None)
    r.add_argument("--out", required=True, help="output prefix")
    return ap


# --- commands ------------------------------------------------------------------

def _load_design(args, lags: int) -> tuple[Dataset, dict]:
    raw = load_csv(args.data, y_col=args.y_col, rescale_percent=args.rescale_percent)
    tcodes = _parse_tcodes(args.tcode)
    data = prepare_design(raw, tcodes, lags) if (tcodes or lags) else raw
    design = {"y_col": args.y_col, "rescale_percent": bool(args.rescale_percent),
              "tcodes": tcodes, "lags": lags, "source_covariates": list(raw.covariate_names)}
    return data, design


def _fit_options(args) -> FitOptions:
    return FitOptions(maxiter=args.maxiter, gtol=args.gtol, ftol=args.ftol,
                      verbose=getattr(args, "verbose", False))


def cmd_simulate(args, argv) -> int:
    spec = ModelSpec(p=len(args.phi), q=len(args.theta), rho=args.rho, link=args.link,
                     r=len(args.beta))
    gamma = ParamVector(alpha=args.alpha, beta=args.beta, phi=args.phi, theta=args.theta,
                        lam=args.lam)
    X, names = None, ()
    if spec.r:
        if not args.xfile:
            raise UsageError(f"--beta has {spec.r} entries: --xfile with covariates is required")
        X, names = read_matrix_csv(args.xfile, rows=args.n + args.burnin)
        if X.shape[1] != spec.r:
            raise DataValidationError(f"{args.xfile}: {X.shape[1]} columns for {spec.r} betas")
    sim = simulate(spec, gamma, args.n, args.burnin, seed=args.seed, X=X, force=args.force)
    out = Dataset(y=sim.y, X=sim.X, covariate_names=tuple(names))
    save_csv(out, args.out, comment=_provenance(argv))
    return EXIT_OK


def _write_fit(fit, args, design, argv, extra=None) -> int:
    doc = fit_to_dict(fit, args.level, {"design": design, "command": _provenance(argv),
                                        "data": str(args.data), "seed": None, **(extra or {})})
    save_json(doc, args.out)
    print(fit.summary(args.level))
    if not fit.converged:
        log.error("optimizer did not converge: %s (results written to %s)", fit.message, args.out)
        return EXIT_NOCONV
    return EXIT_OK


def cmd_fit(args, argv) -> int:
    data, design = _load_design(args, args.lags)
    spec = ModelSpec(p=args.p, q=args.q, rho=args.rho, link=args.link, r=data.r)
    fit = fit_pmle(spec, data, _fit_options(args), covariate_names=data.covariate_names)
    return _write_fit(fit, args, design, argv)


def cmd_select(args, argv) -> int:
    data, design = _load_design(args, args.lags)
    spec = ModelSpec(p=args.p, q=args.q, rho=args.rho, link=args.link, r=data.r)
    fit, trace = backward_eliminate(spec, data, args.pmax, _fit_options(args),
                                    covariate_names=data.covariate_names)
    extra = {"elimination": {"pmax": args.pmax, "candidates": list(data.covariate_names),
                             "removed": [{"name": rm.name, "p_value": rm.p_value}
                                         for rm in trace]}}
    return _write_fit(fit, args, design, argv, extra)


def cmd_forecast(args, argv) -> int:
    model = load_model(args.model)
    design = model.meta.get("design", {})
    raw = load_csv(args.data, y_col=design.get("y_col", "y"),
                   rescale_percent=design.get("rescale_percent", False))
    tcodes, lags = design.get("tcodes", {}), design.get("lags", 0)
    data = prepare_design(raw, tcodes, lags) if (tcodes or lags) else raw
    names = list(model.covariate_names)
    missing = [c for c in names if c not in data.covariate_names]
    if missing:
        raise DataValidationError(f"{args.data}: covariates {missing} required by the model")
    data = data.columns([data.covariate_names.index(c) for c in names])
    X_future = None
    if model.spec.r:
        if not args.xfuture:
            raise UsageError(f"the model has covariates {names}: --xfuture is required")
        X_future, _ = read_matrix_csv(args.xfuture, columns=names)
    fc = forecast_ahead(model.spec, model.gamma, data, args.h, X_future)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {_provenance(argv)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "yhat"])
        for k, v in enumerate(fc.yhat, start=1):
            w.writerow([k, repr(float(v))])
    return EXIT_OK


_MC_KEYS = {f.name for f in fields(StudyConfig)}
_MC_ALIASES = {"lambda": "lam", "seed": "base_seed"}
_MC_TUPLES = {"phi", "theta", "beta", "horizons"}


def parse_mc_config(path) -> tuple[str, StudyConfig]:
    """Flat ``key = value`` file; ``#`` starts a comment, lists are comma separated."""
    kind, kw = "estimation", {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataValidationError(f"cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (s.strip() for s in line.partition("="))
        if not sep:
            raise DataValidationError(f"{path}:{lineno}: expected key = value")
        key = _MC_ALIASES.get(key, key)
        if key == "kind":
            if value not in ("estimation", "forecast"):
                raise DataValidationError(f"{path}:{lineno}: kind must be estimation or forecast")
            kind = value
            continue
        if key not in _MC_KEYS:
            raise DataValidationError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            if key in _MC_TUPLES:
                items = [v for v in value.split(",") if v.strip()]
                kw[key] = tuple(int(v) if key == "horizons" else float(v) for v in items)
            elif key == "link":
                kw[key] = value
            elif key in ("replicas", "n", "burnin", "base_seed", "jobs"):
                kw[key] = int(value)
            else:
                kw[key] = float(value)
        except ValueError:
            raise DataValidationError(f"{path}:{lineno}: bad value {value!r} for {key}") from None
    if kind == "forecast" and "beta" in kw and "alpha" not in kw:
        kw["alpha"] = 0.5
    return kind, StudyConfig(**kw)


def cmd_mc(args, argv) -> int:
    kind, cfg = parse_mc_config(args.config)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    from dataclasses import replace
    cfg = replace(cfg, jobs=jobs)
    run = run_forecast_study if kind == "forecast" else run_estimation_study
    summary = run(cfg)
    write_study(summary, args.out)
    print(f"{summary.estimates.shape[0]} replicas, {summary.failures} not converged")
    for j, name in enumerate(summary.names):
        print(f"{name:>10s}  mean {summary.mean[j]: .4f}  sd {summary.sd[j]:.4f}")
    if summary.ape is not None:
        for h, v in summary.mape().items():
            print(f"  MAPE(h={h}) {v:.4f}")
    return EXIT_OK


def cmd_rollfc(args, argv) -> int:
    data, design = _load_design(args, args.lags)
    spec = ModelSpec(p=args.p, q=args.q, rho=args.rho, link=args.link, r=data.r)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    cfg = RollingConfig(window=args.window, h=args.h, step=args.step,
                        select=not args.no_select, pmax=args.pmax, jobs=jobs)
    res = rolling_forecast(spec, data, cfg, data.covariate_names)
    prefix = Path(args.out)
    cols = [f"t+{k}" for k in range(1, cfg.h + 1)]
    with open(prefix.with_name(prefix.name + "_mape.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model"] + cols)
        w.writerow([res.label] + [f"{v:.4f}" for v in res.average_mape])
    freq = res.selection_frequency()
    with open(prefix.with_name(prefix.name + "_selection.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variable", res.label])
        for name, v in freq.items():
            w.writerow([name, f"{v:.2f}"])
    with open(prefix.with_name(prefix.name + "_windows.csv"), "w", newline="",
              encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["start", "converged"] + [f"ape_{c}" for c in cols] + ["kept"])
        for i, s in enumerate(res.starts):
            kept = res.kept[i]
            w.writerow([int(s), int(res.converged[i])] + [repr(float(v)) for v in res.ape[i]]
                       + [";".join(kept) if kept is not None else ""])
    save_json({"tool": "uwarma", "version": __version__, "kind": "rollfc",
               "command": _provenance(argv), "spec": spec.to_dict(), "design": design,
               "window": cfg.window, "h": cfg.h, "step": cfg.step, "select": cfg.select,
               "pmax": cfg.pmax, "windows": int(len(res.starts)),
               "average_mape": {c: float(v) for c, v in zip(cols, res.average_mape)},
               "mean_covariates": res.mean_covariates, "selection_frequency": freq,
               "failed_windows": {str(k): v for k, v in res.errors.items()}},
              prefix.with_name(prefix.name + "_summary.json"))
    print(f"{'':14s}" + "".join(f"{c:>8s}" for c in cols))
    print(f"{res.label:14s}" + "".join(f"{v:8.4f}" for v in res.average_mape))
    return EXIT_OK if res.converged.all() else EXIT_NOCONV


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "select": cmd_select,
            "forecast": cmd_forecast, "mc": cmd_mc, "rollfc": cmd_rollfc}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except UsageError as exc:
        print(f"uwarma {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataValidationError, BoundaryCollapseError) as exc:
        print(f"uwarma {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # domain checks on model inputs (orders, rho, lambda, shapes)
        print(f"uwarma {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"uwarma {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
