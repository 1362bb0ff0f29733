"""Out-of-sample MAPE by horizon for the covariate forecasting design.

    python3 scripts/forecast_study.py --replicas 100 --out-dir results/fc
"""

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path

from _common import parse_config
from uwarma.data_io import write_study
from uwarma.montecarlo import run_forecast_study, forecast_design


@dataclass(frozen=True)
class ForecastGrid:
    replicas: int = 100
    n: int = 1000
    rhos: tuple = (0.25, 0.5, 0.75)
    lams: tuple = (5.0, 10.0, 20.0)
    horizons: tuple = (1, 6, 12, 18, 24)
    base_seed: int = 0
    jobs: int = 1
    out_dir: str = "results/fc"


def main():
    grid = parse_config(ForecastGrid, __doc__)
    out = Path(grid.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "mape.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rho", "lam"] + [f"h={h}" for h in grid.horizons] + ["failures"])
        for rho, lam in itertools.product(grid.rhos, grid.lams):
            cfg = forecast_design(replicas=grid.replicas, n=grid.n, rho=float(rho), lam=float(lam),
                                horizons=grid.horizons, base_seed=grid.base_seed, jobs=grid.jobs)
            s = run_forecast_study(cfg)
            write_study(s, out / f"rho{rho:g}_lam{lam:g}")
            m = s.mape()
            w.writerow([rho, lam] + [f"{m[h]:.4f}" for h in grid.horizons] + [s.failures])
            print(f"rho={rho:<4g} lam={lam:<4g} " + " ".join(f"{m[h]:.4f}" for h in grid.horizons))


if __name__ == "__main__":
    main()
