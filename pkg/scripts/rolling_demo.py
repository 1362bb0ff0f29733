"""Rolling-window forecast evaluation on a CSV panel (or a synthetic one if none is given).

    python3 scripts/rolling_demo.py --data my_panel.csv --tcode 5 --out results/roll
"""

import sys
from dataclasses import dataclass
from pathlib import Path

from _common import parse_config

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))


@dataclass(frozen=True)
class RollingDemo:
    data: str = ""
    p: int = 2
    q: int = 0
    window: int = 287
    h: int = 6
    lags: int = 3
    tcode: int = 5
    step: int = 1
    jobs: int = 1
    out: str = "results/roll"


def main():
    from uwarma.cli import main as cli
    from uwarma.data_io import load_csv

    cfg = parse_config(RollingDemo, __doc__)
    data = cfg.data
    if not data:
        from synthetic import write_macro_csv
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        data = str(write_macro_csv(Path(cfg.out).parent / "synthetic_panel.csv"))
        print(f"no --data given; wrote synthetic panel to {data}")
    names = load_csv(data).covariate_names
    tc = [a for v in names for a in ("--tcode", f"{v}={cfg.tcode}")]
    sys.exit(cli(["rollfc", "--data", data, "--p", str(cfg.p), "--q", str(cfg.q),
                  "--window", str(cfg.window), "--h", str(cfg.h), "--lags", str(cfg.lags),
                  "--step", str(cfg.step), "--jobs", str(cfg.jobs), *tc, "--out", cfg.out]))


if __name__ == "__main__":
    main()
