"""Emit the data tables behind the SINR CDF and rate bar-chart figures.

Runs every scheme for both UAV densities and writes, into ``--out``:

  dl_sinr_cdf.csv, ul_sinr_cdf.csv   scenario,population,sinr_db,cdf
  dl_rate_bars.csv, ul_rate_bars.csv scenario,population,mean_rate_bps,p95_rate_bps,outage

CDFs are resampled at ``--points`` evenly spaced probabilities. Plotting is
left to external tools.

    python3 scripts/reproduce_figures.py --drops 20 --out figures/
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from uavntn.config import preset
from uavntn.engine import POPULATIONS, nearest_rank, run_campaigns

SCHEMES = {
    "DL": ("standalone", "relief", "offload_90_frf1", "offload_90_frf3", "offload_87_frf1", "offload_87_frf3"),
    "UL": ("standalone", "partition", "offload_90_frf1", "offload_90_frf3", "offload_87_frf1", "offload_87_frf3"),
}


def _cdf_rows(summary, direction, points):
    probs = np.linspace(0.0, 1.0, points + 1)[1:]
    for pop in POPULATIONS:
        s = summary[(pop, direction)].sinr_db
        if len(s) == 0:
            continue
        for p in probs:
            yield summary.scenario, pop, repr(nearest_rank(s, 100.0 * p)), repr(float(p))


def _bar_rows(summary, direction):
    for pop in POPULATIONS:
        st = summary[(pop, direction)]
        yield summary.scenario, pop, repr(st.mean_rate), repr(st.p95_rate), repr(st.outage)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="figures")
    ap.add_argument("--drops", type=int, default=100)
    ap.add_argument("--points", type=int, default=200)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--exclude-edge", action="store_true", help="drop the outer ring from the statistics")
    args = ap.parse_args(argv)

    names = sorted({f"{case}.{v}" for case in ("case2", "case3") for vs in SCHEMES.values() for v in vs})
    overrides = {"simulation.n_drops": args.drops, "simulation.exclude_edge": args.exclude_edge}
    summaries = dict(zip(names, run_campaigns([preset(n).replace(**overrides) for n in names], args.workers)))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for direction, variants in SCHEMES.items():
        chosen = [summaries[f"{case}.{v}"] for case in ("case2", "case3") for v in variants]
        with open(out / f"{direction.lower()}_sinr_cdf.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("scenario", "population", "sinr_db", "cdf"))
            for s in chosen:
                w.writerows(_cdf_rows(s, direction, args.points))
        with open(out / f"{direction.lower()}_rate_bars.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("scenario", "population", "mean_rate_bps", "p95_rate_bps", "outage"))
            for s in chosen:
                w.writerows(_bar_rows(s, direction))
    for s in summaries.values():
        uav_dl, uav_ul = s[("UAV", "DL")], s[("UAV", "UL")]
        print(
            f"{s.scenario:24s} UAV DL outage {uav_dl.outage:.3f} mean {uav_dl.mean_rate / 1e3:8.1f} kbit/s | "
            f"UL outage {uav_ul.outage:.3f} mean {uav_ul.mean_rate / 1e3:8.1f} kbit/s"
        )
    print(f"tables written to {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
