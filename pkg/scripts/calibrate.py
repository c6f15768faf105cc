"""Scan one or more config keys and print the headline coverage metrics.

Used to study how modelling choices that are not pinned down (interference
cluster size, ring-beam azimuth, edge filtering, ...) move the outage and
median-SINR figures that the acceptance gate checks.

    python3 scripts/calibrate.py --drops 5 --vary deployment.interference_tiers=1,2,3
    python3 scripts/calibrate.py --drops 5 --vary deployment.ring_azimuth=0,15,30
"""

from __future__ import annotations

import argparse
import itertools

import numpy as np

from uavntn.cli import resolve_key
from uavntn.config import preset
from uavntn.engine import run_campaigns
from uavntn.io import parse_value

VARIANTS = ("standalone", "relief", "offload_90_frf1", "offload_90_frf3", "offload_87_frf1", "offload_87_frf3")


def _metrics(m):
    st = m["standalone"]
    med = {k: float(np.median(m[k][("UAV", "DL")].sinr_db)) for k in VARIANTS if k.startswith("offload")}
    return {
        "uav_dl_out": st[("UAV", "DL")].outage,
        "gue_ul_out": st[("GUE", "UL")].outage,
        "gue_ul_out_off": m["offload_90_frf3"][("GUE", "UL")].outage,
        "ntn87_dl_out": m["offload_87_frf1"][("UAV", "DL")].outage,
        "gap90": med["offload_90_frf3"] - med["offload_90_frf1"],
        "gap87": med["offload_87_frf3"] - med["offload_87_frf1"],
        "ul_gain": float(np.median(m["offload_90_frf3"][("UAV", "UL")].sinr_db))
        - float(np.median(st[("UAV", "UL")].sinr_db)),
        "muted": m["relief"].relief["mean_muted_relieved"],
        "dl_kbps": m["offload_90_frf3"][("UAV", "DL")].mean_rate / 1e3,
        "ul_kbps": m["offload_90_frf3"][("UAV", "UL")].mean_rate / 1e3,
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--drops", type=int, default=5)
    ap.add_argument("--vary", action="append", default=[], metavar="KEY=V1,V2")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args(argv)

    fixed = {"simulation.n_drops": args.drops, "simulation.exclude_edge": True}
    for item in args.set:
        key, _, text = item.partition("=")
        dotted, f = resolve_key(key)
        fixed[dotted] = parse_value(dotted, f, text)
    axes = []
    for item in args.vary:
        key, _, values = item.partition("=")
        dotted, f = resolve_key(key)
        axes.append([(dotted, parse_value(dotted, f, v)) for v in values.split(",")])

    header = None
    for combo in itertools.product(*axes) if axes else [()]:
        overrides = {**fixed, **dict(combo)}
        cfgs = [preset(f"case3.{v}").replace(**overrides) for v in VARIANTS]
        runs = dict(zip(VARIANTS, run_campaigns(cfgs, args.workers)))
        row = _metrics(runs)
        if header is None:
            header = list(row)
            print("setting".ljust(40), " ".join(h.rjust(14) for h in header))
        label = ", ".join(f"{k}={v}" for k, v in combo) or "defaults"
        print(label.ljust(40), " ".join(f"{row[h]:14.3f}" for h in header))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
