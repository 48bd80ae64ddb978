#!/usr/bin/env python3
"""Shared-server contention: braking margin vs background request rate.

The cloud GPU does not serve our vehicle alone.  This sweep loads the
server with Poisson background inference jobs at increasing rates and
reruns the braking scenario at each, with exponential service times so
the queue actually builds.  As the offered utilization approaches 1 the
queue-amortized response time blows up and the stopping margin collapses;
rows where every seed still stops report the mean margin across seeds.
"""

import argparse
import csv
import dataclasses
import statistics
import sys
from pathlib import Path

from placesim.errors import HorizonError
from placesim.sim import run
from placesim.simio import load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", type=Path,
                    default=Path(__file__).resolve().parent.parent
                    / "configs" / "baseline_scenario.toml")
    ap.add_argument("--rates", type=float, nargs="+",
                    default=[0.0, 5.0, 10.0, 15.0, 20.0, 24.0, 28.0, 32.0])
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(20)))
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    loaded = load_scenario(args.scenario)
    base = dataclasses.replace(loaded.config, service_distribution="exponential")
    service = base.profile.inference_latency
    frame_rate = base.sensing.frame_rate

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["bg_rate_hz", "offered_utilization", "runs", "collisions",
                     "mean_d_stop_m", "min_d_stop_m"])
    for rate in args.rates:
        margins = []
        collisions = 0
        for seed in args.seeds:
            cfg = dataclasses.replace(base, background_arrival_rate=rate, seed=seed)
            try:
                res = run(cfg)
            except HorizonError:
                collisions += 1  # queue never drained in time; count as failure
                continue
            if res.outcome == "safe":
                margins.append(res.d_stop)
            else:
                collisions += 1
        rho = (frame_rate + rate) * service
        writer.writerow([
            f"{rate:.6g}", f"{rho:.6g}", len(args.seeds), collisions,
            f"{statistics.fmean(margins):.6g}" if margins else "",
            f"{min(margins):.6g}" if margins else "",
        ])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
