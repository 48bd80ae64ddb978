#!/usr/bin/env python3
"""Locate the round-trip delay at which a braking scenario flips to collision.

Sweeps a fixed RTT over a grid for the given scenario (default: the heavy
truck at 60 mph with a short detection range) and reports margin and outcome
per point, plus a bisection estimate of the flip threshold.  Demonstrates
why the p90 tail of the delay distribution — not its median — decides
whether tighter scenarios are safe.
"""

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

import numpy as np

from placesim.netmodel import FixedDelay
from placesim.sim import run
from placesim.simio import load_scenario


def outcome_at(config, rtt):
    result = run(dataclasses.replace(config, network=FixedDelay(rtt)))
    return result


def flip_threshold(config, lo, hi, tol=1e-6):
    """Bisect the smallest fixed RTT that produces a collision."""
    if outcome_at(config, lo).outcome != "safe":
        return lo
    if outcome_at(config, hi).outcome == "safe":
        return float("nan")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if outcome_at(config, mid).outcome == "safe":
            lo = mid
        else:
            hi = mid
    return hi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", type=Path,
                    default=Path(__file__).resolve().parent.parent
                    / "configs" / "truck_tail_scenario.toml")
    ap.add_argument("--rtt-min", type=float, default=0.0)
    ap.add_argument("--rtt-max", type=float, default=0.120)
    ap.add_argument("--steps", type=int, default=25)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    config = load_scenario(args.scenario).config
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["rtt_s", "t_brake_s", "d_stop_m", "outcome"])
    for rtt in np.linspace(args.rtt_min, args.rtt_max, args.steps):
        res = outcome_at(config, float(rtt))
        writer.writerow([
            f"{rtt:.6g}",
            f"{res.t_brake:.6g}" if res.t_brake is not None else "",
            f"{res.d_stop:.6g}" if res.d_stop is not None else "",
            res.outcome,
        ])
    threshold = flip_threshold(config, args.rtt_min, args.rtt_max)
    if out is not sys.stdout:
        out.close()
    print(f"collision threshold: fixed RTT ~= {threshold:.6f} s", file=sys.stderr)


if __name__ == "__main__":
    main()
