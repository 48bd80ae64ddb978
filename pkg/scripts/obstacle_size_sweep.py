#!/usr/bin/env python3
"""Margin vs detection range (a stand-in for obstacle size / model quality).

Small obstacles become detectable only at short range; a better model or a
larger obstacle raises the range.  Sweeping the detection range maps out how
much margin each extra meter of range buys at each speed, and where the
safety cliff sits for a given deployment.
"""

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from placesim.kinematics import mph_to_mps
from placesim.sim import run
from placesim.simio import load_scenario


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", type=Path,
                    default=Path(__file__).resolve().parent.parent
                    / "configs" / "baseline_scenario.toml")
    ap.add_argument("--ranges", type=float, nargs="+",
                    default=[40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 120.0])
    ap.add_argument("--speeds-mph", type=float, nargs="+",
                    default=[20.0, 40.0, 60.0])
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    base = load_scenario(args.scenario).config
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(["speed_mph", "detection_range_m", "t_det_s",
                     "d_stop_m", "outcome"])
    for mph in args.speeds_mph:
        for rng in args.ranges:
            det = dataclasses.replace(
                base.detection,
                detection_range=rng,
                visibility_range=max(base.detection.visibility_range, rng),
            )
            cfg = dataclasses.replace(
                base, initial_speed=mph_to_mps(mph), detection=det)
            res = run(cfg)
            writer.writerow([
                f"{mph:.6g}", f"{rng:.6g}",
                f"{res.t_det:.6g}" if res.t_det is not None else "",
                f"{res.d_stop:.6g}" if res.d_stop is not None else "",
                res.outcome,
            ])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
