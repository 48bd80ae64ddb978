#!/usr/bin/env python3
"""Speed sweep of device vs cloud inference on the deterministic baseline.

Runs the braking loop at a range of approach speeds for both the on-board
model (yolo11m on the embedded board) and the offloaded one (yolo11x on the
GPU server behind the median LAN round trip), then writes one CSV row per
run.  With equal detection ranges the offloaded rows should stop strictly
farther from the obstacle at every speed; the optional extra detection range
models the larger model spotting obstacles earlier.
"""

import argparse
import csv
import dataclasses
import sys
from pathlib import Path

from placesim.kinematics import mph_to_mps
from placesim.sim import Deployment, SweepGrid, sweep
from placesim.simio import SUMMARY_HEADER, load_scenario, sweep_point_row


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenario", type=Path,
                    default=Path(__file__).resolve().parent.parent
                    / "configs" / "baseline_scenario.toml")
    ap.add_argument("--speeds-mph", type=float, nargs="+",
                    default=[20.0, 30.0, 40.0, 50.0, 60.0])
    ap.add_argument("--cloud-range-bonus", type=float, default=0.0,
                    help="Extra detection range (m) granted to the cloud model.")
    ap.add_argument("--out", type=Path, default=None,
                    help="CSV destination (default: stdout).")
    return ap.parse_args()


def main():
    args = parse_args()
    loaded = load_scenario(args.scenario)
    catalog = {(p.model_id, p.platform_id): p for p in loaded.profiles}
    platforms = {p.platform_id: p for p in loaded.platforms}

    deployments = [
        Deployment(profile=catalog[("yolo11m", "device")],
                   platform=platforms["device"], network=None,
                   network_label=""),
        Deployment(profile=catalog[("yolo11x", "cloud")],
                   platform=platforms["cloud"],
                   network=loaded.networks["lan_median"],
                   network_label="lan_median"),
    ]
    speeds = tuple(mph_to_mps(v) for v in args.speeds_mph)

    rows = []
    for dep in deployments:
        bonus = args.cloud_range_bonus if dep.platform.kind == "cloud" else 0.0
        det = loaded.config.detection
        base = dataclasses.replace(
            loaded.config,
            detection=dataclasses.replace(
                det,
                detection_range=det.detection_range + bonus,
                visibility_range=max(det.visibility_range,
                                     det.detection_range + bonus),
            ),
        )
        grid = SweepGrid(deployments=(dep,), speeds=speeds)
        points = sweep(base, grid, base_network_label=loaded.network_label)
        rows.extend(sweep_point_row(p) for p in points)

    out = open(args.out, "w", newline="") if args.out else sys.stdout
    writer = csv.writer(out)
    writer.writerow(list(SUMMARY_HEADER) + ["error"])
    writer.writerows(rows)
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
