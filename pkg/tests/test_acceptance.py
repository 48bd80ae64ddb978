"""End-to-end acceptance gate.

Eight behavior-level checks, one test each, covering the headline results:
catalog selection, queue-model calibration, deterministic-trace agreement,
the network-delay flip point, measured-vs-predicted placement decisions,
the cloud/device stopping-distance trend, tail-latency degradation, and the
property-test gauntlet.  Every test prints exactly one verdict line of the
form ``ACCEPTANCE <n>: PASS`` / ``ACCEPTANCE <n>: FAIL — <reason>`` so the
gate can be read off the test log directly.
"""

from __future__ import annotations

import dataclasses
import math
import subprocess
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from placesim.catalog import load_catalog, load_networks
from placesim.feasibility import feasibility_set, select_by_kind
from placesim.kinematics import (
    BrakingScenario,
    is_safe_static,
    mph_to_mps,
    reaction_budget,
)
from placesim.latency import cloud_break_even, prefer_cloud
from placesim.netmodel import FixedDelay
from placesim.queue_mc import simulate_mm1
from placesim.sim import DetectionModel, SimConfig, measure_pipeline, run
from placesim.simio import load_scenario

from oracles import deterministic_trace

REPO_ROOT = Path(__file__).resolve().parents[1]
CATALOG = REPO_ROOT / "configs" / "yolo11_catalog.toml"
BASELINE = REPO_ROOT / "configs" / "baseline_scenario.toml"
TRUCK = REPO_ROOT / "configs" / "truck_tail_scenario.toml"


@contextmanager
def verdict(number: int):
    """Print the single PASS/FAIL line for one acceptance criterion."""
    try:
        yield
    except BaseException as exc:
        reason = str(exc).strip().splitlines()[0] if str(exc).strip() else type(exc).__name__
        print(f"ACCEPTANCE {number}: FAIL — {reason}")
        raise
    print(f"ACCEPTANCE {number}: PASS")


# ---------------------------------------------------------------------------
# 1. catalog selection: the per-kind accuracy-argmax picks the published pair


def test_criterion_1_catalog_selection_under_one_second():
    with verdict(1):
        t0 = time.perf_counter()
        profiles, platforms, sensing = load_catalog(CATALOG)
        report = feasibility_set(profiles, platforms, sensing, {"cloud": 0.022})
        per_kind = select_by_kind(report)
        elapsed = time.perf_counter() - t0

        assert per_kind["device"] == ("yolo11m", "device"), per_kind
        assert per_kind["cloud"] == ("yolo11x", "cloud"), per_kind
        assert elapsed < 1.0, f"selection took {elapsed:.3f}s"


# ---------------------------------------------------------------------------
# 2. queue Monte Carlo matches the closed-form mean sojourn within 2%


def test_criterion_2_mm1_calibration_within_two_percent():
    with verdict(2):
        service = 0.03
        t0 = time.perf_counter()
        for utilization in (0.2, 0.5, 0.8):
            stats = simulate_mm1(utilization / service, service, 1_000_000, seed=0)
            closed_form = service / (1.0 - utilization)
            rel_err = abs(stats.mean_sojourn - closed_form) / closed_form
            assert rel_err < 0.02, (
                f"utilization {utilization}: rel err {rel_err:.4%}"
            )
            assert not stats.unstable
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"three runs took {elapsed:.1f}s"


# ---------------------------------------------------------------------------
# 3. the event-driven engine reproduces the closed-form trace markers


def test_criterion_3_baseline_matches_closed_form_trace():
    with verdict(3):
        config = load_scenario(BASELINE).config
        result = run(config)

        assert isinstance(config.network, FixedDelay)
        expected = deterministic_trace(
            gap=config.gap,
            v0=config.initial_speed,
            a=config.deceleration,
            frame_rate=config.sensing.frame_rate,
            detection_range=config.detection.detection_range,
            visibility_range=config.detection.visibility_range,
            rtt=config.network.value,
            service=config.profile.inference_latency,
            control_delay=config.sensing.control_delay,
            confirm_frames=config.confirm_frames,
        )

        assert result.outcome == expected["outcome"] == "safe"
        for marker in (
            "t_obs", "t_det", "t_brake", "t_stop",
            "d_capture", "d_brake", "d_stop", "detection_delay",
        ):
            got = getattr(result, marker)
            assert got == pytest.approx(expected[marker], abs=1e-6), marker
        assert result.frames_dispatched == expected["frames_dispatched"]

        # Detection lands within one frame interval of the earliest instant
        # the obstacle is inside detection range.
        earliest = (config.gap - config.detection.detection_range) / config.initial_speed
        assert -1e-9 <= result.t_det - earliest <= 0.1 + 1e-9


# ---------------------------------------------------------------------------
# 4. the simulated safe/collision flip point in round-trip time agrees with
#    the static kinematic budget to within one frame interval


def test_criterion_4_rtt_flip_point_matches_kinematic_budget():
    with verdict(4):
        config = load_scenario(BASELINE).config
        v0, a = config.initial_speed, config.deceleration
        frame_dt = 1.0 / config.sensing.frame_rate
        service = config.profile.inference_latency
        control = config.sensing.control_delay
        det_range = config.detection.detection_range

        def outcome_at(rtt: float) -> str:
            return run(dataclasses.replace(config, network=FixedDelay(rtt))).outcome

        lo, hi = 0.0, 8.0
        assert outcome_at(lo) == "safe" and outcome_at(hi) == "collision"
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if outcome_at(mid) == "safe":
                lo = mid
            else:
                hi = mid
        flip_sim = 0.5 * (lo + hi)

        # Static prediction anchored at the detectability instant; the only
        # effect it cannot see is frame quantization, bounded by one frame.
        budget = reaction_budget(v0, a, det_range)
        flip_predicted = budget - service - control
        assert -1e-9 <= flip_predicted - flip_sim <= frame_dt + 1e-9, (
            f"sim flip {flip_sim:.6f}s vs predicted {flip_predicted:.6f}s"
        )

        # Folding the measured detection quantization back in pins the flip
        # exactly.
        baseline = run(config)
        quantization = baseline.t_det - (config.gap - det_range) / v0
        assert flip_sim == pytest.approx(flip_predicted - quantization, abs=1e-6)

        # The static predicate flips across the same point.
        scenario = BrakingScenario(v0, a, det_range)
        delay_at = lambda rtt: quantization + rtt + service + control
        assert is_safe_static(delay_at(flip_sim - 1e-5), scenario)
        assert not is_safe_static(delay_at(flip_sim + 1e-5), scenario)


# ---------------------------------------------------------------------------
# 5. the closed-form placement rule agrees with measured pipeline sojourns
#    on randomized stable service/rate triples


def test_criterion_5_placement_rule_matches_measurement():
    with verdict(5):
        rng = np.random.default_rng(42)
        t0 = time.perf_counter()
        for case in range(20):
            cloud_service = rng.uniform(0.01, 0.04)
            device_service = cloud_service * rng.uniform(2.0, 6.0)
            frame_rate = rng.uniform(0.30, 0.85) / device_service

            break_even = cloud_break_even(device_service, cloud_service, frame_rate)
            assert break_even > 0.0

            device = measure_pipeline(
                device_service, frame_rate, 100_000,
                frame_arrivals="poisson", seed=1000 + case,
            )
            cloud = measure_pipeline(
                cloud_service, frame_rate, 100_000,
                frame_arrivals="poisson", seed=2000 + case,
            )

            for multiplier in (0.5, 0.8, 1.25, 2.0):
                rtt = multiplier * break_even
                # every probe sits clear of the +/-5% indifference band
                assert abs(rtt - break_even) / break_even >= 0.05
                predicted = prefer_cloud(rtt, device_service, cloud_service, frame_rate)
                measured = (rtt + cloud.mean_sojourn) < device.mean_sojourn
                assert predicted == measured, (
                    f"case {case}, rtt {rtt:.4f}s: predicted {predicted}, "
                    f"measured device {device.mean_sojourn:.4f}s vs "
                    f"cloud {rtt + cloud.mean_sojourn:.4f}s"
                )
        elapsed = time.perf_counter() - t0
        assert elapsed < 60.0, f"20 cases took {elapsed:.1f}s"


# ---------------------------------------------------------------------------
# 6. faster cloud inference stops the vehicle farther from the obstacle at
#    every speed, and extra detection range widens that advantage


def test_criterion_6_cloud_stops_shorter_and_range_widens_gap():
    with verdict(6):
        profiles, platforms, sensing = load_catalog(CATALOG)
        networks = load_networks(CATALOG)
        by_pair = {(p.model_id, p.platform_id): p for p in profiles}
        by_id = {p.platform_id: p for p in platforms}

        def stop_margin(model: str, platform: str, speed_mph: float,
                        detection_range: float) -> float:
            result = run(SimConfig(
                gap=300.0,
                initial_speed=mph_to_mps(speed_mph),
                deceleration=6.0,
                profile=by_pair[(model, platform)],
                platform=by_id[platform],
                sensing=sensing,
                detection=DetectionModel(detection_range,
                                         max(140.0, detection_range), 1.0),
                network=networks["lan_median"] if platform == "cloud" else None,
            ))
            assert result.outcome == "safe"
            return result.d_stop

        for speed_mph in (20.0, 40.0, 60.0):
            device = stop_margin("yolo11m", "device", speed_mph, 120.0)
            cloud = stop_margin("yolo11x", "cloud", speed_mph, 120.0)
            cloud_far = stop_margin("yolo11x", "cloud", speed_mph, 140.0)
            assert cloud > device, f"{speed_mph} mph: {cloud} <= {device}"
            assert cloud_far - device > cloud - device, (
                f"{speed_mph} mph: +20m range did not widen the gap"
            )


# ---------------------------------------------------------------------------
# 7. tail round-trip time erodes braking headroom and flips the marginal
#    truck scenario from safe to collision


def test_criterion_7_tail_rtt_erodes_margin_and_flips_truck():
    with verdict(7):
        baseline = load_scenario(BASELINE).config
        median = run(dataclasses.replace(baseline, network=FixedDelay(0.022)))
        tail = run(dataclasses.replace(baseline, network=FixedDelay(0.060)))

        assert median.outcome == tail.outcome == "safe"
        assert tail.d_brake < median.d_brake
        shrink = median.d_brake - tail.d_brake
        assert shrink == pytest.approx(baseline.initial_speed * 0.038, abs=1e-9)
        assert tail.margin < median.margin

        truck = load_scenario(TRUCK)
        assert truck.network_label == "lan_tail"
        at_median = run(dataclasses.replace(truck.config,
                                            network=truck.networks["lan_median"]))
        at_tail = run(truck.config)
        assert at_median.outcome == "safe"
        assert at_median.margin == pytest.approx(0.5019148800000153, abs=1e-6)
        assert at_tail.outcome == "collision"
        assert at_tail.margin == 0.0


# ---------------------------------------------------------------------------
# 8. the full property-test gauntlet passes


def test_criterion_8_property_gauntlet_passes():
    with verdict(8):
        proc = subprocess.run(
            [sys.executable, "-m", "pytest", "tests/properties_suite.py", "-q"],
            cwd=REPO_ROOT,
            capture_output=True,
            text=True,
            timeout=840,
        )
        tail_lines = "\n".join(proc.stdout.strip().splitlines()[-5:])
        assert proc.returncode == 0, f"gauntlet failed:\n{tail_lines}"
        assert " passed" in proc.stdout
