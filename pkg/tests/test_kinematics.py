"""Closed-form braking math against numeric-integration and bisection oracles."""

import pytest

from placesim.errors import DomainError
from placesim.kinematics import (
    DEFAULT_VEHICLE_CLASSES,
    MPS_PER_MPH,
    BrakingScenario,
    braking_distance,
    is_safe_static,
    is_safe_with_detection,
    mph_to_mps,
    mps_to_mph,
    reaction_budget,
    stopping_distance,
)

from oracles import bisect_reaction_budget, numeric_stopping_distance


def test_mph_conversion_exact_at_standard_speeds():
    assert MPS_PER_MPH == 0.44704
    assert mph_to_mps(20.0) == 8.9408
    assert mph_to_mps(40.0) == 17.8816
    assert mph_to_mps(60.0) == 26.8224
    assert mps_to_mph(8.9408) == pytest.approx(20.0, rel=1e-12)


def test_braking_distance_matches_numeric_integration():
    # values frozen from the trapezoid-integration oracle
    assert braking_distance(17.8816, 6.0) == pytest.approx(26.645968213333326, rel=1e-10)
    assert braking_distance(26.8224, 4.0) == pytest.approx(89.93014272, rel=1e-10)
    assert braking_distance(17.8816, 6.0) == pytest.approx(
        numeric_stopping_distance(17.8816, 6.0, 0.0), rel=1e-10
    )


def test_braking_distance_stationary_vehicle_is_zero():
    assert braking_distance(0.0, 6.0) == 0.0


def test_braking_distance_rejects_nonpositive_deceleration():
    with pytest.raises(DomainError):
        braking_distance(10.0, 0.0)
    with pytest.raises(DomainError):
        braking_distance(10.0, -1.0)


def test_stopping_distance_examples_frozen_from_oracle():
    assert stopping_distance(17.8816, 6.0, 0.051) == pytest.approx(
        27.55792981333335, rel=1e-10
    )
    assert stopping_distance(26.8224, 4.0, 0.160) == pytest.approx(
        94.22172672, rel=1e-10
    )
    assert stopping_distance(26.8224, 4.0, 0.160) == pytest.approx(
        numeric_stopping_distance(26.8224, 4.0, 0.160), rel=1e-10
    )


def test_stopping_distance_zero_delay_reduces_to_braking_distance():
    assert stopping_distance(12.0, 5.0, 0.0) == braking_distance(12.0, 5.0)


def test_stopping_distance_rejects_negative_delay():
    with pytest.raises(DomainError):
        stopping_distance(10.0, 6.0, -0.001)


def test_reaction_budget_matches_bisection_oracle():
    assert reaction_budget(17.8816, 6.0, 100.0) == pytest.approx(
        bisect_reaction_budget(17.8816, 6.0, 100.0), abs=1e-9
    )
    assert reaction_budget(26.8224, 4.0, 100.0) == pytest.approx(
        bisect_reaction_budget(26.8224, 4.0, 100.0), abs=1e-9
    )
    # frozen oracle outputs
    assert reaction_budget(17.8816, 6.0, 100.0) == pytest.approx(4.1022073968, abs=1e-9)
    assert reaction_budget(26.8224, 4.0, 100.0) == pytest.approx(0.3754271534, abs=1e-9)


def test_reaction_budget_zero_when_gap_equals_braking_distance():
    v0, a = 14.0, 5.5
    assert reaction_budget(v0, a, braking_distance(v0, a)) == pytest.approx(0.0, abs=1e-12)


def test_reaction_budget_negative_when_gap_too_small():
    v0, a = 26.8224, 4.0
    assert reaction_budget(v0, a, 20.0) < 0.0


def test_is_safe_static_strict_at_boundary():
    v0, a = 15.0, 5.0
    scenario = BrakingScenario(v0, a, braking_distance(v0, a))
    # zero budget: stopping exactly at the obstacle counts as unsafe
    assert not is_safe_static(0.0, scenario)
    roomy = BrakingScenario(v0, a, braking_distance(v0, a) + 1.0)
    assert is_safe_static(0.0, roomy)


def test_is_safe_static_matches_budget_comparison():
    scenario = BrakingScenario(17.8816, 6.0, 100.0)
    assert is_safe_static(0.022 + 0.029, scenario)       # 0.051 < 4.1022
    assert not is_safe_static(4.2, scenario)


def test_is_safe_with_detection_zero_detection_reduces_to_static():
    scenario = BrakingScenario(17.8816, 6.0, 100.0)
    for network, processing in [(0.0, 0.0), (0.022, 0.029), (1.0, 2.0)]:
        assert is_safe_with_detection(0.0, network, processing, scenario) == is_safe_static(
            network + processing, scenario
        )


def test_is_safe_with_detection_examples():
    scenario = BrakingScenario(17.8816, 6.0, 100.0)  # budget 4.1022 s
    assert is_safe_with_detection(2.0, 0.022, 0.029, scenario)
    assert not is_safe_with_detection(4.1, 0.022, 0.029, scenario)
    tight = BrakingScenario(26.8224, 4.0, 100.0)     # budget 0.3754 s
    assert not is_safe_with_detection(0.3, 0.1, 0.0, tight)


def test_is_safe_rejects_negative_delays():
    scenario = BrakingScenario(10.0, 5.0, 50.0)
    with pytest.raises(DomainError):
        is_safe_static(-0.1, scenario)
    with pytest.raises(DomainError):
        is_safe_with_detection(-0.1, 0.0, 0.0, scenario)


def test_braking_scenario_validates_fields():
    with pytest.raises(DomainError):
        BrakingScenario(0.0, 6.0, 100.0)
    with pytest.raises(DomainError):
        BrakingScenario(10.0, 0.0, 100.0)
    with pytest.raises(DomainError):
        BrakingScenario(10.0, 6.0, -1.0)


def test_default_vehicle_classes_cover_three_types():
    assert set(DEFAULT_VEHICLE_CLASSES) == {"car", "truck", "motorbike"}
    truck = DEFAULT_VEHICLE_CLASSES["truck"]
    assert truck.deceleration < DEFAULT_VEHICLE_CLASSES["car"].deceleration
    assert DEFAULT_VEHICLE_CLASSES["motorbike"].deceleration > 0
    for cls in DEFAULT_VEHICLE_CLASSES.values():
        assert cls.speed_presets == (8.9408, 17.8816, 26.8224)
