"""Straight-line braking kinematics for an emergency-stop maneuver.

A vehicle travels at constant speed ``v0`` toward a stationary obstacle.
Some detection-and-actuation delay elapses before the brakes engage, after
which the vehicle decelerates uniformly at ``a`` until standstill.  The
functions below answer the three questions that matter for that maneuver:
how far braking itself takes (``v0**2 / (2*a)``), how far the vehicle
travels in total once the delay is added (``v0 * delay + v0**2 / (2*a)``),
and how much delay a given initial gap can absorb before a stop is no
longer possible (``s_avail / v0 - v0 / (2*a)``).

Safety predicates use strict inequality throughout: a vehicle that comes to
rest exactly at the obstacle is counted as a collision.
"""

from dataclasses import dataclass, field

from .errors import DomainError

# Exact statute-mile conversion: 1 mph = 0.44704 m/s.
MPS_PER_MPH = 0.44704


def mph_to_mps(speed_mph: float) -> float:
    """Convert miles per hour to meters per second."""
    return speed_mph * MPS_PER_MPH


def mps_to_mph(speed_mps: float) -> float:
    """Convert meters per second to miles per hour."""
    return speed_mps / MPS_PER_MPH


@dataclass(frozen=True)
class BrakingScenario:
    """A single emergency-stop situation.

    Attributes:
        initial_speed: vehicle speed when the obstacle becomes observable, m/s.
        deceleration: constant braking deceleration, m/s^2 (positive).
        available_distance: gap to the obstacle at the instant it first
            becomes observable, meters.
    """

    initial_speed: float
    deceleration: float
    available_distance: float

    def __post_init__(self) -> None:
        if self.initial_speed <= 0.0:
            raise DomainError(f"initial_speed must be > 0, got {self.initial_speed}")
        if self.deceleration <= 0.0:
            raise DomainError(f"deceleration must be > 0, got {self.deceleration}")
        if self.available_distance < 0.0:
            raise DomainError(
                f"available_distance must be >= 0, got {self.available_distance}"
            )


@dataclass(frozen=True)
class VehicleClass:
    """Named vehicle category with a braking capability and speed presets.

    The shipped defaults are illustrative figures for dry pavement, not
    measurements of any particular vehicle.
    """

    name: str
    deceleration: float  # m/s^2
    speed_presets: tuple[float, ...] = field(
        default=(mph_to_mps(20.0), mph_to_mps(40.0), mph_to_mps(60.0))
    )

    def __post_init__(self) -> None:
        if self.deceleration <= 0.0:
            raise DomainError(f"deceleration must be > 0, got {self.deceleration}")


DEFAULT_VEHICLE_CLASSES: dict[str, VehicleClass] = {
    "car": VehicleClass("car", 6.0),
    "truck": VehicleClass("truck", 4.0),
    "motorbike": VehicleClass("motorbike", 7.0),
}


def braking_distance(initial_speed: float, deceleration: float) -> float:
    """Distance covered from brake engagement to standstill: v0^2 / (2 a)."""
    _check_speed_decel(initial_speed, deceleration, allow_stationary=True)
    return initial_speed * initial_speed / (2.0 * deceleration)


def stopping_distance(
    initial_speed: float, deceleration: float, delay: float
) -> float:
    """Total distance covered from obstacle observability to standstill.

    The vehicle keeps its speed for `delay` seconds (sensing, inference,
    actuation), then brakes:  v0 * delay + v0^2 / (2 a).
    """
    _check_speed_decel(initial_speed, deceleration, allow_stationary=True)
    if delay < 0.0:
        raise DomainError(f"delay must be >= 0, got {delay}")
    return initial_speed * delay + braking_distance(initial_speed, deceleration)


def reaction_budget(
    initial_speed: float, deceleration: float, available_distance: float
) -> float:
    """Largest total delay that still permits a full stop short of the obstacle.

    Solves stopping_distance(v0, a, delay) = s_avail for delay:

        budget = s_avail / v0 - v0 / (2 a)

    A negative return value means the gap cannot absorb *any* delay — the
    obstacle is already inside the braking distance.  The value is returned
    unclamped so callers can see by how much the scenario is infeasible.
    """
    _check_speed_decel(initial_speed, deceleration)
    if available_distance < 0.0:
        raise DomainError(f"available_distance must be >= 0, got {available_distance}")
    return available_distance / initial_speed - initial_speed / (2.0 * deceleration)


def is_safe_static(total_delay: float, scenario: BrakingScenario) -> bool:
    """True iff a stop completes strictly short of the obstacle.

    `total_delay` is everything between the obstacle becoming observable and
    brake engagement.  Grazing contact (stopping exactly at the obstacle)
    counts as unsafe.
    """
    if total_delay < 0.0:
        raise DomainError(f"total_delay must be >= 0, got {total_delay}")
    s_stop = stopping_distance(
        scenario.initial_speed, scenario.deceleration, total_delay
    )
    return s_stop < scenario.available_distance


def is_safe_with_detection(
    detection_delay: float,
    network_delay: float,
    processing_delay: float,
    scenario: BrakingScenario,
) -> bool:
    """Safety predicate with the delay split into its pipeline components.

    `detection_delay` covers observability-to-capture (frame quantization and
    any missed detections), `network_delay` the round trip to the compute
    platform, and `processing_delay` everything else between capture and
    brake engagement (queueing, inference, actuation).  Equivalent to
    ``is_safe_static`` on the summed delay; strict inequality at the boundary.
    """
    for name, value in (
        ("detection_delay", detection_delay),
        ("network_delay", network_delay),
        ("processing_delay", processing_delay),
    ):
        if value < 0.0:
            raise DomainError(f"{name} must be >= 0, got {value}")
    return is_safe_static(
        detection_delay + network_delay + processing_delay, scenario
    )


def _check_speed_decel(
    initial_speed: float, deceleration: float, *, allow_stationary: bool = False
) -> None:
    if allow_stationary:
        if initial_speed < 0.0:
            raise DomainError(f"initial_speed must be >= 0, got {initial_speed}")
    elif initial_speed <= 0.0:
        raise DomainError(f"initial_speed must be > 0, got {initial_speed}")
    if deceleration <= 0.0:
        raise DomainError(f"deceleration must be > 0, got {deceleration}")
