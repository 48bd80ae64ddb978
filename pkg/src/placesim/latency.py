"""Response-latency composition and the device-vs-cloud break-even point.

The end-to-end response time of one detection request decomposes into
network transfer, model inference, and control actuation:

    T = tau_nw + tau_inf + tau_ctrl

Under sustained frame traffic the inference stage behaves like a
single-server queue fed at the frame rate F.  With Poisson arrivals and
exponential service the mean time a request spends in that stage
(waiting + service) is the classic M/M/1 sojourn

    tau / (1 - F * tau)        (stable iff F * tau < 1),

which this module calls the *queue-amortized* latency.  Comparing the
amortized device latency against the amortized cloud latency yields the
largest round-trip time for which offloading still wins:

    break_even = amortized(tau_device) - amortized(tau_cloud)

Offloading is preferred exactly when the actual RTT is strictly below that
break-even value; ties keep the work on the device.
"""

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError, UnstableQueueError, UnstableQueueWarning


@dataclass(frozen=True)
class QueueModel:
    """An M/M/1 service stage: mean service time and Poisson arrival rate.

    Attributes:
        service_time: mean time to serve one request, seconds.
        arrival_rate: request arrival rate, Hz.
    """

    service_time: float
    arrival_rate: float

    def __post_init__(self) -> None:
        if self.service_time <= 0.0:
            raise DomainError(f"service_time must be > 0, got {self.service_time}")
        if self.arrival_rate < 0.0:
            raise DomainError(f"arrival_rate must be >= 0, got {self.arrival_rate}")

    @property
    def utilization(self) -> float:
        """Offered load rho = arrival_rate * service_time."""
        return self.arrival_rate * self.service_time

    @property
    def is_stable(self) -> bool:
        """True iff the queue has a stationary regime (rho < 1)."""
        return self.utilization < 1.0

    @property
    def mean_sojourn(self) -> float:
        """Mean waiting-plus-service time; requires stability."""
        return amortized_latency(self.service_time, self.arrival_rate)


def total_response_latency(
    network_delay: float, inference_latency: float, control_delay: float
) -> float:
    """Sum of the three pipeline legs; every argument must be >= 0."""
    for name, value in (
        ("network_delay", network_delay),
        ("inference_latency", inference_latency),
        ("control_delay", control_delay),
    ):
        if value < 0.0:
            raise DomainError(f"{name} must be >= 0, got {value}")
    return network_delay + inference_latency + control_delay


def amortized_latency(service_time: float, arrival_rate: float) -> float:
    """Mean queue-inclusive latency of a service stage fed at `arrival_rate`.

    Returns tau / (1 - rho) with rho = arrival_rate * service_time.  For
    arrival_rate == 0 this degenerates to the bare service time.

    Raises:
        UnstableQueueError: if rho >= 1 (no stationary mean exists).
        DomainError: on non-positive service time or negative rate.
    """
    if service_time <= 0.0:
        raise DomainError(f"service_time must be > 0, got {service_time}")
    if arrival_rate < 0.0:
        raise DomainError(f"arrival_rate must be >= 0, got {arrival_rate}")
    rho = arrival_rate * service_time
    if rho >= 1.0:
        raise UnstableQueueError(
            f"utilization {rho:.6g} >= 1: queue has no stationary mean "
            f"(service_time={service_time:.6g}, arrival_rate={arrival_rate:.6g})"
        )
    return service_time / (1.0 - rho)


def cloud_break_even(
    device_service: float, cloud_service: float, arrival_rate: float
) -> float:
    """Largest RTT at which offloading still beats on-device execution.

    Computed as amortized(device) - amortized(cloud) at the given arrival
    rate.  May be negative when the cloud model is slower than the device
    model (offloading then never wins).  Both queues must be stable.
    """
    return amortized_latency(device_service, arrival_rate) - amortized_latency(
        cloud_service, arrival_rate
    )


def prefer_cloud(
    round_trip_time: float,
    device_service: float,
    cloud_service: float,
    arrival_rate: float,
) -> bool:
    """Decide whether offloading strictly lowers mean response latency.

    True iff round_trip_time < cloud_break_even(...).  A tie keeps the work
    on the device.  The device queue must be stable; a saturated *cloud*
    queue is not an error — offloading to it can never help, so the verdict
    is False and an UnstableQueueWarning is emitted for machine consumption.
    """
    if round_trip_time < 0.0:
        raise DomainError(f"round_trip_time must be >= 0, got {round_trip_time}")
    device_amortized = amortized_latency(device_service, arrival_rate)
    try:
        cloud_amortized = amortized_latency(cloud_service, arrival_rate)
    except UnstableQueueError:
        warnings.warn(
            f"cloud queue saturated at arrival_rate={arrival_rate:.6g} "
            f"(service_time={cloud_service:.6g}); keeping work on device",
            UnstableQueueWarning,
            stacklevel=2,
        )
        return False
    if not math.isfinite(device_amortized):  # pragma: no cover - guarded above
        return False
    return round_trip_time < device_amortized - cloud_amortized
