"""Monte-Carlo validation of the single-server queue model.

Simulates an M/M/1 queue event by event — exponential interarrivals,
exponential service, one FIFO server — and reports the empirical mean
time-in-system so it can be compared against the closed form
tau / (1 - rho).  The simulation is event-driven (arrival and departure
instants computed exactly), never time-stepped, so the only error left is
statistical.

The first 10% of customers are discarded as warm-up.  Unstable inputs
(rho >= 1) are allowed: the run still executes and the returned stats are
flagged, since watching the sampled sojourn diverge is itself useful.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

WARMUP_FRACTION = 0.10


@dataclass(frozen=True)
class Mm1Stats:
    """Empirical results of one M/M/1 run.

    ``customers_served`` counts the customers that contribute to the means,
    i.e. after the warm-up discard.  ``mean_in_system`` is the time-average
    number of customers in system over the measurement window, and
    ``utilization_observed`` the fraction of that window the server was
    busy.  ``unstable`` marks runs whose offered load was >= 1.
    """

    customers_served: int
    mean_sojourn: float
    mean_wait: float
    mean_in_system: float
    utilization_observed: float
    unstable: bool
    seed: int


def simulate_mm1(
    arrival_rate: float,
    mean_service: float,
    customers: int,
    seed: int = 0,
) -> Mm1Stats:
    """Run an M/M/1 queue for a fixed number of customers.

    Args:
        arrival_rate: Poisson arrival rate, Hz (> 0).
        mean_service: mean of the exponential service time, seconds (> 0).
        customers: number of customers to push through (>= 10).
        seed: RNG seed; a given seed reproduces the run bit for bit.

    Returns:
        Mm1Stats over the post-warm-up customers.
    """
    if arrival_rate <= 0.0:
        raise DomainError(f"arrival_rate must be > 0, got {arrival_rate}")
    if mean_service <= 0.0:
        raise DomainError(f"mean_service must be > 0, got {mean_service}")
    if customers < 10:
        raise DomainError(f"customers must be >= 10, got {customers}")

    rng = np.random.default_rng(seed)
    interarrivals = rng.exponential(1.0 / arrival_rate, customers)
    services = rng.exponential(mean_service, customers)
    arrivals = np.cumsum(interarrivals)

    # Event-driven pass: the server takes customer i at the later of the
    # arrival instant and the previous departure (FIFO, single server).
    departures = np.empty(customers)
    previous_departure = 0.0
    for i in range(customers):
        start = arrivals[i] if arrivals[i] > previous_departure else previous_departure
        previous_departure = start + services[i]
        departures[i] = previous_departure

    warmup = int(customers * WARMUP_FRACTION)
    sojourns = departures[warmup:] - arrivals[warmup:]
    waits = sojourns - services[warmup:]

    # Time-average number in system over the measurement window, integrated
    # from the merged arrival/departure step function.  Departures of a FIFO
    # single server are already sorted; arrivals are sorted by construction.
    window_start = arrivals[warmup]
    window_end = departures[-1]
    times = np.concatenate([arrivals, departures])
    deltas = np.concatenate([np.ones(customers), -np.ones(customers)])
    order = np.argsort(times, kind="stable")
    times = times[order]
    counts = np.cumsum(deltas[order])
    # Occupancy between consecutive events, clipped to the window.
    seg_start = np.clip(times[:-1], window_start, window_end)
    seg_end = np.clip(times[1:], window_start, window_end)
    seg_len = seg_end - seg_start
    occupancy = counts[:-1]
    window = window_end - window_start
    mean_in_system = float(np.dot(occupancy, seg_len) / window) if window > 0 else 0.0
    busy = float(np.dot((occupancy > 0).astype(float), seg_len) / window) if window > 0 else 0.0

    return Mm1Stats(
        customers_served=customers - warmup,
        mean_sojourn=float(sojourns.mean()),
        mean_wait=float(waits.mean()),
        mean_in_system=mean_in_system,
        utilization_observed=busy,
        unstable=arrival_rate * mean_service >= 1.0,
        seed=seed,
    )
