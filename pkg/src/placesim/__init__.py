"""Placement and braking-loop simulation for in-vehicle obstacle detection.

The package answers two coupled questions for a camera-based emergency
braking pipeline:

* **Where should inference run?**  ``catalog`` + ``feasibility`` + ``latency``
  evaluate device/cloud model pairs under a deadline and an energy budget,
  with optional queue-amortized latencies.
* **Does the chosen deployment stop the vehicle in time?**  ``kinematics``
  answers in closed form; ``sim`` replays the full capture → inference →
  confirm → brake pipeline as a discrete-event simulation, including queueing
  and stochastic round trips (``netmodel``).

``queue_mc`` cross-checks the queueing closed forms by Monte Carlo, and
``cli`` exposes everything as the ``placesim`` command.
"""

__version__ = "0.1.0"

from .catalog import (
    ModelProfile,
    PlatformSpec,
    SensingConfig,
    load_catalog,
    load_networks,
    save_catalog,
)
from .errors import (
    ConfigError,
    DomainError,
    HorizonError,
    PlacesimError,
    UnstableQueueError,
    UnstableQueueWarning,
)
from .feasibility import (
    FeasibilityReport,
    PairEvaluation,
    feasibility_set,
    select_by_kind,
    select_optimal,
)
from .kinematics import (
    MPS_PER_MPH,
    BrakingScenario,
    VehicleClass,
    braking_distance,
    is_safe_static,
    is_safe_with_detection,
    mph_to_mps,
    mps_to_mph,
    reaction_budget,
    stopping_distance,
)
from .latency import (
    QueueModel,
    amortized_latency,
    cloud_break_even,
    prefer_cloud,
    total_response_latency,
)
from .netmodel import (
    EmpiricalDelays,
    FixedDelay,
    LatencySampler,
    PercentileTable,
    ShiftedLognormal,
    load_samples,
    sampler_from_config,
)
from .queue_mc import Mm1Stats, simulate_mm1
from .sim import (
    Deployment,
    DetectionModel,
    EventKind,
    PipelineStats,
    SimConfig,
    SimEvent,
    SimResult,
    SweepGrid,
    SweepPoint,
    measure_pipeline,
    run,
    sweep,
)

__all__ = [
    "__version__",
    # errors
    "PlacesimError", "ConfigError", "DomainError", "HorizonError",
    "UnstableQueueError", "UnstableQueueWarning",
    # catalog
    "ModelProfile", "PlatformSpec", "SensingConfig",
    "load_catalog", "load_networks", "save_catalog",
    # kinematics
    "MPS_PER_MPH", "BrakingScenario", "VehicleClass",
    "mph_to_mps", "mps_to_mph", "braking_distance", "stopping_distance",
    "reaction_budget", "is_safe_static", "is_safe_with_detection",
    # latency / queueing
    "QueueModel", "total_response_latency", "amortized_latency",
    "cloud_break_even", "prefer_cloud",
    # network samplers
    "LatencySampler", "FixedDelay", "PercentileTable", "EmpiricalDelays",
    "ShiftedLognormal", "load_samples", "sampler_from_config",
    # placement
    "PairEvaluation", "FeasibilityReport", "feasibility_set",
    "select_optimal", "select_by_kind",
    # simulation
    "SimConfig", "SimResult", "SimEvent", "EventKind", "DetectionModel",
    "Deployment", "SweepGrid", "SweepPoint", "PipelineStats",
    "run", "sweep", "measure_pipeline",
    # Monte-Carlo queue check
    "Mm1Stats", "simulate_mm1",
]
