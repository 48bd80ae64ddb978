"""Feasible deployment pairs and accuracy-optimal selection.

A (model, platform) pair is feasible when its end-to-end response latency
meets the per-frame deadline and its per-inference energy fits the
platform's budget (platforms without a declared budget impose no energy
constraint).  Among feasible pairs the selection rule is accuracy-argmax
with a deterministic tie-break: higher accuracy first, then lower latency,
then lower energy, then lexicographic model id.

Latency is evaluated at a single representative network point — one RTT
value per cloud platform, typically a percentile of the platform's RTT
sampler; device platforms contribute zero network delay by definition.  In
queue-aware mode the raw inference latency is replaced by its
queue-amortized value at the sensing frame rate, and saturated pairs are
rejected outright.
"""

import math
from dataclasses import dataclass, replace
from typing import Mapping

from .catalog import ModelProfile, PlatformSpec, SensingConfig, platform_index
from .errors import ConfigError, UnstableQueueError
from .latency import amortized_latency, total_response_latency

REJECT_UNSTABLE = "unstable"
REJECT_DEADLINE = "deadline"
REJECT_ENERGY = "energy"


@dataclass(frozen=True)
class PairEvaluation:
    """Outcome of checking one (model, platform) pair against the constraints.

    ``total_latency`` is the value the deadline was checked against
    (``inf`` for saturated pairs in queue-aware mode).  ``reject_reason``
    names the first violated constraint — "unstable", "deadline" or
    "energy" — and is None for feasible pairs.
    """

    model_id: str
    platform_id: str
    kind: str
    total_latency: float
    energy: float
    accuracy: float
    feasible: bool
    reject_reason: str | None = None


@dataclass(frozen=True)
class FeasibilityReport:
    """All evaluated pairs plus the selected (model_id, platform_id), if any."""

    evaluated: tuple[PairEvaluation, ...]
    selected: tuple[str, str] | None = None

    @property
    def feasible(self) -> tuple[PairEvaluation, ...]:
        return tuple(e for e in self.evaluated if e.feasible)

    def restrict_kind(self, kind: str) -> "FeasibilityReport":
        """Sub-report containing only pairs on platforms of the given kind."""
        return FeasibilityReport(
            evaluated=tuple(e for e in self.evaluated if e.kind == kind)
        )


def feasibility_set(
    profiles: list[ModelProfile],
    platforms: list[PlatformSpec],
    sensing: SensingConfig,
    network_point: Mapping[str, float],
    *,
    queue_aware: bool = False,
) -> FeasibilityReport:
    """Evaluate every cataloged pair against deadline and energy constraints.

    Args:
        profiles, platforms: catalog contents (profiles reference platforms).
        sensing: supplies the deadline, control delay and — in queue-aware
            mode — the frame rate the inference queue is fed at.
        network_point: representative RTT per platform id, seconds.  Every
            cloud platform that hosts a profile needs an entry; device
            platforms may appear only with the value 0.0.
        queue_aware: replace each pair's inference latency with its
            queue-amortized value at the sensing frame rate; saturated pairs
            are rejected with reason "unstable".

    Raises:
        ConfigError: for network points naming unknown platforms, missing a
            cloud platform, carrying negative RTTs, or claiming nonzero
            network delay for a device platform.
    """
    by_id = platform_index(platforms)
    _check_network_point(network_point, by_id, profiles)

    evaluated: list[PairEvaluation] = []
    for profile in profiles:
        platform = by_id[profile.platform_id]
        rtt = 0.0 if platform.kind == "device" else float(network_point[platform.platform_id])

        reason: str | None = None
        if queue_aware:
            try:
                effective_inference = amortized_latency(
                    profile.inference_latency, sensing.frame_rate
                )
            except UnstableQueueError:
                effective_inference = math.inf
                reason = REJECT_UNSTABLE
        else:
            effective_inference = profile.inference_latency

        if math.isfinite(effective_inference):
            total = total_response_latency(rtt, effective_inference, sensing.control_delay)
        else:
            total = math.inf
        if reason is None and total > sensing.deadline:
            reason = REJECT_DEADLINE
        if (
            reason is None
            and platform.energy_budget is not None
            and profile.energy_per_inference > platform.energy_budget
        ):
            reason = REJECT_ENERGY

        evaluated.append(
            PairEvaluation(
                model_id=profile.model_id,
                platform_id=profile.platform_id,
                kind=platform.kind,
                total_latency=total,
                energy=profile.energy_per_inference,
                accuracy=profile.accuracy,
                feasible=reason is None,
                reject_reason=reason,
            )
        )
    return FeasibilityReport(evaluated=tuple(evaluated))


def select_optimal(report: FeasibilityReport) -> FeasibilityReport:
    """Fill ``selected`` with the accuracy-argmax over the feasible pairs.

    Tie-break order: higher accuracy, lower total latency, lower energy,
    lexicographically smaller model id (then platform id, for completeness).
    Returns a new report; ``selected`` stays None when nothing is feasible.
    """
    feasible = report.feasible
    if not feasible:
        return replace(report, selected=None)
    best = min(
        feasible,
        key=lambda e: (-e.accuracy, e.total_latency, e.energy, e.model_id, e.platform_id),
    )
    return replace(report, selected=(best.model_id, best.platform_id))


def select_by_kind(report: FeasibilityReport) -> dict[str, tuple[str, str] | None]:
    """Run the selection rule separately for each platform kind present."""
    kinds = sorted({e.kind for e in report.evaluated})
    return {
        kind: select_optimal(report.restrict_kind(kind)).selected for kind in kinds
    }


def _check_network_point(
    network_point: Mapping[str, float],
    by_id: Mapping[str, PlatformSpec],
    profiles: list[ModelProfile],
) -> None:
    for platform_id, rtt in network_point.items():
        spec = by_id.get(platform_id)
        if spec is None:
            raise ConfigError(f"network point names unknown platform {platform_id!r}")
        if math.isnan(rtt) or rtt < 0.0:
            raise ConfigError(
                f"network point for {platform_id!r} must be >= 0, got {rtt}"
            )
        if spec.kind == "device" and rtt != 0.0:
            raise ConfigError(
                f"device platform {platform_id!r} cannot have nonzero network delay"
            )
    used_cloud = {
        p.platform_id for p in profiles if by_id[p.platform_id].kind == "cloud"
    }
    missing = sorted(used_cloud - set(network_point))
    if missing:
        raise ConfigError(f"network point missing cloud platforms: {missing}")
