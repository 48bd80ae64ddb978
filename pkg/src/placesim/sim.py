"""Event-driven simulation of a camera-based emergency-braking loop.

One vehicle drives at constant speed toward a stationary obstacle while a
perception pipeline runs:

1. Frames are captured at t = n / frame_rate (n = 0, 1, ...) until braking
   force is applied; the camera sees nothing farther than the visibility
   range.
2. A captured frame *detects* the obstacle iff the obstacle is within the
   detection range and a per-frame Bernoulli draw succeeds (probability 1
   by default).
3. Every captured frame is dispatched to the compute platform.  For cloud
   platforms one round-trip time r is sampled at capture; the frame reaches
   the platform r/2 later, waits in a FIFO queue shared with any background
   jobs (Poisson arrivals, same service-time distribution), is served by the
   single inference server, and its result returns r/2 after service
   completes.  Device platforms use r = 0 with identical queue semantics.
4. When the results of `confirm_frames` consecutive detecting frames (by
   frame index) have all been received, a brake command is issued; braking
   force engages `control_delay` seconds later.  From that instant the
   vehicle decelerates uniformly until standstill — or until it reaches the
   obstacle, whichever comes first.  Stopping exactly at the obstacle
   counts as a collision.

The run terminates at standstill or collision.  A guard aborts any run
whose events would pass gap / initial_speed + 60 s, so pathological
configurations become errors instead of hangs.  Every stochastic component
(RTT, service times, detection draws, background traffic) draws from its
own seeded substream, so a (config, seed) pair reproduces the event trace
bit for bit, and a fully deterministic config produces a trace with no
randomness at all.

`measure_pipeline` drives the same dispatch/queue/return pipeline without
the vehicle ("long road" mode): frames flow forever, nothing brakes, and
the measured quantity is the per-frame queue sojourn.  Frame arrivals can
be kept periodic (matching `run`) or switched to Poisson, which makes the
pipeline an exact M/M/1 system for direct comparison against the
closed-form mean.
"""

import heapq
import itertools
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .catalog import ModelProfile, PlatformSpec, SensingConfig
from .errors import ConfigError, HorizonError
from .kinematics import VehicleClass
from .netmodel import LatencySampler

HORIZON_MARGIN_S = 60.0
SERVICE_DISTRIBUTIONS = ("deterministic", "exponential")


class EventKind(str, Enum):
    FRAME_CAPTURED = "FrameCaptured"
    FRAME_ARRIVED = "FrameArrivedAtPlatform"
    INFERENCE_STARTED = "InferenceStarted"
    INFERENCE_COMPLETED = "InferenceCompleted"
    RESULT_RECEIVED = "ResultReceived"
    BRAKE_ISSUED = "BrakeIssued"
    VEHICLE_STOPPED = "VehicleStopped"
    COLLISION = "Collision"


@dataclass(frozen=True)
class SimEvent:
    """One row of the event trace."""

    time: float
    kind: EventKind
    frame: int | None
    vehicle_position: float
    obstacle_distance: float


@dataclass(frozen=True)
class DetectionModel:
    """What the perception stack can see.

    Attributes:
        detection_range: max distance at which a frame can detect, meters.
        visibility_range: max distance at which the obstacle is observable
            at all (>= detection_range), meters.
        per_frame_probability: detection probability for a frame with the
            obstacle in range; 1.0 makes detection deterministic.
    """

    detection_range: float
    visibility_range: float
    per_frame_probability: float = 1.0

    def __post_init__(self) -> None:
        if self.detection_range <= 0.0:
            raise ConfigError(f"detection_range must be > 0, got {self.detection_range}")
        if self.visibility_range < self.detection_range:
            raise ConfigError(
                f"visibility_range ({self.visibility_range}) must be >= "
                f"detection_range ({self.detection_range})"
            )
        if not 0.0 < self.per_frame_probability <= 1.0:
            raise ConfigError(
                f"per_frame_probability must be in (0, 1], got {self.per_frame_probability}"
            )


@dataclass(frozen=True)
class SimConfig:
    """Everything one braking-loop run needs.

    `network` must be a sampler for cloud platforms and None for device
    platforms.  `service_inflation` scales the inference time to model
    co-located contention (1.0 = none).  `background_arrival_rate` adds a
    Poisson stream of same-distribution jobs to the inference queue.
    """

    gap: float
    initial_speed: float
    deceleration: float
    profile: ModelProfile
    platform: PlatformSpec
    sensing: SensingConfig
    detection: DetectionModel
    network: LatencySampler | None = None
    confirm_frames: int = 1
    service_distribution: str = "deterministic"
    background_arrival_rate: float = 0.0
    service_inflation: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.gap <= 0.0:
            raise ConfigError(f"gap must be > 0, got {self.gap}")
        if self.initial_speed <= 0.0:
            raise ConfigError(f"initial_speed must be > 0, got {self.initial_speed}")
        if self.deceleration <= 0.0:
            raise ConfigError(f"deceleration must be > 0, got {self.deceleration}")
        if self.detection.visibility_range >= self.gap:
            raise ConfigError(
                f"visibility_range ({self.detection.visibility_range}) must be < "
                f"initial gap ({self.gap})"
            )
        if self.profile.platform_id != self.platform.platform_id:
            raise ConfigError(
                f"profile {self.profile.model_id!r} is measured on "
                f"{self.profile.platform_id!r}, not {self.platform.platform_id!r}"
            )
        if self.platform.kind == "cloud" and self.network is None:
            raise ConfigError(
                f"cloud platform {self.platform.platform_id!r} needs a network sampler"
            )
        if self.platform.kind == "device" and self.network is not None:
            raise ConfigError(
                f"device platform {self.platform.platform_id!r} takes no network sampler"
            )
        if not isinstance(self.confirm_frames, int) or self.confirm_frames < 1:
            raise ConfigError(f"confirm_frames must be an int >= 1, got {self.confirm_frames}")
        if self.service_distribution not in SERVICE_DISTRIBUTIONS:
            raise ConfigError(
                f"service_distribution must be one of {SERVICE_DISTRIBUTIONS}, "
                f"got {self.service_distribution!r}"
            )
        if self.background_arrival_rate < 0.0:
            raise ConfigError(
                f"background_arrival_rate must be >= 0, got {self.background_arrival_rate}"
            )
        if self.service_inflation <= 0.0:
            raise ConfigError(f"service_inflation must be > 0, got {self.service_inflation}")


@dataclass(frozen=True)
class SimResult:
    """Outcome of one run.

    Times are None when the corresponding milestone never happened (e.g. no
    detection before the collision).  `margin` equals `d_stop` for safe
    runs and 0.0 for collisions — the shortfall is encoded by the outcome,
    not by a sign.  `total_inference_energy` is dispatched frames times the
    profile's per-inference energy.
    """

    events: tuple[SimEvent, ...]
    t_obs: float
    t_det: float | None
    t_brake: float | None
    t_stop: float | None
    d_capture: float | None
    d_brake: float | None
    d_stop: float | None
    detection_delay: float | None
    outcome: str  # "safe" | "collision"
    margin: float
    frames_dispatched: int
    total_inference_energy: float


# Internal heap event tags (trace-visible kinds are derived in the handlers).
_CAPTURE = 0
_ARRIVAL = 1
_SERVICE_DONE = 2
_RESULT = 3
_BG_ARRIVAL = 4
_BRAKE_APPLY = 5
_CRUISE_HIT = 6
_TERMINAL_STOP = 7
_TERMINAL_HIT = 8


def run(config: SimConfig) -> SimResult:
    """Simulate one braking-loop run; see the module docstring for semantics."""
    config.validate()
    v0 = config.initial_speed
    gap = config.gap
    decel = config.deceleration
    interval = config.sensing.frame_interval
    control_delay = config.sensing.control_delay
    det = config.detection
    k = config.confirm_frames
    horizon = gap / v0 + HORIZON_MARGIN_S
    is_cloud = config.platform.kind == "cloud"
    exponential = config.service_distribution == "exponential"
    tau_eff = config.profile.inference_latency * config.service_inflation

    streams = np.random.SeedSequence(config.seed).spawn(5)
    rng_rtt, rng_service, rng_detect, rng_bg_arrival, rng_bg_service = (
        np.random.default_rng(s) for s in streams
    )

    heap: list[tuple[float, int, int, tuple]] = []
    seq = itertools.count()

    def schedule(t: float, tag: int, payload: tuple = ()) -> None:
        heapq.heappush(heap, (t, next(seq), tag, payload))

    # Piecewise motion: cruise until braking engages, then uniform decel.
    brake_apply_time: float | None = None
    brake_pos = 0.0
    final_stop_time: float | None = None
    final_stop_pos = 0.0

    def position(t: float) -> float:
        if brake_apply_time is None or t <= brake_apply_time:
            return v0 * t
        if final_stop_time is not None and t >= final_stop_time:
            return final_stop_pos
        dt = t - brake_apply_time
        return brake_pos + v0 * dt - 0.5 * decel * dt * dt

    events: list[SimEvent] = []

    def emit(t: float, kind: EventKind, frame: int | None = None,
             pos: float | None = None, dist: float | None = None) -> None:
        p = position(t) if pos is None else pos
        events.append(SimEvent(t, kind, frame, p, gap - p if dist is None else dist))

    # Server + confirmation state.
    pending: deque[tuple] = deque()  # (frame_or_None, rtt, service, detecting)
    server_busy = False
    result_flags: dict[int, bool] = {}
    capture_meta: dict[int, tuple[float, float]] = {}  # frame -> (time, distance)
    frames_dispatched = 0
    brake_issued = False
    brake_applied = False
    cruise_hit_cancelled = False
    t_det = d_capture = t_brake = d_brake = None
    terminal: tuple[str, float] | None = None

    def begin_service(t: float, job: tuple) -> None:
        nonlocal server_busy
        server_busy = True
        frame, _, service, _ = job
        if frame is not None:
            emit(t, EventKind.INFERENCE_STARTED, frame)
        schedule(t + service, _SERVICE_DONE, job)

    def on_result(t: float, frame: int, detecting: bool) -> None:
        nonlocal brake_issued, t_det, d_capture
        result_flags[frame] = detecting
        if brake_issued or not detecting:
            return
        # A streak of k consecutive detecting frames can only complete at the
        # receipt of one of its members, so only windows containing `frame`
        # need checking; take the lowest qualifying start.
        for start in range(max(0, frame - k + 1), frame + 1):
            if all(result_flags.get(j) is True for j in range(start, start + k)):
                brake_issued = True
                t_det, d_capture = capture_meta[start]
                emit(t, EventKind.BRAKE_ISSUED)
                schedule(t + control_delay, _BRAKE_APPLY)
                return

    schedule(0.0, _CAPTURE, (0,))
    schedule(gap / v0, _CRUISE_HIT)
    if config.background_arrival_rate > 0.0:
        schedule(
            float(rng_bg_arrival.exponential(1.0 / config.background_arrival_rate)),
            _BG_ARRIVAL,
        )

    while heap:
        t, _, tag, payload = heapq.heappop(heap)
        if t > horizon:
            raise HorizonError(
                f"simulation passed {horizon:.6g} s (gap/initial_speed + "
                f"{HORIZON_MARGIN_S:.6g} s) without terminating"
            )

        if tag == _CAPTURE:
            if brake_applied:
                continue  # camera halted, and no dispatch after braking starts
            (n,) = payload
            pos = position(t)
            dist = gap - pos
            emit(t, EventKind.FRAME_CAPTURED, n, pos, dist)
            detecting = dist <= det.detection_range and (
                det.per_frame_probability >= 1.0
                or float(rng_detect.random()) < det.per_frame_probability
            )
            rtt = float(config.network.sample(rng_rtt)) if is_cloud else 0.0
            service = float(rng_service.exponential(tau_eff)) if exponential else tau_eff
            capture_meta[n] = (t, dist)
            frames_dispatched += 1
            schedule(t + rtt / 2.0, _ARRIVAL, (n, rtt, service, detecting))
            schedule((n + 1) * interval, _CAPTURE, (n + 1,))

        elif tag == _ARRIVAL:
            n = payload[0]
            emit(t, EventKind.FRAME_ARRIVED, n)
            if server_busy:
                pending.append(payload)
            else:
                begin_service(t, payload)

        elif tag == _BG_ARRIVAL:
            schedule(
                t + float(rng_bg_arrival.exponential(1.0 / config.background_arrival_rate)),
                _BG_ARRIVAL,
            )
            service = (
                float(rng_bg_service.exponential(tau_eff)) if exponential else tau_eff
            )
            job = (None, 0.0, service, False)
            if server_busy:
                pending.append(job)
            else:
                begin_service(t, job)

        elif tag == _SERVICE_DONE:
            frame, rtt, _, detecting = payload
            if frame is not None:
                emit(t, EventKind.INFERENCE_COMPLETED, frame)
                schedule(t + rtt / 2.0, _RESULT, (frame, detecting))
            if pending:
                begin_service(t, pending.popleft())
            else:
                server_busy = False

        elif tag == _RESULT:
            frame, detecting = payload
            emit(t, EventKind.RESULT_RECEIVED, frame)
            on_result(t, frame, detecting)

        elif tag == _BRAKE_APPLY:
            brake_applied = True
            cruise_hit_cancelled = True
            brake_apply_time = t
            brake_pos = v0 * t
            t_brake = t
            d_brake = gap - brake_pos
            stop_pos = brake_pos + v0 * v0 / (2.0 * decel)
            if stop_pos < gap:
                final_stop_time = t + v0 / decel
                final_stop_pos = stop_pos
                schedule(final_stop_time, _TERMINAL_STOP)
            else:
                # Reaches the obstacle while still moving (grazing included).
                dt_hit = (v0 - math.sqrt(max(v0 * v0 - 2.0 * decel * (gap - brake_pos), 0.0))) / decel
                schedule(t + dt_hit, _TERMINAL_HIT)

        elif tag == _CRUISE_HIT:
            if cruise_hit_cancelled:
                continue
            emit(t, EventKind.COLLISION, pos=gap, dist=0.0)
            terminal = ("collision", t)
            break

        elif tag == _TERMINAL_HIT:
            emit(t, EventKind.COLLISION, pos=gap, dist=0.0)
            terminal = ("collision", t)
            break

        elif tag == _TERMINAL_STOP:
            emit(t, EventKind.VEHICLE_STOPPED, pos=final_stop_pos)
            terminal = ("safe", t)
            break

    if terminal is None:  # pragma: no cover - a terminal event is always scheduled
        raise RuntimeError("event queue drained without reaching a terminal state")

    outcome, t_end = terminal
    t_obs = (gap - det.visibility_range) / v0
    d_stop = gap - final_stop_pos if outcome == "safe" else None
    return SimResult(
        events=tuple(events),
        t_obs=t_obs,
        t_det=t_det,
        t_brake=t_brake,
        t_stop=t_end if outcome == "safe" else None,
        d_capture=d_capture,
        d_brake=d_brake,
        d_stop=d_stop,
        detection_delay=None if t_det is None else t_det - t_obs,
        outcome=outcome,
        margin=d_stop if d_stop is not None else 0.0,
        frames_dispatched=frames_dispatched,
        total_inference_energy=frames_dispatched * config.profile.energy_per_inference,
    )


@dataclass(frozen=True)
class PipelineStats:
    """Per-frame queue statistics from a long-road measurement."""

    frames_measured: int
    mean_sojourn: float  # waiting + service, network excluded
    mean_wait: float
    offered_utilization: float
    seed: int


def measure_pipeline(
    service_time: float,
    frame_rate: float,
    frames: int,
    *,
    service_distribution: str = "exponential",
    frame_arrivals: str = "periodic",
    background_arrival_rate: float = 0.0,
    warmup_fraction: float = 0.10,
    seed: int = 0,
) -> PipelineStats:
    """Measure per-frame queue sojourn on an endless road (no braking).

    Frames arrive either on the capture grid (``"periodic"``, as in `run`)
    or as a Poisson stream at the same rate (``"poisson"``), optionally
    sharing the server with Poisson background jobs.  Network delay shifts
    arrival and return times symmetrically and cancels out of the sojourn,
    so it is not simulated here.

    The FIFO single-server dynamics are computed exactly via the waiting-time
    recursion w[i] = max(0, w[i-1] + s[i-1] - (a[i] - a[i-1])), evaluated in
    vectorized form; the first `warmup_fraction` of frames is discarded.
    """
    if service_time <= 0.0:
        raise ConfigError(f"service_time must be > 0, got {service_time}")
    if frame_rate <= 0.0:
        raise ConfigError(f"frame_rate must be > 0, got {frame_rate}")
    if frames < 10:
        raise ConfigError(f"frames must be >= 10, got {frames}")
    if service_distribution not in SERVICE_DISTRIBUTIONS:
        raise ConfigError(f"unknown service_distribution {service_distribution!r}")
    if frame_arrivals not in ("periodic", "poisson"):
        raise ConfigError(f"frame_arrivals must be 'periodic' or 'poisson', got {frame_arrivals!r}")
    if background_arrival_rate < 0.0:
        raise ConfigError("background_arrival_rate must be >= 0")

    rng_frames, rng_bg, rng_service = (
        np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
    )

    if frame_arrivals == "periodic":
        frame_times = np.arange(frames) / frame_rate
    else:
        frame_times = np.cumsum(rng_frames.exponential(1.0 / frame_rate, frames))

    span = float(frame_times[-1])
    if background_arrival_rate > 0.0 and span > 0.0:
        n_bg = int(rng_bg.poisson(background_arrival_rate * span))
        bg_times = np.sort(rng_bg.uniform(0.0, span, n_bg))
    else:
        bg_times = np.empty(0)

    arrivals = np.concatenate([frame_times, bg_times])
    is_frame = np.concatenate([np.ones(frames, bool), np.zeros(len(bg_times), bool)])
    order = np.argsort(arrivals, kind="stable")
    arrivals = arrivals[order]
    is_frame = is_frame[order]

    n = len(arrivals)
    if service_distribution == "exponential":
        services = rng_service.exponential(service_time, n)
    else:
        services = np.full(n, service_time)

    # Exact FIFO waiting times via prefix extrema of the random walk.
    steps = services[:-1] - np.diff(arrivals)
    prefix = np.concatenate([[0.0], np.cumsum(steps)])
    waits = prefix - np.minimum.accumulate(prefix)
    sojourns = waits + services

    frame_sojourns = sojourns[is_frame]
    frame_waits = waits[is_frame]
    skip = int(frames * warmup_fraction)
    measured = frame_sojourns[skip:]
    return PipelineStats(
        frames_measured=len(measured),
        mean_sojourn=float(measured.mean()),
        mean_wait=float(frame_waits[skip:].mean()),
        offered_utilization=(frame_rate + background_arrival_rate) * service_time,
        seed=seed,
    )


@dataclass(frozen=True)
class Deployment:
    """One (model, platform) choice a sweep can exercise."""

    profile: ModelProfile
    platform: PlatformSpec
    network: LatencySampler | None
    network_label: str


@dataclass(frozen=True)
class SweepGrid:
    """Override lists for a Cartesian sweep; empty dimensions keep the base.

    Dimension order (also the execution order): deployments, speeds,
    vehicles, networks, detection ranges, background rates, seeds.  The
    network dimension replaces the RTT sampler of cloud deployments;
    device deployments keep zero network delay, so network coordinates are
    inert for them (still enumerated, to keep the product honest).  A
    detection-range override larger than the base visibility range extends
    visibility along with it, so range sweeps never trip the
    visibility >= detection invariant.
    """

    deployments: tuple[Deployment, ...] = ()
    speeds: tuple[float, ...] = ()
    vehicles: tuple[VehicleClass, ...] = ()
    networks: tuple[tuple[str, LatencySampler], ...] = ()
    detection_ranges: tuple[float, ...] = ()
    background_rates: tuple[float, ...] = ()
    seeds: tuple[int, ...] = ()


@dataclass(frozen=True)
class SweepPoint:
    """One grid point: its coordinates and either a result or an error."""

    run_id: str
    coords: tuple[tuple[str, object], ...]
    config: SimConfig | None
    result: SimResult | None
    error: str | None

    @property
    def ok(self) -> bool:
        return self.error is None


def _run_point(config: SimConfig) -> SimResult:
    return run(config)


def sweep(base: SimConfig, grid: SweepGrid, jobs: int = 1,
          base_network_label: str = "") -> list[SweepPoint]:
    """Run the Cartesian product of grid overrides applied to `base`.

    Per-point failures (invalid combinations, horizon aborts) are captured
    in the returned points rather than raised, so one bad corner does not
    lose the rest of the sweep.  Results come back in deterministic grid
    order regardless of `jobs`.
    """
    axes = [
        grid.deployments or (None,),
        grid.speeds or (None,),
        grid.vehicles or (None,),
        grid.networks or (None,),
        grid.detection_ranges or (None,),
        grid.background_rates or (None,),
        grid.seeds or (None,),
    ]

    points: list[tuple[tuple[tuple[str, object], ...], SimConfig | None, str | None]] = []
    for deployment, speed, vehicle, network, det_range, bg_rate, seed in itertools.product(*axes):
        profile = deployment.profile if deployment else base.profile
        platform = deployment.platform if deployment else base.platform
        sampler = deployment.network if deployment else base.network
        net_label = deployment.network_label if deployment else base_network_label
        if network is not None and platform.kind == "cloud":
            net_label, sampler = network
        elif network is not None:
            net_label = network[0]
        coords = (
            ("model", profile.model_id),
            ("platform", platform.platform_id),
            ("speed_mps", speed if speed is not None else base.initial_speed),
            ("vehicle", vehicle.name if vehicle else ""),
            ("decel_mps2", vehicle.deceleration if vehicle else base.deceleration),
            ("rtt_mode", net_label),
            ("detection_range_m", det_range if det_range is not None else base.detection.detection_range),
            ("bg_rate_hz", bg_rate if bg_rate is not None else base.background_arrival_rate),
            ("seed", seed if seed is not None else base.seed),
        )
        try:
            detection = DetectionModel(
                detection_range=det_range if det_range is not None else base.detection.detection_range,
                visibility_range=max(
                    base.detection.visibility_range,
                    det_range if det_range is not None else 0.0,
                ),
                per_frame_probability=base.detection.per_frame_probability,
            )
            config = SimConfig(
                gap=base.gap,
                initial_speed=speed if speed is not None else base.initial_speed,
                deceleration=vehicle.deceleration if vehicle else base.deceleration,
                profile=profile,
                platform=platform,
                sensing=base.sensing,
                detection=detection,
                network=sampler if platform.kind == "cloud" else None,
                confirm_frames=base.confirm_frames,
                service_distribution=base.service_distribution,
                background_arrival_rate=bg_rate if bg_rate is not None else base.background_arrival_rate,
                service_inflation=base.service_inflation,
                seed=seed if seed is not None else base.seed,
            )
            config.validate()
            points.append((coords, config, None))
        except ConfigError as exc:
            points.append((coords, None, str(exc)))

    results: list[SweepPoint] = []
    if jobs > 1:
        runnable = [(i, cfg) for i, (_, cfg, _) in enumerate(points) if cfg is not None]
        outcomes: dict[int, SimResult | str] = {}
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_run_point, cfg): i for i, cfg in runnable}
            for future, i in futures.items():
                try:
                    outcomes[i] = future.result()
                except (ConfigError, HorizonError) as exc:
                    outcomes[i] = str(exc)
        for i, (coords, config, error) in enumerate(points):
            run_id = f"r{i:04d}"
            if config is None:
                results.append(SweepPoint(run_id, coords, None, None, error))
            else:
                outcome = outcomes[i]
                if isinstance(outcome, str):
                    results.append(SweepPoint(run_id, coords, config, None, outcome))
                else:
                    results.append(SweepPoint(run_id, coords, config, outcome, None))
        return results

    for i, (coords, config, error) in enumerate(points):
        run_id = f"r{i:04d}"
        if config is None:
            results.append(SweepPoint(run_id, coords, None, None, error))
            continue
        try:
            results.append(SweepPoint(run_id, coords, config, run(config), None))
        except (ConfigError, HorizonError) as exc:
            results.append(SweepPoint(run_id, coords, config, None, str(exc)))
    return results
