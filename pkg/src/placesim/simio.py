"""Scenario and sweep file loading, and the CSV output formats.

A *scenario* file describes one run.  It names a catalog file (path
resolved relative to the scenario file) and picks entries from it:

    [scenario]
    catalog = "yolo11_catalog.toml"
    model = "yolo11x"
    platform = "cloud"
    gap_m = 300.0
    speed_mph = 40.0            # or speed_mps
    deceleration_mps2 = 6.0     # or vehicle = "car" / "truck" / "motorbike"

    [detection]
    detection_range_m = 120.0
    visibility_range_m = 140.0
    per_frame_probability = 1.0     # optional

    [sim]
    confirm_frames = 1              # all optional
    service_distribution = "deterministic"
    background_arrival_rate_hz = 0.0
    service_inflation = 1.0
    seed = 0
    network = "lan_median"          # override the platform's sampler

A *sweep* file wraps a base scenario with override lists; the grid is the
Cartesian product of the non-empty dimensions:

    [sweep]
    scenario = "baseline_scenario.toml"

    [grid]
    deployments = ["yolo11m@device", "yolo11x@cloud"]
    speed_mph = [20.0, 40.0, 60.0]       # or speed_mps
    vehicles = ["car", "truck"]
    networks = ["lan_median", "lan_tail"]
    detection_range_m = [90.0, 120.0]
    background_rate_hz = [0.0, 5.0]
    seeds = [0, 1, 2]

    [vehicle.bus]                        # optional extra vehicle classes
    deceleration_mps2 = 3.5

CSV outputs use 6-significant-digit floats, empty cells for absent values,
and begin with a single ``#`` manifest comment line when one is supplied.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .catalog import (
    ModelProfile,
    PlatformSpec,
    SensingConfig,
    load_catalog,
    load_networks,
    platform_index,
)
from .errors import ConfigError
from .kinematics import DEFAULT_VEHICLE_CLASSES, VehicleClass, mph_to_mps
from .netmodel import LatencySampler
from .sim import Deployment, DetectionModel, SimConfig, SimEvent, SimResult, SweepGrid, SweepPoint

TRACE_HEADER = ("run_id", "time_s", "event", "frame", "position_m", "obstacle_distance_m")
SUMMARY_HEADER = (
    "run_id", "model", "platform", "speed_mps", "decel_mps2", "rtt_mode",
    "bg_rate_hz", "seed", "t_obs_s", "t_det_s", "t_brake_s", "t_stop_s",
    "d_capture_m", "d_brake_m", "d_stop_m", "detection_delay_s", "energy_j",
    "outcome",
)


@dataclass(frozen=True)
class LoadedScenario:
    """A scenario file resolved against its catalog."""

    config: SimConfig
    network_label: str
    profiles: list[ModelProfile]
    platforms: list[PlatformSpec]
    sensing: SensingConfig
    networks: dict[str, LatencySampler]
    catalog_path: Path


def _parse_toml(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}") from exc


def _get_num(table: dict, where: str, key: str, default=None) -> float | None:
    if key not in table:
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: {key} must be a number, got {value!r}")
    return float(value)


def _resolve_speed(table: dict, where: str) -> float:
    mps = _get_num(table, where, "speed_mps")
    mph = _get_num(table, where, "speed_mph")
    if (mps is None) == (mph is None):
        raise ConfigError(f"{where}: give exactly one of speed_mps / speed_mph")
    return mps if mps is not None else mph_to_mps(mph)


def _resolve_deceleration(
    table: dict, where: str, vehicles: dict[str, VehicleClass]
) -> float:
    decel = _get_num(table, where, "deceleration_mps2")
    vehicle = table.get("vehicle")
    if (decel is None) == (vehicle is None):
        raise ConfigError(f"{where}: give exactly one of deceleration_mps2 / vehicle")
    if decel is not None:
        return decel
    if vehicle not in vehicles:
        raise ConfigError(f"{where}: unknown vehicle class {vehicle!r}")
    return vehicles[vehicle].deceleration


def load_scenario(path: str | Path) -> LoadedScenario:
    """Load a scenario file and build the SimConfig it describes."""
    path = Path(path)
    parsed = _parse_toml(path)
    extra = set(parsed) - {"scenario", "detection", "sim"}
    if extra:
        raise ConfigError(f"{path}: unknown sections {sorted(extra)}")

    scenario = parsed.get("scenario")
    if not isinstance(scenario, dict):
        raise ConfigError(f"{path}: missing [scenario] section")
    known = {
        "catalog", "model", "platform", "gap_m", "speed_mps", "speed_mph",
        "deceleration_mps2", "vehicle",
    }
    unknown = set(scenario) - known
    if unknown:
        raise ConfigError(f"{path}: [scenario] has unknown keys {sorted(unknown)}")
    for key in ("catalog", "model", "platform", "gap_m"):
        if key not in scenario:
            raise ConfigError(f"{path}: [scenario] needs {key!r}")

    catalog_path = Path(scenario["catalog"])
    if not catalog_path.is_absolute():
        catalog_path = path.parent / catalog_path
    profiles, platforms, sensing = load_catalog(catalog_path)
    networks = load_networks(catalog_path)
    by_platform = platform_index(platforms)

    platform = by_platform.get(scenario["platform"])
    if platform is None:
        raise ConfigError(f"{path}: unknown platform {scenario['platform']!r}")
    wanted = (scenario["model"], scenario["platform"])
    profile = next(
        (p for p in profiles if (p.model_id, p.platform_id) == wanted), None
    )
    if profile is None:
        raise ConfigError(f"{path}: catalog has no profile {wanted[0]!r}@{wanted[1]!r}")

    detection_raw = parsed.get("detection")
    if not isinstance(detection_raw, dict):
        raise ConfigError(f"{path}: missing [detection] section")
    unknown = set(detection_raw) - {
        "detection_range_m", "visibility_range_m", "per_frame_probability"
    }
    if unknown:
        raise ConfigError(f"{path}: [detection] has unknown keys {sorted(unknown)}")
    for key in ("detection_range_m", "visibility_range_m"):
        if key not in detection_raw:
            raise ConfigError(f"{path}: [detection] needs {key!r}")
    detection = DetectionModel(
        detection_range=_get_num(detection_raw, "[detection]", "detection_range_m"),
        visibility_range=_get_num(detection_raw, "[detection]", "visibility_range_m"),
        per_frame_probability=_get_num(
            detection_raw, "[detection]", "per_frame_probability", 1.0
        ),
    )

    sim_raw = parsed.get("sim", {})
    if not isinstance(sim_raw, dict):
        raise ConfigError(f"{path}: [sim] must be a table")
    unknown = set(sim_raw) - {
        "confirm_frames", "service_distribution", "background_arrival_rate_hz",
        "service_inflation", "seed", "network",
    }
    if unknown:
        raise ConfigError(f"{path}: [sim] has unknown keys {sorted(unknown)}")

    network_label = ""
    sampler: LatencySampler | None = None
    if platform.kind == "cloud":
        network_label = sim_raw.get("network", platform.network_ref)
        if network_label not in networks:
            raise ConfigError(
                f"{path}: network {network_label!r} is not defined in {catalog_path.name}"
            )
        sampler = networks[network_label]
    elif "network" in sim_raw:
        raise ConfigError(f"{path}: device platforms take no [sim] network override")

    confirm = sim_raw.get("confirm_frames", 1)
    if isinstance(confirm, bool) or not isinstance(confirm, int):
        raise ConfigError(f"{path}: confirm_frames must be an integer")
    seed = sim_raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"{path}: seed must be an integer")

    config = SimConfig(
        gap=_get_num(scenario, "[scenario]", "gap_m"),
        initial_speed=_resolve_speed(scenario, f"{path}: [scenario]"),
        deceleration=_resolve_deceleration(
            scenario, f"{path}: [scenario]", DEFAULT_VEHICLE_CLASSES
        ),
        profile=profile,
        platform=platform,
        sensing=sensing,
        detection=detection,
        network=sampler,
        confirm_frames=confirm,
        service_distribution=sim_raw.get("service_distribution", "deterministic"),
        background_arrival_rate=_get_num(
            sim_raw, "[sim]", "background_arrival_rate_hz", 0.0
        ),
        service_inflation=_get_num(sim_raw, "[sim]", "service_inflation", 1.0),
        seed=seed,
    )
    config.validate()
    return LoadedScenario(
        config=config,
        network_label=network_label,
        profiles=profiles,
        platforms=platforms,
        sensing=sensing,
        networks=networks,
        catalog_path=catalog_path,
    )


def load_sweep(path: str | Path) -> tuple[LoadedScenario, SweepGrid]:
    """Load a sweep file: a base scenario plus Cartesian override lists."""
    path = Path(path)
    parsed = _parse_toml(path)
    extra = set(parsed) - {"sweep", "grid", "vehicle"}
    if extra:
        raise ConfigError(f"{path}: unknown sections {sorted(extra)}")
    sweep_raw = parsed.get("sweep")
    if not isinstance(sweep_raw, dict) or "scenario" not in sweep_raw:
        raise ConfigError(f"{path}: missing [sweep] section with a 'scenario' key")
    unknown = set(sweep_raw) - {"scenario"}
    if unknown:
        raise ConfigError(f"{path}: [sweep] has unknown keys {sorted(unknown)}")

    scenario_path = Path(sweep_raw["scenario"])
    if not scenario_path.is_absolute():
        scenario_path = path.parent / scenario_path
    loaded = load_scenario(scenario_path)

    vehicles = dict(DEFAULT_VEHICLE_CLASSES)
    for name, table in parsed.get("vehicle", {}).items():
        if not isinstance(table, dict) or "deceleration_mps2" not in table:
            raise ConfigError(f"{path}: [vehicle.{name}] needs deceleration_mps2")
        unknown = set(table) - {"deceleration_mps2"}
        if unknown:
            raise ConfigError(f"{path}: [vehicle.{name}] has unknown keys {sorted(unknown)}")
        vehicles[name] = VehicleClass(name, float(table["deceleration_mps2"]))

    grid_raw = parsed.get("grid", {})
    known = {
        "deployments", "speed_mps", "speed_mph", "vehicles", "networks",
        "detection_range_m", "background_rate_hz", "seeds",
    }
    unknown = set(grid_raw) - known
    if unknown:
        raise ConfigError(f"{path}: [grid] has unknown keys {sorted(unknown)}")
    if "speed_mps" in grid_raw and "speed_mph" in grid_raw:
        raise ConfigError(f"{path}: [grid] takes speed_mps or speed_mph, not both")

    by_platform = platform_index(loaded.platforms)
    by_pair = {(p.model_id, p.platform_id): p for p in loaded.profiles}

    deployments = []
    for entry in _str_list(grid_raw, path, "deployments"):
        if "@" not in entry:
            raise ConfigError(f"{path}: deployment {entry!r} must look like model@platform")
        model_id, platform_id = entry.split("@", 1)
        profile = by_pair.get((model_id, platform_id))
        platform = by_platform.get(platform_id)
        if profile is None or platform is None:
            raise ConfigError(f"{path}: deployment {entry!r} is not in the catalog")
        if platform.kind == "cloud":
            label = platform.network_ref
            sampler = loaded.networks[label]
        else:
            label, sampler = "", None
        deployments.append(Deployment(profile, platform, sampler, label))

    speeds = [float(v) for v in _num_list(grid_raw, path, "speed_mps")]
    speeds += [mph_to_mps(float(v)) for v in _num_list(grid_raw, path, "speed_mph")]

    vehicle_axis = []
    for name in _str_list(grid_raw, path, "vehicles"):
        if name not in vehicles:
            raise ConfigError(f"{path}: unknown vehicle class {name!r} in [grid]")
        vehicle_axis.append(vehicles[name])

    networks_axis = []
    for name in _str_list(grid_raw, path, "networks"):
        if name not in loaded.networks:
            raise ConfigError(f"{path}: network {name!r} is not defined in the catalog")
        networks_axis.append((name, loaded.networks[name]))

    grid = SweepGrid(
        deployments=tuple(deployments),
        speeds=tuple(speeds),
        vehicles=tuple(vehicle_axis),
        networks=tuple(networks_axis),
        detection_ranges=tuple(float(v) for v in _num_list(grid_raw, path, "detection_range_m")),
        background_rates=tuple(float(v) for v in _num_list(grid_raw, path, "background_rate_hz")),
        seeds=tuple(_int_list(grid_raw, path, "seeds")),
    )
    return loaded, grid


def _str_list(table: dict, path: Path, key: str) -> list[str]:
    value = table.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{path}: [grid] {key} must be a list of strings")
    return value


def _num_list(table: dict, path: Path, key: str) -> list[float]:
    value = table.get(key, [])
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{path}: [grid] {key} must be a list of numbers")
    return value


def _int_list(table: dict, path: Path, key: str) -> list[int]:
    value = table.get(key, [])
    if not isinstance(value, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in value
    ):
        raise ConfigError(f"{path}: [grid] {key} must be a list of integers")
    return value


def fmt(value) -> str:
    """CSV cell formatting: 6 significant digits, empty for None."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.6g}"
    return str(value)


def write_trace_csv(
    out: IO[str], run_id: str, events: Sequence[SimEvent], comment: str | None = None
) -> None:
    """Write one run's event trace (one row per event)."""
    if comment:
        out.write(f"# {comment}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for ev in events:
        writer.writerow([
            run_id,
            fmt(ev.time),
            ev.kind.value,
            "" if ev.frame is None else ev.frame,
            fmt(ev.vehicle_position),
            fmt(ev.obstacle_distance),
        ])


def summary_row(
    run_id: str,
    result: SimResult,
    *,
    model: str,
    platform: str,
    speed_mps: float,
    decel_mps2: float,
    rtt_mode: str,
    bg_rate_hz: float,
    seed: int,
) -> list[str]:
    """One summary CSV row in the normative column order."""
    return [
        run_id, model, platform, fmt(speed_mps), fmt(decel_mps2), rtt_mode,
        fmt(bg_rate_hz), str(seed), fmt(result.t_obs), fmt(result.t_det),
        fmt(result.t_brake), fmt(result.t_stop), fmt(result.d_capture),
        fmt(result.d_brake), fmt(result.d_stop), fmt(result.detection_delay),
        fmt(result.total_inference_energy), result.outcome,
    ]


def write_summary_csv(
    out: IO[str],
    rows: Iterable[Sequence[str]],
    comment: str | None = None,
    include_error_column: bool = False,
) -> None:
    """Write summary rows; sweeps append an ``error`` column."""
    if comment:
        out.write(f"# {comment}\n")
    writer = csv.writer(out, lineterminator="\n")
    header = SUMMARY_HEADER + ("error",) if include_error_column else SUMMARY_HEADER
    writer.writerow(header)
    writer.writerows(rows)


def sweep_point_row(point: SweepPoint) -> list[str]:
    """Summary row (with error column) for one sweep point."""
    coords = dict(point.coords)
    if point.result is not None:
        row = summary_row(
            point.run_id,
            point.result,
            model=coords["model"],
            platform=coords["platform"],
            speed_mps=coords["speed_mps"],
            decel_mps2=coords["decel_mps2"],
            rtt_mode=coords["rtt_mode"],
            bg_rate_hz=coords["bg_rate_hz"],
            seed=coords["seed"],
        )
        row.append("")
        return row
    row = [
        point.run_id, coords["model"], coords["platform"], fmt(coords["speed_mps"]),
        fmt(coords["decel_mps2"]), coords["rtt_mode"], fmt(coords["bg_rate_hz"]),
        str(coords["seed"]),
    ]
    row += [""] * (len(SUMMARY_HEADER) - len(row))  # metrics and outcome stay empty
    row.append(point.error or "")
    return row
