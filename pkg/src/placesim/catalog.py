"""Load and validate deployment catalogs.

A catalog is a TOML file describing what can run where:

* ``[sensing]`` — the camera loop: ``frame_rate_hz``, ``control_delay_s``
  and an optional ``deadline_s`` (defaults to one frame interval).
* ``[[platform]]`` — compute platforms: ``id``, ``kind`` (``"device"`` or
  ``"cloud"``), optional ``energy_budget_j``, and for cloud platforms a
  ``network`` key naming a ``[network.<name>]`` sampler table.
* ``[[profile]]`` — measured model/platform pairs: ``model``, ``platform``,
  ``inference_latency_s``, ``energy_j``, ``accuracy_map``.

All durations are seconds — there are deliberately no millisecond fields.
Unknown keys are rejected rather than ignored so unit mistakes
(``inference_latency_ms``) fail loudly instead of silently parsing.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from dataclasses import dataclass
from pathlib import Path

import tomlkit

from .errors import DomainError, ConfigError
from .netmodel import LatencySampler, load_network_table


@dataclass(frozen=True)
class SensingConfig:
    """Camera-loop timing.

    Attributes:
        frame_rate: capture rate F, Hz.
        control_delay: actuation delay between a brake command being issued
            and braking force being applied, seconds.
        deadline: per-frame response deadline, seconds.  Defaults to one
            frame interval (1 / frame_rate).
    """

    frame_rate: float
    control_delay: float = 0.0
    deadline: float | None = None

    def __post_init__(self) -> None:
        if self.frame_rate <= 0.0:
            raise DomainError(f"frame_rate must be > 0, got {self.frame_rate}")
        if self.control_delay < 0.0:
            raise DomainError(f"control_delay must be >= 0, got {self.control_delay}")
        if self.deadline is None:
            object.__setattr__(self, "deadline", 1.0 / self.frame_rate)
        if self.deadline <= 0.0:
            raise DomainError(f"deadline must be > 0, got {self.deadline}")

    @property
    def frame_interval(self) -> float:
        """Seconds between consecutive frame captures."""
        return 1.0 / self.frame_rate


@dataclass(frozen=True)
class PlatformSpec:
    """A compute platform that can host model inference.

    Attributes:
        platform_id: unique identifier used by profiles and scenarios.
        kind: "device" (co-located, zero network delay) or "cloud"
            (reached over a network).
        energy_budget: optional per-inference energy budget, joules.  Absent
            means the energy constraint is vacuous.
        network_ref: name of the RTT sampler used to reach the platform.
            Required for cloud platforms, forbidden for device platforms.
    """

    platform_id: str
    kind: str
    energy_budget: float | None = None
    network_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.platform_id:
            raise DomainError("platform id must be a non-empty string")
        if self.kind not in ("device", "cloud"):
            raise DomainError(
                f"platform {self.platform_id!r}: kind must be 'device' or 'cloud', "
                f"got {self.kind!r}"
            )
        if self.energy_budget is not None and self.energy_budget < 0.0:
            raise DomainError(
                f"platform {self.platform_id!r}: energy_budget must be >= 0"
            )
        if self.kind == "cloud" and not self.network_ref:
            raise DomainError(
                f"platform {self.platform_id!r}: cloud platforms need a network reference"
            )
        if self.kind == "device" and self.network_ref is not None:
            raise DomainError(
                f"platform {self.platform_id!r}: device platforms take no network reference"
            )


@dataclass(frozen=True)
class ModelProfile:
    """One measured (model, platform) deployment option.

    Attributes:
        model_id: model name, e.g. "yolo11m".
        platform_id: platform the measurements were taken on.
        inference_latency: mean per-frame inference time, seconds.
        energy_per_inference: energy per frame, joules.
        accuracy: detection quality score (mAP-style, 0-100).
    """

    model_id: str
    platform_id: str
    inference_latency: float
    energy_per_inference: float
    accuracy: float

    def __post_init__(self) -> None:
        ident = f"profile {self.model_id!r}@{self.platform_id!r}"
        if not self.model_id or not self.platform_id:
            raise DomainError("profile model/platform ids must be non-empty")
        if self.inference_latency <= 0.0:
            raise DomainError(f"{ident}: inference_latency must be > 0")
        if self.energy_per_inference < 0.0:
            raise DomainError(f"{ident}: energy_per_inference must be >= 0")
        if not 0.0 <= self.accuracy <= 100.0:
            raise DomainError(f"{ident}: accuracy must be in [0, 100]")


_SENSING_KEYS = {"frame_rate_hz", "control_delay_s", "deadline_s"}
_PLATFORM_KEYS = {"id", "kind", "energy_budget_j", "network"}
_PROFILE_KEYS = {"model", "platform", "inference_latency_s", "energy_j", "accuracy_map"}


def parse_catalog_toml(path: str | Path) -> dict:
    """Read and parse a catalog file, mapping parse failures to ConfigError."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read catalog {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}") from exc


def load_catalog(
    path: str | Path,
) -> tuple[list[ModelProfile], list[PlatformSpec], SensingConfig]:
    """Load a catalog file.

    Returns:
        (profiles, platforms, sensing).  An empty ``[[profile]]`` list is
        valid — the feasibility set will simply come out empty.

    Raises:
        ConfigError: on unreadable/unparsable files, unknown keys, duplicate
            ids, dangling platform references, cloud platforms without a
            network sampler, or out-of-range numbers.
    """
    parsed = parse_catalog_toml(path)
    return catalog_from_dict(parsed, source=str(path))


def catalog_from_dict(
    parsed: dict, source: str = "<catalog>"
) -> tuple[list[ModelProfile], list[PlatformSpec], SensingConfig]:
    """Validate an already-parsed catalog structure (see ``load_catalog``)."""
    top_known = {"sensing", "platform", "profile", "network"}
    extra = set(parsed) - top_known
    if extra:
        raise ConfigError(f"{source}: unknown top-level sections {sorted(extra)}")

    sensing_raw = parsed.get("sensing")
    if not isinstance(sensing_raw, dict):
        raise ConfigError(f"{source}: missing [sensing] section")
    _reject_unknown(source, "sensing", sensing_raw, _SENSING_KEYS)
    if "frame_rate_hz" not in sensing_raw:
        raise ConfigError(f"{source}: [sensing] needs frame_rate_hz")
    sensing = SensingConfig(
        frame_rate=_as_float(source, "sensing.frame_rate_hz", sensing_raw["frame_rate_hz"]),
        control_delay=_as_float(
            source, "sensing.control_delay_s", sensing_raw.get("control_delay_s", 0.0)
        ),
        deadline=(
            _as_float(source, "sensing.deadline_s", sensing_raw["deadline_s"])
            if "deadline_s" in sensing_raw
            else None
        ),
    )

    platforms: list[PlatformSpec] = []
    seen_platforms: set[str] = set()
    for i, entry in enumerate(_as_array(source, "platform", parsed.get("platform", []))):
        _reject_unknown(source, f"platform[{i}]", entry, _PLATFORM_KEYS)
        for key in ("id", "kind"):
            if key not in entry:
                raise ConfigError(f"{source}: platform[{i}] needs {key!r}")
        spec = PlatformSpec(
            platform_id=entry["id"],
            kind=entry["kind"],
            energy_budget=(
                _as_float(source, f"platform[{i}].energy_budget_j", entry["energy_budget_j"])
                if "energy_budget_j" in entry
                else None
            ),
            network_ref=entry.get("network"),
        )
        if spec.platform_id in seen_platforms:
            raise ConfigError(f"{source}: duplicate platform id {spec.platform_id!r}")
        seen_platforms.add(spec.platform_id)
        platforms.append(spec)

    profiles: list[ModelProfile] = []
    seen_pairs: set[tuple[str, str]] = set()
    for i, entry in enumerate(_as_array(source, "profile", parsed.get("profile", []))):
        _reject_unknown(source, f"profile[{i}]", entry, _PROFILE_KEYS)
        for key in _PROFILE_KEYS:
            if key not in entry:
                raise ConfigError(f"{source}: profile[{i}] needs {key!r}")
        profile = ModelProfile(
            model_id=entry["model"],
            platform_id=entry["platform"],
            inference_latency=_as_float(
                source, f"profile[{i}].inference_latency_s", entry["inference_latency_s"]
            ),
            energy_per_inference=_as_float(source, f"profile[{i}].energy_j", entry["energy_j"]),
            accuracy=_as_float(source, f"profile[{i}].accuracy_map", entry["accuracy_map"]),
        )
        pair = (profile.model_id, profile.platform_id)
        if pair in seen_pairs:
            raise ConfigError(f"{source}: duplicate profile {pair[0]!r}@{pair[1]!r}")
        seen_pairs.add(pair)
        if profile.platform_id not in seen_platforms:
            raise ConfigError(
                f"{source}: profile {profile.model_id!r} references unknown "
                f"platform {profile.platform_id!r}"
            )
        profiles.append(profile)

    # Cloud network references must resolve against [network.*] when that
    # section is present in the same file.
    if "network" in parsed:
        samplers = load_network_table(parsed)
        for spec in platforms:
            if spec.network_ref is not None and spec.network_ref not in samplers:
                raise ConfigError(
                    f"{source}: platform {spec.platform_id!r} references undefined "
                    f"network {spec.network_ref!r}"
                )

    return profiles, platforms, sensing


def load_networks(path: str | Path) -> dict[str, LatencySampler]:
    """Build the RTT samplers declared in a catalog's ``[network.*]`` tables."""
    path = Path(path)
    return load_network_table(parse_catalog_toml(path), base_dir=path.parent)


def platform_index(platforms: list[PlatformSpec]) -> dict[str, PlatformSpec]:
    """Index platforms by id, rejecting duplicate ids."""
    index: dict[str, PlatformSpec] = {}
    for spec in platforms:
        if spec.platform_id in index:
            raise ConfigError(f"duplicate platform id {spec.platform_id!r}")
        index[spec.platform_id] = spec
    return index


def save_catalog(
    path: str | Path,
    profiles: list[ModelProfile],
    platforms: list[PlatformSpec],
    sensing: SensingConfig,
    network_tables: dict | None = None,
) -> None:
    """Serialize a catalog back to TOML.

    Writing then re-loading yields a field-for-field identical catalog.
    ``network_tables`` takes the raw ``[network]`` mapping (as parsed) so a
    loaded file can be re-emitted without loss.
    """
    doc = tomlkit.document()
    sensing_tbl = tomlkit.table()
    sensing_tbl["frame_rate_hz"] = sensing.frame_rate
    sensing_tbl["control_delay_s"] = sensing.control_delay
    sensing_tbl["deadline_s"] = sensing.deadline
    doc["sensing"] = sensing_tbl

    if network_tables:
        net = tomlkit.table()
        for name, cfg in network_tables.items():
            sub = tomlkit.table()
            for key, value in cfg.items():
                sub[key] = value
            net[name] = sub
        doc["network"] = net

    plat_array = tomlkit.aot()
    for spec in platforms:
        tbl = tomlkit.table()
        tbl["id"] = spec.platform_id
        tbl["kind"] = spec.kind
        if spec.energy_budget is not None:
            tbl["energy_budget_j"] = spec.energy_budget
        if spec.network_ref is not None:
            tbl["network"] = spec.network_ref
        plat_array.append(tbl)
    doc["platform"] = plat_array

    prof_array = tomlkit.aot()
    for profile in profiles:
        tbl = tomlkit.table()
        tbl["model"] = profile.model_id
        tbl["platform"] = profile.platform_id
        tbl["inference_latency_s"] = profile.inference_latency
        tbl["energy_j"] = profile.energy_per_inference
        tbl["accuracy_map"] = profile.accuracy
        prof_array.append(tbl)
    doc["profile"] = prof_array

    Path(path).write_text(tomlkit.dumps(doc))


def _reject_unknown(source: str, where: str, table: dict, known: set[str]) -> None:
    if not isinstance(table, dict):
        raise ConfigError(f"{source}: [{where}] must be a table")
    extra = set(table) - known
    if extra:
        raise ConfigError(f"{source}: [{where}] has unknown keys {sorted(extra)}")


def _as_array(source: str, name: str, value) -> list[dict]:
    if not isinstance(value, list):
        raise ConfigError(f"{source}: [[{name}]] must be an array of tables")
    return value


def _as_float(source: str, field: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{source}: {field} must be a number, got {value!r}")
    return float(value)
