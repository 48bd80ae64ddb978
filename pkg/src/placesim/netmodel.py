"""Network round-trip-time models.

Four sampler flavors cover the usual ways RTT shows up in practice:

* ``FixedDelay`` — a constant, for deterministic traces.
* ``PercentileTable`` — three anchor quantiles (p10/p50/p90); sampling
  returns the anchor selected by ``mode``, percentiles interpolate linearly
  between anchors and clamp outside them.
* ``EmpiricalDelays`` — resample uniformly from a measured trace;
  percentiles use the nearest-rank rule (ceil(q*n)-th sorted sample).
* ``ShiftedLognormal`` — location + exp(Normal(log_mean, log_sigma)), a
  long-tailed parametric fit.

All delays are in seconds and must be non-negative.  Samplers are frozen
value objects; draw state lives entirely in the caller-owned numpy
Generator passed to ``sample``, so concurrent use is safe as long as each
worker owns its generator.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist

import numpy as np

from .errors import ConfigError, DomainError

PERCENTILE_MODES = ("p10", "p50", "p90")


class LatencySampler:
    """Common interface: ``sample(rng) -> float`` and ``percentile(q) -> float``."""

    def sample(self, rng: np.random.Generator) -> float:
        raise NotImplementedError

    def percentile(self, q: float) -> float:
        raise NotImplementedError

    def describe(self) -> str:
        """Short label for CSV/report columns."""
        raise NotImplementedError


def _check_quantile(q: float) -> None:
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"quantile must be in [0, 1], got {q}")


@dataclass(frozen=True)
class FixedDelay(LatencySampler):
    """Constant round-trip time."""

    value: float

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise DomainError(f"delay must be >= 0, got {self.value}")

    def sample(self, rng: np.random.Generator) -> float:
        return self.value

    def percentile(self, q: float) -> float:
        _check_quantile(q)
        return self.value

    def describe(self) -> str:
        return f"fixed:{self.value:.6g}"


@dataclass(frozen=True)
class PercentileTable(LatencySampler):
    """Three-anchor quantile table.

    ``sample`` deterministically returns the anchor named by ``mode``;
    ``percentile`` interpolates linearly between the (0.10, p10),
    (0.50, p50), (0.90, p90) anchors and clamps to the end anchors outside
    [0.10, 0.90].
    """

    p10: float
    p50: float
    p90: float
    mode: str = "p50"

    def __post_init__(self) -> None:
        for name, value in (("p10", self.p10), ("p50", self.p50), ("p90", self.p90)):
            if value < 0.0:
                raise DomainError(f"{name} must be >= 0, got {value}")
        if not self.p10 <= self.p50 <= self.p90:
            raise DomainError(
                f"percentile anchors must be ordered: "
                f"p10={self.p10} p50={self.p50} p90={self.p90}"
            )
        if self.mode not in PERCENTILE_MODES:
            raise DomainError(f"mode must be one of {PERCENTILE_MODES}, got {self.mode!r}")

    def sample(self, rng: np.random.Generator) -> float:
        return {"p10": self.p10, "p50": self.p50, "p90": self.p90}[self.mode]

    def percentile(self, q: float) -> float:
        _check_quantile(q)
        if q <= 0.10:
            return self.p10
        if q >= 0.90:
            return self.p90
        # Clamp each linear segment at its upper anchor so rounding can never
        # push a value past it: percentile() stays monotone and hits the
        # anchors exactly.
        if q == 0.50:
            return self.p50
        if q < 0.50:
            return min(self.p50, self.p10 + (q - 0.10) / 0.40 * (self.p50 - self.p10))
        return min(self.p90, self.p50 + (q - 0.50) / 0.40 * (self.p90 - self.p50))

    def describe(self) -> str:
        return f"ptable:{self.mode}"


@dataclass(frozen=True)
class EmpiricalDelays(LatencySampler):
    """Uniform resampling from a measured delay trace."""

    samples: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.samples) == 0:
            raise DomainError("empirical sampler needs at least one sample")
        if any(s < 0.0 for s in self.samples):
            raise DomainError("empirical samples must all be >= 0")
        # Pre-sorted copy for percentile lookups.
        object.__setattr__(self, "_sorted", tuple(sorted(self.samples)))

    def sample(self, rng: np.random.Generator) -> float:
        return self.samples[int(rng.integers(0, len(self.samples)))]

    def percentile(self, q: float) -> float:
        """Nearest-rank percentile: the ceil(q*n)-th smallest sample."""
        _check_quantile(q)
        srt = self._sorted  # type: ignore[attr-defined]
        rank = math.ceil(q * len(srt))
        return srt[max(rank, 1) - 1]

    def describe(self) -> str:
        return f"empirical:n={len(self.samples)}"


@dataclass(frozen=True)
class ShiftedLognormal(LatencySampler):
    """location + exp(Normal(log_mean, log_sigma)): a heavy-tailed RTT model."""

    location: float
    log_mean: float
    log_sigma: float

    def __post_init__(self) -> None:
        if self.location < 0.0:
            raise DomainError(f"location must be >= 0, got {self.location}")
        if self.log_sigma < 0.0:
            raise DomainError(f"log_sigma must be >= 0, got {self.log_sigma}")

    def sample(self, rng: np.random.Generator) -> float:
        return self.location + float(rng.lognormal(self.log_mean, self.log_sigma))

    def percentile(self, q: float) -> float:
        _check_quantile(q)
        if q == 0.0:
            return self.location
        if q == 1.0:
            return math.inf
        if self.log_sigma == 0.0:
            return self.location + math.exp(self.log_mean)
        z = NormalDist().inv_cdf(q)
        return self.location + math.exp(self.log_mean + self.log_sigma * z)

    def describe(self) -> str:
        return f"lognormal:loc={self.location:.6g}"


def load_samples(path: str | Path) -> EmpiricalDelays:
    """Read an empirical sampler from a text file of one delay (seconds) per line.

    Blank lines and lines starting with ``#`` are skipped.  Raises
    ConfigError naming the offending line for anything non-numeric or
    negative, and for files with no usable samples.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read delay samples from {path}: {exc}") from exc
    values: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            value = float(line)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: not a number: {line!r}") from None
        if not math.isfinite(value) or value < 0.0:
            raise ConfigError(f"{path}:{lineno}: delay must be finite and >= 0, got {line}")
        values.append(value)
    if not values:
        raise ConfigError(f"{path}: no delay samples found")
    return EmpiricalDelays(tuple(values))


def sampler_from_config(name: str, table: dict, base_dir: Path | None = None) -> LatencySampler:
    """Build a sampler from one ``[network.<name>]`` TOML table.

    The ``kind`` key selects the variant; remaining keys are its parameters:

        kind = "fixed"              value_s
        kind = "percentile_table"   p10_s, p50_s, p90_s, mode (optional)
        kind = "empirical"          samples (inline list) or samples_file
        kind = "shifted_lognormal"  location_s, log_mean, log_sigma
    """
    if not isinstance(table, dict):
        raise ConfigError(f"network.{name}: expected a table, got {type(table).__name__}")
    kind = table.get("kind")
    known = {
        "fixed": {"kind", "value_s"},
        "percentile_table": {"kind", "p10_s", "p50_s", "p90_s", "mode"},
        "empirical": {"kind", "samples", "samples_file"},
        "shifted_lognormal": {"kind", "location_s", "log_mean", "log_sigma"},
    }
    if kind not in known:
        raise ConfigError(
            f"network.{name}: unknown sampler kind {kind!r} "
            f"(expected one of {sorted(known)})"
        )
    extra = set(table) - known[kind]
    if extra:
        raise ConfigError(f"network.{name}: unknown keys {sorted(extra)}")
    try:
        if kind == "fixed":
            return FixedDelay(value=_num(table, name, "value_s"))
        if kind == "percentile_table":
            return PercentileTable(
                p10=_num(table, name, "p10_s"),
                p50=_num(table, name, "p50_s"),
                p90=_num(table, name, "p90_s"),
                mode=table.get("mode", "p50"),
            )
        if kind == "empirical":
            if "samples_file" in table:
                rel = Path(table["samples_file"])
                if not rel.is_absolute() and base_dir is not None:
                    rel = base_dir / rel
                return load_samples(rel)
            samples = table.get("samples")
            if not isinstance(samples, list):
                raise ConfigError(
                    f"network.{name}: empirical sampler needs 'samples' or 'samples_file'"
                )
            return EmpiricalDelays(tuple(float(s) for s in samples))
        return ShiftedLognormal(
            location=_num(table, name, "location_s"),
            log_mean=_num(table, name, "log_mean"),
            log_sigma=_num(table, name, "log_sigma"),
        )
    except DomainError as exc:
        raise ConfigError(f"network.{name}: {exc}") from exc


def load_network_table(parsed: dict, base_dir: Path | None = None) -> dict[str, LatencySampler]:
    """Build every sampler declared under a parsed ``[network]`` TOML table."""
    network = parsed.get("network", {})
    if not isinstance(network, dict):
        raise ConfigError("[network] must be a table of sampler tables")
    return {
        name: sampler_from_config(name, cfg, base_dir) for name, cfg in network.items()
    }


def _num(table: dict, name: str, key: str) -> float:
    if key not in table:
        raise ConfigError(f"network.{name}: missing required key {key!r}")
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"network.{name}: {key} must be a number, got {value!r}")
    return float(value)
