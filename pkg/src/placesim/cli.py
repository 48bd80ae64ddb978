"""Command-line interface.

Subcommands:

* ``place``           feasibility + accuracy-argmax selection from a catalog
* ``analyze``         break-even / stability / reaction-budget reports
* ``simulate``        one braking-loop run from a scenario file
* ``sweep``           Cartesian grid of runs from a sweep file
* ``validate-queue``  Monte-Carlo check of the queue closed form

Exit codes: 0 success; 1 config error; 2 empty feasible set for a platform
kind; 3 collision; 4 horizon-guard abort; 5 sweep finished with per-point
errors; 6 tolerance check failed.

File outputs are byte-identical for identical inputs and seed: the only
metadata line is a ``#`` comment carrying tool version, subcommand, config
digest and seed.
"""

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import click

from . import __version__
from .catalog import load_catalog, load_networks, platform_index
from .errors import ConfigError, DomainError, HorizonError
from .feasibility import feasibility_set, select_by_kind, select_optimal
from .kinematics import (
    DEFAULT_VEHICLE_CLASSES,
    mph_to_mps,
    reaction_budget,
    stopping_distance,
)
from .latency import amortized_latency, cloud_break_even
from .queue_mc import simulate_mm1
from .sim import run as run_sim
from .sim import sweep as run_sweep
from .simio import (
    fmt,
    load_scenario,
    load_sweep,
    summary_row,
    sweep_point_row,
    write_summary_csv,
    write_trace_csv,
)

EXIT_CONFIG = 1
EXIT_EMPTY_FEASIBLE = 2
EXIT_COLLISION = 3
EXIT_HORIZON = 4
EXIT_PARTIAL_SWEEP = 5
EXIT_TOLERANCE = 6

QUEUE_TOLERANCE = 0.02


@dataclass(frozen=True)
class RunManifest:
    """Provenance attached to generated outputs.

    The timestamp stays in memory only — writing it to files would break
    byte-for-byte reproducibility of identical runs.
    """

    tool_version: str
    subcommand: str
    config_digest: str
    seed: int | None
    timestamp: str

    @classmethod
    def create(cls, subcommand: str, config_obj, seed: int | None) -> "RunManifest":
        return cls(
            tool_version=__version__,
            subcommand=subcommand,
            config_digest=config_digest(config_obj),
            seed=seed,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )

    def comment(self) -> str:
        seed = "" if self.seed is None else self.seed
        return (
            f"placesim={self.tool_version} subcommand={self.subcommand} "
            f"digest={self.config_digest} seed={seed}"
        )


def config_digest(obj) -> str:
    """sha256 over a canonical JSON rendering of the resolved config."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _echo(ctx, message: str) -> None:
    if not ctx.obj["quiet"]:
        click.echo(message)


def _resolve_percentile(spec: str) -> float:
    named = {"p10": 0.10, "p50": 0.50, "p90": 0.90}
    if spec in named:
        return named[spec]
    try:
        q = float(spec)
    except ValueError:
        raise ConfigError(
            f"--percentile must be p10/p50/p90 or a number in [0, 1], got {spec!r}"
        ) from None
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"--percentile must be in [0, 1], got {q}")
    return q


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Default catalog file for subcommands that accept one.")
@click.option("--seed", type=int, default=None, envvar="PLACESIM_SEED",
              help="RNG seed override (env: PLACESIM_SEED).")
@click.option("--format", "output_format", type=click.Choice(["text", "jsonl", "csv"]),
              default="text", help="Report format for place/analyze.")
@click.option("--quiet", is_flag=True, help="Suppress report output; keep exit codes and files.")
@click.pass_context
def main(ctx, config_path, seed, output_format, quiet):
    """Decide where obstacle-detection inference should run, and check it by simulation."""
    ctx.obj = {
        "config_path": config_path,
        "seed": seed,
        "format": output_format,
        "quiet": quiet,
    }


def _catalog_argument(ctx, catalog_path):
    path = catalog_path or ctx.obj["config_path"]
    if path is None:
        raise ConfigError("no catalog given (pass a path or use --config)")
    return Path(path)


@main.command()
@click.argument("catalog_path", required=False, type=click.Path())
@click.option("--percentile", default="p50", show_default=True,
              help="Representative RTT percentile (p10/p50/p90 or a number in [0,1]).")
@click.option("--amortized", "queue_aware", is_flag=True,
              help="Use queue-amortized inference latency at the catalog frame rate.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the evaluation as CSV to this file.")
@click.pass_context
def place(ctx, catalog_path, percentile, queue_aware, out_path):
    """Evaluate feasibility and pick the best model per platform kind."""
    try:
        path = _catalog_argument(ctx, catalog_path)
        q = _resolve_percentile(percentile)
        profiles, platforms, sensing = load_catalog(path)
        networks = load_networks(path)
        network_point = {
            p.platform_id: networks[p.network_ref].percentile(q)
            for p in platforms
            if p.kind == "cloud"
        }
        report = feasibility_set(
            profiles, platforms, sensing, network_point, queue_aware=queue_aware
        )
        report = select_optimal(report)
        per_kind = select_by_kind(report)
    except (ConfigError, DomainError) as exc:
        _fail(EXIT_CONFIG, str(exc))

    manifest = RunManifest.create(
        "place",
        {"catalog": str(path), "percentile": q, "amortized": queue_aware,
         "network_point": network_point},
        ctx.obj["seed"],
    )

    rows = [
        [e.model_id, e.platform_id, e.kind, fmt(e.total_latency), fmt(e.energy),
         fmt(e.accuracy), "yes" if e.feasible else "no", e.reject_reason or ""]
        for e in report.evaluated
    ]
    header = ["model", "platform", "kind", "total_latency_s", "energy_j",
              "accuracy", "feasible", "reject_reason"]
    kinds_present = sorted({p.kind for p in platforms})

    if out_path:
        with open(out_path, "w") as fh:
            fh.write(f"# {manifest.comment()}\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")

    output_format = ctx.obj["format"]
    if not ctx.obj["quiet"]:
        if output_format == "jsonl":
            for e in report.evaluated:
                click.echo(json.dumps(dataclasses.asdict(e), sort_keys=True))
            click.echo(json.dumps({"selected": {k: v and list(v) for k, v in per_kind.items()}},
                                  sort_keys=True))
        elif output_format == "csv":
            click.echo(f"# {manifest.comment()}")
            click.echo(",".join(header))
            for row in rows:
                click.echo(",".join(row))
            for kind in kinds_present:
                selected = per_kind.get(kind)
                if selected:
                    click.echo(f"# selected[{kind}]={selected[0]}@{selected[1]}")
        else:
            widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
                      for i in range(len(header))]
            click.echo("  ".join(h.ljust(w) for h, w in zip(header, widths)))
            for row in rows:
                click.echo("  ".join(c.ljust(w) for c, w in zip(row, widths)))
            for kind in kinds_present:
                selected = per_kind.get(kind)
                if selected:
                    click.echo(f"selected[{kind}]: {selected[0]}@{selected[1]} "
                               f"(accuracy-argmax among feasible)")
                else:
                    click.echo(f"selected[{kind}]: none (empty feasible set)")

    if not kinds_present or any(per_kind.get(k) is None for k in kinds_present):
        sys.exit(EXIT_EMPTY_FEASIBLE)


@main.command()
@click.argument("catalog_path", required=False, type=click.Path())
@click.option("--break-even/--no-break-even", "show_break_even", default=True,
              help="Show the per-model break-even table.")
@click.option("--kinematics", "show_kinematics", is_flag=True,
              help="Show reaction budgets and stopping distances for a scenario grid.")
@click.option("--scenario", "scenario_path", type=click.Path(), default=None,
              help="Seed the kinematics grid from a scenario file (implies --kinematics).")
@click.option("--gap", type=float, default=None, help="Available distance, meters.")
@click.option("--speed-mph", "speeds_mph", type=float, multiple=True)
@click.option("--speed-mps", "speeds_mps", type=float, multiple=True)
@click.option("--decel", "decels", type=float, multiple=True,
              help="Deceleration, m/s^2 (repeatable).")
@click.option("--vehicle", "vehicle_names", type=str, multiple=True,
              help="Vehicle class name supplying a deceleration (repeatable).")
@click.option("--percentile", default="p50", show_default=True)
@click.pass_context
def analyze(ctx, catalog_path, show_break_even, show_kinematics, scenario_path,
            gap, speeds_mph, speeds_mps, decels, vehicle_names, percentile):
    """Closed-form analysis: break-even RTTs, stability, reaction budgets."""
    emit_json = ctx.obj["format"] == "jsonl"
    try:
        extra_speeds: list[float] = []
        extra_decels: list[float] = []
        if scenario_path is not None:
            loaded = load_scenario(scenario_path)
            show_kinematics = True
            if gap is None:
                gap = loaded.config.gap
            extra_speeds.append(loaded.config.initial_speed)
            extra_decels.append(loaded.config.deceleration)
            if catalog_path is None and ctx.obj["config_path"] is None:
                catalog_path = str(loaded.catalog_path)
        path = _catalog_argument(ctx, catalog_path)
        q = _resolve_percentile(percentile)
        profiles, platforms, sensing = load_catalog(path)
        networks = load_networks(path)
        by_platform = platform_index(platforms)

        if show_break_even:
            device_profiles = {
                p.model_id: p for p in profiles if by_platform[p.platform_id].kind == "device"
            }
            cloud_profiles = {
                p.model_id: p for p in profiles if by_platform[p.platform_id].kind == "cloud"
            }
            lines = []
            for model in sorted(set(device_profiles) | set(cloud_profiles)):
                entry = {"model": model}
                dev = device_profiles.get(model)
                cld = cloud_profiles.get(model)
                for label, prof in (("device", dev), ("cloud", cld)):
                    if prof is None:
                        entry[label] = None
                        continue
                    try:
                        amort = amortized_latency(prof.inference_latency, sensing.frame_rate)
                        stable = True
                    except DomainError:
                        amort, stable = None, False
                    entry[label] = {
                        "inference_latency_s": prof.inference_latency,
                        "amortized_s": amort,
                        "stable": stable,
                    }
                if dev and cld and entry["device"]["stable"] and entry["cloud"]["stable"]:
                    entry["break_even_rtt_s"] = cloud_break_even(
                        dev.inference_latency, cld.inference_latency, sensing.frame_rate
                    )
                else:
                    entry["break_even_rtt_s"] = None
                lines.append(entry)

            if not ctx.obj["quiet"]:
                if emit_json:
                    for entry in lines:
                        click.echo(json.dumps(entry, sort_keys=True))
                else:
                    click.echo(
                        f"queue analysis at frame_rate={fmt(sensing.frame_rate)} Hz "
                        f"(amortized = tau / (1 - F*tau))"
                    )
                    for entry in lines:
                        parts = [entry["model"].ljust(10)]
                        for label in ("device", "cloud"):
                            info = entry[label]
                            if info is None:
                                parts.append(f"{label}: -")
                            elif not info["stable"]:
                                parts.append(
                                    f"{label}: tau={fmt(info['inference_latency_s'])}s UNSTABLE"
                                )
                            else:
                                parts.append(
                                    f"{label}: tau={fmt(info['inference_latency_s'])}s "
                                    f"amortized={fmt(info['amortized_s'])}s"
                                )
                        be = entry["break_even_rtt_s"]
                        parts.append(f"break-even RTT: {fmt(be) + 's' if be is not None else '-'}")
                        click.echo("  ".join(parts))

        if show_kinematics:
            if gap is None:
                raise ConfigError("--kinematics needs --gap")
            speeds = [mph_to_mps(v) for v in speeds_mph] + list(speeds_mps) + extra_speeds
            if not speeds:
                raise ConfigError("--kinematics needs at least one --speed-mph/--speed-mps")
            decel_values = list(decels) + extra_decels
            for name in vehicle_names:
                if name not in DEFAULT_VEHICLE_CLASSES:
                    raise ConfigError(f"unknown vehicle class {name!r}")
                decel_values.append(DEFAULT_VEHICLE_CLASSES[name].deceleration)
            if not decel_values:
                raise ConfigError("--kinematics needs --decel or --vehicle")

            rep_rtt = {
                p.platform_id: networks[p.network_ref].percentile(q)
                for p in platforms if p.kind == "cloud"
            }
            if not ctx.obj["quiet"] and not emit_json:
                click.echo(f"reaction budgets for gap={fmt(gap)} m")
            for speed in speeds:
                for decel in decel_values:
                    budget = reaction_budget(speed, decel, gap)
                    entry = {
                        "speed_mps": speed,
                        "decel_mps2": decel,
                        "reaction_budget_s": budget,
                        "pairs": [],
                    }
                    for prof in profiles:
                        platform = by_platform[prof.platform_id]
                        rtt = 0.0 if platform.kind == "device" else rep_rtt[prof.platform_id]
                        delay = rtt + prof.inference_latency + sensing.control_delay
                        s_stop = stopping_distance(speed, decel, delay)
                        entry["pairs"].append({
                            "model": prof.model_id,
                            "platform": prof.platform_id,
                            "delay_s": delay,
                            "stopping_distance_m": s_stop,
                            "safe": bool(budget > 0 and s_stop < gap),
                        })
                    if ctx.obj["quiet"]:
                        continue
                    if emit_json:
                        click.echo(json.dumps(entry, sort_keys=True))
                        continue
                    if budget < 0:
                        click.echo(
                            f"  v0={fmt(speed)} m/s a={fmt(decel)}: "
                            f"budget={fmt(budget)} s -- infeasible at zero delay"
                        )
                        continue
                    click.echo(f"  v0={fmt(speed)} m/s a={fmt(decel)}: budget={fmt(budget)} s")
                    for pair in entry["pairs"]:
                        click.echo(
                            f"    {pair['model']}@{pair['platform']}: delay={fmt(pair['delay_s'])}s "
                            f"s_stop={fmt(pair['stopping_distance_m'])}m "
                            f"{'safe' if pair['safe'] else 'COLLISION'}"
                        )
    except (ConfigError, DomainError) as exc:
        _fail(EXIT_CONFIG, str(exc))


@main.command()
@click.argument("scenario_path", type=click.Path())
@click.option("--trace-out", "trace_out", type=click.Path(), default=None,
              help="Write the event trace CSV here.")
@click.option("--summary-out", "summary_out", type=click.Path(), default=None,
              help="Write the one-row summary CSV here.")
@click.pass_context
def simulate(ctx, scenario_path, trace_out, summary_out):
    """Run one braking-loop simulation from a scenario file."""
    try:
        loaded = load_scenario(scenario_path)
        config = loaded.config
        if ctx.obj["seed"] is not None:
            config = dataclasses.replace(config, seed=ctx.obj["seed"])
        result = run_sim(config)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except HorizonError as exc:
        _fail(EXIT_HORIZON, str(exc))

    manifest = RunManifest.create("simulate", config, config.seed)
    run_id = "r0000"
    if trace_out:
        with open(trace_out, "w") as fh:
            write_trace_csv(fh, run_id, result.events, comment=manifest.comment())
    if summary_out:
        row = summary_row(
            run_id, result,
            model=config.profile.model_id,
            platform=config.platform.platform_id,
            speed_mps=config.initial_speed,
            decel_mps2=config.deceleration,
            rtt_mode=loaded.network_label,
            bg_rate_hz=config.background_arrival_rate,
            seed=config.seed,
        )
        with open(summary_out, "w") as fh:
            write_summary_csv(fh, [row], comment=manifest.comment())

    if result.outcome == "safe":
        _echo(ctx, f"safe: stopped {fmt(result.d_stop)} m short of the obstacle "
                   f"at t={fmt(result.t_stop)} s")
    else:
        _echo(ctx, "collision: vehicle reached the obstacle")
        sys.exit(EXIT_COLLISION)


@main.command("sweep")
@click.argument("sweep_path", type=click.Path())
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes for independent grid points.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Summary CSV destination (default: stdout).")
@click.pass_context
def sweep_cmd(ctx, sweep_path, jobs, out_path):
    """Run the Cartesian sweep described by a sweep file."""
    try:
        loaded, grid = load_sweep(sweep_path)
        base = loaded.config
        if ctx.obj["seed"] is not None:
            base = dataclasses.replace(base, seed=ctx.obj["seed"])
        points = run_sweep(base, grid, jobs=jobs, base_network_label=loaded.network_label)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))

    manifest = RunManifest.create(
        "sweep", {"base": dataclasses.asdict(base), "grid": str(grid)}, base.seed
    )
    rows = [sweep_point_row(p) for p in points]
    if out_path:
        with open(out_path, "w") as fh:
            write_summary_csv(fh, rows, comment=manifest.comment(), include_error_column=True)
    elif not ctx.obj["quiet"]:
        write_summary_csv(sys.stdout, rows, comment=manifest.comment(),
                          include_error_column=True)

    failed = [p for p in points if not p.ok]
    _echo(ctx, f"sweep: {len(points) - len(failed)}/{len(points)} points succeeded")
    if failed:
        for p in failed:
            click.echo(f"error[{p.run_id}]: {p.error}", err=True)
        sys.exit(EXIT_PARTIAL_SWEEP)


@main.command("validate-queue")
@click.option("--rho", type=float, required=True, help="Target utilization.")
@click.option("--service", type=float, required=True, help="Mean service time, seconds.")
@click.option("--customers", type=int, default=100_000, show_default=True)
@click.option("--seed", "seed_opt", type=int, default=None,
              help="RNG seed (falls back to the global --seed, then 0).")
@click.option("--strict", is_flag=True, help="Refuse unstable utilizations (rho >= 1).")
@click.pass_context
def validate_queue(ctx, rho, service, customers, seed_opt, strict):
    """Compare the simulated M/M/1 sojourn against tau / (1 - rho)."""
    seed = seed_opt if seed_opt is not None else (ctx.obj["seed"] or 0)
    if rho <= 0.0 or service <= 0.0:
        _fail(EXIT_CONFIG, "--rho and --service must be > 0")
    if rho >= 1.0 and strict:
        _fail(EXIT_CONFIG, f"rho={fmt(rho)} >= 1 rejected by --strict")
    arrival_rate = rho / service
    try:
        stats = simulate_mm1(arrival_rate, service, customers, seed=seed)
    except DomainError as exc:
        _fail(EXIT_CONFIG, str(exc))

    if rho >= 1.0:
        _echo(ctx, f"rho={fmt(rho)}: UNSTABLE (no closed form); "
                   f"simulated mean sojourn {fmt(stats.mean_sojourn)} s over "
                   f"{stats.customers_served} customers")
        sys.exit(EXIT_TOLERANCE)

    closed_form = service / (1.0 - rho)
    rel_error = abs(stats.mean_sojourn - closed_form) / closed_form
    _echo(ctx, f"rho={fmt(rho)}: simulated={fmt(stats.mean_sojourn)} s "
               f"closed-form={fmt(closed_form)} s rel-error={rel_error:.4%} "
               f"(seed={seed}, n={stats.customers_served})")
    if rel_error >= QUEUE_TOLERANCE:
        sys.exit(EXIT_TOLERANCE)


if __name__ == "__main__":  # pragma: no cover
    main()
