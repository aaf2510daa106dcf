"""Command-line front end: eval, simulate, sweep and scene."""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any

from . import __version__
from .analytic import (
    GammaVariant,
    QuadratureError,
    additive_error_gamma,
    additive_rsu_fraction,
    linear_fraction,
    relay_gain_ratio,
    road_area_fraction,
    theorem1_area_fraction,
    theorem2_area_fraction,
    theorem2_printed_display,
)
from .config import PRESETS, RunConfig, default_log_level
from .coverage import ExportFormatError, build_scene, export_scene
from .montecarlo import SweepSpec, paired_gain_estimate, run_sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

DEFAULT_SCENE_RADIUS = 1000.0
DOCUMENT_FORMATS = ("json", "csv")
SWEEP_COLUMNS_TAIL = [
    "mc_rsu", "mc_rsu_relay", "thm1", "thm2", "additive", "gamma_err", "ratio",
    "mc_rsu_se", "mc_rsu_relay_se", "ratio_se", "thm_ratio", "note",
]


def provenance(config: RunConfig) -> dict[str, Any]:
    """Tool version, resolved SI parameters and seed carried by every output."""
    return {
        "tool": "los-coverage",
        "version": __version__,
        "params": config.params.to_dict(),
        "seed": config.seed.value,
    }


def cmd_eval(config: RunConfig) -> dict[str, Any]:
    """Closed forms and quadrature for the configured scenario."""
    p = config.params
    args = (p.lambda_l, p.mu, p.gamma, p.eta)
    relay = theorem2_area_fraction(*args, config.quadrature)
    ratio = relay_gain_ratio(*args, config.quadrature)
    results = {
        "road_fraction": road_area_fraction(p.lambda_l, p.eta).value,
        "thm1": theorem1_area_fraction(*args).value,
        "thm2": relay.value,
        "thm2_error_bound": relay.error_bound,
        "additive": additive_rsu_fraction(*args),
        "linear_fraction": linear_fraction(p.mu, p.gamma),
        "gamma_err": additive_error_gamma(*args, GammaVariant.THEOREM1_CONSISTENT),
        "gamma_err_as_printed": additive_error_gamma(*args, GammaVariant.AS_PRINTED),
        "gain_ratio": ratio.value,
    }
    if config.printed_display:
        results["thm2_printed_display"] = theorem2_printed_display(*args, config.quadrature)
    return {"provenance": provenance(config), "results": results}


def cmd_simulate(config: RunConfig) -> dict[str, Any]:
    """Paired Monte Carlo estimate, with the analytic ratio alongside."""
    p = config.params
    gain = paired_gain_estimate(
        p, config.relay_mode, config.n_scenes, config.seed,
        sim_region=config.region, radius=config.radius, threads=config.threads, manhattan=config.manhattan,
    )
    rsu, relay = gain.rsu.area_fraction, gain.relay.area_fraction
    results = {
        "n_scenes": config.n_scenes,
        "seed": config.seed.value,
        "relay_mode": config.relay_mode.value,
        "region": config.region.value,
        "mc_rsu": rsu.value,
        "mc_rsu_se": rsu.error_bound,
        "mc_rsu_relay": relay.value,
        "mc_rsu_relay_se": relay.error_bound,
        "ratio": gain.ratio.value,
        "ratio_se": gain.ratio.std_error,
        "thm1": theorem1_area_fraction(p.lambda_l, p.mu, p.gamma, p.eta).value,
        "thm2": None,
        "thm_ratio": None,
        "note": gain.ratio.note,
    }
    try:
        analytic = relay_gain_ratio(p.lambda_l, p.mu, p.gamma, p.eta, config.quadrature)
        results["thm2"] = theorem2_area_fraction(p.lambda_l, p.mu, p.gamma, p.eta, config.quadrature).value
        results["thm_ratio"] = analytic.value
    except QuadratureError as e:
        results["note"] = f"quadrature failed: {e}"
    else:
        if gain.ratio.defined and analytic.defined:
            gap = abs(gain.ratio.value - analytic.value)
            if gap > 4 * gain.ratio.std_error:
                results["note"] = (
                    f"discrepancy: Monte Carlo ratio {gain.ratio.value:.4f} vs quadrature ratio "
                    f"{analytic.value:.4f} (gap {gap:.4f}, std error {gain.ratio.std_error:.4f})"
                )
    return {"provenance": provenance(config), "results": results}


def cmd_sweep(config: RunConfig) -> dict[str, Any]:
    """One row per swept value; intensities are reported per km."""
    if config.axis is None:
        raise ValueError("axis: required for sweep")
    if not config.values:
        raise ValueError("values: at least one value is required")
    spec = SweepSpec(
        base=config.params,
        axis=config.axis,
        values=config.values,
        n_scenes=config.n_scenes,
        seed=config.seed,
        relay_mode=config.relay_mode,
        sim_region=config.region,
        radius=config.radius,
        quadrature=config.quadrature,
        manhattan=config.manhattan,
    )
    rows = []
    for row in run_sweep(spec, threads=config.threads):
        gain = row.gain
        rows.append({
            config.axis: config.user_value(row.value),
            "mc_rsu": gain.rsu.mean,
            "mc_rsu_relay": gain.relay.mean,
            "thm1": row.thm1,
            "thm2": row.thm2,
            "additive": row.additive,
            "gamma_err": row.gamma_err,
            "ratio": gain.ratio.value,
            "mc_rsu_se": gain.rsu.std_error,
            "mc_rsu_relay_se": gain.relay.std_error,
            "ratio_se": gain.ratio.std_error,
            "thm_ratio": row.thm_ratio,
            "note": row.note or gain.ratio.note,
        })
    return {"provenance": provenance(config), "axis": config.axis, "rows": rows}


def cmd_scene(config: RunConfig) -> bytes:
    """Export one sampled scene with RSUs, vehicles, relays and their coverage."""
    scene = build_scene(
        config.params,
        config.seed,
        region=config.region,
        radius=config.radius,
        relay_mode=config.relay_mode,
        manhattan=config.manhattan,
        with_vehicles=True,
    )
    return export_scene(scene, config.fmt)


def _csv_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def render(document: dict[str, Any], fmt: str) -> bytes:
    """Serialize a result document as JSON or as CSV with ``#`` provenance lines."""
    if fmt == "json":
        return (json.dumps(document, indent=2) + "\n").encode()

    buffer = io.StringIO()
    for key, value in document["provenance"].items():
        buffer.write(f"# {key}={json.dumps(value, sort_keys=True)}\n")
    if "rows" in document:
        rows = document["rows"]
        columns = [document["axis"], *SWEEP_COLUMNS_TAIL]
    else:
        rows = [document["results"]]
        columns = list(document["results"])
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_value(row.get(column)) for column in columns])
    return buffer.getvalue().encode()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Flat TOML file of settings (flags win)")
    common.add_argument("--preset", choices=sorted(PRESETS), help="Scenario preset (default 3gpp-urban-a)")
    common.add_argument("--lambda-l", type=float, help="Road intensity per km")
    common.add_argument("--mu", type=float, help="RSU intensity per km")
    common.add_argument("--mu-v", type=float, help="Vehicle intensity per km")
    common.add_argument("--gamma", type=float, help="Mean LOS distance in meters")
    common.add_argument("--eta", type=float, help="Road width in meters")
    common.add_argument("--speed", type=float, help="Vehicle speed in m/s (metadata only)")
    common.add_argument("--seed", type=int, help="64-bit random seed")
    common.add_argument("--n-scenes", type=int, help="Monte Carlo scenes (default 100000)")
    common.add_argument("--relay-mode", choices=["approx", "exact"])
    common.add_argument("--region", choices=["disk", "window"])
    common.add_argument("--radius", type=float, help="Disk radius in meters")
    common.add_argument("--manhattan", action="store_true", default=None, help="Roads at angles 0 or pi/2 only")
    common.add_argument("--threads", type=int, help="Worker processes (default: env or CPU count)")
    common.add_argument("--x-cutoff", type=float, help="Relay integral cutoff in multiples of gamma")
    common.add_argument("--rel-tol", type=float)
    common.add_argument("--abs-tol", type=float)
    common.add_argument("--max-subdivisions", type=int)
    common.add_argument("--out", help="Output path (default stdout)")
    common.add_argument("--format", choices=["json", "csv", "ndjson"])
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(prog="los-coverage", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    evaluate = commands.add_parser("eval", parents=[common], help="Closed forms and quadrature")
    evaluate.add_argument("--printed-display", action="store_true", default=None,
                          help="Also evaluate the printed relay display truncated at the cutoff")
    commands.add_parser("simulate", parents=[common], help="Paired Monte Carlo estimate")
    sweep = commands.add_parser("sweep", parents=[common], help="Sweep one parameter")
    sweep.add_argument("--axis", choices=["lambda_l", "mu", "mu_v", "gamma", "eta", "speed"], required=True)
    sweep.add_argument("--values", required=True, help="Comma-separated values in user units")
    commands.add_parser("scene", parents=[common], help="Export one sampled scene")
    return parser


COMMANDS = {
    "eval": (cmd_eval, {"format": "json"}),
    "simulate": (cmd_simulate, {"format": "json"}),
    "sweep": (cmd_sweep, {"format": "csv"}),
    "scene": (cmd_scene, {"format": "ndjson", "region": "disk", "radius": DEFAULT_SCENE_RADIUS}),
}


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    keys = [
        "preset", "lambda_l", "mu", "mu_v", "gamma", "eta", "speed", "seed", "n_scenes",
        "relay_mode", "region", "radius", "manhattan", "threads", "x_cutoff", "rel_tol",
        "abs_tol", "max_subdivisions", "out", "format", "axis", "printed_display",
    ]
    overrides = {key: getattr(args, key, None) for key in keys}
    values = getattr(args, "values", None)
    if values is not None:
        items = [item.strip() for item in values.split(",") if item.strip()]
        if not items:
            raise ValueError("values: at least one value is required")
        overrides["values"] = items
    return overrides


def run(argv: list[str] | None = None) -> int:
    """Parse arguments, run one command and write its output; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else default_log_level(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    command, defaults = COMMANDS[args.command]
    try:
        config = RunConfig.resolve(_overrides(args), args.config, defaults)
        allowed = ("ndjson", "csv") if args.command == "scene" else DOCUMENT_FORMATS
        if config.fmt not in allowed:
            raise ValueError(f"format: {args.command} supports {', '.join(allowed)}, got {config.fmt!r}")
        result = command(config)
        payload = result if isinstance(result, bytes) else render(result, config.fmt)
    except (ValueError, ExportFormatError) as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_NUMERICAL

    try:
        if config.out:
            Path(config.out).write_bytes(payload)
        else:
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
    except OSError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main():
    """Console entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
