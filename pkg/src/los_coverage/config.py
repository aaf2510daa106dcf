"""Configuration management: presets, config files and environment defaults."""

import logging
import math
import os
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from .analytic import QuadratureSettings
from .coverage import RelayMode
from .montecarlo import DEFAULT_DISK_RADIUS, DEFAULT_N_SCENES
from .sampling import INTENSITY_AXES, METERS_PER_KM, PARAMETER_AXES, RandomSeed, ScenarioParams, SimRegion

DEFAULT_THREADS_ENV = "LOS_COVERAGE_THREADS"
LOG_LEVEL_ENV = "LOS_COVERAGE_LOG_LEVEL"

# Keys accepted in a config file; intensities per km, lengths in meters.
CONFIG_KEYS = frozenset({
    "preset", "lambda_l", "mu", "mu_v", "gamma", "eta", "speed",
    "seed", "n_scenes", "relay_mode", "region", "radius", "manhattan", "threads",
    "x_cutoff", "rel_tol", "abs_tol", "max_subdivisions", "format", "out",
    "axis", "values", "printed_display",
})

REGION_NAMES = {"disk": SimRegion.DISK, "window": SimRegion.ORIGIN_WINDOW}


@dataclass(frozen=True)
class Preset:
    """A named scenario."""

    name: str
    params: ScenarioParams


PRESETS = {
    preset.name: preset
    for preset in (
        Preset("3gpp-urban-a", ScenarioParams.from_per_km(lambda_l=5, mu=2, mu_v=25)),
        Preset("3gpp-urban-b", ScenarioParams.from_per_km(lambda_l=5, mu=4, mu_v=50)),
        Preset("dense-urban", ScenarioParams.from_per_km(lambda_l=15, mu=2, mu_v=25)),
    )
}
DEFAULT_PRESET = "3gpp-urban-a"


def default_threads() -> int:
    """Worker count from the environment, else the number of CPUs."""
    load_dotenv()

    raw = os.getenv(DEFAULT_THREADS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"{DEFAULT_THREADS_ENV}: expected a positive integer, got {raw!r}") from None
    if threads < 1:
        raise ValueError(f"{DEFAULT_THREADS_ENV}: expected a positive integer, got {raw!r}")
    return threads


def default_log_level() -> str:
    """Log level name from the environment; unknown names fall back to WARNING."""
    load_dotenv()
    level = os.getenv(LOG_LEVEL_ENV, "WARNING").upper()
    return level if level in logging.getLevelNamesMapping() else "WARNING"


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a flat TOML document of run settings."""
    with open(path, "rb") as f:
        data = tomllib.load(f)

    nested = [key for key, value in data.items() if isinstance(value, dict)]
    if nested:
        raise ValueError(f"config: nested tables are not supported ({', '.join(nested)})")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ValueError(f"config: unknown keys {', '.join(unknown)}")
    return data


@dataclass
class RunConfig:
    """Fully resolved settings for one command, in SI units."""

    params: ScenarioParams
    n_scenes: int = DEFAULT_N_SCENES
    seed: RandomSeed = field(default_factory=lambda: RandomSeed(0))
    relay_mode: RelayMode = RelayMode.APPROXIMATE_UNIFORM
    region: SimRegion = SimRegion.ORIGIN_WINDOW
    radius: float = DEFAULT_DISK_RADIUS
    manhattan: bool = False
    threads: int = 1
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)
    fmt: str = "json"
    out: str | None = None
    axis: str | None = None
    values: tuple[float, ...] = ()
    printed_display: bool = False

    @classmethod
    def resolve(
        cls,
        overrides: dict[str, Any],
        config_file: str | Path | None = None,
        defaults: dict[str, Any] | None = None,
    ) -> "RunConfig":
        """Merge command defaults, preset, config file and explicit overrides (later wins).

        ``overrides`` uses config-file keys in user units; ``None`` values are
        ignored so unset flags do not mask the file.
        """
        settings: dict[str, Any] = dict(defaults or {})
        if config_file is not None:
            settings.update(load_config_file(config_file))
        settings.update({key: value for key, value in overrides.items() if value is not None})

        preset_name = settings.get("preset", DEFAULT_PRESET)
        if preset_name not in PRESETS:
            raise ValueError(f"preset: unknown preset {preset_name!r} (choose from {', '.join(PRESETS)})")
        user = PRESETS[preset_name].params.to_user_units()
        for name in PARAMETER_AXES:
            if name in settings:
                user[name] = _number(name, settings[name])
        params = ScenarioParams.from_per_km(**user)

        quad_defaults = QuadratureSettings()
        quadrature = QuadratureSettings(
            x_cutoff_multiplier=_number("x_cutoff", settings.get("x_cutoff", quad_defaults.x_cutoff_multiplier)),
            rel_tol=_number("rel_tol", settings.get("rel_tol", quad_defaults.rel_tol)),
            abs_tol=_number("abs_tol", settings.get("abs_tol", quad_defaults.abs_tol)),
            max_subdivisions=_integer("max_subdivisions", settings.get("max_subdivisions", quad_defaults.max_subdivisions)),
        )

        region = settings.get("region", "window")
        if region not in REGION_NAMES:
            raise ValueError(f"region: expected one of {', '.join(REGION_NAMES)}, got {region!r}")
        try:
            relay_mode = RelayMode(settings.get("relay_mode", RelayMode.APPROXIMATE_UNIFORM.value))
        except ValueError:
            raise ValueError(f"relay_mode: expected approx or exact, got {settings['relay_mode']!r}") from None

        axis = settings.get("axis")
        values = tuple(_number("values", v) for v in settings.get("values", ()))
        if axis is not None and axis in INTENSITY_AXES:
            values = tuple(v / METERS_PER_KM for v in values)

        config = cls(
            params=params,
            n_scenes=_integer("n_scenes", settings.get("n_scenes", DEFAULT_N_SCENES)),
            seed=RandomSeed(_integer("seed", settings.get("seed", 0))),
            relay_mode=relay_mode,
            region=REGION_NAMES[region],
            radius=_number("radius", settings.get("radius", DEFAULT_DISK_RADIUS)),
            manhattan=bool(settings.get("manhattan", False)),
            threads=_integer("threads", settings["threads"]) if "threads" in settings else default_threads(),
            quadrature=quadrature,
            fmt=settings.get("format", "json"),
            out=settings.get("out"),
            axis=axis,
            values=values,
            printed_display=bool(settings.get("printed_display", False)),
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Raise ``ValueError("<field>: reason")`` for an unusable configuration."""
        if self.n_scenes < 1:
            raise ValueError(f"n_scenes: must be at least 1, got {self.n_scenes}")
        if not self.radius > 0:
            raise ValueError(f"radius: must be positive, got {self.radius}")
        if self.threads < 1:
            raise ValueError(f"threads: must be at least 1, got {self.threads}")
        if self.axis is not None and self.axis not in PARAMETER_AXES:
            raise ValueError(f"axis: expected one of {', '.join(PARAMETER_AXES)}, got {self.axis!r}")

    def user_value(self, value: float) -> float:
        """A swept value converted back to the units the user typed."""
        return value * METERS_PER_KM if self.axis in INTENSITY_AXES else value


def _number(name: str, value: Any) -> float:
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name}: expected a number, got {value!r}") from None
    if not math.isfinite(number):
        raise ValueError(f"{name}: expected a finite number, got {value!r}")
    return number


def _integer(name: str, value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError(f"{name}: expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name}: expected an integer, got {value!r}") from None
