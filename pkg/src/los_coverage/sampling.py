"""Seeded sampling of Poisson roads, points on roads and LOS distances."""

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .geometry import Line

METERS_PER_KM = 1000.0

# Parameters that may be swept; intensities are per meter.
PARAMETER_AXES = ("lambda_l", "mu", "mu_v", "gamma", "eta", "speed")
INTENSITY_AXES = frozenset({"lambda_l", "mu", "mu_v"})


@dataclass(frozen=True)
class ScenarioParams:
    """Network scenario in SI units (intensities per meter, lengths in meters)."""

    lambda_l: float
    mu: float
    mu_v: float
    gamma: float
    eta: float
    speed: float = 10.0

    def __post_init__(self):
        for name in PARAMETER_AXES:
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name}: must be a finite nonnegative number, got {value}")

    @classmethod
    def from_per_km(
        cls,
        lambda_l: float,
        mu: float,
        mu_v: float,
        gamma: float = 100.0,
        eta: float = 100.0,
        speed: float = 10.0,
    ) -> "ScenarioParams":
        """Build parameters from intensities given per km."""
        return cls(
            lambda_l=lambda_l / METERS_PER_KM,
            mu=mu / METERS_PER_KM,
            mu_v=mu_v / METERS_PER_KM,
            gamma=gamma,
            eta=eta,
            speed=speed,
        )

    def replace(self, **changes: float) -> "ScenarioParams":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)

    def to_user_units(self) -> dict[str, float]:
        """Same fields with intensities per km."""
        return {
            name: value * METERS_PER_KM if name in INTENSITY_AXES else value
            for name, value in self.to_dict().items()
        }


class Role(IntEnum):
    """What a random sub-stream is used for."""

    LINES = 0
    RSU = 1
    VEHICLE = 2
    LOS = 3
    RELAY = 4
    RELAY_LOS = 5


class SimRegion(str, Enum):
    """Where a scene is sampled."""

    DISK = "disk"
    ORIGIN_WINDOW = "origin_window"


@dataclass(frozen=True)
class RandomSeed:
    """A 64-bit seed plus a stream index.

    Generators are Philox streams keyed by ``(stream, *key)`` so that every
    (scene, role, line) gets its own independent sequence.
    """

    value: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.value < 2**64:
            raise ValueError(f"seed: must be an unsigned 64-bit integer, got {self.value}")
        if self.stream < 0:
            raise ValueError(f"stream: must be nonnegative, got {self.stream}")

    def generator(self, *key: int) -> np.random.Generator:
        sequence = np.random.SeedSequence(self.value, spawn_key=(self.stream, *map(int, key)))
        return np.random.Generator(np.random.Philox(sequence))


def sample_lines_disk(params: ScenarioParams, radius: float, rng: np.random.Generator) -> list[Line]:
    """Poisson lines hitting the disk of ``radius`` around the origin.

    The count is Poisson with mean ``2 lambda_l radius``; offsets are uniform
    on (-radius, radius) and angles uniform on [0, pi).
    """
    if radius <= 0:
        raise ValueError(f"radius: must be positive, got {radius}")
    count = rng.poisson(2.0 * params.lambda_l * radius)
    offsets = rng.uniform(-radius, radius, size=count)
    angles = rng.uniform(0.0, math.pi, size=count)
    return [Line(float(r), float(theta)) for r, theta in zip(offsets, angles)]


def sample_lines_manhattan(params: ScenarioParams, radius: float, rng: np.random.Generator) -> list[Line]:
    """Like :func:`sample_lines_disk` but every angle is 0 or pi/2 with equal odds."""
    if radius <= 0:
        raise ValueError(f"radius: must be positive, got {radius}")
    count = rng.poisson(2.0 * params.lambda_l * radius)
    offsets = rng.uniform(-radius, radius, size=count)
    vertical = rng.integers(0, 2, size=count)
    return [Line(float(r), math.pi / 2 if v else 0.0) for r, v in zip(offsets, vertical)]


def sample_points_on_line(
    intensity: float, window: tuple[float, float], rng: np.random.Generator
) -> np.ndarray:
    """Sorted abscissas of a 1-D Poisson process of ``intensity`` on ``window``."""
    a, b = window
    if a > b:
        raise ValueError(f"window: lower bound exceeds upper bound ({a} > {b})")
    count = rng.poisson(intensity * (b - a))
    return np.sort(rng.uniform(a, b, size=count))


def sample_los_extents(gamma: float, rng: np.random.Generator, size: int | None = None):
    """Left and right LOS distances, i.i.d. exponential with mean ``gamma``.

    Drawn by inverse CDF. Returns a pair of floats, or a pair of arrays of
    length ``size`` when ``size`` is given.
    """
    if gamma < 0:
        raise ValueError(f"gamma: must be nonnegative, got {gamma}")
    shape = (2,) if size is None else (2, size)
    u = rng.random(shape)
    extents = -gamma * np.log1p(-u)
    if size is None:
        return float(extents[0]), float(extents[1])
    return extents[0], extents[1]
