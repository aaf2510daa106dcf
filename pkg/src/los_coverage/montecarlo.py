"""Monte Carlo estimation of LOS area fractions.

Coverage is stationary, so its mean area fraction equals the probability that
the origin is covered. Each scene is sampled independently from its own
random streams and contributes one Bernoulli indicator per coverage mode.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .analytic import (
    DEFAULT_QUADRATURE,
    AreaFraction,
    GainRatio,
    Method,
    QuadratureError,
    QuadratureSettings,
    additive_error_gamma,
    additive_rsu_fraction,
    theorem1_area_fraction,
    theorem2_area_fraction,
)
from .coverage import RelayMode, build_scene, origin_covered
from .sampling import PARAMETER_AXES, RandomSeed, ScenarioParams, SimRegion

logger = logging.getLogger(__name__)

DEFAULT_N_SCENES = 100_000
DEFAULT_DISK_RADIUS = 10_000.0
# Fixed partition of scene indices; never depends on the worker count.
CHUNK_SIZE = 4096


class CoverageMode(str, Enum):
    RSU_ONLY = "rsu_only"
    RSU_PLUS_RELAY = "rsu_plus_relay"


@dataclass(frozen=True)
class CoverageEstimate:
    """Fraction of scenes whose origin is covered, with its Bernoulli standard error."""

    mean: float
    std_error: float
    n_scenes: int
    seed: RandomSeed
    mode: CoverageMode
    relay_mode: RelayMode
    sim_region: SimRegion

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError(f"mean: must lie in [0, 1], got {self.mean}")

    @classmethod
    def from_hits(cls, hits: np.ndarray, **fields) -> "CoverageEstimate":
        n = len(hits)
        mean = float(np.count_nonzero(hits)) / n
        return cls(mean=mean, std_error=math.sqrt(mean * (1.0 - mean) / n), n_scenes=n, **fields)

    @property
    def area_fraction(self) -> AreaFraction:
        """The estimate as an area fraction whose error bound is one standard error."""
        return AreaFraction(self.mean, Method.MONTE_CARLO, self.std_error)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "n_scenes": self.n_scenes,
            "seed": self.seed.value,
            "stream": self.seed.stream,
            "mode": self.mode.value,
            "relay_mode": self.relay_mode.value,
            "sim_region": self.sim_region.value,
        }


@dataclass(frozen=True)
class GainEstimate:
    """RSU-only and RSU-plus-relay estimates from the same scenes, and their ratio."""

    rsu: CoverageEstimate
    relay: CoverageEstimate
    ratio: GainRatio


@dataclass(frozen=True)
class SweepSpec:
    """One parameter swept over ``values`` (SI units) around ``base``."""

    base: ScenarioParams
    axis: str
    values: tuple[float, ...]
    n_scenes: int = DEFAULT_N_SCENES
    seed: RandomSeed = RandomSeed(0)
    relay_mode: RelayMode = RelayMode.APPROXIMATE_UNIFORM
    sim_region: SimRegion = SimRegion.ORIGIN_WINDOW
    radius: float = DEFAULT_DISK_RADIUS
    quadrature: QuadratureSettings = DEFAULT_QUADRATURE
    manhattan: bool = False

    def row_seed(self, row: int) -> RandomSeed:
        """Seed of row ``row``: the base value on stream ``base stream + row``."""
        return RandomSeed(self.seed.value, self.seed.stream + row)

    def __post_init__(self):
        if self.axis not in PARAMETER_AXES:
            raise ValueError(f"axis: unknown parameter {self.axis!r}")
        if not self.values:
            raise ValueError("values: at least one value is required")
        if any(not math.isfinite(v) or v < 0 for v in self.values):
            raise ValueError("values: must be finite and nonnegative")
        if self.n_scenes < 1:
            raise ValueError(f"n_scenes: must be at least 1, got {self.n_scenes}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    params: ScenarioParams
    gain: GainEstimate
    thm1: float
    thm2: float | None
    additive: float
    gamma_err: float
    thm_ratio: float | None
    note: str = ""


def _evaluate_chunk(job: tuple) -> np.ndarray:
    """Coverage indicators ``[rsu_only, rsu_plus_relay]`` for scenes ``start..stop``."""
    params, seed, start, stop, region, radius, relay_mode, manhattan = job
    hits = np.zeros((stop - start, 2), dtype=bool)
    for row, index in enumerate(range(start, stop)):
        scene = build_scene(
            params, seed, index, region=region, radius=radius, relay_mode=relay_mode, manhattan=manhattan
        )
        rsu = origin_covered(scene.rsu_segments, params.eta)
        hits[row, 0] = rsu
        hits[row, 1] = rsu or origin_covered(scene.relay_segments, params.eta)
    return hits


def _evaluate(
    params: ScenarioParams,
    seed: RandomSeed,
    n_scenes: int,
    region: SimRegion,
    radius: float,
    relay_mode: RelayMode | None,
    manhattan: bool,
    threads: int,
) -> np.ndarray:
    if n_scenes < 1:
        raise ValueError(f"n_scenes: must be at least 1, got {n_scenes}")
    jobs = [
        (params, seed, start, min(start + CHUNK_SIZE, n_scenes), region, radius, relay_mode, manhattan)
        for start in range(0, n_scenes, CHUNK_SIZE)
    ]
    workers = min(max(threads, 1), len(jobs))
    logger.debug("Evaluating %d scenes in %d chunks on %d workers", n_scenes, len(jobs), workers)
    if workers == 1:
        chunks = [_evaluate_chunk(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_evaluate_chunk, jobs))
    return np.concatenate(chunks)


def estimate_area_fraction(
    params: ScenarioParams,
    mode: CoverageMode = CoverageMode.RSU_ONLY,
    relay_mode: RelayMode = RelayMode.APPROXIMATE_UNIFORM,
    sim_region: SimRegion = SimRegion.ORIGIN_WINDOW,
    n_scenes: int = DEFAULT_N_SCENES,
    seed: RandomSeed = RandomSeed(0),
    *,
    radius: float = DEFAULT_DISK_RADIUS,
    threads: int = 1,
    manhattan: bool = False,
) -> CoverageEstimate:
    """Estimate the mean area fraction as the fraction of scenes covering the origin.

    ``DISK`` samples every road meeting the disk of ``radius``;
    ``ORIGIN_WINDOW`` samples only roads within eta/2 of the origin and points
    within a gamma-scaled window around the foot point.
    """
    mode = CoverageMode(mode)
    with_relays = mode is CoverageMode.RSU_PLUS_RELAY
    hits = _evaluate(
        params, seed, n_scenes, SimRegion(sim_region), radius,
        RelayMode(relay_mode) if with_relays else None, manhattan, threads,
    )
    estimate = CoverageEstimate.from_hits(
        hits[:, 1 if with_relays else 0],
        seed=seed, mode=mode, relay_mode=RelayMode(relay_mode), sim_region=SimRegion(sim_region),
    )
    logger.info("%s estimate %.6f +/- %.6f over %d scenes", mode.value, estimate.mean, estimate.std_error, n_scenes)
    return estimate


def paired_ratio(rsu_hits: np.ndarray, relay_hits: np.ndarray) -> GainRatio:
    """Ratio of means with a delta-method standard error that uses the pairing."""
    x = rsu_hits.astype(float)
    y = relay_hits.astype(float)
    x_bar = x.mean()
    if x_bar == 0:
        return GainRatio(None, note="undefined ratio: no scene has RSU coverage")
    ratio = y.mean() / x_bar
    residual = y - ratio * x
    std_error = math.sqrt(residual.var() / len(x)) / x_bar
    return GainRatio(float(ratio), float(std_error))


def paired_gain_estimate(
    params: ScenarioParams,
    relay_mode: RelayMode = RelayMode.APPROXIMATE_UNIFORM,
    n_scenes: int = DEFAULT_N_SCENES,
    seed: RandomSeed = RandomSeed(0),
    *,
    sim_region: SimRegion = SimRegion.ORIGIN_WINDOW,
    radius: float = DEFAULT_DISK_RADIUS,
    threads: int = 1,
    manhattan: bool = False,
) -> GainEstimate:
    """RSU-only and RSU-plus-relay estimates on common scenes.

    Relay draws use their own streams, so the RSU-only half is identical to
    :func:`estimate_area_fraction` with the same seed.
    """
    relay_mode = RelayMode(relay_mode)
    sim_region = SimRegion(sim_region)
    hits = _evaluate(params, seed, n_scenes, sim_region, radius, relay_mode, manhattan, threads)
    common = {"seed": seed, "relay_mode": relay_mode, "sim_region": sim_region}
    rsu = CoverageEstimate.from_hits(hits[:, 0], mode=CoverageMode.RSU_ONLY, **common)
    relay = CoverageEstimate.from_hits(hits[:, 1], mode=CoverageMode.RSU_PLUS_RELAY, **common)
    ratio = paired_ratio(hits[:, 0], hits[:, 1])
    logger.info(
        "Paired estimate rsu=%.6f relay=%.6f ratio=%s over %d scenes",
        rsu.mean, relay.mean, ratio.value, n_scenes,
    )
    return GainEstimate(rsu, relay, ratio)


def run_sweep(spec: SweepSpec, threads: int = 1) -> list[SweepRow]:
    """Paired estimates and analytic values for every value of the swept axis.

    Row ``k`` draws from its own stream (:meth:`SweepSpec.row_seed`), so rows are
    independent and each one equals a direct estimate with that seed; row 0
    uses the base seed itself. A quadrature failure is recorded on its row and
    the sweep continues.
    """
    rows = []
    for row, value in enumerate(spec.values):
        params = spec.base.replace(**{spec.axis: float(value)})
        gain = paired_gain_estimate(
            params, spec.relay_mode, spec.n_scenes, spec.row_seed(row),
            sim_region=spec.sim_region, radius=spec.radius, threads=threads, manhattan=spec.manhattan,
        )
        thm1 = theorem1_area_fraction(params.lambda_l, params.mu, params.gamma, params.eta).value
        note = ""
        try:
            thm2 = theorem2_area_fraction(params.lambda_l, params.mu, params.gamma, params.eta, spec.quadrature).value
        except QuadratureError as e:
            logger.warning("Quadrature failed for %s=%g: %s", spec.axis, value, e)
            thm2, note = None, f"quadrature failed: {e}"
        thm_ratio = thm2 / thm1 if thm2 is not None and thm1 > 0 else None
        rows.append(SweepRow(
            value=float(value),
            params=params,
            gain=gain,
            thm1=thm1,
            thm2=thm2,
            additive=additive_rsu_fraction(params.lambda_l, params.mu, params.gamma, params.eta),
            gamma_err=additive_error_gamma(params.lambda_l, params.mu, params.gamma, params.eta),
            thm_ratio=thm_ratio,
            note=note,
        ))
        logger.info("Sweep %s=%g: mc_rsu=%.6f thm1=%.6f", spec.axis, value, gain.rsu.mean, thm1)
    return rows
