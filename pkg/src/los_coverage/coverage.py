"""LOS segments, relay selection and origin coverage for sampled scenes."""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import __version__
from .geometry import CoverageRect, Line, LineFrame, chord_half_length, rect_contains_origin, rect_vertices
from .sampling import (
    RandomSeed,
    Role,
    ScenarioParams,
    SimRegion,
    sample_lines_disk,
    sample_lines_manhattan,
    sample_los_extents,
    sample_points_on_line,
)

logger = logging.getLogger(__name__)

# Origin-window reach, in multiples of gamma: RSUs within 12 gamma of the foot
# point plus 12 gamma of relay reach.
RSU_WINDOW_MULTIPLIER = 24.0
VEHICLE_MARGIN_MULTIPLIER = 12.0

EXPORT_FORMATS = ("ndjson", "csv")
CSV_COLUMNS = ["kind", "role", "line", "index", "s", "lo", "hi", "half_width", "x", "y", "x_end", "y_end", "meta"]


class RelayMode(str, Enum):
    """How an RSU picks its relay."""

    APPROXIMATE_UNIFORM = "approx"
    EXACT_VEHICLE = "exact"


@dataclass(frozen=True)
class LosSegment:
    """LOS interval ``[anchor - left_extent, anchor + right_extent]`` on a line."""

    line_index: int
    line: Line
    anchor: float
    left_extent: float
    right_extent: float

    def __post_init__(self):
        if self.left_extent < 0 or self.right_extent < 0:
            raise ValueError("extents: LOS distances must be nonnegative")

    @property
    def lo(self) -> float:
        return self.anchor - self.left_extent

    @property
    def hi(self) -> float:
        return self.anchor + self.right_extent

    def rect(self, eta: float) -> CoverageRect:
        return CoverageRect(self.line, self.lo, self.hi, eta / 2)


@dataclass(frozen=True)
class RelayAnchor:
    """A selected relay: its line, abscissa and the RSU segment that picked it."""

    line_index: int
    line: Line
    abscissa: float
    parent: int


@dataclass
class Scene:
    """One sampled realization. Positions are stored as abscissas per line."""

    params: ScenarioParams
    seed: RandomSeed
    index: int
    region: SimRegion
    radius: float
    lines: list[Line]
    windows: list[tuple[float, float]]
    rsus: list[np.ndarray]
    vehicles: list[np.ndarray] = field(default_factory=list)
    rsu_segments: list[LosSegment] = field(default_factory=list)
    relay_anchors: list[RelayAnchor] = field(default_factory=list)
    relay_segments: list[LosSegment] = field(default_factory=list)


def region_windows(params: ScenarioParams, region: SimRegion, radius: float, lines: list[Line]):
    """RSU and vehicle abscissa windows for every line of a scene."""
    if region is SimRegion.DISK:
        windows = []
        for line in lines:
            half = chord_half_length(line, radius)
            windows.append((-half, half))
        return windows, windows
    reach = RSU_WINDOW_MULTIPLIER * params.gamma
    margin = reach + VEHICLE_MARGIN_MULTIPLIER * params.gamma
    return [(-reach, reach)] * len(lines), [(-margin, margin)] * len(lines)


def sample_scene(
    params: ScenarioParams,
    seed: RandomSeed,
    index: int = 0,
    *,
    region: SimRegion = SimRegion.DISK,
    radius: float = 10_000.0,
    manhattan: bool = False,
    with_vehicles: bool = True,
) -> Scene:
    """Sample lines, RSUs and (optionally) vehicles for scene ``index``.

    In the origin window only lines within ``eta / 2`` of the origin are kept,
    since no other road can cover it.
    """
    reach = radius if region is SimRegion.DISK else params.eta / 2
    sampler = sample_lines_manhattan if manhattan else sample_lines_disk
    lines = sampler(params, reach, seed.generator(index, Role.LINES)) if reach > 0 else []

    rsu_windows, vehicle_windows = region_windows(params, region, radius, lines)
    rsus = [
        sample_points_on_line(params.mu, window, seed.generator(index, Role.RSU, i))
        for i, window in enumerate(rsu_windows)
    ]
    vehicles = []
    if with_vehicles:
        vehicles = [
            sample_points_on_line(params.mu_v, window, seed.generator(index, Role.VEHICLE, i))
            for i, window in enumerate(vehicle_windows)
        ]
    return Scene(
        params=params,
        seed=seed,
        index=index,
        region=region,
        radius=reach,
        lines=lines,
        windows=rsu_windows,
        rsus=rsus,
        vehicles=vehicles,
    )


def _segments(line_index: int, line: Line, anchors: np.ndarray, gamma: float, rng) -> list[LosSegment]:
    left, right = sample_los_extents(gamma, rng, size=len(anchors))
    return [
        LosSegment(line_index, line, float(a), float(w), float(v))
        for a, w, v in zip(anchors, left, right)
    ]


def build_rsu_segments(scene: Scene) -> list[LosSegment]:
    """One LOS segment per RSU with fresh (W, V)."""
    segments = []
    for i, (line, anchors) in enumerate(zip(scene.lines, scene.rsus)):
        if len(anchors):
            rng = scene.seed.generator(scene.index, Role.LOS, i)
            segments.extend(_segments(i, line, anchors, scene.params.gamma, rng))
    return segments


def select_relays(scene: Scene, mode: RelayMode) -> list[RelayAnchor]:
    """Pick one relay inside every RSU's LOS segment.

    In exact mode the relay is a vehicle chosen uniformly among those inside
    the segment; an RSU with no such vehicle gets no relay. The same vehicle
    may be picked by several RSUs.
    """
    anchors = []
    rngs: dict[int, np.random.Generator] = {}
    for parent, segment in enumerate(scene.rsu_segments):
        i = segment.line_index
        rng = rngs.get(i)
        if rng is None:
            rng = rngs[i] = scene.seed.generator(scene.index, Role.RELAY, i)
        if mode is RelayMode.APPROXIMATE_UNIFORM:
            abscissa = segment.lo + rng.random() * (segment.hi - segment.lo)
        else:
            vehicles = scene.vehicles[i]
            first = np.searchsorted(vehicles, segment.lo, side="left")
            last = np.searchsorted(vehicles, segment.hi, side="right")
            if last <= first:
                continue
            abscissa = vehicles[rng.integers(first, last)]
        anchors.append(RelayAnchor(i, segment.line, float(abscissa), parent))
    return anchors


def build_relay_segments(
    anchors: list[RelayAnchor], gamma: float, seed: RandomSeed, scene_index: int = 0
) -> list[LosSegment]:
    """One LOS segment per relay with its own fresh (W', V'), unclipped."""
    by_line: dict[int, list[RelayAnchor]] = {}
    for anchor in anchors:
        by_line.setdefault(anchor.line_index, []).append(anchor)
    segments = []
    for i in sorted(by_line):
        group = by_line[i]
        rng = seed.generator(scene_index, Role.RELAY_LOS, i)
        positions = np.array([a.abscissa for a in group])
        segments.extend(_segments(i, group[0].line, positions, gamma, rng))
    return segments


def build_scene(
    params: ScenarioParams,
    seed: RandomSeed,
    index: int = 0,
    *,
    region: SimRegion = SimRegion.DISK,
    radius: float = 10_000.0,
    relay_mode: RelayMode | None = RelayMode.APPROXIMATE_UNIFORM,
    manhattan: bool = False,
    with_vehicles: bool = False,
) -> Scene:
    """Sample a scene and build its RSU and (unless ``relay_mode`` is None) relay coverage.

    Vehicles are sampled when exact relay selection needs them or when
    ``with_vehicles`` asks for them.
    """
    scene = sample_scene(
        params,
        seed,
        index,
        region=region,
        radius=radius,
        manhattan=manhattan,
        with_vehicles=with_vehicles or relay_mode is RelayMode.EXACT_VEHICLE,
    )
    scene.rsu_segments = build_rsu_segments(scene)
    if relay_mode is not None:
        scene.relay_anchors = select_relays(scene, relay_mode)
        scene.relay_segments = build_relay_segments(scene.relay_anchors, params.gamma, seed, index)
    return scene


def origin_covered(segments: list[LosSegment], eta: float) -> bool:
    """True iff some segment's coverage rectangle contains the origin."""
    if eta <= 0:
        return False
    return any(rect_contains_origin(segment.rect(eta)) for segment in segments)


def _header(scene: Scene) -> dict:
    return {
        "kind": "header",
        "tool": "los-coverage",
        "version": __version__,
        "params": scene.params.to_dict(),
        "params_per_km": scene.params.to_user_units(),
        "seed": scene.seed.value,
        "stream": scene.seed.stream,
        "scene": scene.index,
        "region": scene.region.value,
        "radius": scene.radius,
    }


def scene_records(scene: Scene) -> list[dict]:
    """Flat records for every feature of a scene, header first."""
    eta = scene.params.eta
    records = [_header(scene)]
    for i, (line, (lo, hi)) in enumerate(zip(scene.lines, scene.windows)):
        frame = LineFrame(line)
        records.append({
            "kind": "line", "line": i, "offset": line.offset, "angle": line.angle,
            "lo": lo, "hi": hi, "start": list(frame.to_plane(lo)), "end": list(frame.to_plane(hi)),
        })
    for role, points in (("rsu", scene.rsus), ("vehicle", scene.vehicles)):
        for i, abscissas in enumerate(points):
            frame = LineFrame(scene.lines[i])
            for s in abscissas:
                records.append({"kind": role, "line": i, "s": float(s), "xy": list(frame.to_plane(float(s)))})
    for anchor in scene.relay_anchors:
        records.append({
            "kind": "relay", "line": anchor.line_index, "s": anchor.abscissa, "parent": anchor.parent,
            "xy": list(LineFrame(anchor.line).to_plane(anchor.abscissa)),
        })
    for role, segments in (("rsu", scene.rsu_segments), ("relay", scene.relay_segments)):
        for k, segment in enumerate(segments):
            frame = LineFrame(segment.line)
            records.append({
                "kind": "segment", "role": role, "index": k, "line": segment.line_index,
                "s": segment.anchor, "lo": segment.lo, "hi": segment.hi,
                "start": list(frame.to_plane(segment.lo)), "end": list(frame.to_plane(segment.hi)),
            })
            if eta > 0:
                rect = segment.rect(eta)
                records.append({
                    "kind": "rect", "role": role, "index": k, "line": segment.line_index,
                    "lo": rect.lo, "hi": rect.hi, "half_width": rect.half_width,
                    "vertices": [list(v) for v in rect_vertices(rect)],
                })
    return records


def _csv_row(record: dict) -> dict:
    kind = record["kind"]
    row = {"kind": kind}
    if kind == "header":
        row["meta"] = json.dumps({k: v for k, v in record.items() if k != "kind"}, sort_keys=True)
        return row
    for key in ("role", "line", "index", "s", "lo", "hi", "half_width"):
        if key in record:
            row[key] = record[key]
    if "xy" in record:
        row["x"], row["y"] = record["xy"]
    if "start" in record:
        row["x"], row["y"] = record["start"]
        row["x_end"], row["y_end"] = record["end"]
    if kind == "line":
        row["meta"] = json.dumps({"offset": record["offset"], "angle": record["angle"]})
    if kind == "relay":
        row["meta"] = json.dumps({"parent": record["parent"]})
    return row


def export_scene(scene: Scene, fmt: str = "ndjson") -> bytes:
    """Serialize a scene as newline-delimited JSON or flat CSV."""
    if fmt not in EXPORT_FORMATS:
        raise ExportFormatError(f"Unsupported scene format: {fmt!r} (expected one of {', '.join(EXPORT_FORMATS)})")
    records = scene_records(scene)
    logger.debug("Exporting scene %d with %d records as %s", scene.index, len(records), fmt)
    if fmt == "ndjson":
        return "".join(json.dumps(record) + "\n" for record in records).encode()
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(_csv_row(record))
    return buffer.getvalue().encode()


class ExportFormatError(Exception):
    """Raised when a scene is exported to an unsupported format."""

    pass
