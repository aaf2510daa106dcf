"""Plane geometry for road lines in (offset, angle) form.

A line ``l(r, theta)`` is the set of points ``p`` with
``p . (cos theta, sin theta) = r``. Its foot point ``r (cos theta, sin theta)``
is the point closest to the origin. Abscissas along a line are measured from
the foot point in the direction ``(-sin theta, cos theta)``; every module uses
this convention.
"""

import math
from dataclasses import dataclass

Point = tuple[float, float]


def _fold_angle(angle: float) -> tuple[float, int]:
    """Fold an angle into [0, pi); also return the number of half turns removed."""
    turns = math.floor(angle / math.pi)
    folded = max(angle - turns * math.pi, 0.0)
    if folded >= math.pi:  # rounding at the upper edge
        folded = 0.0
        turns += 1
    return folded, turns


@dataclass(frozen=True)
class Line:
    """An undirected road line with signed offset (m) and angle in [0, pi)."""

    offset: float
    angle: float

    def __post_init__(self):
        if not 0.0 <= self.angle < math.pi:
            raise ValueError(f"angle: must lie in [0, pi), got {self.angle}")

    @classmethod
    def normalized(cls, offset: float, angle: float) -> "Line":
        """Build a line from any angle, folding it into [0, pi).

        Turning the normal by pi flips the sign of the offset, so the same
        line is described.
        """
        angle, turns = _fold_angle(angle)
        if turns % 2:
            offset = -offset
        return cls(offset=offset, angle=angle)

    @property
    def normal(self) -> Point:
        return (math.cos(self.angle), math.sin(self.angle))

    @property
    def direction(self) -> Point:
        return (-math.sin(self.angle), math.cos(self.angle))


@dataclass(frozen=True)
class LineFrame:
    """Chart between abscissas on a line and plane coordinates."""

    line: Line

    def to_plane(self, s: float) -> Point:
        fx, fy = foot_point(self.line)
        dx, dy = self.line.direction
        return (fx + s * dx, fy + s * dy)

    def to_abscissa(self, point: Point) -> float:
        """Abscissa of the orthogonal projection of ``point`` onto the line."""
        dx, dy = self.line.direction
        return point[0] * dx + point[1] * dy


@dataclass(frozen=True)
class CoverageRect:
    """The closed rectangle ``[lo, hi] x [-half_width, half_width]`` in a line frame."""

    line: Line
    lo: float
    hi: float
    half_width: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"lo: must not exceed hi ({self.lo} > {self.hi})")
        if self.half_width <= 0:
            raise ValueError(f"half_width: must be positive, got {self.half_width}")


def foot_point(line: Line) -> Point:
    """Orthogonal projection of the origin onto ``line``."""
    nx, ny = line.normal
    return (line.offset * nx, line.offset * ny)


def frame_to_plane(line: Line, s: float) -> Point:
    return LineFrame(line).to_plane(s)


def rect_contains_origin(rect: CoverageRect) -> bool:
    """True iff the origin lies in the closed rectangle.

    The origin projects to abscissa 0 and sits at distance ``|offset|`` from
    the line.
    """
    return abs(rect.line.offset) <= rect.half_width and rect.lo <= 0.0 <= rect.hi


def rect_vertices(rect: CoverageRect) -> list[Point]:
    """Plane vertices of the rectangle, counter-clockwise in the line frame."""
    frame = LineFrame(rect.line)
    nx, ny = rect.line.normal
    corners = []
    for s, t in ((rect.lo, -rect.half_width), (rect.hi, -rect.half_width),
                 (rect.hi, rect.half_width), (rect.lo, rect.half_width)):
        x, y = frame.to_plane(s)
        corners.append((x + t * nx, y + t * ny))
    return corners


def rotate_rect(rect: CoverageRect, delta: float) -> CoverageRect:
    """Rotate a rectangle about the origin by ``delta`` radians.

    When the rotated angle folds back into [0, pi) the line direction flips,
    so the abscissa interval is mirrored.
    """
    raw = rect.line.angle + delta
    line = Line.normalized(rect.line.offset, raw)
    if _fold_angle(raw)[1] % 2:
        return CoverageRect(line, -rect.hi, -rect.lo, rect.half_width)
    return CoverageRect(line, rect.lo, rect.hi, rect.half_width)


def chord_half_length(line: Line, radius: float) -> float:
    """Half length of the chord ``line`` cuts from the disk of ``radius``; 0 if it misses."""
    gap = radius * radius - line.offset * line.offset
    return math.sqrt(gap) if gap > 0 else 0.0
