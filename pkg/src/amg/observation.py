"""Binary abstraction observations sampled along a robot trajectory.

The robot classifies its surroundings at stations spaced a fixed arc length
apart (3 m by default). Each station yields one binary label; the optional
forward offset lets users project the label ahead of the robot to correct
for a forward-facing camera (default 0, i.e. no correction).

Observation log format (one record per line, no header, UTF-8, LF):

    timestamp,x,y,heading,projected_x,projected_y,label,layer_tag,source
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import ClassifierError, DegenerateTrajectoryError, ParseError
from .grid import WorldPoint

# Nominal travel speed used to synthesize timestamps from arc length.
NOMINAL_SPEED = 1.0  # m/s

_MIN_SEGMENT = 1e-9  # consecutive waypoints closer than this are coincident

_TAG_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


class AbstractLabel(Enum):
    """Binary abstraction label; encoding is fixed everywhere: crowd=1, free=0."""

    CROWD = "crowd"
    FREE = "free"

    @property
    def encoding(self) -> float:
        return 1.0 if self is AbstractLabel.CROWD else 0.0

    @classmethod
    def parse(cls, text: str) -> "AbstractLabel":
        if text == "crowd":
            return cls.CROWD
        if text == "free":
            return cls.FREE
        raise ValueError(f"label must be crowd|free, got {text!r}")


class Source(Enum):
    MOCK = "mock"
    VLM = "vlm"
    FILE = "file"


@dataclass(frozen=True)
class Observation:
    position: WorldPoint
    heading: float  # radians, world frame
    projected_position: WorldPoint
    label: AbstractLabel
    layer_tag: str
    timestamp: float  # seconds since scenario start
    source: Source

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError(f"timestamp must be >= 0, got {self.timestamp}")
        if not _TAG_RE.match(self.layer_tag):
            raise ValueError(f"layer_tag must match [A-Za-z0-9_.-]+, got {self.layer_tag!r}")


@dataclass(frozen=True)
class Trajectory:
    """Ordered waypoints; headings follow the segment directions."""

    waypoints: tuple[WorldPoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if len(self.waypoints) < 2:
            raise DegenerateTrajectoryError(
                f"trajectory needs >= 2 waypoints, got {len(self.waypoints)}"
            )
        for i, (a, b) in enumerate(zip(self.waypoints, self.waypoints[1:])):
            if a.distance_to(b) <= _MIN_SEGMENT:
                raise DegenerateTrajectoryError(
                    f"waypoints {i} and {i + 1} are coincident at ({a.x}, {a.y})"
                )

    def total_length(self) -> float:
        return sum(a.distance_to(b) for a, b in zip(self.waypoints, self.waypoints[1:]))


def sample_stations(traj: Trajectory, interval: float) -> list[tuple[WorldPoint, float]]:
    """Poses at arc lengths 0, interval, 2*interval, ... <= total length.

    Positions are linearly interpolated along segments; the heading at a
    station is the direction of the segment being traversed (at a shared
    vertex, the upcoming segment wins).
    """
    if interval <= 0:
        raise ValueError(f"interval must be > 0, got {interval}")
    segments = []
    for a, b in zip(traj.waypoints, traj.waypoints[1:]):
        segments.append((a, b, a.distance_to(b)))
    total = sum(s[2] for s in segments)
    if total <= _MIN_SEGMENT:
        raise DegenerateTrajectoryError("trajectory has zero length")

    stations: list[tuple[WorldPoint, float]] = []
    count = math.floor(total / interval) + 1
    seg_idx = 0
    seg_start = 0.0
    for i in range(count):
        s = i * interval
        # Advance to the segment containing arc length s (half-open on the
        # right, except the final segment which is closed at the endpoint).
        while seg_idx < len(segments) - 1 and s >= seg_start + segments[seg_idx][2]:
            seg_start += segments[seg_idx][2]
            seg_idx += 1
        a, b, seg_len = segments[seg_idx]
        t = (s - seg_start) / seg_len
        t = min(max(t, 0.0), 1.0)
        pos = WorldPoint(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))
        heading = math.atan2(b.y - a.y, b.x - a.x)
        stations.append((pos, heading))
    return stations


def project_forward(pos: WorldPoint, heading: float, distance: float) -> WorldPoint:
    if distance == 0.0:
        return pos
    return WorldPoint(pos.x + distance * math.cos(heading), pos.y + distance * math.sin(heading))


def observe_along(
    traj: Trajectory,
    interval: float,
    classifier,
    layer_tag: str,
    offset_distance: float = 0.0,
) -> list[Observation]:
    """One observation per station, classifier queried strictly in station order."""
    stations = sample_stations(traj, interval)
    observations = []
    for i, (pos, heading) in enumerate(stations):
        try:
            label = classifier.classify(pos, heading)
        except ClassifierError as e:
            # Preserve the concrete error type, attach the station index.
            raise type(e)(f"station {i} ({pos.x}, {pos.y}): {e}") from e
        except Exception as e:
            raise ClassifierError(
                f"station {i} ({pos.x}, {pos.y}): {e}"
            ) from e
        observations.append(
            Observation(
                position=pos,
                heading=heading,
                projected_position=project_forward(pos, heading, offset_distance),
                label=label,
                layer_tag=layer_tag,
                timestamp=(i * interval) / NOMINAL_SPEED,
                source=classifier.source,
            )
        )
    return observations


def log_write(observations: list[Observation], path: str | Path) -> None:
    """Write the observation log; floats keep full round-trip precision."""
    lines = []
    for o in observations:
        lines.append(
            f"{o.timestamp!r},{o.position.x!r},{o.position.y!r},{o.heading!r},"
            f"{o.projected_position.x!r},{o.projected_position.y!r},"
            f"{o.label.value},{o.layer_tag},{o.source.value}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def log_read(path: str | Path) -> list[Observation]:
    """Read an observation log; failures report 1-based line numbers."""
    observations = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                raise ParseError(f"{path}: line {lineno}: empty record")
            fields = line.split(",")
            if len(fields) != 9:
                raise ParseError(
                    f"{path}: line {lineno}: expected 9 comma-separated fields, "
                    f"got {len(fields)}"
                )
            try:
                ts, x, y, heading, px, py = (float(v) for v in fields[:6])
                label = AbstractLabel.parse(fields[6])
                source = Source(fields[8])
                observations.append(
                    Observation(
                        position=WorldPoint(x, y),
                        heading=heading,
                        projected_position=WorldPoint(px, py),
                        label=label,
                        layer_tag=fields[7],
                        timestamp=ts,
                        source=source,
                    )
                )
            except (ValueError, ParseError) as e:
                raise ParseError(f"{path}: line {lineno}: {e}") from e
    return observations
