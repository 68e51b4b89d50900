"""Grid/world geometry, raster storage, and PGM map file I/O.

Conventions used throughout the package:

- The map origin is the world position of the lower-left corner of cell
  (row 0, col 0). Rows increase with +y, columns with +x.
- Cell (r, c) covers the half-open world rectangle
  [origin.x + c*res, origin.x + (c+1)*res) x [origin.y + r*res, origin.y + (r+1)*res).
- PGM files follow the image convention (first file row is the top of the
  map), so rasters are vertically flipped on load and save.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import (
    ConfigError,
    DimensionMismatchError,
    InvalidKindError,
    OutOfBoundsError,
    ParseError,
    UnsupportedFormatError,
)

# Occupancy cell states (int8 grid values).
FREE = 0
OCCUPIED = 1
UNKNOWN = -1

# Canonical PGM pixel values for occupancy states.
_OCC_PIXEL = 0
_FREE_PIXEL = 255
_UNKNOWN_PIXEL = 205

DEFAULT_OCCUPIED_THRESHOLD = 50
DEFAULT_FREE_THRESHOLD = 250

# Grid kinds and the dtype each one is stored with.
_KIND_DTYPES = {
    "occupancy": np.int8,
    "cost": np.uint8,
    "mean": np.float64,
    "variance": np.float64,
}


@dataclass(frozen=True)
class WorldPoint:
    """A position in the fixed world frame, in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"world point must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "WorldPoint") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class GridIndex:
    """A (row, col) cell address; row 0 is the bottom (min-y) row."""

    row: int
    col: int

    def __post_init__(self):
        if self.row < 0 or self.col < 0:
            raise ValueError(f"grid index must be non-negative, got {self}")


@dataclass(frozen=True, eq=False)
class MapMetadata:
    """World-frame metadata for a raster map file."""

    resolution: float
    origin: WorldPoint
    occupied_threshold: int = DEFAULT_OCCUPIED_THRESHOLD
    free_threshold: int = DEFAULT_FREE_THRESHOLD

    def __post_init__(self):
        if self.resolution <= 0:
            raise ConfigError(f"resolution must be > 0, got {self.resolution}")
        if not 0 <= self.occupied_threshold < self.free_threshold <= 255:
            raise ConfigError(
                "thresholds must satisfy 0 <= occupied < free <= 255, got "
                f"{self.occupied_threshold}/{self.free_threshold}"
            )


@dataclass(frozen=True, eq=False)
class GridMap:
    """An immutable 2D raster with world-frame metadata.

    ``values`` has shape (height, width); element semantics depend on
    ``kind``: occupancy in {FREE, OCCUPIED, UNKNOWN}, cost is integers in
    [0, 255], mean/variance are unconstrained reals.
    """

    width: int
    height: int
    resolution: float
    origin: WorldPoint
    kind: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in _KIND_DTYPES:
            raise InvalidKindError(f"unknown grid kind {self.kind!r}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"grid must be non-empty, got {self.width}x{self.height}")
        if self.resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {self.resolution}")
        arr = np.asarray(self.values)
        if arr.shape != (self.height, self.width):
            raise DimensionMismatchError(
                f"value array shape {arr.shape} != (height, width) "
                f"({self.height}, {self.width})"
            )
        if self.kind == "occupancy":
            if not np.isin(arr, (FREE, OCCUPIED, UNKNOWN)).all():
                raise ValueError("occupancy grid may only contain FREE/OCCUPIED/UNKNOWN")
        elif self.kind == "cost":
            if not np.issubdtype(arr.dtype, np.integer):
                if not np.array_equal(arr, np.floor(arr)):
                    raise ValueError("cost grid must contain integers")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("cost grid values must lie in [0, 255]")
        arr = arr.astype(_KIND_DTYPES[self.kind], copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def same_geometry(self, other: "GridMap") -> bool:
        return (
            self.width == other.width
            and self.height == other.height
            and self.resolution == other.resolution
            and self.origin == other.origin
        )

    def with_values(self, values: np.ndarray, kind: str | None = None) -> "GridMap":
        """A new map sharing this one's geometry."""
        return GridMap(
            width=self.width,
            height=self.height,
            resolution=self.resolution,
            origin=self.origin,
            kind=self.kind if kind is None else kind,
            values=values,
        )

    def contains(self, p: WorldPoint) -> bool:
        dx = (p.x - self.origin.x) / self.resolution
        dy = (p.y - self.origin.y) / self.resolution
        return 0 <= math.floor(dx) < self.width and 0 <= math.floor(dy) < self.height


def world_to_grid(grid: GridMap, p: WorldPoint) -> GridIndex:
    """Index of the cell containing ``p``; raises OutOfBoundsError outside."""
    col = math.floor((p.x - grid.origin.x) / grid.resolution)
    row = math.floor((p.y - grid.origin.y) / grid.resolution)
    if not (0 <= row < grid.height and 0 <= col < grid.width):
        raise OutOfBoundsError(
            f"point ({p.x}, {p.y}) outside map extent "
            f"({grid.width}x{grid.height} cells at {grid.resolution} m/cell "
            f"from ({grid.origin.x}, {grid.origin.y}))"
        )
    return GridIndex(row=row, col=col)


def grid_to_world(grid: GridMap, idx: GridIndex) -> WorldPoint:
    """World coordinates of the center of cell ``idx``."""
    if not (0 <= idx.row < grid.height and 0 <= idx.col < grid.width):
        raise OutOfBoundsError(f"{idx} outside {grid.width}x{grid.height} grid")
    return WorldPoint(
        x=grid.origin.x + (idx.col + 0.5) * grid.resolution,
        y=grid.origin.y + (idx.row + 0.5) * grid.resolution,
    )


def cell_centers(grid: GridMap) -> tuple[np.ndarray, np.ndarray]:
    """(xs, ys) arrays of shape (height, width) holding cell-center coords."""
    cols = np.arange(grid.width, dtype=np.float64)
    rows = np.arange(grid.height, dtype=np.float64)
    xs = grid.origin.x + (cols + 0.5) * grid.resolution
    ys = grid.origin.y + (rows + 0.5) * grid.resolution
    return np.broadcast_to(xs, (grid.height, grid.width)).copy(), np.broadcast_to(
        ys[:, None], (grid.height, grid.width)
    ).copy()


# --- PGM I/O ---------------------------------------------------------------

_METADATA_KEYS = {"resolution", "origin", "occupied_threshold", "free_threshold"}


def load_metadata(path: str | Path) -> MapMetadata:
    """Read a map metadata YAML file.

    Schema (unknown keys rejected)::

        resolution: 0.25          # meters per cell, > 0
        origin: [0.0, 0.0]        # world x, y of the lower-left map corner
        occupied_threshold: 50    # optional; pixel <= this -> occupied
        free_threshold: 250       # optional; pixel >= this -> free
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ParseError(f"{path}: invalid YAML: {e}") from e
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: metadata must be a mapping")
    unknown = set(raw) - _METADATA_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown metadata keys {sorted(unknown)}")
    if "resolution" not in raw or "origin" not in raw:
        raise ConfigError(f"{path}: metadata requires 'resolution' and 'origin'")
    origin = raw["origin"]
    if not (isinstance(origin, (list, tuple)) and len(origin) == 2):
        raise ConfigError(f"{path}: origin must be a [x, y] pair")
    return MapMetadata(
        resolution=float(raw["resolution"]),
        origin=WorldPoint(float(origin[0]), float(origin[1])),
        occupied_threshold=int(raw.get("occupied_threshold", DEFAULT_OCCUPIED_THRESHOLD)),
        free_threshold=int(raw.get("free_threshold", DEFAULT_FREE_THRESHOLD)),
    )


def save_metadata(meta: MapMetadata, path: str | Path) -> None:
    text = (
        f"resolution: {meta.resolution!r}\n"
        f"origin: [{meta.origin.x!r}, {meta.origin.y!r}]\n"
        f"occupied_threshold: {meta.occupied_threshold}\n"
        f"free_threshold: {meta.free_threshold}\n"
    )
    Path(path).write_text(text, encoding="utf-8")


def _read_pgm_tokens(data: bytes, path) -> tuple[list[int], int]:
    """Parse the P5 header; returns ([width, height, maxval], payload offset)."""
    if not data.startswith(b"P5"):
        magic = data[:2]
        if magic in (b"P2", b"P6", b"P1", b"P3", b"P4"):
            raise UnsupportedFormatError(
                f"{path}: only binary P5 PGM is supported, got {magic.decode('ascii')}"
            )
        raise ParseError(f"{path}: not a PGM file (bad magic {magic!r})")
    pos = 2
    tokens: list[int] = []
    while len(tokens) < 3:
        if pos >= len(data):
            raise ParseError(f"{path}: truncated header at byte {pos}")
        ch = data[pos : pos + 1]
        if ch.isspace():
            pos += 1
        elif ch == b"#":
            nl = data.find(b"\n", pos)
            if nl == -1:
                raise ParseError(f"{path}: unterminated comment at byte {pos}")
            pos = nl + 1
        elif ch.isdigit():
            m = re.match(rb"\d+", data[pos:])
            tokens.append(int(m.group(0)))
            pos += m.end()
        else:
            raise ParseError(f"{path}: unexpected byte {ch!r} in header at byte {pos}")
    # Exactly one whitespace byte separates the maxval from the payload.
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ParseError(f"{path}: missing whitespace after maxval at byte {pos}")
    return tokens, pos + 1


def load_pgm(path: str | Path, meta: MapMetadata) -> GridMap:
    """Load a binary P5 PGM as an occupancy grid.

    Pixels map to occupancy by threshold: pixel <= occupied_threshold is
    occupied, pixel >= free_threshold is free, anything between is unknown.
    """
    data = Path(path).read_bytes()
    (width, height, maxval), offset = _read_pgm_tokens(data, path)
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: maxval must be 255, got {maxval}")
    if width <= 0 or height <= 0:
        raise ParseError(f"{path}: non-positive dimensions {width}x{height}")
    expected = width * height
    payload = data[offset:]
    if len(payload) < expected:
        raise ParseError(
            f"{path}: payload has {len(payload)} bytes, header promises {expected}"
        )
    if len(payload) > expected:
        raise ParseError(
            f"{path}: {len(payload) - expected} trailing bytes after payload"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    occ = np.full((height, width), UNKNOWN, dtype=np.int8)
    occ[pixels <= meta.occupied_threshold] = OCCUPIED
    occ[pixels >= meta.free_threshold] = FREE
    # File row 0 is the top of the map; internal row 0 is the bottom.
    occ = occ[::-1]
    return GridMap(
        width=width,
        height=height,
        resolution=meta.resolution,
        origin=meta.origin,
        kind="occupancy",
        values=occ,
    )


def load_cost_pgm(path: str | Path, meta: MapMetadata) -> GridMap:
    """Load a binary P5 PGM value-as-pixel as a cost grid."""
    data = Path(path).read_bytes()
    (width, height, maxval), offset = _read_pgm_tokens(data, path)
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: maxval must be 255, got {maxval}")
    expected = width * height
    payload = data[offset:]
    if len(payload) != expected:
        raise ParseError(
            f"{path}: payload has {len(payload)} bytes, header promises {expected}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)[::-1]
    return GridMap(
        width=width,
        height=height,
        resolution=meta.resolution,
        origin=meta.origin,
        kind="cost",
        values=pixels,
    )


def save_pgm(grid: GridMap, path: str | Path) -> None:
    """Write an occupancy or cost grid as binary P5 PGM (canonical header).

    Cost grids are written value-as-pixel. Occupancy grids use the canonical
    pixels 0 (occupied), 255 (free), 205 (unknown), which survive a reload
    under the default thresholds. Mean/variance grids are rejected.
    """
    if grid.kind == "cost":
        pixels = grid.values.astype(np.uint8)
    elif grid.kind == "occupancy":
        pixels = np.full((grid.height, grid.width), _UNKNOWN_PIXEL, dtype=np.uint8)
        pixels[grid.values == OCCUPIED] = _OCC_PIXEL
        pixels[grid.values == FREE] = _FREE_PIXEL
    else:
        raise InvalidKindError(f"cannot save {grid.kind!r} grid as PGM")
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels[::-1].tobytes())
