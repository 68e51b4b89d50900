"""Dijkstra shortest-path search over a fused 0-255 cost map.

The grid induces a graph: 4- or 8-connected neighbors, step length d in
{1, sqrt(2)} cell units, and edge cost

    d * (1 + gamma * (c_i + c_j) / (2 * 255))

so gamma=0 degenerates to plain shortest distance and every edge stays
strictly positive (Dijkstra's precondition). Cells at or above the
impassable threshold are never expanded, and a diagonal step is allowed
only when both flanking orthogonal cells are passable (no corner cutting).

Determinism: frontier ties pop in (cost, row, col) order and parents update
only on strict improvement, so repeated runs return identical paths.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GoalBlockedError,
    InvalidKindError,
    NoPathError,
    OutOfBoundsError,
    StartBlockedError,
)
from .grid import GridIndex, GridMap

SQRT2 = math.sqrt(2.0)

_MOVES_FOUR = ((-1, 0), (0, -1), (0, 1), (1, 0))
_MOVES_EIGHT = tuple(
    (dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)
)


@dataclass(frozen=True)
class PlannerConfig:
    connectivity: str = "eight"  # "four" or "eight"
    gamma: float = 10.0  # strength of cost influence on edge weights
    impassable_threshold: int = 255

    def __post_init__(self):
        if self.connectivity not in ("four", "eight"):
            raise ValueError(f"connectivity must be four|eight, got {self.connectivity!r}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not 1 <= self.impassable_threshold <= 255:
            raise ValueError(
                f"impassable_threshold must be in [1, 255], got {self.impassable_threshold}"
            )


@dataclass(frozen=True)
class Path:
    cells: tuple[GridIndex, ...]
    total_cost: float
    length_m: float

    def cell_set(self) -> set[tuple[int, int]]:
        return {(c.row, c.col) for c in self.cells}


def plan(costmap: GridMap, start: GridIndex, goal: GridIndex, cfg: PlannerConfig | None = None) -> Path:
    """Minimum-total-cost path from start to goal on the cost map."""
    cfg = cfg or PlannerConfig()
    if costmap.kind != "cost":
        raise InvalidKindError(f"planner needs a cost grid, got {costmap.kind!r}")
    h, w = costmap.height, costmap.width
    for name, idx in (("start", start), ("goal", goal)):
        if not (0 <= idx.row < h and 0 <= idx.col < w):
            raise OutOfBoundsError(f"{name} {idx} outside {w}x{h} grid")
    cost = costmap.values.astype(np.int64)
    thr = cfg.impassable_threshold
    if cost[start.row, start.col] >= thr:
        raise StartBlockedError(f"start {start} has cost {cost[start.row, start.col]} >= {thr}")
    if cost[goal.row, goal.col] >= thr:
        raise GoalBlockedError(f"goal {goal} has cost {cost[goal.row, goal.col]} >= {thr}")

    moves = _MOVES_FOUR if cfg.connectivity == "four" else _MOVES_EIGHT
    gamma = cfg.gamma

    dist = np.full((h, w), np.inf)
    parent = np.full((h, w, 2), -1, dtype=np.int64)
    dist[start.row, start.col] = 0.0
    frontier: list[tuple[float, int, int]] = [(0.0, start.row, start.col)]

    while frontier:
        d_here, r, c = heapq.heappop(frontier)
        if d_here > dist[r, c]:
            continue  # stale entry
        if (r, c) == (goal.row, goal.col):
            break
        c_here = cost[r, c]
        for dr, dc in moves:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w):
                continue
            if cost[nr, nc] >= thr:
                continue
            if dr != 0 and dc != 0:
                if cost[r, nc] >= thr or cost[nr, c] >= thr:
                    continue
                step = SQRT2
            else:
                step = 1.0
            nd = d_here + step * (1.0 + gamma * (c_here + cost[nr, nc]) / 510.0)
            if nd < dist[nr, nc]:
                dist[nr, nc] = nd
                parent[nr, nc] = (r, c)
                heapq.heappush(frontier, (nd, nr, nc))

    total = dist[goal.row, goal.col]
    if not math.isfinite(total):
        raise NoPathError(f"no path from {start} to {goal}")

    cells = [goal]
    r, c = goal.row, goal.col
    while (r, c) != (start.row, start.col):
        r, c = parent[r, c]
        cells.append(GridIndex(int(r), int(c)))
    cells.reverse()
    length = sum(
        (SQRT2 if (a.row != b.row and a.col != b.col) else 1.0)
        for a, b in zip(cells, cells[1:])
    ) * costmap.resolution
    return Path(cells=tuple(cells), total_cost=float(total), length_m=length)


def edge_cost(costmap: GridMap, a: GridIndex, b: GridIndex, cfg: PlannerConfig) -> float:
    """Cost of the single step a -> b under the planner's edge model."""
    dr, dc = abs(a.row - b.row), abs(a.col - b.col)
    if max(dr, dc) != 1:
        raise ValueError(f"{a} and {b} are not adjacent")
    d = SQRT2 if (dr == 1 and dc == 1) else 1.0
    ca = int(costmap.values[a.row, a.col])
    cb = int(costmap.values[b.row, b.col])
    return d * (1.0 + cfg.gamma * (ca + cb) / 510.0)


def write_path(path: Path, costmap: GridMap, out_path) -> None:
    """Path export: 'row,col,world_x,world_y' per cell plus a summary line."""
    from .grid import grid_to_world

    lines = []
    for cell in path.cells:
        p = grid_to_world(costmap, cell)
        lines.append(f"{cell.row},{cell.col},{p.x!r},{p.y!r}")
    lines.append(f"total_cost={path.total_cost!r},length_m={path.length_m!r}")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
