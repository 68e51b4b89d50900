"""Brute-force reference implementations for the numerical core.

These deliberately share no solver or search code with the production
modules: the regression oracle inverts the regularized Gram matrix with
hand-rolled Gauss-Jordan elimination, and the planning oracle enumerates
simple paths. Both are exponential-ish and only meant for small instances,
either in tests or behind the CLI ``--verify`` flags.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NoPathError, SingularMatrixError
from .gpr import Hyperparameters, Prediction
from .grid import GridMap, GridIndex, WorldPoint
from .planner import PlannerConfig, Path

_MAX_ORACLE_POINTS = 50
_MAX_ORACLE_CELLS = 6


def _gauss_jordan_inverse(a: np.ndarray) -> np.ndarray:
    """Invert a matrix by Gauss-Jordan elimination with partial pivoting."""
    n = a.shape[0]
    work = np.hstack([a.astype(np.float64, copy=True), np.eye(n)])
    for col in range(n):
        pivot_row = col + int(np.argmax(np.abs(work[col:, col])))
        if abs(work[pivot_row, col]) < 1e-300:
            raise SingularMatrixError(f"zero pivot in column {col}")
        if pivot_row != col:
            work[[col, pivot_row]] = work[[pivot_row, col]]
        work[col] /= work[col, col]
        for row in range(n):
            if row != col:
                work[row] -= work[row, col] * work[col]
    return work[:, n:]


def oracle_predict(
    points: list[WorldPoint],
    targets: list[float],
    hyper: Hyperparameters,
    q: WorldPoint,
) -> Prediction:
    """Posterior mean/variance by explicit matrix inversion.

    Reference for gpr.predict; limited to 50 training points.
    """
    n = len(points)
    if n == 0 or n != len(targets):
        raise ValueError(f"need matching non-empty points/targets, got {n}/{len(targets)}")
    if n > _MAX_ORACLE_POINTS:
        raise ValueError(f"oracle limited to {_MAX_ORACLE_POINTS} points, got {n}")

    def k(a: WorldPoint, b: WorldPoint) -> float:
        d2 = (a.x - b.x) ** 2 + (a.y - b.y) ** 2
        return hyper.signal_variance * math.exp(-d2 / (2.0 * hyper.lengthscale**2))

    gram = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            gram[i, j] = k(points[i], points[j])
    gram += (hyper.noise_variance + hyper.jitter) * np.eye(n)
    inv = _gauss_jordan_inverse(gram)
    kstar = np.array([k(q, p) for p in points])
    y = np.asarray(targets, dtype=np.float64)
    mean = float(kstar @ inv @ y)
    variance = float(k(q, q) - kstar @ inv @ kstar)
    return Prediction(mean=mean, variance=max(variance, 1e-12))


def oracle_plan(
    costmap: GridMap,
    start: GridIndex,
    goal: GridIndex,
    cfg: PlannerConfig,
) -> Path:
    """Global optimum by enumerating all simple paths (maps up to 6x6).

    Uses the same edge model as the production planner, recomputed here:
    step length d in {1, sqrt(2)} cell units, edge cost
    d * (1 + gamma * (c_i + c_j) / (2 * 255)), diagonal steps allowed only
    when both flanking orthogonal cells are passable. Branches whose partial
    cost already meets the best known total are pruned, which cannot discard
    an optimum because edge costs are strictly positive.
    """
    h, w = costmap.height, costmap.width
    if h > _MAX_ORACLE_CELLS or w > _MAX_ORACLE_CELLS:
        raise ValueError(f"oracle limited to {_MAX_ORACLE_CELLS}x{_MAX_ORACLE_CELLS} maps")
    cost = costmap.values.astype(np.int64)
    thr = cfg.impassable_threshold
    if cost[start.row, start.col] >= thr or cost[goal.row, goal.col] >= thr:
        raise NoPathError("start or goal cell is impassable")

    if cfg.connectivity == "four":
        moves = [(-1, 0), (0, -1), (0, 1), (1, 0)]
    else:
        moves = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)]

    best_cost = math.inf
    best_path: list[tuple[int, int]] | None = None
    visited = [[False] * w for _ in range(h)]
    visited[start.row][start.col] = True
    trail = [(start.row, start.col)]

    passable = cost[cost < thr]
    c_min = int(passable.min()) if passable.size else 0
    # Cheapest possible cost of any single step, and of the final step into
    # the goal cell; both are true lower bounds for any remaining path.
    min_step = 1.0 + cfg.gamma * (2 * c_min) / (2.0 * 255.0)
    goal_entry = 1.0 + cfg.gamma * (cost[goal.row, goal.col] + c_min) / (2.0 * 255.0)

    def remaining_bound(r: int, c: int) -> float:
        # Reaching the goal takes at least the grid distance in steps, every
        # step costs at least min_step, and the last one at least goal_entry.
        if cfg.connectivity == "four":
            steps = abs(r - goal.row) + abs(c - goal.col)
        else:
            steps = max(abs(r - goal.row), abs(c - goal.col))
        if steps == 0:
            return 0.0
        return (steps - 1) * min_step + goal_entry

    def walk(r: int, c: int, acc: float) -> None:
        nonlocal best_cost, best_path
        if (r, c) == (goal.row, goal.col):
            if acc < best_cost:
                best_cost = acc
                best_path = list(trail)
            return
        # Expanding goal-ward first finds a tight bound early; the ordering
        # does not change which paths are enumerated.
        candidates = []
        for dr, dc in moves:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w):
                continue
            if visited[nr][nc] or cost[nr, nc] >= thr:
                continue
            if dr != 0 and dc != 0:
                if cost[r, nc] >= thr or cost[nr, c] >= thr:
                    continue
                d = math.sqrt(2.0)
            else:
                d = 1.0
            step = d * (1.0 + cfg.gamma * (cost[r, c] + cost[nr, nc]) / (2.0 * 255.0))
            nxt = acc + step
            candidates.append((nxt + remaining_bound(nr, nc), nr, nc, nxt))
        candidates.sort()
        for optimistic, nr, nc, nxt in candidates:
            # 1e-6 margin: float summation along a completion may land a few
            # ulps under the optimistic estimate, and a wrong prune would
            # break the exact agreement with the production planner.
            if optimistic - 1e-6 >= best_cost:
                continue
            visited[nr][nc] = True
            trail.append((nr, nc))
            walk(nr, nc, nxt)
            trail.pop()
            visited[nr][nc] = False

    walk(start.row, start.col, 0.0)
    if best_path is None:
        raise NoPathError(f"no path from {start} to {goal}")
    cells = [GridIndex(r, c) for r, c in best_path]
    length = sum(
        (math.sqrt(2.0) if (a.row != b.row and a.col != b.col) else 1.0)
        for a, b in zip(cells, cells[1:])
    ) * costmap.resolution
    return Path(cells=cells, total_cost=best_cost, length_m=length)
