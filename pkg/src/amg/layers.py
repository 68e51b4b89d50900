"""Cost layers and weighted multi-layer fusion.

Occupancy and regression outputs are converted to 0-255 integer cost grids,
then a weighted stack is fused per cell into one grayscale map. Fusion is a
normalized weighted mean, so weight *ratios* are all that matter and the
0-255 range is preserved. Geometric obstacles can optionally override the
mean (lethal cells), since a heavily down-weighted wall must still be a wall.

Rounding is half-up everywhere for bit-exact outputs across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentError,
    DimensionMismatchError,
    InvalidKindError,
    ZeroWeightSumError,
)
from .grid import FREE, OCCUPIED, GridMap

DEFAULT_UNKNOWN_COST = 128
LETHAL_COST = 255


@dataclass(frozen=True, eq=False)
class CostLayer:
    grid: GridMap
    tag: str
    kind: str = "abstraction"  # "geometric" or "abstraction"

    def __post_init__(self):
        if self.grid.kind != "cost":
            raise InvalidKindError(f"cost layer needs a cost grid, got {self.grid.kind!r}")
        if self.kind not in ("geometric", "abstraction"):
            raise ValueError(f"layer kind must be geometric|abstraction, got {self.kind!r}")


@dataclass(frozen=True, eq=False)
class LayerStack:
    """Ordered (layer, weight) pairs plus the lethal-override policy."""

    layers: tuple[tuple[CostLayer, float], ...]
    lethal_enabled: bool = True
    lethal_threshold: int = LETHAL_COST

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("layer stack must contain at least one layer")
        if not 1 <= self.lethal_threshold <= 255:
            raise ValueError(f"lethal_threshold must be in [1, 255], got {self.lethal_threshold}")
        for _, w in self.layers:
            if w < 0 or not np.isfinite(w):
                raise ValueError(f"weights must be finite and >= 0, got {w}")


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def occupancy_to_cost(
    occ: GridMap, unknown_cost: int = DEFAULT_UNKNOWN_COST, tag: str = "geometric"
) -> CostLayer:
    """Occupied -> 255, free -> 0, unknown -> ``unknown_cost``."""
    if occ.kind != "occupancy":
        raise InvalidKindError(f"expected occupancy grid, got {occ.kind!r}")
    if not 0 <= unknown_cost <= 255:
        raise ValueError(f"unknown_cost must be in [0, 255], got {unknown_cost}")
    cost = np.full((occ.height, occ.width), unknown_cost, dtype=np.uint8)
    cost[occ.values == OCCUPIED] = LETHAL_COST
    cost[occ.values == FREE] = 0
    return CostLayer(grid=occ.with_values(cost, kind="cost"), tag=tag, kind="geometric")


def mean_to_cost(
    mean: GridMap, variance: GridMap, kappa: float = 0.0, tag: str = "abstraction"
) -> CostLayer:
    """255 * clamp(mean + kappa * sqrt(variance), 0, 1), rounded half-up.

    kappa=0 is the plain posterior-mean map; kappa > 0 penalizes uncertain
    regions (confidence-pessimistic).
    """
    if mean.kind != "mean" or variance.kind != "variance":
        raise InvalidKindError(
            f"expected mean+variance grids, got {mean.kind!r}+{variance.kind!r}"
        )
    if not mean.same_geometry(variance):
        raise DimensionMismatchError("mean and variance grids are not aligned")
    pessimistic = mean.values + kappa * np.sqrt(np.maximum(variance.values, 0.0))
    cost = _round_half_up(255.0 * np.clip(pessimistic, 0.0, 1.0)).astype(np.uint8)
    return CostLayer(grid=mean.with_values(cost, kind="cost"), tag=tag, kind="abstraction")


def fuse(stack: LayerStack) -> GridMap:
    """Per-cell normalized weighted mean of the stack, as a cost grid.

    fused = round(sum(w_i * c_i) / sum(w_i)); where the lethal override is
    enabled, any geometric layer at/above the lethal threshold forces 255.
    """
    first = stack.layers[0][0].grid
    for layer, _ in stack.layers[1:]:
        if not layer.grid.same_geometry(first):
            raise AlignmentError(
                f"layer {layer.tag!r} geometry does not match {stack.layers[0][0].tag!r}"
            )
    total_weight = sum(w for _, w in stack.layers)
    if total_weight <= 0:
        raise ZeroWeightSumError("layer stack needs at least one positive weight")

    acc = np.zeros((first.height, first.width), dtype=np.float64)
    for layer, w in stack.layers:
        acc += w * layer.grid.values.astype(np.float64)
    fused = _round_half_up(acc / total_weight)

    if stack.lethal_enabled:
        lethal = np.zeros(fused.shape, dtype=bool)
        for layer, _ in stack.layers:
            if layer.kind == "geometric":
                lethal |= layer.grid.values >= stack.lethal_threshold
        fused[lethal] = LETHAL_COST

    return first.with_values(fused.astype(np.uint8), kind="cost")
