"""Abstraction-layer cost mapping and crowd-aware grid path planning.

Pipeline: sparse binary observations along a trajectory -> Gaussian process
interpolation into a probabilistic grid layer -> weighted fusion with a
geometric occupancy layer -> Dijkstra planning on the fused 0-255 cost map.
"""

from .errors import AmgError
from .grid import GridIndex, GridMap, MapMetadata, WorldPoint, grid_to_world, world_to_grid
from .observation import AbstractLabel, Observation, Trajectory
from .gpr import GprModel, Hyperparameters, Prediction, fit, predict, predict_grid
from .layers import CostLayer, LayerStack, fuse, mean_to_cost, occupancy_to_cost
from .planner import Path, PlannerConfig, plan
from .classifier import CrowdDisc, MockCrowdClassifier, ReplayClassifier, VlmClassifier

__all__ = [
    "AmgError",
    "AbstractLabel",
    "CostLayer",
    "CrowdDisc",
    "GprModel",
    "GridIndex",
    "GridMap",
    "Hyperparameters",
    "LayerStack",
    "MapMetadata",
    "MockCrowdClassifier",
    "Observation",
    "Path",
    "PlannerConfig",
    "Prediction",
    "ReplayClassifier",
    "Trajectory",
    "VlmClassifier",
    "WorldPoint",
    "fit",
    "fuse",
    "grid_to_world",
    "mean_to_cost",
    "occupancy_to_cost",
    "plan",
    "predict",
    "predict_grid",
    "world_to_grid",
]

__version__ = "0.1.0"
