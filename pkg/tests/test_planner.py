import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amg.errors import (
    GoalBlockedError,
    NoPathError,
    OutOfBoundsError,
    StartBlockedError,
)
from amg.grid import GridIndex, GridMap, WorldPoint
from amg.oracles import oracle_plan
from amg.planner import PlannerConfig, edge_cost, plan

FOUR = PlannerConfig(connectivity="four", gamma=10.0)
EIGHT = PlannerConfig(connectivity="eight", gamma=10.0)


def cost_map(values, res=1.0):
    values = np.asarray(values, dtype=np.uint8)
    return GridMap(
        width=values.shape[1], height=values.shape[0], resolution=res,
        origin=WorldPoint(0.0, 0.0), kind="cost", values=values,
    )


def test_straight_line_on_free_field():
    m = cost_map(np.zeros((5, 5)))
    p = plan(m, GridIndex(0, 0), GridIndex(0, 4), FOUR)
    assert [(c.row, c.col) for c in p.cells] == [(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]
    assert p.total_cost == 4.0
    assert p.length_m == 4.0


def test_wall_with_gap_detour_matches_oracle():
    values = np.zeros((5, 5), dtype=np.uint8)
    values[0:4, 2] = 255  # wall at column 2, gap at row 4
    m = cost_map(values)
    p = plan(m, GridIndex(0, 0), GridIndex(0, 4), FOUR)
    o = oracle_plan(m, GridIndex(0, 0), GridIndex(0, 4), FOUR)
    assert p.total_cost == o.total_cost
    assert (4, 2) in p.cell_set()  # squeezes through the gap


def test_enclosed_goal_has_no_path():
    values = np.zeros((5, 5), dtype=np.uint8)
    values[3, 3:] = 255
    values[4, 3] = 255
    m = cost_map(values)  # goal (4,4) boxed in by the corner walls
    with pytest.raises(NoPathError):
        plan(m, GridIndex(0, 0), GridIndex(4, 4), EIGHT)


def test_gamma_controls_avoidance():
    # high-cost blob on the straight route, clean longer detour below
    values = np.zeros((5, 6), dtype=np.uint8)
    values[1:4, 2:4] = 200
    m = cost_map(values)
    start, goal = GridIndex(2, 0), GridIndex(2, 5)
    blob = {(r, c) for r in (1, 2, 3) for c in (2, 3)}
    for gamma, crosses in ((0.0, True), (10.0, False)):
        cfg = PlannerConfig(connectivity="eight", gamma=gamma)
        p = plan(m, start, goal, cfg)
        assert bool(p.cell_set() & blob) is crosses
        assert p.total_cost == oracle_plan(m, start, goal, cfg).total_cost


def test_blocked_endpoints_and_bounds():
    values = np.zeros((4, 4), dtype=np.uint8)
    values[0, 0] = 255
    values[3, 3] = 255
    m = cost_map(values)
    with pytest.raises(StartBlockedError):
        plan(m, GridIndex(0, 0), GridIndex(1, 1), EIGHT)
    with pytest.raises(GoalBlockedError):
        plan(m, GridIndex(1, 1), GridIndex(3, 3), EIGHT)
    with pytest.raises(OutOfBoundsError):
        plan(m, GridIndex(1, 1), GridIndex(4, 0), EIGHT)


def test_no_corner_cutting():
    # diagonal gap between two walls must not be slipped through
    values = np.array(
        [
            [0, 255, 0],
            [255, 0, 0],
            [0, 0, 0],
        ],
        dtype=np.uint8,
    )
    m = cost_map(values)
    with pytest.raises(NoPathError):
        plan(m, GridIndex(0, 0), GridIndex(2, 2), PlannerConfig(connectivity="eight"))


def test_start_equals_goal():
    m = cost_map(np.zeros((3, 3)))
    p = plan(m, GridIndex(1, 1), GridIndex(1, 1), EIGHT)
    assert [(c.row, c.col) for c in p.cells] == [(1, 1)]
    assert p.total_cost == 0.0


def test_diagonal_step_costs_sqrt2():
    m = cost_map(np.zeros((3, 3)))
    p = plan(m, GridIndex(0, 0), GridIndex(2, 2), EIGHT)
    assert p.total_cost == pytest.approx(2 * math.sqrt(2.0))
    assert len(p.cells) == 3


def test_determinism_repeated_runs():
    rng = np.random.default_rng(3)
    values = rng.choice([0, 64, 128], size=(12, 12)).astype(np.uint8)
    m = cost_map(values)
    runs = [plan(m, GridIndex(0, 0), GridIndex(11, 11), EIGHT) for _ in range(3)]
    assert runs[0].cells == runs[1].cells == runs[2].cells


def test_path_validity_invariants():
    rng = np.random.default_rng(17)
    values = rng.choice([0, 64, 128, 255], size=(10, 10), p=[0.5, 0.2, 0.2, 0.1]).astype(np.uint8)
    values[0, 0] = 0
    values[9, 9] = 0
    m = cost_map(values, res=0.5)
    try:
        p = plan(m, GridIndex(0, 0), GridIndex(9, 9), EIGHT)
    except NoPathError:
        pytest.skip("sampled map happened to be disconnected")
    assert p.cells[0] == GridIndex(0, 0) and p.cells[-1] == GridIndex(9, 9)
    total = 0.0
    for a, b in zip(p.cells, p.cells[1:]):
        assert max(abs(a.row - b.row), abs(a.col - b.col)) == 1
        total += edge_cost(m, a, b, EIGHT)
    assert abs(total - p.total_cost) < 1e-9
    steps = sum(
        math.sqrt(2.0) if (a.row != b.row and a.col != b.col) else 1.0
        for a, b in zip(p.cells, p.cells[1:])
    )
    assert p.length_m == pytest.approx(steps * 0.5)


# --- properties vs the enumeration oracle ------------------------------------


def random_instance(rng, size=4):
    values = rng.choice([0, 64, 128, 255], size=(size, size)).astype(np.uint8)
    free = np.argwhere(values < 255)
    if len(free) < 2:
        return None
    s = free[rng.integers(len(free))]
    g = free[rng.integers(len(free))]
    cfg = PlannerConfig(
        connectivity="eight" if rng.integers(2) else "four",
        gamma=float(rng.choice([0.0, 1.0, 10.0])),
    )
    return cost_map(values), GridIndex(*map(int, s)), GridIndex(*map(int, g)), cfg


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_optimality_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng)
    if inst is None:
        return
    m, s, g, cfg = inst
    try:
        got = plan(m, s, g, cfg)
    except NoPathError:
        with pytest.raises(NoPathError):
            oracle_plan(m, s, g, cfg)
        return
    want = oracle_plan(m, s, g, cfg)
    assert got.total_cost == want.total_cost


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symmetry_of_total_cost(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, size=6)
    if inst is None:
        return
    m, s, g, cfg = inst
    try:
        fwd = plan(m, s, g, cfg)
    except NoPathError:
        return
    back = plan(m, g, s, cfg)
    assert fwd.total_cost == pytest.approx(back.total_cost, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotonicity_in_cell_cost(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, size=5)
    if inst is None:
        return
    m, s, g, cfg = inst
    try:
        base = plan(m, s, g, cfg)
    except NoPathError:
        return
    values = m.values.copy()
    r, c = int(rng.integers(5)), int(rng.integers(5))
    if (r, c) in ((s.row, s.col), (g.row, g.col)):
        return
    raised = min(255, int(values[r, c]) + int(rng.integers(1, 128)))
    if raised <= values[r, c]:
        return
    values[r, c] = raised
    try:
        bumped = plan(m.with_values(values), s, g, cfg)
    except NoPathError:
        return  # blocking the cell removed every route: vacuously monotone
    assert bumped.total_cost >= base.total_cost - 1e-12
