import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amg.errors import DimensionMismatchError, FactorizationError
from amg.gpr import Hyperparameters, fit, kernel, predict, predict_grid
from amg.grid import GridIndex, GridMap, WorldPoint, grid_to_world
from amg.oracles import oracle_predict

HYPER = Hyperparameters()  # lengthscale 3.0, signal 1.0, noise 0.01, jitter 1e-10


def random_model(rng, n=None):
    n = n or int(rng.integers(1, 51))
    pts = [WorldPoint(*xy) for xy in rng.uniform(0.0, 30.0, size=(n, 2))]
    targets = rng.integers(0, 2, size=n).astype(float)
    return pts, targets


# --- kernel -----------------------------------------------------------------


def test_kernel_zero_distance():
    assert kernel(WorldPoint(2, 3), WorldPoint(2, 3), HYPER) == 1.0


def test_kernel_at_sqrt2_lengthscale():
    # ||a-b|| = l*sqrt(2) puts the exponent at exactly -1
    wp = WorldPoint(HYPER.lengthscale * math.sqrt(2.0), 0.0)
    assert kernel(WorldPoint(0, 0), wp, HYPER) == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_kernel_decays_to_zero():
    far = WorldPoint(20 * HYPER.lengthscale, 0.0)
    assert kernel(WorldPoint(0, 0), far, HYPER) < 1e-80


@given(
    ax=st.floats(-50, 50), ay=st.floats(-50, 50),
    bx=st.floats(-50, 50), by=st.floats(-50, 50),
)
def test_kernel_symmetric(ax, ay, bx, by):
    a, b = WorldPoint(ax, ay), WorldPoint(bx, by)
    assert kernel(a, b, HYPER) == kernel(b, a, HYPER)


# --- fit --------------------------------------------------------------------


def test_fit_single_point_alpha():
    model = fit([WorldPoint(0, 0)], [1.0], HYPER)
    assert model.alpha[0] == pytest.approx(1.0 / 1.01, abs=1e-9)


def test_fit_duplicate_points_without_noise_fails():
    hyper = Hyperparameters(noise_variance=1e-300, jitter=0.0)
    pts = [WorldPoint(1, 1), WorldPoint(1, 1)]
    with pytest.raises(FactorizationError):
        fit(pts, [1.0, 0.0], hyper)


def test_fit_chol_is_lower_triangular_with_positive_diagonal():
    rng = np.random.default_rng(7)
    pts, targets = random_model(rng, n=20)
    model = fit(pts, targets, HYPER)
    assert np.allclose(model.chol, np.tril(model.chol))
    assert (np.diag(model.chol) > 0).all()


def test_fit_reconstructs_gram_matrix():
    rng = np.random.default_rng(11)
    pts, targets = random_model(rng, n=40)
    model = fit(pts, targets, HYPER)
    gram = np.array([[kernel(a, b, HYPER) for b in pts] for a in pts])
    gram += (HYPER.noise_variance + HYPER.jitter) * np.eye(len(pts))
    assert np.linalg.norm(model.chol @ model.chol.T - gram) < 1e-8


def test_fit_validates_inputs():
    with pytest.raises(DimensionMismatchError):
        fit([], [], HYPER)
    with pytest.raises(DimensionMismatchError):
        fit([WorldPoint(0, 0)], [1.0, 2.0], HYPER)
    with pytest.raises(ValueError):
        fit(np.array([[np.nan, 0.0]]), [1.0], HYPER)


def test_hyperparameter_validation():
    with pytest.raises(ValueError):
        Hyperparameters(lengthscale=0.0)
    with pytest.raises(ValueError):
        Hyperparameters(signal_variance=-1.0)
    with pytest.raises(ValueError):
        Hyperparameters(noise_variance=0.0, jitter=0.0)


# --- predict ----------------------------------------------------------------


def test_predict_single_point_closed_form():
    p = WorldPoint(0, 0)
    model = fit([p], [1.0], HYPER)
    pred = predict(model, p)
    assert pred.mean == pytest.approx(1.0 / 1.01, abs=1e-9)
    assert pred.variance == pytest.approx(1.0 - 1.0 / 1.01, abs=1e-9)


def test_predict_prior_recovery_far_from_data():
    model = fit([WorldPoint(0, 0)], [1.0], HYPER)
    far = WorldPoint(20 * HYPER.lengthscale, 0.0)
    pred = predict(model, far)
    assert abs(pred.mean) < 1e-6
    assert abs(pred.variance - HYPER.signal_variance) < 1e-6


def test_predict_matches_oracle_on_random_fits():
    rng = np.random.default_rng(123)
    for _ in range(25):
        pts, targets = random_model(rng)
        model = fit(pts, targets, HYPER)
        q = WorldPoint(*rng.uniform(-5.0, 35.0, size=2))
        got = predict(model, q)
        want = oracle_predict(pts, list(targets), HYPER, q)
        assert got.mean == pytest.approx(want.mean, abs=1e-8)
        assert got.variance == pytest.approx(want.variance, abs=1e-8)


def test_predict_interpolates_at_low_noise():
    hyper = Hyperparameters(noise_variance=1e-6)
    rng = np.random.default_rng(5)
    pts = [WorldPoint(*xy) for xy in rng.uniform(0, 30, size=(12, 2))]
    targets = rng.integers(0, 2, size=12).astype(float)
    model = fit(pts, targets, hyper)
    for p, y in zip(pts, targets):
        assert abs(predict(model, p).mean - y) < 1e-3


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_variance_bounds_property(seed):
    rng = np.random.default_rng(seed)
    pts, targets = random_model(rng, n=int(rng.integers(1, 12)))
    model = fit(pts, targets, HYPER)
    q = WorldPoint(*rng.uniform(-10.0, 40.0, size=2))
    pred = predict(model, q)
    assert 0.0 < pred.variance <= HYPER.signal_variance + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_factorization_succeeds_for_distinct_points(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 201))
    pts = rng.uniform(0.0, 100.0, size=(n, 2))  # a.s. distinct
    targets = rng.integers(0, 2, size=n).astype(float)
    model = fit(pts, targets, HYPER)
    assert model.n == n


# --- predict_grid -----------------------------------------------------------


def template(w=10, h=10, res=1.0, origin=(0.0, 0.0)):
    return GridMap(
        width=w, height=h, resolution=res, origin=WorldPoint(*origin),
        kind="cost", values=np.zeros((h, w), dtype=np.uint8),
    )


def test_predict_grid_matches_per_cell_predict():
    tpl = template(w=5, h=4, res=0.5)
    model = fit([WorldPoint(1.0, 1.0)], [1.0], HYPER)
    mean, var = predict_grid(model, tpl)
    for r in range(4):
        for c in range(5):
            p = predict(model, grid_to_world(tpl, GridIndex(r, c)))
            assert mean.values[r, c] == pytest.approx(p.mean, abs=1e-12)
            assert var.values[r, c] == pytest.approx(p.variance, abs=1e-12)


def test_predict_grid_radial_symmetry():
    tpl = template(w=11, h=11, res=1.0)
    center = grid_to_world(tpl, GridIndex(5, 5))
    model = fit([center], [1.0], HYPER)
    mean, _ = predict_grid(model, tpl)
    # cells mirrored across the training point agree
    for dr in range(-5, 6):
        for dc in range(-5, 6):
            assert mean.values[5 + dr, 5 + dc] == pytest.approx(
                mean.values[5 - dr, 5 - dc], abs=1e-9
            )


def test_predict_grid_variance_minimal_at_training_point():
    tpl = template(w=31, h=31, res=1.0)
    center = grid_to_world(tpl, GridIndex(15, 15))
    model = fit([center], [1.0], HYPER)
    _, var = predict_grid(model, tpl)
    at_point = var.values[15, 15]
    xs, ys = np.meshgrid(np.arange(31), np.arange(31))
    dist = np.hypot(xs - 15, ys - 15) * tpl.resolution
    far = var.values[dist >= 3 * HYPER.lengthscale]
    assert far.size > 0
    assert (at_point < far).all()


def test_predict_grid_alignment():
    tpl = template(w=7, h=3, res=0.25, origin=(-1.0, 2.0))
    model = fit([WorldPoint(0, 2.5)], [1.0], HYPER)
    mean, var = predict_grid(model, tpl)
    for out in (mean, var):
        assert out.same_geometry(tpl)
    assert mean.kind == "mean" and var.kind == "variance"
