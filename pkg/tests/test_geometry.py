import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from config import SimParams
from geometry import (
    GeometryError,
    TuavPlacement,
    clamp_to_hover,
    clamp_to_slice,
    default_placement,
    from_spherical,
    hover_slice_radius,
    is_in_hover,
    placement_from_point,
    to_spherical,
)

GS = np.array([0.0, 0.0, 30.0])
coords = st.floats(min_value=-300, max_value=300, allow_nan=False)


def test_vertical_tether():
    point = from_spherical(GS, TuavPlacement(0, 100.0, math.pi / 2, 0.0))
    np.testing.assert_allclose(point, [0.0, 0.0, 130.0], atol=1e-12)
    assert to_spherical(GS, point) == pytest.approx((100.0, math.pi / 2, 0.0))


def test_tilted_tether():
    point = from_spherical(GS, TuavPlacement(0, 50.0 * math.sqrt(2.0), math.pi / 4, 0.0))
    np.testing.assert_allclose(point, [50.0, 0.0, 80.0], atol=1e-9)
    T, theta, phi = to_spherical(GS, [50.0, 0.0, 80.0])
    assert T == pytest.approx(70.7107, rel=1e-5)
    assert theta == pytest.approx(math.pi / 4)
    assert phi == 0.0


def test_zero_tether_is_the_ground_station():
    np.testing.assert_allclose(from_spherical(GS, TuavPlacement(0, 0.0, math.pi / 2, 1.0)), GS)
    assert to_spherical(GS, GS) == (0.0, math.pi / 2, 0.0)


def test_point_below_ground_station_rejected():
    with pytest.raises(GeometryError):
        to_spherical(GS, [0.0, 0.0, 10.0])


def test_azimuth_in_range():
    _, _, phi = to_spherical(GS, [-10.0, -10.0, 60.0])
    assert 0.0 <= phi < 2 * math.pi
    assert phi == pytest.approx(5 * math.pi / 4)


def test_clamp_keeps_feasible_points(params):
    point = np.array([10.0, -5.0, 90.0])
    np.testing.assert_array_equal(clamp_to_hover(GS, point, params), point)


def test_clamp_below_apex_returns_apex(params):
    np.testing.assert_allclose(clamp_to_hover(GS, [0.0, 0.0, 0.0], params), GS)


def test_clamp_beyond_sphere_scales_to_t_max(params):
    clamped = clamp_to_hover(GS, [0.0, 0.0, 500.0], params)
    np.testing.assert_allclose(clamped, [0.0, 0.0, 130.0])


def _feasible_samples(params: SimParams, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    tether = params.t_max * rng.uniform(0, 1, n) ** (1 / 3)
    elevation = rng.uniform(params.theta_min, math.pi / 2, n)
    azimuth = rng.uniform(0, 2 * math.pi, n)
    return GS + np.column_stack([
        tether * np.cos(elevation) * np.cos(azimuth),
        tether * np.cos(elevation) * np.sin(azimuth),
        tether * np.sin(elevation),
    ])


FEASIBLE = _feasible_samples(SimParams(), 1000, seed=5)


def test_clamp_low_elevation_lands_on_cone_and_is_nearest(params):
    T, low = 50.0, math.radians(20.0)
    point = GS + np.array([T * math.cos(low), 0.0, T * math.sin(low)])
    clamped = clamp_to_hover(GS, point, params)
    _, theta, _ = to_spherical(GS, clamped)
    assert theta == pytest.approx(params.theta_min)

    samples = _feasible_samples(params, 200_000, seed=3)
    nearest_sampled = np.min(np.linalg.norm(samples - point, axis=1))
    assert np.linalg.norm(clamped - point) <= nearest_sampled + 1e-9


@given(coords, coords, st.floats(min_value=-100, max_value=400, allow_nan=False))
def test_clamp_is_feasible_and_idempotent(x, y, z):
    params = SimParams()
    clamped = clamp_to_hover(GS, [x, y, z], params)
    assert is_in_hover(GS, clamped, params)
    np.testing.assert_allclose(clamp_to_hover(GS, clamped, params), clamped, atol=1e-9)


@given(coords, coords, st.floats(min_value=-100, max_value=400, allow_nan=False))
def test_clamp_is_the_nearest_feasible_point(x, y, z):
    point = np.array([x, y, z])
    clamped = clamp_to_hover(GS, point, SimParams())
    assert np.linalg.norm(clamped - point) <= np.min(np.linalg.norm(FEASIBLE - point, axis=1)) + 1e-9


def test_slice_radius(params):
    assert hover_slice_radius(GS, 30.0, params) == 0.0
    assert hover_slice_radius(GS, 130.0, params) == pytest.approx(0.0, abs=1e-9)
    assert hover_slice_radius(GS, 80.0, params) == pytest.approx(50.0 / math.tan(params.theta_min))
    assert hover_slice_radius(GS, 20.0, params) == -1.0


def test_clamp_to_slice(params):
    radius = hover_slice_radius(GS, 80.0, params)
    point = clamp_to_slice(GS, [500.0, 0.0], 80.0, params)
    np.testing.assert_allclose(point, [radius, 0.0, 80.0])
    assert is_in_hover(GS, point, params)
    with pytest.raises(GeometryError):
        clamp_to_slice(GS, [0.0, 0.0], 200.0, params)


def test_placement_from_point(params):
    placement = placement_from_point(3, GS, [0.0, 0.0, 80.0], params)
    assert placement == TuavPlacement(3, 50.0, math.pi / 2, 0.0)
    placement.validate(params)
    with pytest.raises(GeometryError):
        placement_from_point(3, GS, [90.0, 0.0, 35.0], params)


def test_default_placement_is_centre_of_hover(params):
    placement = default_placement(2, params)
    placement.validate(params)
    np.testing.assert_allclose(from_spherical(GS, placement), [0.0, 0.0, 80.0], atol=1e-12)


def test_placement_validate_rejects_bounds(params):
    with pytest.raises(GeometryError):
        TuavPlacement(0, 120.0, math.pi / 2, 0.0).validate(params)
    with pytest.raises(GeometryError):
        TuavPlacement(0, 50.0, 0.2, 0.0).validate(params)
