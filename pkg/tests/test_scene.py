import dataclasses

import numpy as np
import pytest

from bevcast.scene import (
    DESK_GRID,
    PAPER_GRID,
    GridSpec,
    RenderOptions,
    SceneWindow,
    VehicleState,
    VehicleTrack,
    pixel_to_world,
    world_to_pixel,
)


def test_desk_and_paper_constants():
    assert DESK_GRID.shape() == (128, 64)
    assert DESK_GRID.x_range_m == pytest.approx(25.6)
    assert DESK_GRID.y_half_range_m == pytest.approx(3.2)
    assert PAPER_GRID.shape() == (512, 256)
    assert PAPER_GRID.x_range_m == pytest.approx(102.4)
    assert PAPER_GRID.y_half_range_m == pytest.approx(12.8)


def test_world_to_pixel_examples():
    row, col = world_to_pixel(10.0, 0.0, PAPER_GRID)
    assert row == pytest.approx(50.0)
    assert col == pytest.approx(128.0)
    # the lateral minimum maps to column 0
    _, c0 = world_to_pixel(0.0, -12.8, PAPER_GRID)
    assert c0 == pytest.approx(0.0)


def test_pixel_to_world_inverts():
    x, y = pixel_to_world(50.0, 128.0, PAPER_GRID)
    assert (x, y) == (pytest.approx(10.0), pytest.approx(0.0))
    x, y = pixel_to_world(0.0, 0.0, PAPER_GRID)
    assert (x, y) == (pytest.approx(0.0), pytest.approx(-12.8))


def test_round_trip_random_positions():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        x = rng.uniform(0.0, DESK_GRID.x_range_m)
        y = rng.uniform(-DESK_GRID.y_half_range_m, DESK_GRID.y_half_range_m)
        r, c = world_to_pixel(x, y, DESK_GRID)
        x2, y2 = pixel_to_world(r, c, DESK_GRID)
        assert abs(x2 - x) < 1e-9
        assert abs(y2 - y) < 1e-9


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec.from_pixels(128, 64, ppm_x=0.0)
    with pytest.raises(ValueError):
        GridSpec(128, 64, 5.0, 10.0, x_range_m=20.0, y_half_range_m=3.2)
    with pytest.raises(ValueError):
        GridSpec.from_pixels(0, 64)


def test_from_ranges_matches_from_pixels():
    g = GridSpec.from_ranges(25.6, 3.2)
    assert g == DESK_GRID


def test_divisible_by():
    assert DESK_GRID.divisible_by(4)
    assert DESK_GRID.divisible_by(6)
    assert not GridSpec.from_pixels(100, 60).divisible_by(3)


def test_grid_is_immutable():
    with pytest.raises(dataclasses.FrozenInstanceError):
        DESK_GRID.height_px = 10


def _track(vid, points, dt=0.25):
    return VehicleTrack(
        vehicle_id=vid,
        samples=tuple(
            VehicleState(vid, x, y, i * dt) for i, (x, y) in enumerate(points)
        ),
    )


def test_track_uniform_spacing():
    t = _track("a", [(0, 0), (1, 0), (2, 0)])
    assert t.dt_s == pytest.approx(0.25)


def test_track_rejects_non_uniform_spacing():
    samples = (
        VehicleState("a", 0, 0, 0.0),
        VehicleState("a", 1, 0, 0.25),
        VehicleState("a", 2, 0, 0.8),
    )
    with pytest.raises(ValueError, match="non-uniform"):
        VehicleTrack(vehicle_id="a", samples=samples)


def test_track_rejects_foreign_samples():
    with pytest.raises(ValueError, match="does not match"):
        VehicleTrack(vehicle_id="a", samples=(VehicleState("b", 0, 0, 0.0),))


def test_single_sample_track_has_no_dt():
    t = VehicleTrack(vehicle_id="a", samples=(VehicleState("a", 1, 2, 0.0),))
    assert t.dt_s is None


def _frame(*specs, t=0.0):
    return tuple(VehicleState(vid, x, y, t) for vid, x, y in specs)


def test_window_accepts_leaving_vehicle():
    w = SceneWindow(
        input_frames=(_frame(("a", 1, 0), ("b", 2, 0)),),
        output_frames=(_frame(("a", 1.5, 0)), _frame()),
    )
    assert w.depth_in == 1
    assert w.depth_out == 2
    assert set(w.anchor_positions()) == {"a", "b"}


def test_window_rejects_entering_vehicle_in_output():
    with pytest.raises(ValueError, match="missing"):
        SceneWindow(
            input_frames=(_frame(("a", 1, 0)),),
            output_frames=(_frame(("a", 1.5, 0), ("ghost", 3, 0)),),
        )


def test_window_needs_frames():
    with pytest.raises(ValueError):
        SceneWindow(input_frames=(), output_frames=(_frame(),))
    with pytest.raises(ValueError):
        SceneWindow(input_frames=(_frame(),), output_frames=())


def test_render_options_sigma_defaults():
    opts = RenderOptions()
    # spreads default to half the box dimensions, per axis
    assert opts.sigma_x_m == pytest.approx(2.5)
    assert opts.sigma_y_m == pytest.approx(0.9)
    assert opts.vehicle_value == 1.0


def test_render_options_rect_value_default():
    opts = RenderOptions(shape="rect")
    assert opts.vehicle_value == pytest.approx(128.0 / 255.0)


def test_render_options_validation():
    with pytest.raises(ValueError):
        RenderOptions(shape="blob")
    with pytest.raises(ValueError):
        RenderOptions(merge="min")
    with pytest.raises(ValueError):
        RenderOptions(vehicle_value=1.5)
    with pytest.raises(ValueError):
        RenderOptions(rect_w_m=-1.0)
