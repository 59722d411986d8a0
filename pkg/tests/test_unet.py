import numpy as np
import pytest
import torch

from bevcast.bev import BevBlock
from bevcast.scene import DESK_GRID
from bevcast.unet import (
    UNetConfig,
    UNetModel,
    build,
    cross_probe_box,
    forward,
    influence_mask,
    load_checkpoint,
    make_probe_model,
    param_count,
    receptive_radius,
    save_checkpoint,
)

TINY = UNetConfig(depth=2, base_channels=2, in_channels=2, out_channels=3)


def _params_equal(a: UNetModel, b: UNetModel) -> bool:
    pa = dict(a.named_parameters())
    pb = dict(b.named_parameters())
    if pa.keys() != pb.keys():
        return False
    return all(torch.equal(pa[k], pb[k]) for k in pa)


def test_build_is_seed_deterministic():
    assert _params_equal(build(TINY, seed=5), build(TINY, seed=5))
    assert not _params_equal(build(TINY, seed=5), build(TINY, seed=6))


def test_forward_preserves_spatial_size():
    model = build(TINY, seed=0)
    out = forward(model, np.zeros((2, 16, 24), dtype=np.float32))
    assert out.shape == (3, 16, 24)
    assert out.dtype == np.float32


def test_forward_wraps_blocks():
    model = build(TINY, seed=0)
    block = BevBlock(np.zeros((2, 128, 64), dtype=np.float32), DESK_GRID)
    out = forward(model, block)
    assert isinstance(out, BevBlock)
    assert out.grid == DESK_GRID
    assert out.pixels.shape == (3, 128, 64)


def test_input_divisibility_gate():
    model = build(UNetConfig(depth=4, base_channels=1, in_channels=1, out_channels=1))
    ok = torch.zeros(1, 1, 16, 16)
    model(ok)  # minimum size passes
    for h, w in [(15, 16), (16, 15), (24, 24), (8, 8)]:
        with pytest.raises(ValueError, match="divisible"):
            model(torch.zeros(1, 1, h, w))


def test_forward_rejects_wrong_channels_and_rank():
    model = build(TINY, seed=0)
    with pytest.raises(ValueError, match="expected"):
        model(torch.zeros(1, 3, 16, 16))
    with pytest.raises(ValueError, match="expected"):
        model(torch.zeros(2, 16, 16))


def test_terminal_output_ranges():
    # same seed gives identical weights, so the linear output tells us
    # the clamps actually bite instead of passing an already-small range
    x = np.full((1, 16, 16), 5.0, dtype=np.float32)
    mk = lambda term, **kw: build(
        UNetConfig(depth=2, base_channels=2, in_channels=1, out_channels=1,
                   terminal=term, **kw),
        seed=11,
    )
    raw = forward(make_probe_model(
        UNetConfig(depth=2, base_channels=2, in_channels=1, out_channels=1), 11), x)
    assert raw.max() > 1.0

    probe_clip = make_probe_model(
        UNetConfig(depth=2, base_channels=2, in_channels=1, out_channels=1,
                   terminal="clipped_relu", clip_hi=0.5), 11)
    clipped = forward(probe_clip, x)
    assert clipped.max() == pytest.approx(0.5)
    assert clipped.min() >= 0.0

    squashed = forward(mk("tanh"), np.random.default_rng(0)
                       .normal(0, 10, (1, 16, 16)).astype(np.float32))
    assert np.all(squashed > -1.0) and np.all(squashed < 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        UNetConfig(depth=1)
    with pytest.raises(ValueError):
        UNetConfig(depth=9)
    with pytest.raises(ValueError):
        UNetConfig(terminal="relu6")
    with pytest.raises(ValueError):
        UNetConfig(clip_hi=0.0)
    assert UNetConfig(depth=5).min_input_px == 32


def test_param_count_matches_built_models():
    rng = np.random.default_rng(3)
    for _ in range(20):
        cfg = UNetConfig(
            depth=int(rng.integers(2, 6)),
            base_channels=int(rng.integers(1, 9)),
            in_channels=int(rng.integers(1, 6)),
            out_channels=int(rng.integers(1, 6)),
        )
        actual = sum(p.numel() for p in UNetModel(cfg).parameters())
        assert param_count(cfg) == actual


def test_param_count_scales_with_width():
    # deep levels dominate, and their channel counts double, so widening
    # the base roughly quadruples the total
    small = param_count(UNetConfig(depth=4, base_channels=8))
    wide = param_count(UNetConfig(depth=4, base_channels=16))
    assert 3.5 < wide / small < 4.1


def test_receptive_radius_values():
    assert receptive_radius(2) == 16
    assert receptive_radius(3) == 36
    assert receptive_radius(4) == 76
    assert receptive_radius(5) == 156
    with pytest.raises(ValueError):
        receptive_radius(1)
    with pytest.raises(ValueError):
        receptive_radius(2.5)


def test_checkpoint_round_trip(tmp_path):
    model = build(TINY, seed=9)
    path = str(tmp_path / "m.ckpt")
    save_checkpoint(model, path)
    loaded = load_checkpoint(path)
    assert loaded.config == TINY
    assert _params_equal(model, loaded)
    x = np.random.default_rng(1).normal(size=(2, 16, 16)).astype(np.float32)
    np.testing.assert_array_equal(forward(model, x), forward(loaded, x))


def test_checkpoint_corruption_detected(tmp_path):
    model = build(TINY, seed=9)
    path = str(tmp_path / "m.ckpt")
    save_checkpoint(model, path)
    raw = open(path, "rb").read()

    bad = str(tmp_path / "bad.ckpt")
    open(bad, "wb").write(b"XXXX" + raw[4:])
    with pytest.raises(ValueError, match="magic"):
        load_checkpoint(bad)

    open(bad, "wb").write(raw[:4] + b"\x07\x00\x00\x00" + raw[8:])
    with pytest.raises(ValueError, match="version"):
        load_checkpoint(bad)

    open(bad, "wb").write(raw[:-8])
    with pytest.raises(ValueError, match="truncated or corrupt"):
        load_checkpoint(bad)


def test_cross_probe_agrees_with_full_scan():
    # the cross shortcut probes one row and one column; an exhaustive
    # scan of every pixel shows the influence region is exactly the
    # rectangle spanned by those extents
    cfg = UNetConfig(depth=2, base_channels=1, in_channels=1, out_channels=1)
    model = make_probe_model(cfg, seed=2)
    box = cross_probe_box(model, (48, 48))
    mask = influence_mask(model, (48, 48))
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    assert box == (rows[0], rows[-1], cols[0], cols[-1])
    assert mask[box[0] : box[1] + 1, box[2] : box[3] + 1].all()
    assert mask.sum() == (box[1] - box[0] + 1) * (box[3] - box[2] + 1)


def test_probe_box_grows_with_depth():
    sizes = {}
    for depth in (2, 3):
        cfg = UNetConfig(depth=depth, base_channels=1, in_channels=1, out_channels=1)
        r0, r1, c0, c1 = cross_probe_box(make_probe_model(cfg, seed=2), (96, 96))
        sizes[depth] = (r1 - r0 + 1, c1 - c0 + 1)
    assert sizes[3][0] > sizes[2][0]
    assert sizes[3][1] > sizes[2][1]


def test_probe_influence_contains_center():
    cfg = UNetConfig(depth=2, base_channels=1, in_channels=1, out_channels=1)
    model = make_probe_model(cfg, seed=0)
    r0, r1, c0, c1 = cross_probe_box(model, (48, 48), out_pixel=(24, 24))
    assert r0 <= 24 <= r1
    assert c0 <= 24 <= c1
