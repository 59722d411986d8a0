"""Command-line front end: synth, encode, train, predict, eval, render.

Config precedence is flags > config file > built-in defaults.  The
config file is JSON whose keys are flag destinations (e.g. {"lr":
0.001}); it is taken from --config or the BEVCAST_CONFIG environment
variable.  Every training run writes a `<checkpoint>.manifest` with the
effective settings; predict/eval read it back as defaults and refuse
incompatible overrides.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from multiprocessing import Pool

import numpy as np
from PIL import Image

import torch

from . import bev, dataio
from .extraction import ExtractionParams, extract_positions
from .metrics import report_to_csv, report_to_text
from .pipeline import evaluate_windows, predict_window_kf, predict_window_net, window_truth
from .scene import DESK_GRID, PAPER_GRID, GridSpec, RenderOptions
from .training import TrainConfig, fit, write_loss_csv
from .unet import UNetConfig, build, load_checkpoint, save_checkpoint

TERMINAL_FLAGS = {"linear": "linear", "tanh": "tanh", "clippedrelu": "clipped_relu"}


class CliError(ValueError):
    """A user-facing error: printed as one line, exit code 1."""


def _parse_grid(text: str, ppm: str) -> GridSpec:
    px, py = (float(v) for v in ppm.split(","))
    if text == "desk":
        base = DESK_GRID
        return GridSpec.from_pixels(base.height_px, base.width_px, px, py)
    if text == "paper":
        base = PAPER_GRID
        return GridSpec.from_pixels(base.height_px, base.width_px, px, py)
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise CliError(f"bad --grid {text!r}: want desk, paper, or HxW") from None
    return GridSpec.from_pixels(h, w, px, py)


def _render_options(ns) -> RenderOptions:
    return RenderOptions(
        shape=ns.shape,
        merge=ns.merge,
        vehicle_value=ns.vehicle_value,
        lane_value=ns.lane_value,
        rect_w_m=ns.rect_w,
        rect_h_m=ns.rect_h,
        sigma_x_m=ns.sigma_x,
        sigma_y_m=ns.sigma_y,
    )


def _load_table(ns) -> dataio.TrajectoryTable:
    if not os.path.exists(ns.data):
        raise CliError(f"data file not found: {ns.data}")
    table = dataio.load_csv(ns.data, frame_rate_hz=ns.rate)
    sidecar = os.path.splitext(ns.data)[0] + ".lanes"
    if os.path.exists(sidecar):
        table = dataio.TrajectoryTable(
            rows=table.rows,
            frame_rate_hz=table.frame_rate_hz,
            lanes=dataio.load_lanes(sidecar),
        )
    return table


def write_manifest(path: str, entries: dict) -> None:
    with open(path, "w") as f:
        for key in sorted(entries):
            f.write(f"{key} {entries[key]}\n")


def read_manifest(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    with open(path) as f:
        for line in f:
            if line.strip():
                key, _, value = line.strip().partition(" ")
                out[key] = value
    return out


def _manifest_entries(ns, grid: GridSpec, opts: RenderOptions) -> dict:
    return {
        "grid.height_px": grid.height_px,
        "grid.width_px": grid.width_px,
        "grid.ppm_x": grid.ppm_x,
        "grid.ppm_y": grid.ppm_y,
        "render.shape": opts.shape,
        "render.merge": opts.merge,
        "render.vehicle_value": opts.vehicle_value,
        "render.lane_value": opts.lane_value,
        "render.rect_w_m": opts.rect_w_m,
        "render.rect_h_m": opts.rect_h_m,
        "render.sigma_x_m": opts.sigma_x_m,
        "render.sigma_y_m": opts.sigma_y_m,
        "render.lanes": ns.lanes,
        "window.depth_in": ns.depth_in,
        "window.depth_out": ns.depth_out,
        "data.rate_hz": ns.rate,
    }


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="trajectory CSV path")
    p.add_argument("--rate", type=float, default=4.0, help="frame rate of the CSV (Hz)")
    p.add_argument("--depth-in", type=int, default=8, help="observed frames D")
    p.add_argument("--depth-out", type=int, default=8, help="predicted frames M")
    p.add_argument("--stride", type=int, default=None, help="window stride (default D+M)")


def _add_render_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", default="desk", help="desk, paper, or HxW pixels")
    p.add_argument("--ppm", default="5,10", help="pixels per meter, 'x,y'")
    p.add_argument("--shape", choices=["gaussian", "rect"], default="gaussian")
    p.add_argument("--merge", choices=["max", "add"], default="max")
    p.add_argument("--rect-w", type=float, default=1.8, help="vehicle width (m)")
    p.add_argument("--rect-h", type=float, default=5.0, help="vehicle length (m)")
    p.add_argument("--sigma-x", type=float, default=None, help="override longitudinal spread (m)")
    p.add_argument("--sigma-y", type=float, default=None, help="override lateral spread (m)")
    p.add_argument("--vehicle-value", type=float, default=None)
    p.add_argument("--lane-value", type=float, default=1.0)
    p.add_argument("--lanes", action="store_true", help="overlay lane markings on inputs")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth", type=int, default=4, help="U-Net depth levels")
    p.add_argument("--base-channels", type=int, default=8)
    p.add_argument(
        "--terminal", choices=sorted(TERMINAL_FLAGS), default="linear"
    )
    p.add_argument("--clip-hi", type=float, default=None, help="clippedrelu ceiling")


def _add_extract_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p-min", type=float, default=0.5, help="peak threshold")
    p.add_argument("--n-sigma", type=float, default=3.0, help="centroid window size rule")
    p.add_argument(
        "--extract-mode",
        choices=["mass_normalized", "paper_literal"],
        default="mass_normalized",
    )


def _model_config(ns, depth_in: int, depth_out: int) -> UNetConfig:
    if ns.clip_hi is not None and ns.terminal != "clippedrelu":
        raise CliError("--clip-hi only applies to --terminal clippedrelu")
    return UNetConfig(
        depth=ns.depth,
        base_channels=ns.base_channels,
        in_channels=depth_in,
        out_channels=depth_out,
        terminal=TERMINAL_FLAGS[ns.terminal],
        clip_hi=ns.clip_hi if ns.clip_hi is not None else 1.0,
    )


def _windows(ns, table, grid):
    stride = ns.stride if ns.stride is not None else ns.depth_in + ns.depth_out
    return dataio.slice_windows(table, ns.depth_in, ns.depth_out, stride, grid)


def cmd_synth(ns) -> int:
    spec = dataio.SynthSpec(
        scenario=ns.scenario,
        n_vehicles=ns.n_vehicles,
        duration_s=ns.duration,
        episode_len_s=ns.episode_len,
        frame_rate_hz=ns.rate,
        speed_range=(ns.speed_min, ns.speed_max),
        lane_centers_y=tuple(float(v) for v in ns.lane_centers.split(",")),
        x_range_m=ns.x_range,
        noise_std_m=ns.noise,
        seed=ns.seed,
    )
    table = dataio.synthesize(spec)
    dataio.write_csv(table, ns.out)
    dataio.write_lanes(table.lanes, os.path.splitext(ns.out)[0] + ".lanes")
    print(f"wrote {len(table.rows)} rows to {ns.out}")
    return 0


def _encode_worker(job):
    window, grid, opts, include_lanes = job
    inp, tgt = bev.encode_window(window, grid, opts, include_lanes=include_lanes)
    return inp.pixels, tgt.pixels


def _contact_sheet(blocks: list[np.ndarray], path: str) -> None:
    strip = np.concatenate([ch for blk in blocks for ch in blk], axis=1)
    Image.fromarray(bev.quantize(strip), mode="L").save(path)


def cmd_encode(ns) -> int:
    grid = _parse_grid(ns.grid, ns.ppm)
    opts = _render_options(ns)
    table = _load_table(ns)
    windows = _windows(ns, table, grid)
    if not windows:
        raise CliError("no complete windows in the data")
    os.makedirs(ns.out, exist_ok=True)
    jobs = [(w, grid, opts, ns.lanes) for w in windows]
    if ns.jobs > 1:
        with Pool(ns.jobs) as pool:
            encoded = pool.map(_encode_worker, jobs)
    else:
        encoded = [_encode_worker(j) for j in jobs]
    arrays = {}
    for i, (inp, tgt) in enumerate(encoded):
        arrays[f"in_{i:05d}"] = inp
        arrays[f"tgt_{i:05d}"] = tgt
    np.savez_compressed(os.path.join(ns.out, "blocks.npz"), **arrays)
    for i in range(min(ns.sheets, len(encoded))):
        _contact_sheet(list(encoded[i]), os.path.join(ns.out, f"window_{i:05d}.png"))
    write_manifest(
        os.path.join(ns.out, "encode.manifest"), _manifest_entries(ns, grid, opts)
    )
    print(f"encoded {len(encoded)} windows to {ns.out}")
    return 0


class _LazyWindowDataset:
    """Indexable view that encodes windows on demand (keeps RAM flat)."""

    def __init__(self, windows, grid, opts, include_lanes):
        self.windows = windows
        self.grid = grid
        self.opts = opts
        self.include_lanes = include_lanes

    def __len__(self) -> int:
        return len(self.windows)

    def __getitem__(self, i: int):
        inp, tgt = bev.encode_window(
            self.windows[i], self.grid, self.opts, include_lanes=self.include_lanes
        )
        return inp.pixels, tgt.pixels


def cmd_train(ns) -> int:
    torch.set_num_threads(max(1, ns.jobs))
    grid = _parse_grid(ns.grid, ns.ppm)
    opts = _render_options(ns)
    table = _load_table(ns)
    windows = _windows(ns, table, grid)
    if not windows:
        raise CliError("no complete windows in the data")
    if not grid.divisible_by(ns.depth):
        raise CliError(
            f"grid {grid.height_px}x{grid.width_px} not divisible by 2**{ns.depth}"
        )
    cfg = TrainConfig(
        lr=ns.lr,
        l2=ns.l2,
        grad_clip_norm=ns.grad_clip,
        epochs=ns.epochs,
        batch_size=ns.batch_size,
        seed=ns.seed,
    )
    model = build(_model_config(ns, ns.depth_in, ns.depth_out), seed=ns.seed)
    dataset = _LazyWindowDataset(windows, grid, opts, ns.lanes)
    result = fit(model, dataset, cfg, checkpoint_every=ns.checkpoint_every, checkpoint_path=ns.out)
    save_checkpoint(result.model, ns.out)
    write_loss_csv(result.curve, ns.out + ".loss.csv")
    entries = _manifest_entries(ns, grid, opts)
    entries.update(
        {
            "model.depth": ns.depth,
            "model.base_channels": ns.base_channels,
            "model.terminal": ns.terminal,
            "model.clip_hi": ns.clip_hi if ns.clip_hi is not None else 1.0,
            "train.lr": cfg.lr,
            "train.l2": cfg.l2,
            "train.epochs": cfg.epochs,
            "train.batch_size": cfg.batch_size,
            "train.seed": cfg.seed,
        }
    )
    write_manifest(ns.out + ".manifest", entries)
    final = result.curve[-1][2] if result.curve else float("nan")
    print(f"trained {len(result.curve)} steps; final rmse {final:.6f}; wrote {ns.out}")
    return 0


def _apply_manifest_defaults(ns, manifest: dict[str, str]) -> None:
    """Fill unset predict/eval flags from a training manifest."""
    casts = {
        "grid": ("", str),
        "shape": ("render.shape", str),
        "merge": ("render.merge", str),
        "vehicle_value": ("render.vehicle_value", float),
        "lane_value": ("render.lane_value", float),
        "rect_w": ("render.rect_w_m", float),
        "rect_h": ("render.rect_h_m", float),
        "sigma_x": ("render.sigma_x_m", float),
        "sigma_y": ("render.sigma_y_m", float),
        "depth_in": ("window.depth_in", int),
        "depth_out": ("window.depth_out", int),
        "rate": ("data.rate_hz", float),
    }
    if getattr(ns, "grid", None) is None and "grid.height_px" in manifest:
        ns.grid = f"{manifest['grid.height_px']}x{manifest['grid.width_px']}"
        ns.ppm = f"{manifest['grid.ppm_x']},{manifest['grid.ppm_y']}"
    for attr, (key, cast) in casts.items():
        if attr == "grid":
            continue
        if getattr(ns, attr, None) is None and key in manifest:
            setattr(ns, attr, cast(manifest[key]))
    if getattr(ns, "lanes", None) is None and "render.lanes" in manifest:
        ns.lanes = manifest["render.lanes"] == "True"


_PREDICT_DEFAULTS = {
    "grid": "desk",
    "ppm": "5,10",
    "shape": "gaussian",
    "merge": "max",
    "rect_w": 1.8,
    "rect_h": 5.0,
    "vehicle_value": None,
    "lane_value": 1.0,
    "lanes": False,
    "depth_in": 8,
    "depth_out": 8,
    "rate": 4.0,
}


def _finalize_predict_flags(ns) -> None:
    for attr, default in _PREDICT_DEFAULTS.items():
        if getattr(ns, attr, None) is None:
            setattr(ns, attr, default)
    if ns.ppm is None:
        ns.ppm = "5,10"


def _add_sentinel_flags(p: argparse.ArgumentParser) -> None:
    """Render/window flags that default to the checkpoint manifest."""
    p.add_argument("--grid", default=None, help="desk, paper, or HxW pixels")
    p.add_argument("--ppm", default=None)
    p.add_argument("--shape", choices=["gaussian", "rect"], default=None)
    p.add_argument("--merge", choices=["max", "add"], default=None)
    p.add_argument("--rect-w", type=float, default=None)
    p.add_argument("--rect-h", type=float, default=None)
    p.add_argument("--sigma-x", type=float, default=None)
    p.add_argument("--sigma-y", type=float, default=None)
    p.add_argument("--vehicle-value", type=float, default=None)
    p.add_argument("--lane-value", type=float, default=None)
    p.add_argument("--lanes", action="store_true", default=None)
    p.add_argument("--depth-in", type=int, default=None)
    p.add_argument("--depth-out", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--data", required=True)
    p.add_argument("--rate", type=float, default=None)


def _check_manifest_compat(ns, manifest: dict[str, str], grid: GridSpec) -> None:
    if not manifest:
        return
    trained = (
        int(manifest["grid.height_px"]),
        int(manifest["grid.width_px"]),
        manifest["render.shape"],
    )
    current = (grid.height_px, grid.width_px, ns.shape)
    if trained != current:
        raise CliError(
            f"checkpoint trained with grid/shape {trained}, flags give {current}; "
            "pass matching flags or drop the overrides"
        )


def _predict_windows(ns, model, grid, opts, params):
    table = _load_table(ns)
    stride = ns.stride if ns.stride is not None else ns.depth_in + ns.depth_out
    windows = dataio.slice_windows(table, ns.depth_in, ns.depth_out, stride, grid)
    if not windows:
        raise CliError("no complete windows in the data")
    preds = []
    blocks = []
    for w in windows:
        positions, block = predict_window_net(model, w, grid, opts, params, ns.lanes)
        preds.append(positions)
        blocks.append(block)
    return windows, preds, blocks


def _write_predictions_csv(path: str, preds) -> None:
    with open(path, "w", newline="") as f:
        f.write("window,step,id,x,y\n")
        for wi, positions in enumerate(preds):
            for aid in sorted(positions):
                for k, p in enumerate(positions[aid], start=1):
                    if p is None:
                        f.write(f"{wi},{k},{aid},,\n")
                    else:
                        f.write(f"{wi},{k},{aid},{p[0]!r},{p[1]!r}\n")


def cmd_predict(ns) -> int:
    torch.set_num_threads(max(1, ns.jobs))
    if not os.path.exists(ns.checkpoint):
        raise CliError(f"checkpoint not found: {ns.checkpoint}")
    model = load_checkpoint(ns.checkpoint)
    manifest_path = ns.checkpoint + ".manifest"
    manifest = read_manifest(manifest_path) if os.path.exists(manifest_path) else {}
    _apply_manifest_defaults(ns, manifest)
    _finalize_predict_flags(ns)
    grid = _parse_grid(ns.grid, ns.ppm)
    opts = _render_options(ns)
    _check_manifest_compat(ns, manifest, grid)
    params = ExtractionParams.for_render(
        opts, grid, n_sigma=ns.n_sigma, p_min=ns.p_min, mode=ns.extract_mode
    )
    windows, preds, blocks = _predict_windows(ns, model, grid, opts, params)
    os.makedirs(ns.out, exist_ok=True)
    _write_predictions_csv(os.path.join(ns.out, "predictions.csv"), preds)
    for i in range(min(ns.png_limit, len(blocks))):
        _contact_sheet([blocks[i].pixels], os.path.join(ns.out, f"heatmap_{i:05d}.png"))
    print(f"predicted {len(windows)} windows to {ns.out}")
    return 0


def cmd_eval(ns) -> int:
    torch.set_num_threads(max(1, ns.jobs))
    manifest = {}
    if ns.predictor == "unet":
        if not ns.checkpoint:
            raise CliError("--predictor unet requires --checkpoint")
        if not os.path.exists(ns.checkpoint):
            raise CliError(f"checkpoint not found: {ns.checkpoint}")
        manifest_path = ns.checkpoint + ".manifest"
        if os.path.exists(manifest_path):
            manifest = read_manifest(manifest_path)
    _apply_manifest_defaults(ns, manifest)
    _finalize_predict_flags(ns)
    grid = _parse_grid(ns.grid, ns.ppm)
    opts = _render_options(ns)
    _check_manifest_compat(ns, manifest, grid)
    table = _load_table(ns)
    stride = ns.stride if ns.stride is not None else ns.depth_in + ns.depth_out
    windows = dataio.slice_windows(table, ns.depth_in, ns.depth_out, stride, grid)
    if not windows:
        raise CliError("no complete windows in the data")
    truths = [window_truth(w) for w in windows]
    if ns.predictor == "unet":
        model = load_checkpoint(ns.checkpoint)
        params = ExtractionParams.for_render(
            opts, grid, n_sigma=ns.n_sigma, p_min=ns.p_min, mode=ns.extract_mode
        )
        preds = [
            predict_window_net(model, w, grid, opts, params, ns.lanes)[0]
            for w in windows
        ]
    else:
        preds = [predict_window_kf(w) for w in windows]
    report = evaluate_windows(preds, truths)
    dt = 1.0 / ns.rate
    os.makedirs(ns.out, exist_ok=True)
    report_to_csv(report, dt, os.path.join(ns.out, "report.csv"))
    text = report_to_text(report, dt)
    with open(os.path.join(ns.out, "report.txt"), "w") as f:
        f.write(text)
    sys.stdout.write(text)
    return 0


def cmd_render(ns) -> int:
    grid = _parse_grid(ns.grid, ns.ppm)
    opts = _render_options(ns)
    table = _load_table(ns)
    by_frame = table.frames()
    os.makedirs(ns.out, exist_ok=True)
    lane_img = None
    if ns.lanes and table.lanes:
        lane_img = bev.render_lanes([list(p) for p in table.lanes], grid, opts).pixels
    count = 0
    for frame in sorted(by_frame):
        if count >= ns.limit:
            break
        img = bev.render_frame(
            [(r.x_m, r.y_m) for r in by_frame[frame]], grid, opts
        )
        px = img.pixels if lane_img is None else np.maximum(img.pixels, lane_img)
        out_img = bev.BevImage(px, grid)
        path = os.path.join(ns.out, f"frame_{frame:05d}.{ns.format}")
        if ns.format == "png":
            bev.write_png(out_img, path)
        else:
            bev.write_pgm(out_img, path)
        count += 1
    print(f"rendered {count} frames to {ns.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bevcast",
        description="Bird's-eye-view trajectory forecasting pipeline",
    )
    parser.add_argument("--config", default=None, help="JSON config file (or $BEVCAST_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic trajectories")
    p.add_argument("--scenario", choices=sorted(dataio.SCENARIOS), default="lane_change")
    p.add_argument("--n-vehicles", type=int, default=2)
    p.add_argument("--duration", type=float, default=64.0, help="seconds")
    p.add_argument("--episode-len", type=float, default=4.0, help="seconds")
    p.add_argument("--rate", type=float, default=4.0)
    p.add_argument("--speed-min", type=float, default=0.5)
    p.add_argument("--speed-max", type=float, default=1.5)
    p.add_argument("--lane-centers", default="-2.1,0.0,2.1")
    p.add_argument("--x-range", type=float, default=12.8)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="rasterize windows to block files")
    _add_data_flags(p)
    _add_render_flags(p)
    p.add_argument("--sheets", type=int, default=4, help="contact-sheet PNG count")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train the U-Net regressor")
    _add_data_flags(p)
    _add_render_flags(p)
    _add_model_flags(p)
    p.add_argument("--lr", type=float, default=1e-6)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--grad-clip", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="run a checkpoint over windows")
    p.add_argument("--checkpoint", required=True)
    _add_sentinel_flags(p)
    _add_extract_flags(p)
    p.add_argument("--png-limit", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a predictor against truth")
    p.add_argument("--predictor", choices=["unet", "kf"], default="unet")
    p.add_argument("--checkpoint", default=None)
    _add_sentinel_flags(p)
    _add_extract_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="rasterize raw frames to images")
    p.add_argument("--data", required=True)
    p.add_argument("--rate", type=float, default=4.0)
    _add_render_flags(p)
    p.add_argument("--limit", type=int, default=8)
    p.add_argument("--format", choices=["png", "pgm"], default="png")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    path = known.config or os.environ.get("BEVCAST_CONFIG")
    if not path:
        return
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    with open(path) as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    # Apply to every subparser that knows the key; flags still win.
    for action in parser._subparsers._group_actions:  # noqa: SLF001
        for sp in action.choices.values():
            dests = {a.dest for a in sp._actions}  # noqa: SLF001
            sp.set_defaults(**{k: v for k, v in cfg.items() if k in dests})


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        ns = parser.parse_args(argv)
        return ns.func(ns)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
