"""End-to-end glue: windows in, per-vehicle predicted positions out.

Two predictors share one evaluation path.  The network route encodes a
window, runs the model, extracts sub-pixel positions from each output
channel, and associates them with the anchor vehicles.  The baseline
route fits a constant-velocity Kalman filter per anchor track.  Both
yield, per window, an (id -> M positions) mapping with None for misses,
which evaluate_windows turns into a single report.
"""

from __future__ import annotations

import numpy as np

from .association import associate
from .bev import BevBlock, BevImage, encode_window
from .extraction import ExtractionParams, extract_positions
from .kalman import predict_horizon
from .metrics import EvalReport, evaluate
from .scene import GridSpec, RenderOptions, SceneWindow, VehicleTrack
from .unet import UNetModel, forward

__all__ = [
    "predict_window_net",
    "predict_window_kf",
    "window_truth",
    "evaluate_windows",
]

Positions = dict[str, list[tuple[float, float] | None]]


def predict_window_net(
    model: UNetModel,
    window: SceneWindow,
    grid: GridSpec,
    opts: RenderOptions,
    params: ExtractionParams,
    include_lanes: bool = False,
) -> tuple[Positions, BevBlock]:
    """Network route; returns per-id positions and the raw predicted block."""
    inp, _ = encode_window(window, grid, opts, include_lanes=include_lanes)
    pred = forward(model, inp)
    anchors = sorted(window.anchor_positions().items())
    out: Positions = {aid: [] for aid, _ in anchors}
    for k in range(pred.channels):
        dets = extract_positions(BevImage(pred.pixels[k], grid), params)
        assoc = associate([(d.x_m, d.y_m) for d in dets], anchors)
        matched = dict(assoc.matches)
        for aid, _ in anchors:
            out[aid].append(matched.get(aid))
    return out, pred


def predict_window_kf(window: SceneWindow, steps: int | None = None) -> Positions:
    """Baseline route; anchors with fewer than 2 samples are misses."""
    if steps is None:
        steps = window.depth_out
    out: Positions = {}
    for aid in sorted(window.anchor_positions()):
        samples = [
            s
            for frame in window.input_frames
            for s in frame
            if s.vehicle_id == aid
        ]
        if len(samples) < 2:
            out[aid] = [None] * steps
            continue
        track = VehicleTrack(vehicle_id=aid, samples=tuple(samples))
        out[aid] = [(x, y) for x, y in predict_horizon(track, steps)]
    return out


def window_truth(window: SceneWindow) -> Positions:
    """Ground-truth positions per anchor id; None where the vehicle left."""
    out: Positions = {aid: [] for aid in sorted(window.anchor_positions())}
    for frame in window.output_frames:
        present = {s.vehicle_id: (s.x_m, s.y_m) for s in frame}
        for aid in out:
            out[aid].append(present.get(aid))
    return out


def evaluate_windows(
    predictions: list[Positions], truths: list[Positions]
) -> EvalReport:
    """Stack per-window mappings into arrays and evaluate.

    Trajectory order is (window index, id), so reports are reproducible
    regardless of how the predictions were computed.
    """
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths must align per window")
    rows_p = []
    rows_t = []
    m = None
    for pred, truth in zip(predictions, truths):
        for aid in sorted(truth):
            t_list = truth[aid]
            p_list = pred.get(aid, [None] * len(t_list))
            if m is None:
                m = len(t_list)
            if len(t_list) != m or len(p_list) != m:
                raise ValueError("inconsistent horizon length across windows")
            rows_t.append([t if t is not None else (np.nan, np.nan) for t in t_list])
            rows_p.append([p if p is not None else (np.nan, np.nan) for p in p_list])
    if not rows_t:
        raise ValueError("nothing to evaluate")
    return evaluate(np.asarray(rows_p, dtype=np.float64), np.asarray(rows_t, dtype=np.float64))
