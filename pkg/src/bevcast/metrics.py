"""Displacement-error evaluation over prediction horizons.

Predictions and ground truth are (N, M, 2) arrays: N trajectories,
M horizon steps, axes (x, y) in meters.  Errors are reported per axis
throughout.  Reductions use exact summation (math.fsum), so results do
not depend on trajectory order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EvalReport",
    "rmse_per_step",
    "mae_per_step",
    "ade_fde",
    "evaluate",
    "report_to_csv",
    "report_to_text",
]


def _check(pred: np.ndarray, truth: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {t.shape}")
    if p.ndim != 3 or p.shape[2] != 2:
        raise ValueError(f"expected (N, M, 2) arrays, got {p.shape}")
    if p.shape[0] == 0:
        raise ValueError("no trajectories to evaluate")
    return p, t


def rmse_per_step(pred, truth) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Root-mean-square error per horizon step, (x errors, y errors)."""
    p, t = _check(pred, truth)
    n, m = p.shape[0], p.shape[1]
    out = ([], [])
    for axis in (0, 1):
        for k in range(m):
            sq = math.fsum((p[i, k, axis] - t[i, k, axis]) ** 2 for i in range(n))
            out[axis].append(math.sqrt(sq / n))
    return tuple(out[0]), tuple(out[1])


def mae_per_step(pred, truth) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Mean absolute error per horizon step, (x errors, y errors)."""
    p, t = _check(pred, truth)
    n, m = p.shape[0], p.shape[1]
    out = ([], [])
    for axis in (0, 1):
        for k in range(m):
            s = math.fsum(abs(p[i, k, axis] - t[i, k, axis]) for i in range(n))
            out[axis].append(s / n)
    return tuple(out[0]), tuple(out[1])


def ade_fde(mae: tuple[float, ...]) -> tuple[float, float]:
    """Average and final displacement error from a per-step MAE vector."""
    if len(mae) == 0:
        raise ValueError("empty MAE vector")
    return math.fsum(mae) / len(mae), mae[-1]


@dataclass(frozen=True)
class EvalReport:
    """Per-axis displacement errors for one evaluation run.

    n_missed counts (trajectory, step) ground-truth entries that had no
    associated prediction; those entries are excluded from the averages.
    """

    rmse_x: tuple[float, ...]
    rmse_y: tuple[float, ...]
    mae_x: tuple[float, ...]
    mae_y: tuple[float, ...]
    ade_x: float
    ade_y: float
    fde_x: float
    fde_y: float
    n_trajectories: int
    n_missed: int


def evaluate(pred, truth) -> EvalReport:
    """Build a report, tolerating missing entries.

    NaN in pred marks a miss (counted); NaN in truth marks
    no-ground-truth (silently excluded).  Steps with no valid pairs
    report NaN errors.
    """
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 3 or p.shape[2] != 2:
        raise ValueError(f"expected matching (N, M, 2) arrays, got {p.shape} / {t.shape}")
    n, m = p.shape[0], p.shape[1]
    have_truth = ~np.isnan(t).any(axis=2)
    have_pred = ~np.isnan(p).any(axis=2)
    valid = have_truth & have_pred
    n_missed = int((have_truth & ~have_pred).sum())

    rmse: list[list[float]] = [[], []]
    mae: list[list[float]] = [[], []]
    for axis in (0, 1):
        for k in range(m):
            idx = np.nonzero(valid[:, k])[0]
            if idx.size == 0:
                rmse[axis].append(float("nan"))
                mae[axis].append(float("nan"))
                continue
            diffs = [p[i, k, axis] - t[i, k, axis] for i in idx]
            rmse[axis].append(math.sqrt(math.fsum(d * d for d in diffs) / idx.size))
            mae[axis].append(math.fsum(abs(d) for d in diffs) / idx.size)
    ade_x, fde_x = ade_fde(tuple(mae[0]))
    ade_y, fde_y = ade_fde(tuple(mae[1]))
    return EvalReport(
        rmse_x=tuple(rmse[0]),
        rmse_y=tuple(rmse[1]),
        mae_x=tuple(mae[0]),
        mae_y=tuple(mae[1]),
        ade_x=ade_x,
        ade_y=ade_y,
        fde_x=fde_x,
        fde_y=fde_y,
        n_trajectories=n,
        n_missed=n_missed,
    )


def report_to_csv(report: EvalReport, dt_s: float, path: str) -> None:
    """Write per-step rows plus summary rows with full-precision floats."""
    with open(path, "w", newline="") as f:
        f.write("row,t_s,rmse_x,rmse_y,mae_x,mae_y\n")
        for k in range(len(report.mae_x)):
            t = (k + 1) * dt_s
            f.write(
                f"step{k + 1},{t!r},{report.rmse_x[k]!r},{report.rmse_y[k]!r},"
                f"{report.mae_x[k]!r},{report.mae_y[k]!r}\n"
            )
        f.write(f"ade,,{''},{''},{report.ade_x!r},{report.ade_y!r}\n")
        f.write(f"fde,,{''},{''},{report.fde_x!r},{report.fde_y!r}\n")
        f.write(f"n_trajectories,{report.n_trajectories},,,,\n")
        f.write(f"n_missed,{report.n_missed},,,,\n")


def report_to_text(report: EvalReport, dt_s: float) -> str:
    """Readable summary: anchor horizons as columns, ADE/FDE at the end."""
    m = len(report.mae_x)
    anchors = sorted({1, max(1, round(m / 2)), m})
    header = ["metric"] + [f"t={k * dt_s:.2f}s" for k in anchors] + ["ADE", "FDE"]
    rows = []
    for name, vec, ade, fde in (
        ("rmse_x", report.rmse_x, None, None),
        ("rmse_y", report.rmse_y, None, None),
        ("mae_x", report.mae_x, report.ade_x, report.fde_x),
        ("mae_y", report.mae_y, report.ade_y, report.fde_y),
    ):
        cells = [name] + [f"{vec[k - 1]:.4f}" for k in anchors]
        cells += [f"{ade:.4f}" if ade is not None else "-"]
        cells += [f"{fde:.4f}" if fde is not None else "-"]
        rows.append(cells)
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header] + rows]
    lines.append(
        f"trajectories: {report.n_trajectories}   missed entries: {report.n_missed}"
    )
    return "\n".join(lines) + "\n"
