"""Recover sub-pixel vehicle positions from heat-map frames.

Peaks are pulled off greedily: take the global maximum above the
threshold, refine it to fractional pixel coordinates over a small
window, zero that window on a working copy, repeat.  The number of
detections is open-ended, which is the point: a predicted frame does
not announce how many vehicles it contains.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bev import BevImage
from .scene import GridSpec, RenderOptions, pixel_to_world

__all__ = ["ExtractionParams", "Detection", "extract_peaks", "extract_positions", "subpx_location"]


@dataclass(frozen=True)
class ExtractionParams:
    """Threshold, half-window size, and refinement mode for extraction.

    mass_normalized divides the intensity-weighted coordinate sums by
    the window's total intensity, giving a true centroid.  paper_literal
    divides by the fixed window extents (2*win_h, 2*win_w) instead and
    is kept for comparison; it does not normalize by mass and is biased
    except by coincidence.
    """

    # Window defaults equal for_render(RenderOptions(), <ppm 5x10 grid>):
    # three spreads of the default gaussian footprint at default resolution.
    p_min: float = 0.5
    win_h: int = 38
    win_w: int = 27
    mode: str = "mass_normalized"

    def __post_init__(self) -> None:
        if not 0.0 < self.p_min < 1.0:
            raise ValueError("p_min must lie in (0, 1)")
        if self.win_h < 1 or self.win_w < 1:
            raise ValueError("half-window sizes must be >= 1")
        if self.mode not in ("mass_normalized", "paper_literal"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def for_render(
        cls,
        opts: RenderOptions,
        grid: GridSpec,
        n_sigma: float = 3.0,
        p_min: float = 0.5,
        mode: str = "mass_normalized",
    ) -> "ExtractionParams":
        """Derive the window from the render geometry.

        For gaussian blobs the window spans n_sigma spreads per axis.
        Three sigma captures enough of the bell that the clipped-window
        centroid bias stays below a tenth of a pixel, and clearing it
        leaves no residue above any sane threshold.  A one-sigma window
        (the raw footprint) fails on both counts.  For rect blobs the
        peak can sit anywhere on the uniform plateau, so the half-window
        equals the full footprint extent; the covered box then always
        contains the whole rectangle and its centroid is exact.
        """
        if opts.shape == "gaussian":
            h = max(1, round(n_sigma * opts.sigma_x_m * grid.ppm_x))
            w = max(1, round(n_sigma * opts.sigma_y_m * grid.ppm_y))
        else:
            h = max(1, int(np.ceil(opts.rect_h_m * grid.ppm_x)))
            w = max(1, int(np.ceil(opts.rect_w_m * grid.ppm_y)))
        return cls(p_min=p_min, win_h=h, win_w=w, mode=mode)


@dataclass(frozen=True)
class Detection:
    """One extracted vehicle position, in pixels and in world meters.

    peak_row/peak_col hold the discrete maximum the refinement started
    from (also the center of the window cleared afterwards).
    """

    row: float
    col: float
    score: float
    x_m: float
    y_m: float
    peak_row: int = 0
    peak_col: int = 0


def subpx_location(
    frame: np.ndarray, peak: tuple[int, int], params: ExtractionParams
) -> tuple[float, float]:
    """Refine a discrete peak to fractional (row, col) over its window.

    The window [R-h, R+h] x [C-w, C+w] is clipped at the frame borders.
    A window with zero total mass returns the discrete peak unchanged.
    """
    a = np.asarray(frame, dtype=np.float64)
    rows_n, cols_n = a.shape
    r_pk, c_pk = peak
    r0, r1 = max(0, r_pk - params.win_h), min(rows_n - 1, r_pk + params.win_h)
    c0, c1 = max(0, c_pk - params.win_w), min(cols_n - 1, c_pk + params.win_w)
    win = np.clip(a[r0 : r1 + 1, c0 : c1 + 1], 0.0, None)
    rsum = float(np.sum(win.sum(axis=1) * np.arange(r0, r1 + 1)))
    csum = float(np.sum(win.sum(axis=0) * np.arange(c0, c1 + 1)))
    if params.mode == "paper_literal":
        return (rsum / (2.0 * params.win_h), csum / (2.0 * params.win_w))
    mass = float(win.sum())
    if mass == 0.0:
        return (float(r_pk), float(c_pk))
    return (rsum / mass, csum / mass)


def _extract(
    frame: np.ndarray, params: ExtractionParams
) -> list[tuple[float, float, float, int, int]]:
    a = np.array(frame, dtype=np.float64, copy=True)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d frame, got shape {a.shape}")
    np.clip(a, 0.0, None, out=a)
    rows_n, cols_n = a.shape
    found = []
    while True:
        flat = int(np.argmax(a))
        r_pk, c_pk = divmod(flat, cols_n)
        score = float(a[r_pk, c_pk])
        if score <= params.p_min:
            break
        rr, cc = subpx_location(a, (r_pk, c_pk), params)
        found.append((rr, cc, score, r_pk, c_pk))
        r0, r1 = max(0, r_pk - params.win_h), min(rows_n - 1, r_pk + params.win_h)
        c0, c1 = max(0, c_pk - params.win_w), min(cols_n - 1, c_pk + params.win_w)
        a[r0 : r1 + 1, c0 : c1 + 1] = 0.0
    return found


def extract_peaks(
    frame: np.ndarray, params: ExtractionParams
) -> list[tuple[float, float, float]]:
    """Extract all (row, col, score) peaks from a raw pixel array.

    The input is never mutated; clearing happens on an internal copy
    with negatives clamped to zero first.  Ties on the maximum resolve
    to the smallest row, then the smallest column.  Results come out in
    decreasing score order by construction.
    """
    return [(r, c, s) for r, c, s, _, _ in _extract(frame, params)]


def extract_positions(image: BevImage, params: ExtractionParams) -> list[Detection]:
    """Extract detections from an image, with world coordinates attached."""
    out = []
    for row, col, score, pr, pc in _extract(image.pixels, params):
        x_m, y_m = pixel_to_world(row, col, image.grid)
        out.append(
            Detection(
                row=row, col=col, score=score, x_m=x_m, y_m=y_m,
                peak_row=pr, peak_col=pc,
            )
        )
    return out
