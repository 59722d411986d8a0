"""Rasterization of scenes into bird's-eye-view images and image I/O.

Intensities live in [0, 1] (merge="add" may exceed 1 where vehicles
overlap).  A gaussian vehicle at (mx, my) contributes

    v * exp(-((x - mx) / (sqrt(2) * sx))**2 - ((y - my) / (sqrt(2) * sy))**2)

evaluated at pixel sample points, so the value one sqrt(2)*sigma away
along an axis is exactly v/e.  Support is truncated at 4 sigma per axis;
the discarded tail is below 3.4e-4 * v, far under any peak threshold.
A rect vehicle fills the half-open box [m - ext/2, m + ext/2) per axis,
which keeps the pixel count constant as the vehicle moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .scene import GridSpec, RenderOptions, SceneWindow, world_to_pixel

__all__ = [
    "BevImage",
    "BevBlock",
    "render_vehicle",
    "render_frame",
    "render_lanes",
    "merge",
    "encode_window",
    "quantize",
    "write_pgm",
    "read_pgm",
    "write_png",
    "read_png",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float32)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class BevImage:
    """A single H x W intensity image tied to its grid geometry."""

    pixels: np.ndarray
    grid: GridSpec

    def __post_init__(self) -> None:
        px = _freeze(self.pixels)
        if px.shape != self.grid.shape():
            raise ValueError(f"pixels shape {px.shape} != grid {self.grid.shape()}")
        object.__setattr__(self, "pixels", px)


@dataclass(frozen=True)
class BevBlock:
    """A C x H x W stack of images sharing one grid (network in/output)."""

    pixels: np.ndarray
    grid: GridSpec

    def __post_init__(self) -> None:
        px = _freeze(self.pixels)
        if px.ndim != 3 or px.shape[1:] != self.grid.shape():
            raise ValueError(
                f"block shape {px.shape} incompatible with grid {self.grid.shape()}"
            )
        object.__setattr__(self, "pixels", px)

    @property
    def channels(self) -> int:
        return int(self.pixels.shape[0])


def _render_gaussian(
    x_m: float, y_m: float, grid: GridSpec, opts: RenderOptions, out: np.ndarray
) -> None:
    mu_r, mu_c = world_to_pixel(x_m, y_m, grid)
    sig_r = opts.sigma_x_m * grid.ppm_x
    sig_c = opts.sigma_y_m * grid.ppm_y
    r0 = max(0, math.ceil(mu_r - 4.0 * sig_r))
    r1 = min(grid.height_px - 1, math.floor(mu_r + 4.0 * sig_r))
    c0 = max(0, math.ceil(mu_c - 4.0 * sig_c))
    c1 = min(grid.width_px - 1, math.floor(mu_c + 4.0 * sig_c))
    if r0 > r1 or c0 > c1:
        return
    rows = np.arange(r0, r1 + 1, dtype=np.float64)
    cols = np.arange(c0, c1 + 1, dtype=np.float64)
    gr = np.exp(-(((rows - mu_r) / (math.sqrt(2.0) * sig_r)) ** 2))
    gc = np.exp(-(((cols - mu_c) / (math.sqrt(2.0) * sig_c)) ** 2))
    patch = opts.vehicle_value * np.outer(gr, gc)
    np.maximum(out[r0 : r1 + 1, c0 : c1 + 1], patch, out=out[r0 : r1 + 1, c0 : c1 + 1])


def _render_rect(
    x_m: float, y_m: float, grid: GridSpec, opts: RenderOptions, out: np.ndarray
) -> None:
    mu_r, mu_c = world_to_pixel(x_m, y_m, grid)
    half_r = 0.5 * opts.rect_h_m * grid.ppm_x
    half_c = 0.5 * opts.rect_w_m * grid.ppm_y
    # Half-open [mu - half, mu + half): first pixel ceil(lo), last ceil(hi) - 1.
    r0 = max(0, math.ceil(mu_r - half_r))
    r1 = min(grid.height_px - 1, math.ceil(mu_r + half_r) - 1)
    c0 = max(0, math.ceil(mu_c - half_c))
    c1 = min(grid.width_px - 1, math.ceil(mu_c + half_c) - 1)
    if r0 > r1 or c0 > c1:
        return
    region = out[r0 : r1 + 1, c0 : c1 + 1]
    np.maximum(region, opts.vehicle_value, out=region)


def render_vehicle(
    x_m: float, y_m: float, grid: GridSpec, opts: RenderOptions
) -> BevImage:
    """Render one vehicle at (x_m, y_m); fully off-grid yields all zeros."""
    buf = np.zeros(grid.shape(), dtype=np.float64)
    if opts.shape == "gaussian":
        _render_gaussian(x_m, y_m, grid, opts, buf)
    else:
        _render_rect(x_m, y_m, grid, opts, buf)
    return BevImage(buf, grid)


def render_frame(
    positions: list[tuple[float, float]], grid: GridSpec, opts: RenderOptions
) -> BevImage:
    """Render all vehicles of one frame, combined per opts.merge."""
    buf = np.zeros(grid.shape(), dtype=np.float64)
    if opts.merge == "max":
        for x_m, y_m in positions:
            if opts.shape == "gaussian":
                _render_gaussian(x_m, y_m, grid, opts, buf)
            else:
                _render_rect(x_m, y_m, grid, opts, buf)
    else:
        for x_m, y_m in positions:
            one = np.zeros_like(buf)
            if opts.shape == "gaussian":
                _render_gaussian(x_m, y_m, grid, opts, one)
            else:
                _render_rect(x_m, y_m, grid, opts, one)
            buf += one
    return BevImage(buf, grid)


def _bresenham(r0: int, c0: int, r1: int, c1: int) -> list[tuple[int, int]]:
    """Integer line from (r0, c0) to (r1, c1), endpoints included."""
    points = []
    dr = abs(r1 - r0)
    dc = abs(c1 - c0)
    sr = 1 if r0 < r1 else -1
    sc = 1 if c0 < c1 else -1
    err = dr - dc
    r, c = r0, c0
    while True:
        points.append((r, c))
        if r == r1 and c == c1:
            break
        e2 = 2 * err
        if e2 > -dc:
            err -= dc
            r += sr
        if e2 < dr:
            err += dr
            c += sc
    return points


def render_lanes(
    lanes: list[list[tuple[float, float]]], grid: GridSpec, opts: RenderOptions
) -> BevImage:
    """Render lane polylines (world-meter vertices) as one-pixel lines."""
    buf = np.zeros(grid.shape(), dtype=np.float64)
    for polyline in lanes:
        pts = [world_to_pixel(x, y, grid) for x, y in polyline]
        pix = [(round(r), round(c)) for r, c in pts]
        for (r0, c0), (r1, c1) in zip(pix, pix[1:]):
            for r, c in _bresenham(r0, c0, r1, c1):
                if 0 <= r < grid.height_px and 0 <= c < grid.width_px:
                    buf[r, c] = max(buf[r, c], opts.lane_value)
    return BevImage(buf, grid)


def merge(images: list[BevImage], mode: str = "max") -> BevImage:
    """Combine images on one grid, pixelwise max or sum."""
    if not images:
        raise ValueError("merge needs at least one image")
    grid = images[0].grid
    for img in images[1:]:
        if img.grid != grid:
            raise ValueError("cannot merge images with different grids")
    stack = np.stack([img.pixels for img in images]).astype(np.float64)
    if mode == "max":
        out = stack.max(axis=0)
    elif mode == "add":
        out = stack.sum(axis=0)
    else:
        raise ValueError(f"unknown merge {mode!r}")
    return BevImage(out, grid)


def encode_window(
    window: SceneWindow,
    grid: GridSpec,
    opts: RenderOptions,
    include_lanes: bool = True,
) -> tuple[BevBlock, BevBlock]:
    """Encode one window into (input block, target block).

    Each input channel is the rendered frame at one observed timestep,
    with lane markings overlaid (pixelwise max) when the window carries
    lanes and include_lanes is set.  Target channels render the future
    frames without lanes, so the regression target stays vehicle-only.
    """
    lane_img = None
    if include_lanes and window.lanes:
        lane_img = render_lanes([list(pl) for pl in window.lanes], grid, opts).pixels

    def encode_frames(frames, with_lanes: bool) -> np.ndarray:
        chans = []
        for frame in frames:
            img = render_frame([(s.x_m, s.y_m) for s in frame], grid, opts).pixels
            if with_lanes and lane_img is not None:
                img = np.maximum(img, lane_img)
            chans.append(img)
        return np.stack(chans)

    inp = encode_frames(window.input_frames, True)
    tgt = encode_frames(window.output_frames, False)
    return BevBlock(inp, grid), BevBlock(tgt, grid)


def quantize(pixels: np.ndarray) -> np.ndarray:
    """Map [0, 1] float intensities to uint8 bytes, round(255 * v), clamped."""
    v = np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0)
    return np.rint(255.0 * v).astype(np.uint8)


def write_pgm(image: BevImage, path: str) -> None:
    """Write a binary (P5) PGM with maxval 255."""
    data = quantize(image.pixels)
    h, w = data.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def read_pgm(path: str, grid: GridSpec | None = None) -> BevImage:
    """Read a binary PGM back into float intensities in [0, 1]."""
    with open(path, "rb") as f:
        raw = f.read()
    # Header is whitespace-separated tokens; '#' starts a comment line.
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        tokens.append(raw[start:pos])
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM: magic {tokens[0]!r}")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    pos += 1  # single whitespace after maxval
    data = np.frombuffer(raw, dtype=np.uint8, count=h * w, offset=pos)
    if grid is None:
        grid = GridSpec.from_pixels(h, w)
    pixels = data.reshape(h, w).astype(np.float64) / 255.0
    return BevImage(pixels, grid)


def write_png(image: BevImage, path: str) -> None:
    """Write an 8-bit grayscale PNG using the same byte mapping as PGM."""
    Image.fromarray(quantize(image.pixels), mode="L").save(path)


def read_png(path: str, grid: GridSpec | None = None) -> BevImage:
    """Read an 8-bit grayscale PNG back into float intensities."""
    data = np.asarray(Image.open(path).convert("L"), dtype=np.uint8)
    h, w = data.shape
    if grid is None:
        grid = GridSpec.from_pixels(h, w)
    return BevImage(data.astype(np.float64) / 255.0, grid)
