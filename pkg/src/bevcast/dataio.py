"""Trajectory tables: CSV ingestion, resampling, window slicing, synthesis.

The on-disk schema is a UTF-8 CSV with header `frame,id,x,y` and an
optional `lane` column; lane geometry travels in a sidecar file with
one polyline per line as `x0 y0 x1 y1 ...` (meters).  Frames are
integer sample indices at a uniform rate; time is frame / rate.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .scene import GridSpec, SceneWindow, VehicleState

__all__ = [
    "TrajectoryRow",
    "TrajectoryTable",
    "CsvFormatError",
    "load_csv",
    "write_csv",
    "load_lanes",
    "write_lanes",
    "resample",
    "slice_windows",
    "SynthSpec",
    "synthesize",
]

SCENARIOS = ("constant_velocity", "lane_change", "cut_in", "mixed")

# Minimum longitudinal spacing between synthesized vehicles, so rendered
# blobs stay separable for the extraction stage.
MIN_GAP_M = 3.4


class CsvFormatError(ValueError):
    """A malformed CSV row or header, reported with its line number."""


@dataclass(frozen=True)
class TrajectoryRow:
    frame: int
    vehicle_id: str
    x_m: float
    y_m: float
    lane: str | None = None


@dataclass(frozen=True)
class TrajectoryTable:
    """All rows of one recording plus its frame rate and lane geometry."""

    rows: tuple[TrajectoryRow, ...]
    frame_rate_hz: float
    lanes: tuple[tuple[tuple[float, float], ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))
        object.__setattr__(
            self, "lanes", tuple(tuple(tuple(p) for p in pl) for pl in self.lanes)
        )
        if self.frame_rate_hz <= 0:
            raise ValueError("frame_rate_hz must be positive")
        seen = set()
        for r in self.rows:
            if r.frame < 0:
                raise ValueError(f"negative frame {r.frame}")
            key = (r.frame, r.vehicle_id)
            if key in seen:
                raise ValueError(f"duplicate (frame, id) pair {key}")
            seen.add(key)

    def frames(self) -> dict[int, list[TrajectoryRow]]:
        by_frame: dict[int, list[TrajectoryRow]] = {}
        for r in self.rows:
            by_frame.setdefault(r.frame, []).append(r)
        return by_frame


def load_csv(path: str, frame_rate_hz: float = 4.0) -> TrajectoryTable:
    """Parse a trajectory CSV; malformed content names the (1-based) line."""
    rows: list[TrajectoryRow] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("line 1: empty file, expected header") from None
        header = [h.strip() for h in header]
        if header[:4] != ["frame", "id", "x", "y"]:
            raise CsvFormatError(
                f"line 1: header must start with frame,id,x,y, got {','.join(header)}"
            )
        has_lane = len(header) > 4 and header[4] == "lane"
        for line_no, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) < 4:
                raise CsvFormatError(f"line {line_no}: expected 4+ fields, got {len(rec)}")
            try:
                frame = int(rec[0])
                x_m = float(rec[2])
                y_m = float(rec[3])
            except ValueError as e:
                raise CsvFormatError(f"line {line_no}: {e}") from None
            lane = rec[4] if has_lane and len(rec) > 4 and rec[4] != "" else None
            rows.append(TrajectoryRow(frame, rec[1], x_m, y_m, lane))
    try:
        return TrajectoryTable(rows=tuple(rows), frame_rate_hz=frame_rate_hz)
    except ValueError as e:
        raise CsvFormatError(str(e)) from None


def write_csv(table: TrajectoryTable, path: str) -> None:
    """Write rows back out; floats keep full round-trip precision."""
    has_lane = any(r.lane is not None for r in table.rows)
    with open(path, "w", newline="") as f:
        f.write("frame,id,x,y" + (",lane" if has_lane else "") + "\n")
        for r in table.rows:
            line = f"{r.frame},{r.vehicle_id},{r.x_m!r},{r.y_m!r}"
            if has_lane:
                line += f",{r.lane if r.lane is not None else ''}"
            f.write(line + "\n")


def load_lanes(path: str) -> tuple[tuple[tuple[float, float], ...], ...]:
    lanes = []
    with open(path) as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) % 2:
                raise CsvFormatError(
                    f"line {line_no}: odd number of lane coordinates"
                )
            try:
                vals = [float(p) for p in parts]
            except ValueError as e:
                raise CsvFormatError(f"line {line_no}: {e}") from None
            lanes.append(tuple(zip(vals[0::2], vals[1::2])))
    return tuple(lanes)


def write_lanes(lanes, path: str) -> None:
    with open(path, "w") as f:
        for polyline in lanes:
            f.write(" ".join(f"{x!r} {y!r}" for x, y in polyline) + "\n")


def resample(table: TrajectoryTable, keep_every: int) -> TrajectoryTable:
    """Keep every keep_every-th frame and renumber compactly.

    Source frames 0, k, 2k, ... become 0, 1, 2, ... and the rate drops
    by the same factor, so time stamps are preserved and resampling by
    a then b equals resampling by a*b.
    """
    if keep_every < 1:
        raise ValueError("keep_every must be >= 1")
    if keep_every == 1:
        return table
    rows = tuple(
        replace(r, frame=r.frame // keep_every)
        for r in table.rows
        if r.frame % keep_every == 0
    )
    return TrajectoryTable(
        rows=rows,
        frame_rate_hz=table.frame_rate_hz / keep_every,
        lanes=table.lanes,
    )


def slice_windows(
    table: TrajectoryTable,
    depth_in: int,
    depth_out: int,
    stride: int = 1,
    grid: GridSpec | None = None,
) -> list[SceneWindow]:
    """Cut sliding (depth_in + depth_out)-frame windows from a table.

    Per frame, vehicles outside the grid's world range are dropped when
    a grid is given.  Output frames keep only vehicles that are present
    in the window's last input frame; vehicles entering later are not
    prediction targets.  Vehicles that leave mid-horizon simply stop
    appearing.
    """
    if depth_in < 1 or depth_out < 1 or stride < 1:
        raise ValueError("depth_in, depth_out, stride must be >= 1")
    by_frame = table.frames()
    if not by_frame:
        return []
    dt = 1.0 / table.frame_rate_hz
    fmin, fmax = min(by_frame), max(by_frame)
    span = depth_in + depth_out

    def in_range(row: TrajectoryRow) -> bool:
        if grid is None:
            return True
        return 0.0 <= row.x_m <= grid.x_range_m and abs(row.y_m) <= grid.y_half_range_m

    def frame_states(f: int) -> tuple[VehicleState, ...]:
        rows = sorted(by_frame.get(f, []), key=lambda r: r.vehicle_id)
        return tuple(
            VehicleState(r.vehicle_id, r.x_m, r.y_m, f * dt)
            for r in rows
            if in_range(r)
        )

    windows = []
    for start in range(fmin, fmax - span + 2, stride):
        inputs = tuple(frame_states(start + i) for i in range(depth_in))
        anchor_ids = {s.vehicle_id for s in inputs[-1]}
        outputs = tuple(
            tuple(
                s
                for s in frame_states(start + depth_in + j)
                if s.vehicle_id in anchor_ids
            )
            for j in range(depth_out)
        )
        windows.append(
            SceneWindow(input_frames=inputs, output_frames=outputs, lanes=table.lanes)
        )
    return windows


@dataclass(frozen=True)
class SynthSpec:
    """Parameters for the synthetic highway generator.

    Trajectories come in fixed-length episodes with fresh vehicle ids,
    so slicing with stride = episode length yields independent windows.
    Within an episode every vehicle keeps a constant longitudinal speed;
    the lane_change and cut_in scenarios move one vehicle between
    adjacent lane centers along a smooth S-curve lasting 2 to 4 seconds.
    """

    scenario: str = "lane_change"
    n_vehicles: int = 2
    duration_s: float = 64.0
    episode_len_s: float = 4.0
    frame_rate_hz: float = 4.0
    speed_range: tuple[float, float] = (0.5, 1.5)
    lane_centers_y: tuple[float, ...] = (-2.1, 0.0, 2.1)
    x_range_m: float = 12.8
    change_duration_range: tuple[float, float] = (2.0, 4.0)
    noise_std_m: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.n_vehicles < 1:
            raise ValueError("n_vehicles must be >= 1")
        if self.n_vehicles > len(self.lane_centers_y):
            raise ValueError("more vehicles than lanes")
        if self.duration_s <= 0 or self.episode_len_s <= 0 or self.frame_rate_hz <= 0:
            raise ValueError("durations and rate must be positive")
        if not 0 < self.speed_range[0] <= self.speed_range[1]:
            raise ValueError("bad speed_range")
        if len(self.lane_centers_y) < 2:
            raise ValueError("need at least 2 lanes")
        if self.noise_std_m < 0:
            raise ValueError("noise_std_m must be >= 0")


def _smoothstep(u: np.ndarray) -> np.ndarray:
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


def _lane_boundaries(spec: SynthSpec) -> tuple[tuple[tuple[float, float], ...], ...]:
    centers = sorted(spec.lane_centers_y)
    width = min(b - a for a, b in zip(centers, centers[1:]))
    edges = [centers[0] - width / 2.0]
    edges += [(a + b) / 2.0 for a, b in zip(centers, centers[1:])]
    edges.append(centers[-1] + width / 2.0)
    return tuple(((0.0, e), (spec.x_range_m, e)) for e in edges)


def synthesize(spec: SynthSpec) -> TrajectoryTable:
    """Generate deterministic episodic trajectories per the spec fields."""
    rng = np.random.default_rng(spec.seed)
    dt = 1.0 / spec.frame_rate_hz
    ep_frames = max(2, round(spec.episode_len_s * spec.frame_rate_hz))
    n_episodes = max(1, int(round(spec.duration_s * spec.frame_rate_hz)) // ep_frames)
    t_travel = (ep_frames - 1) * dt
    margin = 0.8
    span = spec.x_range_m - 2.0 * margin
    n = spec.n_vehicles
    avail = span - (n - 1) * MIN_GAP_M
    if avail <= 1.0:
        raise ValueError("grid too short for this many vehicles")
    v_cap = (avail - 1.0) / t_travel

    rows: list[TrajectoryRow] = []
    times = np.arange(ep_frames) * dt
    for ep in range(n_episodes):
        scen = spec.scenario
        if scen == "mixed":
            scen = str(rng.choice(["constant_velocity", "lane_change", "cut_in"]))
        lane_idx = rng.permutation(len(spec.lane_centers_y))[:n]
        speed = min(float(rng.uniform(*spec.speed_range)), v_cap)
        jitter = rng.uniform(-0.05, 0.05, size=n)
        starts = np.sort(rng.uniform(0.0, avail - speed * t_travel, size=n))
        x0 = margin + starts + np.arange(n) * MIN_GAP_M

        lat = np.empty((n, ep_frames))
        for k in range(n):
            lat[k, :] = spec.lane_centers_y[lane_idx[k]]
        if scen in ("lane_change", "cut_in") and n >= 1:
            mover = int(rng.integers(n))
            src = int(lane_idx[mover])
            neighbors = [
                j
                for j in (src - 1, src + 1)
                if 0 <= j < len(spec.lane_centers_y)
            ]
            if scen == "cut_in":
                occupied = [int(j) for j in lane_idx if j in neighbors]
                if occupied:
                    neighbors = occupied
            dst = int(neighbors[int(rng.integers(len(neighbors)))])
            dur = min(float(rng.uniform(*spec.change_duration_range)), t_travel)
            t0 = float(rng.uniform(0.0, t_travel - dur)) if t_travel > dur else 0.0
            y_from = spec.lane_centers_y[src]
            y_to = spec.lane_centers_y[dst]
            lat[mover, :] = y_from + (y_to - y_from) * _smoothstep((times - t0) / dur)

        for k in range(n):
            vid = f"e{ep:04d}v{k}"
            v_k = speed + float(jitter[k]) if n > 1 else speed
            xs = x0[k] + v_k * times
            ys = lat[k, :]
            if spec.noise_std_m > 0:
                xs = xs + rng.normal(0.0, spec.noise_std_m, size=ep_frames)
                ys = ys + rng.normal(0.0, spec.noise_std_m, size=ep_frames)
            for i in range(ep_frames):
                rows.append(
                    TrajectoryRow(
                        frame=ep * ep_frames + i,
                        vehicle_id=vid,
                        x_m=float(xs[i]),
                        y_m=float(ys[i]),
                    )
                )
    rows.sort(key=lambda r: (r.frame, r.vehicle_id))
    return TrajectoryTable(
        rows=tuple(rows),
        frame_rate_hz=spec.frame_rate_hz,
        lanes=_lane_boundaries(spec),
    )
