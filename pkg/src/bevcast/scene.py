"""Scene model: grid geometry, vehicle states, and prediction windows.

The world frame is road-aligned: x points along the road (longitudinal),
y points across it (lateral), both in meters.  Images index the same area
with rows following x and columns following y, where column 0 sits at
y = -y_half_range_m and the center column at y = 0.  Pixel (row, col)
samples the world at exactly (row / ppm_x, col / ppm_y - y_half_range_m),
so integer pixel coordinates are the sample points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Timestamps within a track must be uniformly spaced to this tolerance (s).
DT_TOL_S = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Immutable description of a rasterization grid.

    Attributes:
        height_px: number of rows (longitudinal extent in pixels).
        width_px: number of columns (lateral extent in pixels).
        ppm_x: pixels per meter along x (rows).
        ppm_y: pixels per meter along y (columns).
        x_range_m: world length covered by the rows, height_px / ppm_x.
        y_half_range_m: half the world width covered by the columns.
    """

    height_px: int
    width_px: int
    ppm_x: float
    ppm_y: float
    x_range_m: float
    y_half_range_m: float

    def __post_init__(self) -> None:
        if self.ppm_x <= 0 or self.ppm_y <= 0:
            raise ValueError("pixels-per-meter must be positive")
        if self.height_px < 1 or self.width_px < 1:
            raise ValueError("grid must be at least 1x1 pixels")
        if round(self.ppm_x * self.x_range_m) != self.height_px:
            raise ValueError(
                f"height_px={self.height_px} inconsistent with "
                f"ppm_x={self.ppm_x}, x_range_m={self.x_range_m}"
            )
        if round(2.0 * self.ppm_y * self.y_half_range_m) != self.width_px:
            raise ValueError(
                f"width_px={self.width_px} inconsistent with "
                f"ppm_y={self.ppm_y}, y_half_range_m={self.y_half_range_m}"
            )

    @classmethod
    def from_pixels(
        cls, height_px: int, width_px: int, ppm_x: float = 5.0, ppm_y: float = 10.0
    ) -> "GridSpec":
        """Build a grid from pixel dimensions; world ranges follow."""
        if ppm_x <= 0 or ppm_y <= 0:
            raise ValueError("pixels-per-meter must be positive")
        return cls(
            height_px=height_px,
            width_px=width_px,
            ppm_x=ppm_x,
            ppm_y=ppm_y,
            x_range_m=height_px / ppm_x,
            y_half_range_m=width_px / (2.0 * ppm_y),
        )

    @classmethod
    def from_ranges(
        cls,
        x_range_m: float,
        y_half_range_m: float,
        ppm_x: float = 5.0,
        ppm_y: float = 10.0,
    ) -> "GridSpec":
        """Build a grid from world ranges; pixel dimensions follow."""
        return cls(
            height_px=round(ppm_x * x_range_m),
            width_px=round(2.0 * ppm_y * y_half_range_m),
            ppm_x=ppm_x,
            ppm_y=ppm_y,
            x_range_m=x_range_m,
            y_half_range_m=y_half_range_m,
        )

    def shape(self) -> tuple[int, int]:
        return (self.height_px, self.width_px)

    def divisible_by(self, n: int) -> bool:
        """True if both dimensions are divisible by 2**n (network depth gate)."""
        d = 2**n
        return self.height_px % d == 0 and self.width_px % d == 0


#: Default desk-scale grid: 25.6 m ahead, +-3.2 m lateral, at 5 x 10 px/m.
DESK_GRID = GridSpec.from_pixels(128, 64)

#: Full-scale grid: 102.4 m ahead, +-12.8 m lateral, at 5 x 10 px/m.
PAPER_GRID = GridSpec.from_pixels(512, 256)


def world_to_pixel(x_m: float, y_m: float, grid: GridSpec) -> tuple[float, float]:
    """Map world meters to fractional pixel coordinates (row, col)."""
    return (x_m * grid.ppm_x, (y_m + grid.y_half_range_m) * grid.ppm_y)


def pixel_to_world(row: float, col: float, grid: GridSpec) -> tuple[float, float]:
    """Map fractional pixel coordinates (row, col) back to world meters."""
    return (row / grid.ppm_x, col / grid.ppm_y - grid.y_half_range_m)


@dataclass(frozen=True)
class VehicleState:
    """One vehicle observation: identity, position (m), timestamp (s)."""

    vehicle_id: str
    x_m: float
    y_m: float
    t_s: float


@dataclass(frozen=True)
class VehicleTrack:
    """A single vehicle's samples, ordered in time with uniform spacing."""

    vehicle_id: str
    samples: tuple[VehicleState, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValueError("track must contain at least one sample")
        for s in self.samples:
            if s.vehicle_id != self.vehicle_id:
                raise ValueError(
                    f"sample id {s.vehicle_id!r} does not match track {self.vehicle_id!r}"
                )
        ts = [s.t_s for s in self.samples]
        if len(ts) >= 2:
            dt = ts[1] - ts[0]
            if dt <= 0:
                raise ValueError("timestamps must be strictly increasing")
            for a, b in zip(ts, ts[1:]):
                if abs((b - a) - dt) > DT_TOL_S:
                    raise ValueError(
                        f"non-uniform sampling: expected dt={dt}, got {b - a}"
                    )

    @property
    def dt_s(self) -> float | None:
        """Sample spacing in seconds, or None for a single-sample track."""
        if len(self.samples) < 2:
            return None
        return self.samples[1].t_s - self.samples[0].t_s

    def positions(self) -> list[tuple[float, float]]:
        return [(s.x_m, s.y_m) for s in self.samples]


Frame = tuple[VehicleState, ...]
LanePolyline = tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class SceneWindow:
    """One training/evaluation unit: D observed frames and M future frames.

    Every vehicle appearing in the future frames must be present in the
    last observed frame, so each target has an anchor to associate with.
    Vehicles may enter during the observed frames or leave during the
    future ones; those simply have shorter in-window histories.
    """

    input_frames: tuple[Frame, ...]
    output_frames: tuple[Frame, ...]
    lanes: tuple[LanePolyline, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "input_frames", tuple(tuple(f) for f in self.input_frames)
        )
        object.__setattr__(
            self, "output_frames", tuple(tuple(f) for f in self.output_frames)
        )
        object.__setattr__(
            self, "lanes", tuple(tuple(tuple(p) for p in pl) for pl in self.lanes)
        )
        if not self.input_frames:
            raise ValueError("window needs at least one input frame")
        if not self.output_frames:
            raise ValueError("window needs at least one output frame")
        anchor = {s.vehicle_id for s in self.input_frames[-1]}
        for k, frame in enumerate(self.output_frames):
            for s in frame:
                if s.vehicle_id not in anchor:
                    raise ValueError(
                        f"vehicle {s.vehicle_id!r} in output frame {k} is missing "
                        "from the last input frame"
                    )

    @property
    def depth_in(self) -> int:
        return len(self.input_frames)

    @property
    def depth_out(self) -> int:
        return len(self.output_frames)

    @property
    def anchor_frame(self) -> Frame:
        """The last observed frame, whose vehicles anchor the targets."""
        return self.input_frames[-1]

    def anchor_positions(self) -> dict[str, tuple[float, float]]:
        return {s.vehicle_id: (s.x_m, s.y_m) for s in self.anchor_frame}


@dataclass(frozen=True)
class RenderOptions:
    """How vehicle observations become image intensities.

    shape selects the vehicle footprint model: "gaussian" renders a
    separable bell with per-axis spreads, "rect" an axis-aligned box of
    the vehicle's nominal dimensions.  Unset spreads default to half the
    box dimensions (sigma_x from length, sigma_y from width), and unset
    vehicle_value defaults to 1.0 for gaussian and 128/255 for rect.
    merge decides how overlapping vehicles combine ("max" or "add").
    """

    shape: str = "gaussian"
    merge: str = "max"
    vehicle_value: float | None = None
    lane_value: float = 1.0
    rect_w_m: float = 1.8
    rect_h_m: float = 5.0
    sigma_x_m: float | None = None
    sigma_y_m: float | None = None

    def __post_init__(self) -> None:
        if self.shape not in ("gaussian", "rect"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.merge not in ("max", "add"):
            raise ValueError(f"unknown merge {self.merge!r}")
        if self.rect_w_m <= 0 or self.rect_h_m <= 0:
            raise ValueError("vehicle dimensions must be positive")
        if self.vehicle_value is None:
            default = 1.0 if self.shape == "gaussian" else 128.0 / 255.0
            object.__setattr__(self, "vehicle_value", default)
        if not 0.0 < self.vehicle_value <= 1.0:
            raise ValueError("vehicle_value must be in (0, 1]")
        if not 0.0 <= self.lane_value <= 1.0:
            raise ValueError("lane_value must be in [0, 1]")
        if self.sigma_x_m is None:
            object.__setattr__(self, "sigma_x_m", self.rect_h_m / 2.0)
        if self.sigma_y_m is None:
            object.__setattr__(self, "sigma_y_m", self.rect_w_m / 2.0)
        if self.sigma_x_m <= 0 or self.sigma_y_m <= 0:
            raise ValueError("spreads must be positive")
