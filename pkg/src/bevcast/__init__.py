"""Bird's-eye-view multi-vehicle trajectory forecasting.

Scenes become grayscale top-down rasters, a U-Net regresses future
rasters from past ones, and sub-pixel peak extraction plus Hungarian
association turn the predicted images back into per-vehicle positions.
A constant-velocity Kalman filter provides the baseline, and
displacement-error metrics (RMSE/MAE/ADE/FDE) close the loop.
"""

from .association import Association, associate
from .bev import BevBlock, BevImage, encode_window, merge, render_frame, render_lanes, render_vehicle
from .dataio import SynthSpec, TrajectoryTable, load_csv, resample, slice_windows, synthesize, write_csv
from .extraction import Detection, ExtractionParams, extract_positions, subpx_location
from .kalman import KfState, kf_step, predict_horizon
from .metrics import EvalReport, ade_fde, evaluate, mae_per_step, rmse_per_step
from .scene import (
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
from .training import FitResult, TrainConfig, TrainingDiverged, fit, train_step
from .unet import UNetConfig, UNetModel, build, load_checkpoint, param_count, receptive_radius, save_checkpoint

__version__ = "0.1.0"
