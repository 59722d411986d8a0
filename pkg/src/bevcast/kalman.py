"""Constant-velocity Kalman filter used as the prediction baseline.

State is [x, y, vx, vy]; the transition advances positions by velocity
over one sample period and leaves velocities untouched.  Observations
are full state vectors: measured positions plus velocities obtained by
finite differences of consecutive positions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .scene import VehicleTrack

__all__ = ["KfState", "make_cv_state", "kf_step", "predict_horizon"]

# Defaults chosen so warm-up locks onto clean tracks within a few samples.
DEFAULT_Q_DIAG = (1e-2, 1e-2, 1e-1, 1e-1)
DEFAULT_R_DIAG = (1e-2, 1e-2, 1e-1, 1e-1)
DEFAULT_P0 = 1e6


@dataclass(frozen=True)
class KfState:
    """Filter state with its covariances and sample period."""

    x: np.ndarray  # [x, y, vx, vy]
    P: np.ndarray  # 4x4 state covariance
    Q: np.ndarray  # 4x4 process noise
    R: np.ndarray  # 4x4 observation noise
    dt: float

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64).reshape(4)
        object.__setattr__(self, "x", x)
        for name in ("P", "Q", "R"):
            m = np.asarray(getattr(self, name), dtype=np.float64).reshape(4, 4)
            if not np.allclose(m, m.T):
                raise ValueError(f"{name} must be symmetric")
            if np.any(np.linalg.eigvalsh(m) < -1e-9):
                raise ValueError(f"{name} must be positive semi-definite")
            object.__setattr__(self, name, m)
        if self.dt <= 0:
            raise ValueError("dt must be positive")


def _transition(dt: float) -> np.ndarray:
    return np.array(
        [
            [1.0, 0.0, dt, 0.0],
            [0.0, 1.0, 0.0, dt],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def make_cv_state(
    x_m: float,
    y_m: float,
    dt: float,
    q_diag=DEFAULT_Q_DIAG,
    r_diag=DEFAULT_R_DIAG,
    p0: float = DEFAULT_P0,
) -> KfState:
    """Initial state at a known position with unknown (zero) velocity."""
    return KfState(
        x=np.array([x_m, y_m, 0.0, 0.0]),
        P=np.eye(4) * p0,
        Q=np.diag(q_diag),
        R=np.diag(r_diag),
        dt=dt,
    )


def kf_step(state: KfState, obs: np.ndarray | None = None) -> KfState:
    """Advance one sample period; correct against obs when present.

    The observation model is the identity (positions and velocities
    observed directly).  Covariance updates use the Joseph form and are
    re-symmetrized, keeping P positive semi-definite.
    """
    A = _transition(state.dt)
    x = A @ state.x
    P = A @ state.P @ A.T + state.Q
    if obs is not None:
        z = np.asarray(obs, dtype=np.float64).reshape(4)
        if not np.all(np.isfinite(z)):
            raise ValueError(f"non-finite observation {z}")
        S = P + state.R
        K = P @ np.linalg.inv(S)
        x = x + K @ (z - x)
        ImK = np.eye(4) - K
        P = ImK @ P @ ImK.T + K @ state.R @ K.T
    P = 0.5 * (P + P.T)
    return replace(state, x=x, P=P)


def predict_horizon(
    track: VehicleTrack,
    steps: int,
    q_diag=DEFAULT_Q_DIAG,
    r_diag=DEFAULT_R_DIAG,
    p0: float = DEFAULT_P0,
) -> list[tuple[float, float]]:
    """Warm up on a track's samples, then predict open-loop.

    The first sample initializes the state with a wide prior; each later
    sample contributes a full observation with finite-difference
    velocities.  Returns the (x, y) position after each of the `steps`
    predict-only iterations.
    """
    pts = track.positions()
    if len(pts) < 2:
        raise ValueError("need at least 2 samples to seed velocity")
    dt = track.dt_s
    state = make_cv_state(pts[0][0], pts[0][1], dt, q_diag, r_diag, p0)
    for (x_prev, y_prev), (x_cur, y_cur) in zip(pts, pts[1:]):
        z = np.array([x_cur, y_cur, (x_cur - x_prev) / dt, (y_cur - y_prev) / dt])
        state = kf_step(state, z)
    out = []
    for _ in range(steps):
        state = kf_step(state, None)
        out.append((float(state.x[0]), float(state.x[1])))
    return out
