"""Free-space channel model: path-loss gain, cumulative RSSI, coverage, transmission delay.

Distance conventions, stated once so they are never mixed: channel gain uses
the full 3D user-to-UAV distance; coverage uses horizontal (ground-plane)
distance only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .scenario import TaskProfile, User

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]


@dataclass(frozen=True)
class RadioParams:
    channel_power_gain: float = 1.42e-4
    data_rate: float = 1.0e8          # bit/s
    # Applied only at the RL reward boundary, never inside channel math. The
    # scale keeps per-step rewards around 0.1..4 so that discounted returns
    # stay O(10..100); larger scales make the TD regression overshoot at the
    # fixed learning rate and the value estimates overflow.
    rssi_reward_scale: float = 1.0e7

    def __post_init__(self) -> None:
        if self.channel_power_gain <= 0:
            raise ValueError("channel_power_gain must be positive")
        if self.data_rate <= 0:
            raise ValueError("data_rate must be positive")
        if self.rssi_reward_scale <= 0:
            raise ValueError("rssi_reward_scale must be positive")


def channel_gain(user_pos: Point2, uav_pos: Point3, params: RadioParams) -> float:
    """Received gain after free-space path loss, g / d^2 with d the 3D distance."""
    dx = user_pos[0] - uav_pos[0]
    dy = user_pos[1] - uav_pos[1]
    dz = uav_pos[2]
    d2 = dx * dx + dy * dy + dz * dz
    if d2 == 0.0:
        raise ValueError("user and UAV positions coincide")
    return params.channel_power_gain / d2


def cumulative_rssi(uav_pos: Point3, users: Iterable[User], params: RadioParams) -> float:
    """Total signal strength sensed at a UAV position.

    Only users still emitting contribute; connected users are silent.
    """
    return sum(channel_gain(u.position, uav_pos, params)
               for u in users if u.emitting)


def cumulative_rssi_xy(x: float, y: float, altitude: float,
                       emitter_xy: np.ndarray, params: RadioParams) -> float:
    """Vectorized cumulative_rssi over an (n, 2) array of emitter positions."""
    if emitter_xy.shape[0] == 0:
        return 0.0
    dx = emitter_xy[:, 0] - x
    dy = emitter_xy[:, 1] - y
    d2 = dx * dx + dy * dy + altitude * altitude
    return float(params.channel_power_gain * np.sum(1.0 / d2))


def in_coverage(user_pos: Point2, uav_pos: Sequence[float], radius: float) -> bool:
    """Horizontal-distance coverage test, boundary inclusive."""
    dx = user_pos[0] - uav_pos[0]
    dy = user_pos[1] - uav_pos[1]
    return dx * dx + dy * dy <= radius * radius


def transmission_delay(task: TaskProfile, params: RadioParams) -> float:
    """Uplink time for one task, size / data rate."""
    return task.size_bits / params.data_rate
