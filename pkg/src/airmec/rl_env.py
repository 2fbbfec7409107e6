"""Detector-agent environment: lattice kinematics over the arena with RSSI reward."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .radio import RadioParams, cumulative_rssi_xy
from .scenario import Scenario


class Action(enum.IntEnum):
    LEFT = 0
    RIGHT = 1
    UP = 2
    DOWN = 3
    NO_MOVE = 4


# Unit displacement per action. The flight angles of the four moves are the
# cardinal directions, whose cosines/sines are exactly 0 or +-1; using an
# integer table keeps positions on the lattice without float drift.
_DELTAS = {
    Action.LEFT: (-1, 0),
    Action.RIGHT: (1, 0),
    Action.UP: (0, 1),
    Action.DOWN: (0, -1),
    Action.NO_MOVE: (0, 0),
}

N_ACTIONS = len(Action)
N_FEATURES = 3


@dataclass(frozen=True)
class EnvParams:
    step_distance: float = 25.0
    episode_length: int = 100
    stationed_detectors: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.step_distance <= 0:
            raise ValueError("step_distance must be positive")
        if self.episode_length <= 0:
            raise ValueError("episode_length must be positive")


@dataclass(frozen=True)
class AgentState:
    position: tuple[float, float, float]
    step_index: int


class DetectorEnv:
    """Single detector agent searching the emitting-user field.

    The emitting set is frozen at construction (connections happen between
    iterations, never inside one), so user positions are pre-packed into an
    array for fast reward evaluation. Transitions are pure: state in, state
    out, no hidden mutation.
    """

    def __init__(self, scenario: Scenario, params: EnvParams | None = None,
                 radio: RadioParams | None = None):
        self.config = scenario.config
        self.params = params or EnvParams()
        self.radio = radio or RadioParams()
        self.altitude = scenario.config.uav_altitude
        self._emitters = np.array(
            [u.position for u in scenario.users if u.emitting], dtype=np.float64
        ).reshape(-1, 2)
        self._stationed = np.array(self.params.stationed_detectors,
                                   dtype=np.float64).reshape(-1, 3)
        self._min_sep2 = scenario.config.min_uav_separation ** 2

    @property
    def n_emitting(self) -> int:
        return self._emitters.shape[0]

    def reset(self) -> AgentState:
        """Start a flight at the base."""
        return AgentState(position=(0.0, 0.0, self.altitude), step_index=0)

    def observe(self, state: AgentState) -> np.ndarray:
        """Network features: coordinates normalized to [0, 1]."""
        x, y, z = state.position
        return np.array([x / self.config.x_max, y / self.config.y_max,
                         z / self.altitude])

    def rssi_at(self, x: float, y: float) -> float:
        """Scaled cumulative signal strength at a hover position."""
        raw = cumulative_rssi_xy(x, y, self.altitude, self._emitters, self.radio)
        return self.radio.rssi_reward_scale * raw

    def _violates(self, x: float, y: float) -> bool:
        if not (0.0 <= x <= self.config.x_max and 0.0 <= y <= self.config.y_max):
            return True
        if self._stationed.shape[0]:
            dx = self._stationed[:, 0] - x
            dy = self._stationed[:, 1] - y
            dz = self._stationed[:, 2] - self.altitude
            if np.any(dx * dx + dy * dy + dz * dz < self._min_sep2):
                return True
        return False

    def step(self, state: AgentState, action: Action) -> tuple[AgentState, float, bool]:
        """Apply one action; invalid moves keep the position and score -1."""
        x, y, z = state.position
        ux, uy = _DELTAS[Action(action)]
        nx = x + ux * self.params.step_distance
        ny = y + uy * self.params.step_distance
        if self._violates(nx, ny):
            nx, ny = x, y
            reward = -1.0
        else:
            reward = self.rssi_at(nx, ny)
        next_state = AgentState(position=(nx, ny, z), step_index=state.step_index + 1)
        done = next_state.step_index >= self.params.episode_length
        return next_state, reward, done
