"""Iterative detector dispatch: train an agent, station it, repeat until dry.

Each iteration trains a fresh agent against whatever users are still
emitting, stations a detector at the strongest-signal position the trained
policy visits, and connects the users it covers. The loop ends when an
iteration brings in fewer new connections than the threshold; that final
detector is not stationed and its connections (if any) are rolled back.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dqn import QNetwork, TrainConfig, select_action, train_agent
from .radio import RadioParams, in_coverage
from .rl_env import AgentState, DetectorEnv, EnvParams
from .scenario import Scenario

Point3 = tuple[float, float, float]

DEFAULT_ITERATION_CAP = 12


class LocalizationCapError(RuntimeError):
    """The iteration guard tripped before the connection threshold did."""


@dataclass
class DetectorReport:
    hover_position: Point3
    new_connection_ids: list[int]
    episode_scores: list[float]

    @property
    def connection_count(self) -> int:
        return len(self.new_connection_ids)


@dataclass
class LocalizationResult:
    reports: list[DetectorReport]
    total_connected: int


def greedy_rollout(env: DetectorEnv, net: QNetwork) -> list[AgentState]:
    """States visited by the trained policy acting greedily from the base."""
    state = env.reset()
    visited = [state]
    done = False
    rng = np.random.default_rng(0)  # unused at epsilon 0; keeps the signature happy
    while not done:
        action = select_action(net, env.observe(state), 0.0, rng)
        state, _reward, done = env.step(state, action)
        visited.append(state)
    return visited


def _pick_hover(env: DetectorEnv, visited: list[AgentState],
                stationed: list[Point3]) -> Point3:
    """Visited position with the strongest signal, respecting separation.

    Positions closer than the minimum UAV separation to an already stationed
    detector are skipped (only the shared base start can collide). Earliest
    visit wins ties.
    """
    best_xy: tuple[float, float] | None = None
    best_h = -np.inf
    seen: set[tuple[float, float]] = set()
    for s in visited:
        x, y, _z = s.position
        if (x, y) in seen:
            continue
        seen.add((x, y))
        if any((x - sx) ** 2 + (y - sy) ** 2 + (env.altitude - sz) ** 2
               < env.config.min_uav_separation ** 2 for sx, sy, sz in stationed):
            continue
        h = env.rssi_at(x, y)
        if h > best_h:
            best_h = h
            best_xy = (x, y)
    if best_xy is None:  # every visited cell blocked; fall back to the base
        best_xy = (visited[0].position[0], visited[0].position[1])
    return (best_xy[0], best_xy[1], env.altitude)


def run_iteration(scenario: Scenario, stationed: list[Point3],
                  config: TrainConfig | None = None,
                  rng: np.random.Generator | None = None,
                  env_params: EnvParams | None = None,
                  radio: RadioParams | None = None) -> DetectorReport:
    """One dispatch: train, pick the hover position, connect covered users.

    Mutates the scenario: every emitting user within the detector radius of
    the hover position connects and stops emitting. With nothing emitting
    there is no signal to train against, so the report comes back empty
    without a training run.
    """
    config = config or TrainConfig()
    rng = rng if rng is not None else np.random.default_rng()
    env_params = env_params or EnvParams()
    radio = radio or RadioParams()
    detector_id = len(stationed)

    emitting = scenario.emitting_users()
    base = (0.0, 0.0, scenario.config.uav_altitude)
    if not emitting:
        return DetectorReport(hover_position=base, new_connection_ids=[],
                              episode_scores=[])

    params = replace(env_params, stationed_detectors=tuple(stationed))
    env = DetectorEnv(scenario, params, radio)
    net, scores = train_agent(env, config, rng)
    visited = greedy_rollout(env, net)
    hover = _pick_hover(env, visited, stationed)

    connected: list[int] = []
    for user in emitting:
        if in_coverage(user.position, hover, scenario.config.detector_radius):
            user.connect(detector_id)
            connected.append(user.id)
    return DetectorReport(hover_position=hover, new_connection_ids=connected,
                          episode_scores=scores)


def find_locations(scenario: Scenario, threshold: int = 1,
                   config: TrainConfig | None = None,
                   rng: np.random.Generator | None = None,
                   env_params: EnvParams | None = None,
                   radio: RadioParams | None = None,
                   iteration_cap: int = DEFAULT_ITERATION_CAP) -> LocalizationResult:
    """Dispatch detectors until an iteration falls below the threshold.

    The terminating iteration is discarded entirely: its detector is not
    stationed and any sub-threshold connections it made are undone.
    """
    if threshold < 1:
        raise ValueError("threshold must be at least 1")
    reports: list[DetectorReport] = []
    stationed: list[Point3] = []
    users_by_id = {u.id: u for u in scenario.users}

    for _iteration in range(iteration_cap):
        report = run_iteration(scenario, stationed, config, rng, env_params, radio)
        if report.connection_count < threshold:
            for uid in report.new_connection_ids:
                users_by_id[uid].disconnect()
            total = sum(r.connection_count for r in reports)
            return LocalizationResult(reports=reports, total_connected=total)
        reports.append(report)
        stationed.append(report.hover_position)
    raise LocalizationCapError(
        f"still connecting new users after {iteration_cap} iterations"
    )
