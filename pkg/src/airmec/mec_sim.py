"""Event-driven offloading simulation with single-server FIFO queues per UAV.

Every user generates tasks as a Poisson process; service demands are
exponential, so each serving UAV behaves as an M/M/1 station. Users pick the
covering UAV with the smallest predicted completion time using exact queue
backlog (queue states are reported out of band). Because service is FIFO and
work-conserving, a task's departure time is known the moment it is enqueued,
so the simulation advances on arrival events alone.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .allocation import DeploymentPlan
from .queueing import DelayBreakdown, ServingSpec, uav_service_time
from .radio import RadioParams, in_coverage, transmission_delay
from .scenario import Scenario

Point3 = tuple[float, float, float]


@dataclass
class TaskInstance:
    user_id: int
    created: float
    uav_id: Optional[int] = None
    departure: Optional[float] = None
    breakdown: Optional[DelayBreakdown] = None


@dataclass
class UavQueueState:
    uav_id: int
    position: Point3
    busy_until: float = 0.0
    pending: list[tuple[float, int]] = field(default_factory=list)  # (departure, user)

    def backlog(self, now: float) -> float:
        """Remaining work in seconds at time `now`."""
        return max(0.0, self.busy_until - now)

    def trim(self, now: float) -> None:
        while self.pending and self.pending[0][0] <= now:
            self.pending.pop(0)


@dataclass
class RunMetrics:
    generated: int
    succeeded: int
    success_rate: float
    per_area: dict[int, tuple[int, int]]   # area id -> (generated, succeeded)
    serving_used: int
    detectors_used: int
    mean_total_delay: float
    mean_sojourn: float


def choose_uav(user_pos: tuple[float, float], task, queues: list[UavQueueState],
               now: float, spec: ServingSpec, radio: RadioParams,
               serving_radius: float) -> Optional[int]:
    """Covering UAV with the smallest predicted completion; None if uncovered.

    Prediction = transmission + current backlog + expected service. Ties go
    to the lowest UAV id.
    """
    trans = transmission_delay(task, radio)
    service = uav_service_time(task, spec)
    best_id = None
    best_t = np.inf
    for q in queues:
        if not in_coverage(user_pos, q.position, serving_radius):
            continue
        predicted = trans + q.backlog(now) + service
        if predicted < best_t:
            best_t = predicted
            best_id = q.uav_id
    return best_id


def simulate(plan: DeploymentPlan, scenario: Scenario, duration: float,
             rng: np.random.Generator, spec: ServingSpec | None = None,
             radio: RadioParams | None = None,
             detectors_used: int = 0) -> RunMetrics:
    """Run the offloading workload against a deployment for `duration` seconds.

    Tasks of users that never connected to a detector, or whose area got no
    covering UAV, count as failures. Tasks still in service when the clock
    runs out are excluded from every count.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    spec = spec or ServingSpec()
    radio = radio or RadioParams()
    cfg = scenario.config

    queues = [UavQueueState(uav_id=u.id, position=u.position) for u in plan.uavs]
    queue_by_id = {q.uav_id: q for q in queues}
    served_ids = {u.id for u in scenario.users if u.connected_to is not None and
                  any(in_coverage(u.position, q.position, cfg.serving_radius)
                      for q in queues)}
    area_of = {u.id: (u.connected_to if u.connected_to is not None else -1)
               for u in scenario.users}

    generated = 0
    succeeded = 0
    total_delay_sum = 0.0
    sojourn_sum = 0.0
    completed = 0
    per_area: dict[int, list[int]] = {}

    def record(user_id: int, success: bool) -> None:
        nonlocal generated, succeeded
        generated += 1
        if success:
            succeeded += 1
        cell = per_area.setdefault(area_of[user_id], [0, 0])
        cell[0] += 1
        cell[1] += int(success)

    # (time, sequence, user_id) arrival events; the sequence number keeps heap
    # ordering deterministic across equal timestamps
    events: list[tuple[float, int, int]] = []
    seq = 0
    for user in scenario.users:
        t = rng.exponential(1.0 / user.task.arrival_rate)
        if t <= duration:
            heapq.heappush(events, (t, seq, user.id))
            seq += 1

    users_by_id = {u.id: u for u in scenario.users}
    while events:
        now, _s, uid = heapq.heappop(events)
        user = users_by_id[uid]

        nxt = now + rng.exponential(1.0 / user.task.arrival_rate)
        if nxt <= duration:
            heapq.heappush(events, (nxt, seq, uid))
            seq += 1

        if uid not in served_ids:
            record(uid, False)
            continue
        target = choose_uav(user.position, user.task, queues, now, spec, radio,
                            cfg.serving_radius)
        if target is None:
            record(uid, False)
            continue
        queue = queue_by_id[target]
        queue.trim(now)
        service = rng.exponential(uav_service_time(user.task, spec))
        start = max(now, queue.busy_until)
        departure = start + service
        queue.busy_until = departure
        queue.pending.append((departure, uid))
        if departure > duration:
            continue  # still in flight at the end of the run
        sojourn = departure - now
        total = transmission_delay(user.task, radio) + sojourn
        record(uid, total <= user.task.max_delay)
        total_delay_sum += total
        sojourn_sum += sojourn
        completed += 1

    rate = succeeded / generated if generated else 0.0
    return RunMetrics(
        generated=generated,
        succeeded=succeeded,
        success_rate=rate,
        per_area={k: (v[0], v[1]) for k, v in sorted(per_area.items())},
        serving_used=len(plan.uavs),
        detectors_used=detectors_used,
        mean_total_delay=total_delay_sum / completed if completed else float("nan"),
        mean_sojourn=sojourn_sum / completed if completed else float("nan"),
    )
