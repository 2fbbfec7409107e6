"""Serving-UAV sizing per detected area and scarce-fleet deployment."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .localization import DetectorReport
from .queueing import (CapacityExceededError, ServingSpec, mm1_total_delay,
                       max_users_per_uav)
from .radio import RadioParams, in_coverage, transmission_delay
from .scenario import Scenario, TaskProfile

Point3 = tuple[float, float, float]


class InfeasibleProfileError(RuntimeError):
    """A single user already violates its deadline; no fleet size helps."""


@dataclass
class AreaDemand:
    area_id: int
    user_ids: list[int]
    required_uavs: int


@dataclass
class ServingUav:
    id: int
    area_id: int
    position: Point3
    user_ids: list[int]


@dataclass
class DeploymentPlan:
    granted: list[int]              # per area, aligned with the demand list
    uavs: list[ServingUav]
    unassigned_users: list[int]     # connected users no granted UAV covers

    @property
    def total_uavs(self) -> int:
        return len(self.uavs)


def _balanced_groups(profiles: list[TaskProfile], k: int) -> list[list[TaskProfile]]:
    groups: list[list[TaskProfile]] = [[] for _ in range(k)]
    for i, p in enumerate(profiles):
        groups[i % k].append(p)
    return groups


def _group_feasible(group: list[TaskProfile], spec: ServingSpec,
                    radio: RadioParams) -> bool:
    try:
        t_queue = mm1_total_delay(group, spec)
    except CapacityExceededError:
        return False
    return all(transmission_delay(p, radio) + t_queue <= p.max_delay for p in group)


def required_uavs(users: list[TaskProfile], spec: ServingSpec,
                  radio: RadioParams) -> int:
    """Minimum serving UAVs so a balanced split of the users meets every deadline."""
    if not users:
        return 0
    homogeneous = len(set(users)) == 1
    if homogeneous:
        per_uav = max_users_per_uav(users[0], spec, radio)
        if per_uav == 0:
            raise InfeasibleProfileError("one user alone misses its deadline")
        start = math.ceil(len(users) / per_uav)
    else:
        start = 1
    for k in range(start, len(users) + 1):
        if all(_group_feasible(g, spec, radio) for g in _balanced_groups(users, k)):
            return k
    raise InfeasibleProfileError("even singleton groups miss a deadline")


def compute_demands(reports: list[DetectorReport], scenario: Scenario,
                    spec: ServingSpec, radio: RadioParams) -> list[AreaDemand]:
    """One demand per detector report, sized from its users' task profiles."""
    users_by_id = {u.id: u for u in scenario.users}
    demands = []
    for area_id, report in enumerate(reports):
        ids = sorted(report.new_connection_ids)
        profiles = [users_by_id[i].task for i in ids]
        demands.append(AreaDemand(area_id=area_id, user_ids=ids,
                                  required_uavs=required_uavs(profiles, spec, radio)))
    return demands


def _grant(demands: list[AreaDemand], fleet: int) -> list[int]:
    """Give UAVs one at a time to the area with the largest unmet need.

    Persistent ties rotate: among equal needs the area with the fewest grants
    so far goes first, then the lower area id.
    """
    granted = [0] * len(demands)
    remaining = [d.required_uavs for d in demands]
    for _ in range(fleet):
        candidates = [i for i in range(len(demands)) if remaining[i] > 0]
        if not candidates:
            break
        pick = min(candidates, key=lambda i: (-remaining[i], granted[i], i))
        granted[pick] += 1
        remaining[pick] -= 1
    return granted


def _stack_offsets(count: int, spacing: float) -> list[tuple[float, float]]:
    """Horizontal offsets for `count` UAVs stacked around a hover point.

    Concentric rings of radius r*spacing; ring r holds the most points whose
    chord spacing stays at or above `spacing`. The center itself is left to
    the stationed detector.
    """
    offsets: list[tuple[float, float]] = []
    ring = 1
    while len(offsets) < count:
        radius = ring * spacing
        # epsilon absorbs float error when the chord equals the spacing exactly
        slots = int(math.pi / math.asin(spacing / (2.0 * radius)) + 1e-9)
        for j in range(slots):
            if len(offsets) == count:
                break
            angle = 2.0 * math.pi * j / slots
            offsets.append((radius * math.cos(angle), radius * math.sin(angle)))
        ring += 1
    return offsets


def deploy(demands: list[AreaDemand], fleet: int, reports: list[DetectorReport],
           scenario: Scenario) -> DeploymentPlan:
    """Grant, place, and assign the available serving UAVs.

    Granted UAVs ring the area's hover point at the minimum separation; an
    area's users are spread across its UAVs evenly, each user going to the
    least loaded UAV that covers it.
    """
    if fleet < 0:
        raise ValueError("fleet must be non-negative")
    cfg = scenario.config
    users_by_id = {u.id: u for u in scenario.users}
    granted = _grant(demands, fleet)

    uavs: list[ServingUav] = []
    unassigned: list[int] = []
    for demand, count in zip(demands, granted):
        if count == 0:
            unassigned.extend(demand.user_ids)
            continue
        hx, hy, _hz = reports[demand.area_id].hover_position
        area_uavs = []
        for ox, oy in _stack_offsets(count, cfg.min_uav_separation):
            area_uavs.append(ServingUav(
                id=len(uavs) + len(area_uavs), area_id=demand.area_id,
                position=(hx + ox, hy + oy, cfg.uav_altitude), user_ids=[],
            ))
        for uid in demand.user_ids:
            pos = users_by_id[uid].position
            covering = [u for u in area_uavs
                        if in_coverage(pos, u.position, cfg.serving_radius)]
            if not covering:
                unassigned.append(uid)
                continue
            target = min(covering, key=lambda u: (len(u.user_ids), u.id))
            target.user_ids.append(uid)
        uavs.extend(area_uavs)
    return DeploymentPlan(granted=granted, uavs=uavs, unassigned_users=unassigned)


def write_plan(plan: DeploymentPlan, demands: list[AreaDemand], file) -> None:
    """Human-readable plan dump, one record per line."""
    for demand, count in zip(demands, plan.granted):
        file.write(f"area {demand.area_id} required={demand.required_uavs} "
                   f"granted={count} users={len(demand.user_ids)}\n")
    for uav in plan.uavs:
        x, y, z = uav.position
        ids = ",".join(str(i) for i in uav.user_ids) or "-"
        file.write(f"uav {uav.id} area={uav.area_id} x={x:.1f} y={y:.1f} z={z:.1f} "
                   f"users={ids}\n")
    if plan.unassigned_users:
        ids = ",".join(str(i) for i in sorted(plan.unassigned_users))
        file.write(f"unassigned users={ids}\n")
