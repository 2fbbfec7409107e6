"""Delay formulas and single-server queueing math behind capacity planning.

The planning delay for a loaded serving UAV sums the work of all co-located
users in the numerator (aggregate form); the textbook single-task sojourn
1/(mu - lambda) is kept alongside as a diagnostic because the event simulator
is validated against it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .radio import RadioParams, transmission_delay
from .scenario import TaskProfile


class CapacityExceededError(RuntimeError):
    """Offered load reaches or exceeds the serving capacity."""


@dataclass(frozen=True)
class ServingSpec:
    capacity: float = 3.0e8  # cycles/s

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")


@dataclass(frozen=True)
class DelayBreakdown:
    network: float
    service: float
    total: float
    success: bool


def local_delay(task: TaskProfile, f_user: float) -> float:
    """Execution time on the user's own device."""
    if f_user <= 0:
        raise ValueError("f_user must be positive")
    return task.cycles / f_user


def uav_service_time(task: TaskProfile, spec: ServingSpec) -> float:
    """Pure computation time of one task on a serving UAV."""
    return task.cycles / spec.capacity


def offered_load(users: Sequence[TaskProfile]) -> float:
    """Cycles/s demanded by a set of users."""
    return sum(t.arrival_rate * t.cycles for t in users)


def mm1_total_delay(users: Sequence[TaskProfile], spec: ServingSpec) -> float:
    """Planning delay at a serving UAV shared by `users`.

    Aggregate work over the co-located users divided by the residual capacity.
    Raises CapacityExceededError when the load leaves no residual capacity.
    """
    slack = spec.capacity - offered_load(users)
    if slack <= 0:
        raise CapacityExceededError(
            f"offered load {offered_load(users):.3e} cycles/s reaches capacity "
            f"{spec.capacity:.3e}"
        )
    return sum(t.cycles for t in users) / slack


def mm1_queueing_delay(users: Sequence[TaskProfile], spec: ServingSpec) -> float:
    """Waiting component for a representative (first) user: total minus compute."""
    if not users:
        raise ValueError("need at least one user")
    return mm1_total_delay(users, spec) - uav_service_time(users[0], spec)


def mm1_sojourn(task: TaskProfile, n_users: int, spec: ServingSpec) -> float:
    """Textbook mean sojourn 1/(mu - n*lambda) for n homogeneous users.

    Diagnostic only; planning uses mm1_total_delay.
    """
    mu = spec.capacity / task.cycles
    lam = n_users * task.arrival_rate
    if mu <= lam:
        raise CapacityExceededError(f"arrival rate {lam:.4f}/s >= service rate {mu:.4f}/s")
    return 1.0 / (mu - lam)


def total_task_delay(offloaded: bool, task: TaskProfile, spec: ServingSpec,
                     co_users: Sequence[TaskProfile], radio: RadioParams,
                     f_user: float | None = None) -> DelayBreakdown:
    """End-to-end planning delay for one task, split into network and service.

    `co_users` is every user sharing the serving UAV, this task's owner
    included. Success is boundary inclusive: total equal to the deadline
    still counts.
    """
    if offloaded:
        network = transmission_delay(task, radio)
        service = mm1_total_delay(co_users, spec)
    else:
        if f_user is None:
            raise ValueError("local execution needs the device capacity f_user")
        network = 0.0
        service = local_delay(task, f_user)
    total = network + service
    return DelayBreakdown(network=network, service=service, total=total,
                          success=total <= task.max_delay)


def max_users_per_uav(task: TaskProfile, spec: ServingSpec, radio: RadioParams) -> int:
    """Largest homogeneous user count one serving UAV can carry within deadline.

    Counts up while the load stays stable and transmission plus planning delay
    fits the deadline. Returns 0 when even a single user cannot be served.
    """
    n = 0
    while True:
        group = [task] * (n + 1)
        try:
            total = transmission_delay(task, radio) + mm1_total_delay(group, spec)
        except CapacityExceededError:
            return n
        if total > task.max_delay:
            return n
        n += 1
