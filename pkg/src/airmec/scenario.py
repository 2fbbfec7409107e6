"""World model: arena geometry, task profiles, and seeded scenario generation.

All quantities are kept in base units throughout the package: bits, CPU
cycles, seconds, meters. Nothing downstream converts units.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, TextIO

import numpy as np

# Dispersion of users around their attraction point. 40 m keeps most of a
# cluster inside one 75 m detector footprint while leaving stragglers.
CLUSTER_SIGMA_M = 40.0

# Rejection-sampling attempt caps; exceeding them means the requested layout
# cannot be packed into the arena.
_POINT_ATTEMPTS = 2000
_USER_ATTEMPTS = 1000


class GenerationError(RuntimeError):
    """Rejection sampling could not satisfy the placement rules."""


@dataclass(frozen=True)
class ArenaConfig:
    """Static environment geometry, meters."""

    x_max: float = 500.0
    y_max: float = 500.0
    uav_altitude: float = 200.0
    detector_radius: float = 75.0
    serving_radius: float = 75.0
    min_uav_separation: float = 10.0

    def __post_init__(self) -> None:
        for name in ("x_max", "y_max", "uav_altitude", "detector_radius",
                     "serving_radius", "min_uav_separation"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TaskProfile:
    """Per-user task description: (size, cycles/bit, arrival rate, deadline)."""

    size_bits: float = 5.0e5
    cycles_per_bit: float = 90.0
    arrival_rate: float = 0.30
    max_delay: float = 1.0

    def __post_init__(self) -> None:
        for name in ("size_bits", "cycles_per_bit", "arrival_rate", "max_delay"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def cycles(self) -> float:
        """Total CPU cycles one task needs."""
        return self.size_bits * self.cycles_per_bit


@dataclass
class User:
    id: int
    position: tuple[float, float]
    task: TaskProfile
    emitting: bool = True
    connected_to: Optional[int] = None

    def connect(self, detector_id: int) -> None:
        self.emitting = False
        self.connected_to = detector_id

    def disconnect(self) -> None:
        self.emitting = True
        self.connected_to = None


@dataclass
class AttractionPoint:
    position: tuple[float, float]
    assigned_user_count: int


@dataclass
class Scenario:
    config: ArenaConfig
    attraction_points: list[AttractionPoint]
    users: list[User]
    seed: int

    def emitting_users(self) -> list[User]:
        return [u for u in self.users if u.emitting]

    def connected_users(self) -> list[User]:
        return [u for u in self.users if u.connected_to is not None]

    def clone(self) -> "Scenario":
        """Independent copy; mutating connections in one does not affect the other."""
        return Scenario(
            config=self.config,
            attraction_points=[replace(p) for p in self.attraction_points],
            users=[replace(u) for u in self.users],
            seed=self.seed,
        )


def default_config() -> tuple[ArenaConfig, TaskProfile]:
    """Baseline arena and task parameters used by every experiment."""
    return ArenaConfig(), TaskProfile()


def generate_scenario(seed: int, n_users: int, n_attraction_points: int,
                      config: ArenaConfig, task: TaskProfile | None = None) -> Scenario:
    """Draw the hidden world for one experiment.

    Attraction points are uniform inside the arena inset by the detector
    radius, kept at least two detector radii apart. Users are split evenly
    across points (remainder round-robin) and scattered around their point
    with a truncated Gaussian resampled into bounds. Pure function of the
    arguments: the same seed always yields the same scenario.
    """
    if n_attraction_points < 1:
        raise ValueError("need at least one attraction point")
    if n_users < n_attraction_points:
        raise ValueError("need at least one user per attraction point")
    if task is None:
        task = TaskProfile()

    rng = np.random.default_rng(seed)
    inset = config.detector_radius
    if config.x_max <= 2 * inset or config.y_max <= 2 * inset:
        raise GenerationError("arena too small for the detector radius inset")
    min_sep = 2.0 * config.detector_radius

    centers: list[tuple[float, float]] = []
    for _ in range(n_attraction_points):
        for _attempt in range(_POINT_ATTEMPTS):
            x = rng.uniform(inset, config.x_max - inset)
            y = rng.uniform(inset, config.y_max - inset)
            if all((x - cx) ** 2 + (y - cy) ** 2 >= min_sep ** 2 for cx, cy in centers):
                centers.append((x, y))
                break
        else:
            raise GenerationError(
                f"could not place {n_attraction_points} attraction points with "
                f"{min_sep:.0f} m separation in a {config.x_max:.0f}x{config.y_max:.0f} arena"
            )

    base, rem = divmod(n_users, n_attraction_points)
    counts = [base + (1 if i < rem else 0) for i in range(n_attraction_points)]

    users: list[User] = []
    uid = 0
    for (cx, cy), count in zip(centers, counts):
        for _ in range(count):
            for _attempt in range(_USER_ATTEMPTS):
                ux = rng.normal(cx, CLUSTER_SIGMA_M)
                uy = rng.normal(cy, CLUSTER_SIGMA_M)
                if 0.0 <= ux <= config.x_max and 0.0 <= uy <= config.y_max:
                    break
            else:
                raise GenerationError("could not place user inside arena bounds")
            users.append(User(id=uid, position=(ux, uy), task=task))
            uid += 1

    points = [AttractionPoint(position=c, assigned_user_count=n)
              for c, n in zip(centers, counts)]
    return Scenario(config=config, attraction_points=points, users=users, seed=seed)


# --- text serialization (golden fixtures, CLI hand-off) ---------------------

def save_scenario(scenario: Scenario, path_or_file) -> None:
    """One record per line; floats written with full precision."""
    profiles = {u.task for u in scenario.users}
    if len(profiles) > 1:
        raise ValueError("serialization supports a single task profile per scenario")
    task = scenario.users[0].task if scenario.users else TaskProfile()
    cfg = scenario.config

    def dump(f: TextIO) -> None:
        f.write(f"seed {scenario.seed}\n")
        f.write(
            "arena "
            f"x_max={cfg.x_max!r} y_max={cfg.y_max!r} altitude={cfg.uav_altitude!r} "
            f"detector_radius={cfg.detector_radius!r} serving_radius={cfg.serving_radius!r} "
            f"min_separation={cfg.min_uav_separation!r}\n"
        )
        f.write(
            "task "
            f"size_bits={task.size_bits!r} cycles_per_bit={task.cycles_per_bit!r} "
            f"arrival_rate={task.arrival_rate!r} max_delay={task.max_delay!r}\n"
        )
        for i, p in enumerate(scenario.attraction_points):
            f.write(f"point {i} x={p.position[0]!r} y={p.position[1]!r} "
                    f"users={p.assigned_user_count}\n")
        for u in scenario.users:
            conn = "-" if u.connected_to is None else str(u.connected_to)
            f.write(f"user {u.id} x={u.position[0]!r} y={u.position[1]!r} "
                    f"emitting={int(u.emitting)} connected={conn}\n")

    if hasattr(path_or_file, "write"):
        dump(path_or_file)
    else:
        with open(path_or_file, "w") as f:
            dump(f)


def _fields(parts: Iterable[str]) -> dict[str, str]:
    return dict(p.split("=", 1) for p in parts)


def load_scenario(path_or_file) -> Scenario:
    if hasattr(path_or_file, "read"):
        lines = path_or_file.read().splitlines()
    else:
        with open(path_or_file) as f:
            lines = f.read().splitlines()

    seed = 0
    config = ArenaConfig()
    task = TaskProfile()
    points: list[AttractionPoint] = []
    users: list[User] = []
    for line in lines:
        if not line.strip():
            continue
        kind, *rest = line.split()
        if kind == "seed":
            seed = int(rest[0])
        elif kind == "arena":
            f = _fields(rest)
            config = ArenaConfig(
                x_max=float(f["x_max"]), y_max=float(f["y_max"]),
                uav_altitude=float(f["altitude"]),
                detector_radius=float(f["detector_radius"]),
                serving_radius=float(f["serving_radius"]),
                min_uav_separation=float(f["min_separation"]),
            )
        elif kind == "task":
            f = _fields(rest)
            task = TaskProfile(
                size_bits=float(f["size_bits"]),
                cycles_per_bit=float(f["cycles_per_bit"]),
                arrival_rate=float(f["arrival_rate"]),
                max_delay=float(f["max_delay"]),
            )
        elif kind == "point":
            f = _fields(rest[1:])
            points.append(AttractionPoint(
                position=(float(f["x"]), float(f["y"])),
                assigned_user_count=int(f["users"]),
            ))
        elif kind == "user":
            uid = int(rest[0])
            f = _fields(rest[1:])
            conn = None if f["connected"] == "-" else int(f["connected"])
            users.append(User(
                id=uid, position=(float(f["x"]), float(f["y"])), task=task,
                emitting=bool(int(f["emitting"])), connected_to=conn,
            ))
        else:
            raise ValueError(f"unknown record kind {kind!r}")
    return Scenario(config=config, attraction_points=points, users=users, seed=seed)
