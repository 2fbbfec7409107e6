"""Non-learning detector placements: grid communities and random centers.

Both baselines produce the same LocalizationResult shape the learned method
does, so allocation and the simulator run unchanged downstream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .localization import DetectorReport, LocalizationResult
from .scenario import ArenaConfig, Scenario

Point2 = tuple[float, float]

DEEPAIR = "deepair"
CF = "cf"
RANDOM = "random"


@dataclass(frozen=True)
class PlacementMethod:
    kind: str
    k: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in (DEEPAIR, CF, RANDOM):
            raise ValueError(f"unknown placement method {self.kind!r}")
        if self.kind == DEEPAIR:
            if self.k is not None:
                raise ValueError("the learned method takes no k")
        elif self.k is None or self.k < 1:
            raise ValueError("baselines need k >= 1 detectors")

    def label(self) -> str:
        if self.kind == DEEPAIR:
            return "DeepAir"
        return f"{'CF' if self.kind == CF else 'Random'}-{self.k}"

    @classmethod
    def parse(cls, text: str) -> "PlacementMethod":
        t = text.strip().lower()
        if t == DEEPAIR:
            return cls(DEEPAIR)
        for kind in (CF, RANDOM):
            if t.startswith(kind + "-"):
                return cls(kind, int(t[len(kind) + 1:]))
        raise ValueError(f"cannot parse method {text!r} "
                         "(expected deepair, cf-<k>, or random-<k>)")


def _grid_shape(k: int) -> tuple[int, int]:
    """Most-square factorization r*c = k, smaller factor first."""
    best = (1, k)
    for a in range(1, int(math.isqrt(k)) + 1):
        if k % a == 0:
            best = (a, k // a)
    return best


def cf_centers(k: int, config: ArenaConfig) -> list[Point2]:
    """Cell centers of the most-square grid partition of the arena.

    The smaller factor counts cells along x. Centers are listed x-major so
    indices are stable for tie-breaking.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    nx, ny = _grid_shape(k)
    xs = [(i + 0.5) * config.x_max / nx for i in range(nx)]
    ys = [(j + 0.5) * config.y_max / ny for j in range(ny)]
    return [(x, y) for x in xs for y in ys]


def random_centers(k: int, config: ArenaConfig,
                   rng: np.random.Generator) -> list[Point2]:
    """k independent uniform points in the arena."""
    return [(float(rng.uniform(0.0, config.x_max)),
             float(rng.uniform(0.0, config.y_max))) for _ in range(k)]


def place_and_connect(centers: list[Point2], scenario: Scenario) -> LocalizationResult:
    """Hover a detector at every center and connect the users each one covers.

    An emitting user inside the radius of several centers joins the nearest
    one; exact ties go to the lower center index. Mutates the scenario.
    """
    cfg = scenario.config
    r2 = cfg.detector_radius ** 2
    reports = [DetectorReport(hover_position=(cx, cy, cfg.uav_altitude),
                              new_connection_ids=[], episode_scores=[])
               for cx, cy in centers]
    for user in scenario.emitting_users():
        ux, uy = user.position
        best = None
        best_d2 = np.inf
        for i, (cx, cy) in enumerate(centers):
            d2 = (ux - cx) ** 2 + (uy - cy) ** 2
            if d2 <= r2 and d2 < best_d2:
                best = i
                best_d2 = d2
        if best is not None:
            user.connect(best)
            reports[best].new_connection_ids.append(user.id)
    total = sum(len(r.new_connection_ids) for r in reports)
    return LocalizationResult(reports=reports, total_connected=total)
