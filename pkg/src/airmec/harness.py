"""Experiment runner: sweeps over users, fleet sizes, and seeds; CSV emission.

Every cell is fully determined by its (method, users, points, fleet, seed)
key: scenario generation, detector placement, and the simulator each draw
from their own seed stream derived from that key. Rerunning a spec rewrites
byte-identical files.
"""
from __future__ import annotations

import csv
import math
import multiprocessing
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .allocation import compute_demands, deploy
from .baselines import (CF, DEEPAIR, RANDOM, PlacementMethod, cf_centers,
                        place_and_connect, random_centers)
from .config import Settings
from .localization import find_locations
from .mec_sim import simulate
from .scenario import generate_scenario

OUTPUT_DIR_ENV = "AIRMEC_OUT"

# stream tags so the per-phase generators never collide
_TAG_PLACEMENT = 11
_TAG_SIM = 33
_KIND_CODE = {DEEPAIR: 0, CF: 1, RANDOM: 2}


@dataclass(frozen=True)
class ExperimentSpec:
    method: PlacementMethod
    user_counts: tuple[int, ...]
    fleet_sizes: tuple[int, ...]
    point_counts: tuple[int, ...] = (3,)
    seeds: tuple[int, ...] = tuple(range(10))
    duration: float = 1000.0
    threshold: int = 1
    settings: Settings = field(default_factory=Settings)

    def __post_init__(self) -> None:
        for name in ("user_counts", "fleet_sizes", "point_counts", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if self.duration <= 0:
            raise ValueError("duration must be positive")


@dataclass
class ResultRow:
    method: str
    seed: int
    users: int
    fleet: int
    points: int
    detectors_used: int
    success_rate: float          # nan on a failed cell
    error: Optional[str] = None


@dataclass
class ScoreCurve:
    method: str
    users: int
    points: int
    seed: int
    iteration: int
    scores: list[float]


@dataclass
class ResultTable:
    rows: list[ResultRow] = field(default_factory=list)
    curves: list[ScoreCurve] = field(default_factory=list)

    def sort(self) -> None:
        self.rows.sort(key=lambda r: (r.method, r.users, r.fleet, r.points, r.seed))
        self.curves.sort(key=lambda c: (c.method, c.users, c.points, c.seed,
                                        c.iteration))

    def ok_rows(self) -> list[ResultRow]:
        return [r for r in self.rows if r.error is None]

    def failed_rows(self) -> list[ResultRow]:
        return [r for r in self.rows if r.error is not None]

    def mean_success(self, method: str, users: int, fleet: int) -> float:
        vals = [r.success_rate for r in self.ok_rows()
                if r.method == method and r.users == users and r.fleet == fleet]
        if not vals:
            return float("nan")
        return float(np.mean(vals))

    def aggregates(self) -> list[tuple[str, int, int, int, float, float]]:
        """(method, users, fleet, n, mean, stddev) per cell over seeds."""
        cells: dict[tuple[str, int, int], list[float]] = {}
        for r in self.ok_rows():
            cells.setdefault((r.method, r.users, r.fleet), []).append(r.success_rate)
        out = []
        for (method, users, fleet), vals in sorted(cells.items()):
            mean = float(np.mean(vals))
            std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
            out.append((method, users, fleet, len(vals), mean, std))
        return out

    @classmethod
    def merge(cls, tables: Iterable["ResultTable"]) -> "ResultTable":
        merged = cls()
        for t in tables:
            merged.rows.extend(t.rows)
            merged.curves.extend(t.curves)
        merged.sort()
        return merged


def _rng(*key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def _run_item(spec: ExperimentSpec, users: int, points: int,
              seed: int) -> tuple[list[ResultRow], list[ScoreCurve]]:
    """All fleet sizes for one (users, points, seed) cell of one method.

    Detector placement happens once and is reused across fleet sizes; only
    allocation and the simulation depend on the fleet.
    """
    method = spec.method
    st = spec.settings
    label = method.label()
    kind = _KIND_CODE[method.kind]
    k = method.k or 0
    rows: list[ResultRow] = []
    curves: list[ScoreCurve] = []

    def failed(message: str) -> list[ResultRow]:
        return [ResultRow(method=label, seed=seed, users=users, fleet=fleet,
                          points=points, detectors_used=0,
                          success_rate=float("nan"), error=message)
                for fleet in spec.fleet_sizes]

    try:
        scenario = generate_scenario(seed, users, points, st.arena, st.task)
        place_rng = _rng(seed, users, points, kind, k, _TAG_PLACEMENT)
        if method.kind == DEEPAIR:
            result = find_locations(scenario, spec.threshold, st.train,
                                    place_rng, st.env, st.radio)
        elif method.kind == CF:
            result = place_and_connect(cf_centers(method.k, st.arena), scenario)
        else:
            centers = random_centers(method.k, st.arena, place_rng)
            result = place_and_connect(centers, scenario)
        demands = compute_demands(result.reports, scenario, st.serving, st.radio)
    except Exception as exc:  # sub-component failures become failed cells
        return failed(f"{type(exc).__name__}: {exc}"), curves

    for it, report in enumerate(result.reports):
        if report.episode_scores:
            curves.append(ScoreCurve(method=label, users=users, points=points,
                                     seed=seed, iteration=it,
                                     scores=list(report.episode_scores)))

    for fleet in spec.fleet_sizes:
        try:
            plan = deploy(demands, fleet, result.reports, scenario)
            metrics = simulate(
                plan, scenario, spec.duration,
                _rng(seed, users, points, fleet, kind, k, _TAG_SIM),
                st.serving, st.radio, detectors_used=len(result.reports))
            rows.append(ResultRow(method=label, seed=seed, users=users,
                                  fleet=fleet, points=points,
                                  detectors_used=metrics.detectors_used,
                                  success_rate=metrics.success_rate))
        except Exception as exc:
            rows.append(ResultRow(method=label, seed=seed, users=users,
                                  fleet=fleet, points=points, detectors_used=0,
                                  success_rate=float("nan"),
                                  error=f"{type(exc).__name__}: {exc}"))
    return rows, curves


def _run_item_star(args) -> tuple[list[ResultRow], list[ScoreCurve]]:
    return _run_item(*args)


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ResultTable:
    """Execute every cell of the spec; failures land in rows, not exceptions."""
    items = [(spec, users, points, seed)
             for users in spec.user_counts
             for points in spec.point_counts
             for seed in spec.seeds]
    table = ResultTable()
    if jobs > 1 and len(items) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=jobs) as pool:
            results = pool.map(_run_item_star, items)
    else:
        results = [_run_item_star(it) for it in items]
    for rows, curves in results:
        table.rows.extend(rows)
        table.curves.extend(curves)
    table.sort()
    return table


def run_methods(methods: Iterable[PlacementMethod], jobs: int = 1,
                **spec_kwargs) -> ResultTable:
    """Convenience sweep over several placement methods with shared settings."""
    tables = [run_experiment(ExperimentSpec(method=m, **spec_kwargs), jobs=jobs)
              for m in methods]
    return ResultTable.merge(tables)


# --- file emission -----------------------------------------------------------

ROWS_HEADER = ["method", "seed", "users", "fleet", "detectors_used", "success_rate"]
AGGREGATE_HEADER = ["method", "users", "fleet", "n_seeds", "mean_success",
                    "stddev_success"]
SCORES_HEADER = ["method", "users", "points", "seed", "iteration", "episode",
                 "score"]


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "results"))


def emit(table: ResultTable, path) -> dict[str, Path]:
    """Write the delimited result files; returns the paths written.

    rows.csv carries one line per cell, aggregate.csv the per-cell mean and
    standard deviation over seeds, scores.csv the per-episode training score
    curves. Content depends only on the table, never on the clock.
    """
    outdir = Path(path)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        paths = {
            "rows": outdir / "rows.csv",
            "aggregate": outdir / "aggregate.csv",
            "scores": outdir / "scores.csv",
        }
        with open(paths["rows"], "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(ROWS_HEADER)
            for r in table.rows:
                rate = "" if r.error is not None else repr(r.success_rate)
                w.writerow([r.method, r.seed, r.users, r.fleet,
                            r.detectors_used, rate])
        with open(paths["aggregate"], "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(AGGREGATE_HEADER)
            for method, users, fleet, n, mean, std in table.aggregates():
                w.writerow([method, users, fleet, n, repr(mean), repr(std)])
        with open(paths["scores"], "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(SCORES_HEADER)
            for c in table.curves:
                for episode, score in enumerate(c.scores):
                    w.writerow([c.method, c.users, c.points, c.seed,
                                c.iteration, episode, repr(score)])
        failures = table.failed_rows()
        if failures:
            err_path = outdir / "errors.txt"
            with open(err_path, "w") as f:
                for r in failures:
                    f.write(f"{r.method} seed={r.seed} users={r.users} "
                            f"fleet={r.fleet} points={r.points}: {r.error}\n")
            paths["errors"] = err_path
    except OSError as exc:
        raise OSError(f"cannot write results under {outdir}: {exc}") from exc
    return paths
