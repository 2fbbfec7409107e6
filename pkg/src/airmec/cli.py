"""Command-line front end for the simulation pipeline."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import compute_demands, deploy, write_plan
from .baselines import DEEPAIR, CF, PlacementMethod, cf_centers, place_and_connect, \
    random_centers
from .config import Settings, default_settings, load_settings
from .dqn import train_agent
from .harness import (ExperimentSpec, ResultTable, ROWS_HEADER, default_output_dir,
                      emit, run_methods)
from .localization import find_locations
from .mec_sim import simulate
from .rl_env import DetectorEnv
from .scenario import generate_scenario, load_scenario, save_scenario


def _settings(args) -> Settings:
    if getattr(args, "config", None):
        return load_settings(args.config)
    return default_settings()


def _scenario(args, st: Settings):
    if getattr(args, "scenario", None):
        return load_scenario(args.scenario)
    return generate_scenario(args.seed, args.users, args.points, st.arena, st.task)


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _place(method: PlacementMethod, scenario, st: Settings, seed: int,
           threshold: int):
    if method.kind == DEEPAIR:
        return find_locations(scenario, threshold, st.train,
                              np.random.default_rng(seed), st.env, st.radio)
    if method.kind == CF:
        return place_and_connect(cf_centers(method.k, st.arena), scenario)
    centers = random_centers(method.k, st.arena, np.random.default_rng(seed))
    return place_and_connect(centers, scenario)


def cmd_generate(args) -> int:
    st = _settings(args)
    scenario = generate_scenario(args.seed, args.users, args.points, st.arena,
                                 st.task)
    out = Path(args.out) if args.out else default_output_dir() / "scenario.txt"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_scenario(scenario, out)
    print(f"wrote {out} ({len(scenario.users)} users, "
          f"{len(scenario.attraction_points)} attraction points)")
    return 0


def cmd_train(args) -> int:
    st = _settings(args)
    scenario = _scenario(args, st)
    env = DetectorEnv(scenario, st.env, st.radio)
    net, scores = train_agent(env, st.train, np.random.default_rng(args.seed))
    out = _out_dir(args)
    net.save(out / "weights.npz")
    with open(out / "scores.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["episode", "score"])
        for i, s in enumerate(scores):
            w.writerow([i, repr(s)])
    print(f"trained {len(scores)} episodes; final score {scores[-1]:.1f}; "
          f"wrote {out}/weights.npz and {out}/scores.csv")
    return 0


def cmd_localize(args) -> int:
    st = _settings(args)
    scenario = _scenario(args, st)
    result = find_locations(scenario, args.threshold, st.train,
                            np.random.default_rng(args.seed), st.env, st.radio)
    out = _out_dir(args)
    with open(out / "detectors.txt", "w") as f:
        for i, r in enumerate(result.reports):
            x, y, z = r.hover_position
            f.write(f"detector {i} x={x:.1f} y={y:.1f} z={z:.1f} "
                    f"connected={r.connection_count}\n")
        f.write(f"total_connected {result.total_connected}\n")
    with open(out / "scores.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iteration", "episode", "score"])
        for i, r in enumerate(result.reports):
            for e, s in enumerate(r.episode_scores):
                w.writerow([i, e, repr(s)])
    print(f"stationed {len(result.reports)} detectors, connected "
          f"{result.total_connected}/{len(scenario.users)} users; wrote {out}")
    return 0


def cmd_plan(args) -> int:
    st = _settings(args)
    scenario = _scenario(args, st)
    method = PlacementMethod.parse(args.method)
    result = _place(method, scenario, st, args.seed, args.threshold)
    demands = compute_demands(result.reports, scenario, st.serving, st.radio)
    plan = deploy(demands, args.fleet, result.reports, scenario)
    out = _out_dir(args)
    with open(out / "plan.txt", "w") as f:
        write_plan(plan, demands, f)
    print(f"{method.label()}: granted {sum(plan.granted)}/{args.fleet} UAVs over "
          f"{len(demands)} areas; wrote {out}/plan.txt")
    return 0


def cmd_simulate(args) -> int:
    st = _settings(args)
    scenario = _scenario(args, st)
    method = PlacementMethod.parse(args.method)
    result = _place(method, scenario, st, args.seed, args.threshold)
    demands = compute_demands(result.reports, scenario, st.serving, st.radio)
    plan = deploy(demands, args.fleet, result.reports, scenario)
    metrics = simulate(plan, scenario, args.duration,
                       np.random.default_rng(args.seed + 1), st.serving, st.radio,
                       detectors_used=len(result.reports))
    out = _out_dir(args)
    with open(out / "run.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(ROWS_HEADER)
        w.writerow([method.label(), args.seed, len(scenario.users), args.fleet,
                    metrics.detectors_used, repr(metrics.success_rate)])
    print(f"{method.label()}: {metrics.succeeded}/{metrics.generated} tasks ok "
          f"(success rate {metrics.success_rate:.3f}); wrote {out}/run.csv")
    return 0


def cmd_experiment(args) -> int:
    st = _settings(args)
    methods = [PlacementMethod.parse(m) for m in args.methods.split(",")]
    seeds = tuple(range(args.seeds)) if args.seed_list is None else \
        tuple(int(s) for s in args.seed_list.split(","))
    table = run_methods(
        methods, jobs=args.jobs,
        user_counts=tuple(int(u) for u in args.users.split(",")),
        fleet_sizes=tuple(int(f) for f in args.fleets.split(",")),
        point_counts=(args.points,),
        seeds=seeds, duration=args.duration, threshold=args.threshold,
        settings=st)
    out = _out_dir(args)
    paths = emit(table, out)
    if args.plots:
        from .plots import render_figures
        for p in render_figures(table, out):
            print(f"figure {p}")
    for name, p in paths.items():
        print(f"{name} {p}")
    failures = table.failed_rows()
    if failures:
        print(f"{len(failures)} failed cells (see errors.txt)", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airmec",
        description="UAV-assisted edge computing simulation suite")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_input=False):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--users", type=int, default=60)
        p.add_argument("--points", type=int, default=3)
        p.add_argument("--config", help="YAML file overriding default parameters")
        p.add_argument("--out", help="output path (default from "
                                     "$AIRMEC_OUT or ./results)")
        if scenario_input:
            p.add_argument("--scenario", help="load a serialized scenario "
                                              "instead of generating one")

    p = sub.add_parser("generate", help="write a scenario fixture")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train one detector agent")
    common(p, scenario_input=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("localize", help="run the iterative detector dispatch")
    common(p, scenario_input=True)
    p.add_argument("--threshold", type=int, default=1)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("plan", help="place detectors and size the serving fleet")
    common(p, scenario_input=True)
    p.add_argument("--method", default="deepair")
    p.add_argument("--fleet", type=int, default=10)
    p.add_argument("--threshold", type=int, default=1)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="single end-to-end cell")
    common(p, scenario_input=True)
    p.add_argument("--method", default="deepair")
    p.add_argument("--fleet", type=int, default=10)
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--duration", type=float, default=1000.0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="full sweep with CSV and figure output")
    p.add_argument("--methods", default="deepair,cf-16,random-16",
                   help="comma-separated: deepair, cf-<k>, random-<k>")
    p.add_argument("--users", default="60,80,100", help="comma-separated counts")
    p.add_argument("--fleets", default="2,4,6,8,10", help="comma-separated sizes")
    p.add_argument("--points", type=int, default=3)
    p.add_argument("--seeds", type=int, default=10, help="use seeds 0..N-1")
    p.add_argument("--seed-list", help="explicit comma-separated seeds")
    p.add_argument("--duration", type=float, default=1000.0)
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
