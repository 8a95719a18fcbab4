"""Command-line front end: ``tetherplan plan|simulate|stats|render|experiment``.

Every command writes its outputs under ``--output`` (default
``$TETHERPLAN_OUTPUT_DIR`` or ``./runs``). On failure it prints a JSON error
record to stderr, writes it to ``error.json`` and exits with the error's
exit code: 2 for invalid input, 3 when no plan exists, 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError as PydanticValidationError

from tetherplan import __version__, config
from tetherplan.exceptions import ScenarioError, TetherPlanError, ValidationError
from tetherplan.experiments import (
    load_scenario_maps,
    plan_scenario,
    reachability_report,
    run_experiment,
    run_trials,
    summarize_trials,
)
from tetherplan.files import (
    annotated_path,
    find_scenario,
    load_plan_map,
    load_scenario,
    read_plan,
    read_trajectory,
    write_error,
    write_model,
    write_plan,
    write_trajectory,
)
from tetherplan.models import NoiseConfig, Point3, PRMParams
from tetherplan.render import render_plan
from tetherplan.voxel_map import inflate, load_map, resample

logger = logging.getLogger(__name__)

PLAN_FILE = "plan.csv"
REPORT_FILE = "report.json"
ERROR_FILE = "error.json"


def _point(text: str) -> Point3:
    try:
        x, y, z = (float(v) for v in text.split(","))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got '{text}'") from e
    return Point3(x=x, y=y, z=z)


def _noise(args: argparse.Namespace, base: NoiseConfig) -> NoiseConfig:
    update = {
        name: getattr(args, name)
        for name in ("sigma_cp", "sigma_drift", "sigma_loc")
        if getattr(args, name) is not None
    }
    try:
        return NoiseConfig.model_validate({**base.model_dump(), **update})
    except PydanticValidationError as e:
        raise ValidationError(f"invalid noise values {update}: {e}") from e


# Commands


def cmd_plan(args: argparse.Namespace, out: Path) -> int:
    maps = load_scenario_maps(args.scenario, resolution=args.resolution, inflate_radius=args.inflate)
    planned = plan_scenario(maps, seed=args.seed)
    path = write_plan(out / PLAN_FILE, planned.plan, planned.header)
    pushes = sum(e.kind == "push" for e in planned.plan.events)
    print(f"{path}: {len(planned.plan)} waypoints, {pushes} contact push(es), planner {planned.header.planner}")
    return 0


def cmd_simulate(args: argparse.Namespace, out: Path) -> int:
    doc = read_plan(args.plan)
    plan = annotated_path(doc)
    vmap = load_plan_map(doc.header, args.map)

    noise, trials = NoiseConfig(), config.DEFAULT_TRIALS
    r_acc, speed, rate = config.DEFAULT_R_ACC, config.DEFAULT_SPEED, config.DEFAULT_RATE
    if doc.header.scenario:
        try:
            spec = load_scenario(find_scenario(doc.header.scenario))
            noise, r_acc, speed, rate, trials = spec.noise, spec.r_acc, spec.speed, spec.rate, spec.trials
        except ScenarioError:
            logger.info("Scenario '%s' not found; simulating with defaults", doc.header.scenario)
    noise = _noise(args, noise)

    results = run_trials(
        plan,
        vmap,
        noise,
        trials if args.trials is None else args.trials,
        seed=args.seed,
        r_acc=r_acc if args.r_acc is None else args.r_acc,
        speed=speed if args.speed is None else args.speed,
        rate=rate if args.rate is None else args.rate,
        workers=args.workers,
    )
    paths = [write_trajectory(out / "trajectories" / f"trial_{r.seed}.csv", r.trajectory) for r in results]
    report = summarize_trials(
        results,
        plan_ref=str(args.plan),
        planner=doc.header.planner,
        experiment_class=doc.header.experiment_class,
        trajectory_paths=[p.name for p in paths],
    )
    write_model(out / REPORT_FILE, report)
    for t in report.trials:
        print(f"seed {t.seed:>4}  {t.outcome:<9}  mean {t.mean:.4f} m  max {t.max:.4f} m")
    print(f"grand mean {report.grand_mean:.4f} m over {len(report.trials)} trial(s)")
    return 0


def cmd_stats(args: argparse.Namespace, out: Path) -> int:
    if args.scenario:
        maps = load_scenario_maps(args.scenario, resolution=args.resolution, inflate_radius=args.inflate)
        original, vmap, map_ref = maps.original, maps.inflated, str(maps.map_path)
        reel = args.reel or maps.spec.reel
        prm = maps.spec.prm
    elif args.map and args.reel:
        original = load_map(args.map)
        if args.resolution is not None:
            original = resample(original, args.resolution)
        vmap = inflate(original, config.DEFAULT_ROBOT_RADIUS if args.inflate is None else args.inflate)
        map_ref, reel, prm = str(args.map), args.reel, PRMParams()
    else:
        raise ValidationError("stats needs a scenario, or --map together with --reel")
    if args.seed is not None:
        prm = prm.model_copy(update={"seed": args.seed})

    report = reachability_report(vmap, original, reel, map_ref=map_ref, coverage=not args.no_coverage, prm_params=prm)
    write_model(out / "reachability.json", report)
    print(f"reel {list(report.reel.as_tuple())}, inflate {report.inflate} m")
    print(f"free cells {report.free_cells}, tether-blocked {report.blocked_cells}")
    print(f"raycast fraction {report.fraction:.4f}")
    if report.contact_fraction is not None:
        print(f"contact fraction {report.contact_fraction:.4f} ({report.contact_covered} cells)")
    return 0


def cmd_render(args: argparse.Namespace, out: Path) -> int:
    doc = read_plan(args.plan)
    plan = annotated_path(doc)
    original = load_plan_map(doc.header, args.map)
    inflated = inflate(original, doc.header.inflate) if doc.header.inflate > 0 else None
    trajectories = [read_trajectory(p) for p in args.trajectories]
    result = render_plan(
        plan,
        original,
        out,
        inflated=inflated,
        trajectories=trajectories,
        title=doc.header.scenario or Path(args.plan).stem,
    )
    print(f"{result.svg}: {len(result.contacts)} contact(s), {result.trajectories} trajectories")
    print(f"{result.series}")
    return 0


def cmd_experiment(args: argparse.Namespace, out: Path) -> int:
    scenarios = args.scenarios or list(config.EXPERIMENT_SCENARIOS)
    noise = None
    if any(getattr(args, n) is not None for n in ("sigma_cp", "sigma_drift", "sigma_loc")):
        noise = _noise(args, NoiseConfig())
    run = run_experiment(
        scenarios,
        trials=args.trials,
        seed=args.seed or 0,
        noise=noise,
        r_acc=args.r_acc,
        resolution=args.resolution,
        inflate_radius=args.inflate,
        workers=args.workers,
    )
    for c in run.classes:
        class_dir = out / c.label
        plan_path = write_plan(class_dir / PLAN_FILE, c.planned.plan, c.planned.header)
        paths = [
            write_trajectory(class_dir / "trajectories" / f"trial_{r.seed}.csv", r.trajectory) for r in c.results
        ]
        report = summarize_trials(
            c.results,
            plan_ref=str(plan_path),
            planner=c.planned.header.planner,
            experiment_class=c.planned.spec.experiment_class,
            trajectory_paths=[p.name for p in paths],
        )
        write_model(class_dir / REPORT_FILE, report)
    write_model(out / "experiment.json", run.table)
    (out / "experiment.txt").write_text(run.table.as_text() + "\n")
    print(run.table.as_text())
    return 0


# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", type=Path, default=None, help="output directory")
    common.add_argument("--log-level", default=None, help="logging level (default $TETHERPLAN_LOG_LEVEL or WARNING)")
    common.add_argument("--seed", type=int, default=None, help="roadmap seed (plan, stats) or first trial seed")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--resolution", type=float, default=None, help="re-grid the map at this resolution (m)")
    grid.add_argument("--inflate", type=float, default=None, help="inflation radius (m), replaces the robot radius")

    trials = argparse.ArgumentParser(add_help=False)
    trials.add_argument("--trials", type=int, default=None, help="number of seeded trials")
    trials.add_argument("--r-acc", type=float, default=None, help="waypoint acceptance radius (m)")
    trials.add_argument("--sigma-cp", type=float, default=None, help="contact placement noise (m)")
    trials.add_argument("--sigma-drift", type=float, default=None, help="contact drift per step (m)")
    trials.add_argument("--sigma-loc", type=float, default=None, help="localization drift per step (m)")
    trials.add_argument("--workers", type=int, default=1, help="trials simulated concurrently")

    parser = argparse.ArgumentParser(prog="python -m tetherplan", description="Tether-aware 3-D motion planning.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common, grid], help="plan a scenario and write the plan file")
    p.add_argument("scenario", help="scenario file or bundled scenario name")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("simulate", parents=[common, trials], help="fly a plan file in seeded trials")
    p.add_argument("plan", type=Path)
    p.add_argument("--map", type=Path, default=None, help="map file (default: the one named in the plan)")
    p.add_argument("--speed", type=float, default=None, help="speed (m/s)")
    p.add_argument("--rate", type=float, default=None, help="sample rate (Hz)")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("stats", parents=[common, grid], help="reachable space of both planners")
    p.add_argument("scenario", nargs="?", default=None)
    p.add_argument("--map", type=Path, default=None)
    p.add_argument("--reel", type=_point, default=None, help="reel position x,y,z")
    p.add_argument("--no-coverage", action="store_true", help="skip contact-planner coverage")
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("render", parents=[common], help="draw a plan and trajectories as SVG")
    p.add_argument("plan", type=Path)
    p.add_argument("trajectories", nargs="*", type=Path)
    p.add_argument("--map", type=Path, default=None)
    p.set_defaults(handler=cmd_render)

    p = sub.add_parser("experiment", parents=[common, grid, trials], help="run the experiment classes")
    p.add_argument("scenarios", nargs="*", help=f"scenarios (default: {', '.join(config.EXPERIMENT_SCENARIOS)})")
    p.set_defaults(handler=cmd_experiment)
    return parser


def _report_error(error: TetherPlanError, out: Path) -> None:
    print(json.dumps(error.to_error_dict()), file=sys.stderr)
    try:
        write_error(out / ERROR_FILE, error)
    except OSError:
        logger.debug("Could not write %s", out / ERROR_FILE)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=config.get_log_level(args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    out = config.get_output_dir(args.output)
    try:
        return args.handler(args, out)
    except TetherPlanError as e:
        _report_error(e, out)
        return e.exit_code
    except Exception as e:
        logger.exception("Unexpected error in '%s'", args.command)
        _report_error(TetherPlanError(f"{type(e).__name__}: {e}"), out)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
