"""Command-line entry point: dataset generation, estimation, evaluation,
planning, and a self-test.

Exit codes: 0 success, 1 domain error, 2 usage error. Angles and lengths on
the command line take unit suffixes (deg/rad, m/cm/mm) and are converted
once at parse time; everything downstream is radians and meters.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import metrics, planner, synthgen
from .core import load_oksm, save_oksm
from .errors import OksmError, ValidationError
from .estimator import EstimatorConfig, estimate_oksm
from .synthgen import GenConfig, load_manifest, read_sample

_ANGLE_UNITS = {"deg": np.pi / 180.0, "rad": 1.0}
_LENGTH_UNITS = {"mm": 1e-3, "cm": 1e-2, "m": 1.0}


def parse_quantity(text: str, kind: str) -> float:
    """'90deg' -> radians, '5cm' -> meters; bare numbers are native units."""
    text = text.strip()
    units = _ANGLE_UNITS if kind == "angle" else _LENGTH_UNITS
    for suffix in sorted(units, key=len, reverse=True):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * units[suffix]
    return float(text)


def parse_state_change(text: str) -> float:
    """Delta for either joint kind; the suffix decides the interpretation."""
    text = text.strip()
    for suffix, scale in {**_ANGLE_UNITS, **_LENGTH_UNITS}.items():
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * scale
    return float(text)


def _parse_vec3(text: str) -> np.ndarray:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise ValidationError(f"expected 'x,y,z', got {text!r}")
    return np.array([float(p) for p in parts])


def _default_jobs() -> int:
    return max(1, int(os.environ.get("OKSM_JOBS", "1")))


def _echo_config(out_dir: Path, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run_config.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _cmd_gen(args) -> int:
    categories = tuple(args.categories.split(",")) if args.categories else synthgen.CATEGORIES
    holdout = tuple(h for h in args.holdout.split(",") if h) if args.holdout else ()
    config = GenConfig(
        categories=categories,
        samples_per_category=args.n,
        seed=args.seed,
        noise_sigma=parse_quantity(args.noise_sigma, "length"),
        frames=args.frames,
        points_per_link=args.points_per_link,
        train_fraction=args.train_fraction,
        holdout=holdout,
    )
    out = Path(args.out)
    _echo_config(out, {
        "subcommand": "gen",
        "categories": list(config.categories),
        "samples_per_category": config.samples_per_category,
        "seed": config.seed,
        "noise_sigma": config.noise_sigma,
        "frames": config.frames,
        "points_per_link": config.points_per_link,
        "train_fraction": config.train_fraction,
        "holdout": list(config.holdout),
    })
    manifest = synthgen.generate_dataset(config, out, jobs=args.jobs)
    print(f"wrote {len(manifest.samples)} samples to {out} "
          f"(splits: {manifest.counts})")
    return 0


def _estimate_entry(task) -> str:
    data_root, out_dir, rel_path, mode, cfg = task
    seq = read_sample(Path(data_root) / rel_path)
    est = estimate_oksm(seq, mode=mode, config=cfg)
    out_file = Path(out_dir) / (Path(rel_path).stem + ".json")
    out_file.write_text(save_oksm(est), encoding="utf-8")
    return rel_path


def _cmd_estimate(args) -> int:
    cfg = EstimatorConfig(
        tau_move=parse_quantity(args.tau_move, "length"),
        epsilon_angle=parse_quantity(args.epsilon_angle, "angle"),
        epsilon_slide=parse_quantity(args.epsilon_slide, "length"),
    )
    manifest = load_manifest(Path(args.data) / synthgen.MANIFEST_NAME)
    out = Path(args.out)
    _echo_config(out, {
        "subcommand": "estimate",
        "mode": args.mode,
        "split": args.split,
        "tau_move": cfg.tau_move,
        "epsilon_angle": cfg.epsilon_angle,
        "epsilon_slide": cfg.epsilon_slide,
    })
    entries = [
        e for e in manifest.samples if args.split in ("all", e.split)
    ]
    tasks = [(args.data, str(out), e.path, args.mode, cfg) for e in entries]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            done = list(pool.map(_estimate_entry, tasks, chunksize=1))
    else:
        done = [_estimate_entry(t) for t in tasks]
    print(f"estimated {len(done)} samples into {out}")
    return 0


def _cmd_eval(args) -> int:
    manifest = load_manifest(Path(args.data) / synthgen.MANIFEST_NAME)
    report = metrics.evaluate_dataset(manifest, args.data, args.pred,
                                      split=args.split, ci_method=args.ci)
    table = metrics.format_report_table(report)
    out = Path(args.out)
    _echo_config(out, {"subcommand": "eval", "split": args.split, "ci": args.ci})
    (out / "report.txt").write_text(table, encoding="utf-8")
    (out / "report.json").write_text(metrics.report_to_json(report), encoding="utf-8")
    sys.stdout.write(table)
    return 0


def _cmd_plan(args) -> int:
    model = load_oksm(Path(args.oksm).read_text(encoding="utf-8"))
    grasps = [_parse_vec3(g) for g in args.grasp]
    deltas = [parse_state_change(d) for d in args.delta]
    step = None if args.step is None else parse_state_change(args.step)
    out = Path(args.out)
    if args.node == "all":
        if len(grasps) != len(model.nodes) or len(deltas) != len(model.nodes):
            raise ValidationError(
                f"--node all needs one --grasp and one --delta per node "
                f"({len(model.nodes)} nodes)"
            )
        plans = planner.plan_sequence(
            model, grasps, deltas, steps=[step] * len(model.nodes)
        )
        for plan in plans:
            path = out.with_name(f"{out.stem}_node{plan.joint_index}{out.suffix}")
            planner.save_plan(plan, path)
            print(f"joint {plan.joint_index}: {len(plan.waypoints)} waypoints -> {path}")
    else:
        index = int(args.node)
        if not (len(grasps) == len(deltas) == 1):
            raise ValidationError("single-node planning takes one --grasp and one --delta")
        plan = planner.plan_joint(
            model.nodes[index], grasps[0], deltas[0], step=step, joint_index=index
        )
        planner.save_plan(plan, out)
        print(f"joint {index}: {len(plan.waypoints)} waypoints -> {out}")
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return run_selftest(seeds_per_category=args.seeds, verbose=True)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="oksm",
        description="Articulated-object demonstrations: generate, estimate, "
                    "evaluate, and plan.",
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("gen", help="generate a synthetic demonstration dataset")
    g.add_argument("--categories", default=None,
                   help="comma-separated categories (default: all)")
    g.add_argument("--n", type=int, default=10, help="samples per category")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--noise-sigma", default="2mm",
                   help="point noise std, e.g. 2mm, 0.5cm, 0 (default 2mm)")
    g.add_argument("--frames", type=int, default=synthgen.DEFAULT_FRAMES)
    g.add_argument("--points-per-link", type=int,
                   default=synthgen.DEFAULT_POINTS_PER_LINK)
    g.add_argument("--train-fraction", type=float, default=0.85)
    g.add_argument("--holdout", default="furniture",
                   help="comma-separated categories kept out of the train split")
    g.add_argument("--jobs", type=int, default=_default_jobs())
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    e = sub.add_parser("estimate", help="fit kinematic chains for every sample")
    e.add_argument("--data", required=True, help="dataset directory (with manifest)")
    e.add_argument("--out", required=True, help="predictions directory")
    e.add_argument("--mode", choices=("labeled", "motion"), default="labeled")
    e.add_argument("--split", choices=("all", "train", "test"), default="all")
    e.add_argument("--tau-move", default="5mm")
    e.add_argument("--epsilon-angle", default="0.5deg")
    e.add_argument("--epsilon-slide", default="2mm")
    e.add_argument("--jobs", type=int, default=_default_jobs())
    e.set_defaults(func=_cmd_estimate)

    v = sub.add_parser("eval", help="score predictions against ground truth")
    v.add_argument("--data", required=True)
    v.add_argument("--pred", required=True)
    v.add_argument("--out", required=True, help="report directory")
    v.add_argument("--split", choices=("all", "train", "test"), default="test")
    v.add_argument("--ci", choices=("normal", "bootstrap"), default="normal",
                   help="95%% confidence interval estimator")
    v.set_defaults(func=_cmd_eval)

    w = sub.add_parser("plan", help="emit manipulation waypoints for a chain")
    w.add_argument("--oksm", required=True, help="kinematic chain document")
    w.add_argument("--node", default="0", help="node index, or 'all'")
    w.add_argument("--grasp", action="append", required=True,
                   help="grasp point 'x,y,z' in meters (repeat for --node all)")
    w.add_argument("--delta", action="append", required=True,
                   help="state change, e.g. 90deg or 0.2m")
    w.add_argument("--step", default=None,
                   help="step size (default 1deg revolute, 1cm prismatic)")
    w.add_argument("--out", required=True)
    w.set_defaults(func=_cmd_plan)

    s = sub.add_parser("selftest", help="run the noiseless recovery self-check")
    s.add_argument("--seeds", type=int, default=3, help="seeds per category")
    s.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OksmError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
