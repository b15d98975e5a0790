"""End-to-end self-check: noiseless demonstrations must be recovered exactly.

Shared by the CLI ``selftest`` subcommand and the acceptance test suite.
"""

from __future__ import annotations

import time

import numpy as np

from . import metrics
from .core import JointType, Oksm, load_oksm, save_oksm
from .estimator import estimate_oksm
from .geometry import (
    ScrewParams,
    apply_transform,
    kabsch_fit,
    screw_from_transform,
    transform_from_screw,
)
from .synthgen import CATEGORIES, GenConfig, render_from_entry


def demo_errors(
    category: str,
    seed: int,
    noise_sigma: float = 0.0,
    frames: int = 12,
    points_per_link: int = 512,
    mode: str = "labeled",
) -> dict:
    """Render one demonstration, estimate it, and measure every error class."""
    config = GenConfig(
        noise_sigma=noise_sigma, frames=frames, points_per_link=points_per_link
    )
    seq = render_from_entry(config, category, seed)
    est = estimate_oksm(seq, mode=mode)
    gt = seq.ground_truth
    pairs = metrics.match_nodes(est, gt)
    dof_ok = len(est.nodes) == len(gt.nodes)
    dirs, poss, states = [], [], []
    types_ok = dof_ok
    for i, j in pairs:
        e, g = est.nodes[i], gt.nodes[j]
        types_ok = types_ok and e.joint_type == g.joint_type
        dirs.append(metrics.axis_direction_error(e.direction, g.direction))
        poss.append(
            metrics.axis_position_error(
                e.direction, e.position, g.direction, g.position,
                prismatic=g.joint_type is JointType.PRISMATIC,
            )
        )
        states.append(abs(e.final_state - g.final_state))
    return {
        "dof_ok": dof_ok,
        "order_ok": dof_ok and all(i == j for i, j in pairs),
        "types_ok": types_ok,
        "max_dir_deg": max(dirs),
        "max_pos_cm": max(poss),
        "max_state_err": max(states),
    }


def exactness_sweep(
    categories=CATEGORIES, seeds_per_category: int = 3, **kwargs
) -> dict:
    """Worst-case errors of noiseless recovery across categories and seeds."""
    worst = {"max_dir_deg": 0.0, "max_pos_cm": 0.0, "max_state_err": 0.0}
    all_ok = True
    n = 0
    for category in categories:
        for seed in range(seeds_per_category):
            r = demo_errors(category, seed, **kwargs)
            all_ok = all_ok and r["dof_ok"] and r["order_ok"] and r["types_ok"]
            for key in worst:
                worst[key] = max(worst[key], r[key])
            n += 1
    worst["discrete_ok"] = all_ok
    worst["sequences"] = n
    return worst


def _check_screw_round_trip(count: int = 200, seed: int = 7) -> tuple:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        p = rng.normal(size=3)
        p -= np.dot(p, d) * d
        s = ScrewParams(d, p, rng.uniform(1e-3, np.pi - 1e-3), rng.uniform(-0.5, 0.5))
        r = screw_from_transform(transform_from_screw(s))
        worst = max(
            worst,
            float(np.max(np.abs(r.direction - s.direction))),
            float(np.max(np.abs(r.point - s.point))),
            abs(r.angle - s.angle),
            abs(r.slide - s.slide),
        )
    return worst < 1e-9, f"worst field error {worst:.3e}"


def _check_kabsch(seed: int = 11) -> tuple:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        src = rng.normal(size=(40, 3))
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        p = np.zeros(3)
        true = transform_from_screw(
            ScrewParams(d, p, rng.uniform(0.1, 3.0), rng.uniform(-0.3, 0.3))
        )
        fit = kabsch_fit(src, apply_transform(true, src))
        worst = max(
            worst,
            float(np.max(np.abs(fit.rotation - true.rotation))),
            float(np.max(np.abs(fit.translation - true.translation))),
        )
    dets_ok = True
    for _ in range(20):
        src = rng.normal(size=(30, 3))
        src[:, 2] *= 1e-6                      # near-planar
        dst = src.copy()
        dst[:, 2] = -dst[:, 2]                 # a reflection, not a rotation
        dets_ok = dets_ok and np.linalg.det(kabsch_fit(src, dst).rotation) > 0.0
    return worst < 1e-9 and dets_ok, f"worst recovery error {worst:.3e}"


def _check_serialization(seed: int = 13) -> tuple:
    from .core import JointNode

    rng = np.random.default_rng(seed)
    for _ in range(20):
        nodes = []
        for _ in range(rng.integers(1, 4)):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            from .geometry import canonical_direction

            d, _sign = canonical_direction(d)
            nodes.append(
                JointNode(
                    joint_type=JointType.REVOLUTE if rng.random() < 0.5 else JointType.PRISMATIC,
                    direction=d,
                    position=rng.normal(size=3),
                    states=(0.0, *rng.normal(size=5)),
                )
            )
        model = Oksm(nodes)
        if load_oksm(save_oksm(model)) != model:
            return False, "round trip mismatch"
    return True, "20 random chains round-trip exactly"


def run_selftest(seeds_per_category: int = 3, verbose: bool = True) -> int:
    checks = []
    t0 = time.time()

    ok, detail = _check_screw_round_trip()
    checks.append(("screw round trip", ok, detail))

    ok, detail = _check_kabsch()
    checks.append(("rigid registration", ok, detail))

    ok, detail = _check_serialization()
    checks.append(("document round trip", ok, detail))

    sweep = exactness_sweep(seeds_per_category=seeds_per_category)
    ok = (
        sweep["discrete_ok"]
        and sweep["max_dir_deg"] < 0.1
        and sweep["max_pos_cm"] < 0.1
        and sweep["max_state_err"] < 1e-4
    )
    checks.append((
        "noiseless recovery",
        ok,
        f"{sweep['sequences']} sequences: dir {sweep['max_dir_deg']:.2e} deg, "
        f"axis {sweep['max_pos_cm'] * 10:.2e} mm, state {sweep['max_state_err']:.2e}",
    ))

    failed = [name for name, ok, _ in checks if not ok]
    if verbose:
        for name, ok, detail in checks:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        print(f"selftest {'passed' if not failed else 'FAILED'} "
              f"in {time.time() - t0:.1f} s")
    return 0 if not failed else 1


__all__ = ["demo_errors", "exactness_sweep", "run_selftest"]
