"""Error metrics between predicted and ground-truth kinematic chains.

Direction error is the angle between undirected axes (degrees, [0, 90]).
Position error is the minimum distance between the two axis lines
(centimeters); for prismatic joints, whose line is translation-invariant,
it is the reference-point distance projected orthogonally to the
ground-truth direction. Dataset evaluation aggregates per category and per
axis with normal-approximation 95% confidence intervals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import JointType, Oksm, load_oksm
from .errors import MissingPrediction, NonUnitInput, ValidationError
from .geometry import UNIT_TOL
from .synthgen import DatasetManifest, read_sample_ground_truth


def axis_direction_error(d_est, d_gt) -> float:
    """Angle between undirected unit axes, in degrees.

    atan2 of (cross norm, |dot|) is exact at zero separation and well
    conditioned everywhere, unlike arccos near parallel axes.
    """
    a = np.asarray(d_est, dtype=float)
    b = np.asarray(d_gt, dtype=float)
    for v in (a, b):
        if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
            raise NonUnitInput(f"direction has norm {np.linalg.norm(v):.8f}")
    return math.degrees(
        math.atan2(float(np.linalg.norm(np.cross(a, b))), abs(float(np.dot(a, b))))
    )


def _perp(v, d):
    return v - float(np.dot(v, d)) * d


def axis_position_error(d_est, p_est, d_gt, p_gt, prismatic: bool = False) -> float:
    """Distance between the two axes, in centimeters. See module docstring."""
    d1 = np.asarray(d_est, dtype=float)
    p1 = np.asarray(p_est, dtype=float)
    d2 = np.asarray(d_gt, dtype=float)
    p2 = np.asarray(p_gt, dtype=float)
    w = p1 - p2
    if prismatic:
        dist = float(np.linalg.norm(_perp(w, d2 / np.linalg.norm(d2))))
        return 100.0 * dist
    cross = np.cross(d1, d2)
    denom = np.linalg.norm(cross)
    if denom < 1e-9:
        dist = float(np.linalg.norm(_perp(w, d2 / np.linalg.norm(d2))))
    else:
        dist = abs(float(np.dot(w, cross))) / denom
    return 100.0 * dist


def match_nodes(est: Oksm, gt: Oksm):
    """Greedy pairing: each estimated node takes the nearest unused
    ground-truth axis by direction error. Returns (est index, gt index)."""
    free = list(range(len(gt.nodes)))
    pairs = []
    for i, node in enumerate(est.nodes):
        if not free:
            break
        errs = [axis_direction_error(node.direction, gt.nodes[j].direction) for j in free]
        j = free.pop(int(np.argmin(errs)))
        pairs.append((i, j))
    return pairs


def dof_accuracy(est: Oksm, gt: Oksm) -> int:
    return int(len(est.nodes) == len(gt.nodes))


def order_accuracy(est: Oksm, gt: Oksm) -> int:
    """1 iff the node counts agree and greedy matching is the identity."""
    if len(est.nodes) != len(gt.nodes):
        return 0
    return int(all(i == j for i, j in match_nodes(est, gt)))


def state_error(est: Oksm, gt: Oksm) -> Optional[float]:
    """Mean |final state| difference over matched nodes; None on DoF mismatch."""
    if len(est.nodes) != len(gt.nodes):
        return None
    pairs = match_nodes(est, gt)
    return float(
        np.mean(
            [abs(est.nodes[i].final_state - gt.nodes[j].final_state) for i, j in pairs]
        )
    )


@dataclass(frozen=True)
class RawNode:
    """Node stand-in for score computations on unvalidated predictions
    (e.g. direction vectors that are not unit length)."""

    joint_type: JointType
    direction: np.ndarray
    position: np.ndarray
    states: tuple


def composite_score(est, gt) -> float:
    """Unit-weight sum of six penalty terms; zero iff the chains agree.

    Per matched node: 1 - |cos| of the directions, squared axis distance in
    meters, mean squared per-frame state difference, and |norm(direction)-1|.
    Plus two indicators: manipulation-order mismatch and DoF mismatch.
    """
    est_nodes = list(est.nodes) if isinstance(est, Oksm) else list(est)
    gt_nodes = list(gt.nodes) if isinstance(gt, Oksm) else list(gt)
    n = min(len(est_nodes), len(gt_nodes))
    if n == 0:
        raise ValidationError("composite_score needs at least one node per side")

    dir_terms, pos_terms, state_terms, norm_terms = [], [], [], []
    for e, g in zip(est_nodes[:n], gt_nodes[:n]):
        de = np.asarray(e.direction, dtype=float)
        dg = np.asarray(g.direction, dtype=float)
        ne = float(np.linalg.norm(de))
        cos = abs(float(np.dot(de / ne, dg / np.linalg.norm(dg))))
        dir_terms.append(1.0 - min(1.0, cos))
        dist_m = 0.01 * axis_position_error(
            de / ne, e.position, dg / np.linalg.norm(dg), g.position,
            prismatic=g.joint_type is JointType.PRISMATIC,
        )
        pos_terms.append(dist_m ** 2)
        qs_e = np.asarray(e.states, dtype=float)
        qs_g = np.asarray(g.states, dtype=float)
        if qs_e.shape == qs_g.shape:
            state_terms.append(float(np.mean((qs_e - qs_g) ** 2)))
        else:
            state_terms.append(float((qs_e[-1] - qs_g[-1]) ** 2))
        norm_terms.append(abs(ne - 1.0))

    # Greedy matching on normalized copies (predictions may be non-unit).
    dof_ok = len(est_nodes) == len(gt_nodes)
    free = list(range(len(gt_nodes)))
    ident = dof_ok
    for i, e in enumerate(est_nodes[:n]):
        de = np.asarray(e.direction, float)
        de = de / np.linalg.norm(de)
        errs = [
            axis_direction_error(de, np.asarray(gt_nodes[j].direction, float))
            for j in free
        ]
        j = free.pop(int(np.argmin(errs)))
        ident = ident and (i == j)

    return (
        float(np.mean(dir_terms))
        + float(np.mean(pos_terms))
        + (0.0 if ident else 1.0)
        + (0.0 if dof_ok else 1.0)
        + float(np.mean(state_terms))
        + float(np.mean(norm_terms))
    )


# --- dataset-level evaluation -------------------------------------------------

@dataclass(frozen=True)
class SampleRecord:
    path: str
    category: str
    direction_errors_deg: tuple      # per ground-truth axis, matched order
    position_errors_cm: tuple
    order_accuracy: int
    dof_accuracy: int
    state_error: Optional[float]


@dataclass(frozen=True)
class AxisStats:
    count: int
    mean_direction_deg: float
    ci_direction_deg: Optional[float]
    mean_position_cm: float
    ci_position_cm: Optional[float]


@dataclass(frozen=True)
class CategoryReport:
    category: str
    sample_count: int
    axes: tuple                      # AxisStats per ground-truth axis index
    order_accuracy: float
    dof_accuracy: float
    mean_state_error: Optional[float]


@dataclass(frozen=True)
class EvalReport:
    split: str
    categories: tuple
    samples: tuple

    def category(self, name: str) -> CategoryReport:
        for c in self.categories:
            if c.category == name:
                return c
        raise KeyError(name)


def _ci_halfwidth(values, method: str = "normal") -> Optional[float]:
    """95% confidence half-width; None when a spread is undefined (n < 2)."""
    if len(values) < 2:
        return None
    if method == "normal":
        return float(1.96 * np.std(values, ddof=1) / math.sqrt(len(values)))
    if method == "bootstrap":
        rng = np.random.default_rng(0)
        arr = np.asarray(values, dtype=float)
        means = rng.choice(arr, size=(2000, len(arr)), replace=True).mean(axis=1)
        lo, hi = np.percentile(means, [2.5, 97.5])
        return float((hi - lo) / 2.0)
    raise ValidationError(f"unknown CI method {method!r}")


def evaluate_sample(est: Oksm, gt: Oksm) -> dict:
    """Per-axis errors keyed by ground-truth axis index, plus accuracies."""
    pairs = match_nodes(est, gt)
    by_gt = {j: i for i, j in pairs}
    dir_errs, pos_errs = [], []
    for j, g in enumerate(gt.nodes):
        if j not in by_gt:
            dir_errs.append(None)
            pos_errs.append(None)
            continue
        e = est.nodes[by_gt[j]]
        dir_errs.append(axis_direction_error(e.direction, g.direction))
        pos_errs.append(
            axis_position_error(
                e.direction, e.position, g.direction, g.position,
                prismatic=g.joint_type is JointType.PRISMATIC,
            )
        )
    return {
        "direction_errors_deg": tuple(dir_errs),
        "position_errors_cm": tuple(pos_errs),
        "order_accuracy": order_accuracy(est, gt),
        "dof_accuracy": dof_accuracy(est, gt),
        "state_error": state_error(est, gt),
    }


def prediction_path(predictions_dir, sample_path) -> Path:
    return Path(predictions_dir) / (Path(sample_path).stem + ".json")


def evaluate_dataset(
    manifest: DatasetManifest,
    data_root,
    predictions_dir,
    split: str = "test",
    ci_method: str = "normal",
) -> EvalReport:
    """Per-category, per-axis aggregation over one manifest split.

    Every selected sample must have a prediction document named
    ``<sample stem>.json`` under predictions_dir. ``ci_method`` selects the
    95% interval estimator: the normal approximation (default) or a seeded
    percentile bootstrap.
    """
    records = []
    entries = [e for e in manifest.samples if split in (None, "all", e.split)]
    entries.sort(key=lambda e: e.path)
    for entry in entries:
        pred_file = prediction_path(predictions_dir, entry.path)
        if not pred_file.exists():
            raise MissingPrediction("no prediction for sample", str(entry.path))
        est = load_oksm(pred_file.read_text(encoding="utf-8"))
        gt = read_sample_ground_truth(Path(data_root) / entry.path)
        r = evaluate_sample(est, gt)
        records.append(
            SampleRecord(
                path=entry.path,
                category=entry.category,
                direction_errors_deg=r["direction_errors_deg"],
                position_errors_cm=r["position_errors_cm"],
                order_accuracy=r["order_accuracy"],
                dof_accuracy=r["dof_accuracy"],
                state_error=r["state_error"],
            )
        )

    categories = sorted({r.category for r in records})
    cat_reports = []
    for cat in categories:
        rs = [r for r in records if r.category == cat]
        max_axes = max(len(r.direction_errors_deg) for r in rs)
        axes = []
        for k in range(max_axes):
            dirs = [
                r.direction_errors_deg[k]
                for r in rs
                if k < len(r.direction_errors_deg)
                and r.direction_errors_deg[k] is not None
            ]
            poss = [
                r.position_errors_cm[k]
                for r in rs
                if k < len(r.position_errors_cm) and r.position_errors_cm[k] is not None
            ]
            axes.append(
                AxisStats(
                    count=len(dirs),
                    mean_direction_deg=float(np.mean(dirs)) if dirs else float("nan"),
                    ci_direction_deg=_ci_halfwidth(dirs, ci_method),
                    mean_position_cm=float(np.mean(poss)) if poss else float("nan"),
                    ci_position_cm=_ci_halfwidth(poss, ci_method),
                )
            )
        states = [r.state_error for r in rs if r.state_error is not None]
        cat_reports.append(
            CategoryReport(
                category=cat,
                sample_count=len(rs),
                axes=tuple(axes),
                order_accuracy=float(np.mean([r.order_accuracy for r in rs])),
                dof_accuracy=float(np.mean([r.dof_accuracy for r in rs])),
                mean_state_error=float(np.mean(states)) if states else None,
            )
        )
    return EvalReport(split=split, categories=tuple(cat_reports), samples=tuple(records))


def format_report_table(report: EvalReport) -> str:
    """Aligned text table: per-category direction and position error per axis."""

    def cell(mean, ci):
        if mean is None or math.isnan(mean):
            return "-"
        if ci is None:
            return f"{mean:.3f}"
        return f"{mean:.3f} ± {ci:.3f}"

    max_axes = max((len(c.axes) for c in report.categories), default=1)
    headers = (
        ["Object", "n"]
        + [f"Dir Axis {k + 1} (deg)" for k in range(max_axes)]
        + [f"Pos Axis {k + 1} (cm)" for k in range(max_axes)]
        + ["Order acc", "DoF acc", "State err"]
    )
    rows = []
    for c in report.categories:
        row = [c.category, str(c.sample_count)]
        for k in range(max_axes):
            if k < len(c.axes) and c.axes[k].count > 0:
                row.append(cell(c.axes[k].mean_direction_deg, c.axes[k].ci_direction_deg))
            else:
                row.append("-")
        for k in range(max_axes):
            if k < len(c.axes) and c.axes[k].count > 0:
                row.append(cell(c.axes[k].mean_position_cm, c.axes[k].ci_position_cm))
            else:
                row.append("-")
        row.append(f"{c.order_accuracy:.3f}")
        row.append(f"{c.dof_accuracy:.3f}")
        row.append("-" if c.mean_state_error is None else f"{c.mean_state_error:.6f}")
        rows.append(row)
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in rows:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def report_to_json(report: EvalReport) -> str:
    doc = {
        "version": 1,
        "split": report.split,
        "categories": [
            {
                "category": c.category,
                "sample_count": c.sample_count,
                "order_accuracy": c.order_accuracy,
                "dof_accuracy": c.dof_accuracy,
                "mean_state_error": c.mean_state_error,
                "axes": [
                    {
                        "count": a.count,
                        "mean_direction_deg": a.mean_direction_deg,
                        "ci_direction_deg": a.ci_direction_deg,
                        "mean_position_cm": a.mean_position_cm,
                        "ci_position_cm": a.ci_position_cm,
                    }
                    for a in c.axes
                ],
            }
            for c in report.categories
        ],
        "samples": [
            {
                "path": s.path,
                "category": s.category,
                "direction_errors_deg": list(s.direction_errors_deg),
                "position_errors_cm": list(s.position_errors_cm),
                "order_accuracy": s.order_accuracy,
                "dof_accuracy": s.dof_accuracy,
                "state_error": s.state_error,
            }
            for s in report.samples
        ],
    }
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


__all__ = [
    "AxisStats",
    "CategoryReport",
    "EvalReport",
    "RawNode",
    "SampleRecord",
    "axis_direction_error",
    "axis_position_error",
    "composite_score",
    "dof_accuracy",
    "evaluate_dataset",
    "evaluate_sample",
    "format_report_table",
    "match_nodes",
    "order_accuracy",
    "prediction_path",
    "state_error",
    "report_to_json",
]
