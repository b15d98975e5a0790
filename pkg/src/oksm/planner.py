"""End-effector waypoint generation for manipulating one joint at a time.

Revolute joints are traced as arcs around the axis in fixed angular
increments (default 1 degree); prismatic joints as straight lines in fixed
length increments (default 1 cm). The final waypoint always lands exactly on
the commanded state change, even when it is not a multiple of the step.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import JointNode, JointType, Oksm
from .errors import ArityMismatch, GraspOnAxis, IoError, ZeroDelta
from .geometry import (
    RigidTransform,
    point_line_distance,
    rotation_about_axis,
)

DEFAULT_REVOLUTE_STEP = np.deg2rad(1.0)   # radians per waypoint
DEFAULT_PRISMATIC_STEP = 0.01             # meters per waypoint
MIN_LEVER_ARM = 0.01                      # meters; below this the arc degenerates


@dataclass(frozen=True)
class WaypointPlan:
    joint_index: int
    joint_type: JointType
    waypoints: tuple          # RigidTransform poses, excluding the start pose
    step: float               # radians (revolute) or meters (prismatic)
    direction_label: str      # "open" | "close"

    def positions(self) -> np.ndarray:
        return np.array([w.translation for w in self.waypoints])


def _step_values(delta: float, step: float):
    """Signed step targets covering delta, final partial step included."""
    total = abs(delta)
    count = int(np.floor(total / step + 1e-9))
    values = [np.sign(delta) * step * k for k in range(1, count + 1)]
    if total - count * step > 1e-9 * max(1.0, total):
        values.append(delta)
    return values


def plan_joint(
    node: JointNode,
    grasp,
    delta: float,
    step: float = None,
    joint_index: int = 0,
    tool_orientation=None,
) -> WaypointPlan:
    """Waypoints moving a grasp point through a state change of ``delta``.

    Revolute: the grasp is swept around the joint axis; each waypoint's
    orientation is the initial tool orientation pre-multiplied by the
    accumulated axis rotation, so a rigid tool keeps its hold on the handle.
    Prismatic: the grasp slides along the joint direction at constant
    orientation.
    """
    if delta == 0.0:
        raise ZeroDelta(f"joint {joint_index}: zero state change requested")
    grasp = np.asarray(grasp, dtype=float).reshape(3)
    R0 = np.eye(3) if tool_orientation is None else np.asarray(tool_orientation, float)

    if node.joint_type is JointType.REVOLUTE:
        step = DEFAULT_REVOLUTE_STEP if step is None else float(step)
        lever = float(point_line_distance(grasp, node.position, node.direction)[0])
        if lever < MIN_LEVER_ARM:
            raise GraspOnAxis(
                f"joint {joint_index}: grasp is {lever * 1e3:.1f} mm from the axis"
            )
        waypoints = []
        for angle in _step_values(delta, step):
            R = rotation_about_axis(node.direction, angle)
            pos = R @ (grasp - node.position) + node.position
            waypoints.append(RigidTransform(R @ R0, pos))
    else:
        step = DEFAULT_PRISMATIC_STEP if step is None else float(step)
        waypoints = [
            RigidTransform(R0, grasp + s * node.direction)
            for s in _step_values(delta, step)
        ]
    return WaypointPlan(
        joint_index=joint_index,
        joint_type=node.joint_type,
        waypoints=tuple(waypoints),
        step=step,
        direction_label="open" if delta > 0 else "close",
    )


def plan_sequence(model: Oksm, grasps, deltas, steps=None):
    """One plan per node, emitted in the chain's manipulation order."""
    grasps = list(grasps)
    deltas = list(deltas)
    if len(grasps) != len(model.nodes) or len(deltas) != len(model.nodes):
        raise ArityMismatch(
            f"{len(model.nodes)} nodes but {len(grasps)} grasps / {len(deltas)} deltas"
        )
    if steps is None:
        steps = [None] * len(model.nodes)
    plans = []
    for i, node in enumerate(model.nodes):
        plans.append(
            plan_joint(node, grasps[i], deltas[i], step=steps[i], joint_index=i)
        )
    return plans


def format_plan(plan: WaypointPlan) -> str:
    """One waypoint per line: {"position": [...], "rotation": [9 row-major]}."""
    lines = []
    for w in plan.waypoints:
        pos = ", ".join(format(x, ".17g") for x in w.translation)
        rot = ", ".join(format(x, ".17g") for x in w.rotation.reshape(-1))
        lines.append(f'{{"position": [{pos}], "rotation": [{rot}]}}')
    return "\n".join(lines) + "\n"


def save_plan(plan: WaypointPlan, path) -> None:
    try:
        Path(path).write_text(format_plan(plan), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write plan {path}: {e}") from e


__all__ = [
    "DEFAULT_PRISMATIC_STEP",
    "DEFAULT_REVOLUTE_STEP",
    "MIN_LEVER_ARM",
    "WaypointPlan",
    "format_plan",
    "plan_joint",
    "plan_sequence",
    "save_plan",
]
