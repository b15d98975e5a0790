"""Kinematic-sequence model: joint nodes, chains, and their document format.

A kinematic sequence machine is an ordered chain of one-DoF joints; the list
order is the manipulation order. Serialization is canonical: fixed key order,
numbers at 17 significant digits, so save -> load reproduces values exactly
and equal models serialize to equal bytes.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .geometry import RigidTransform, UNIT_TOL, canonical_direction, _frozen

FORMAT_VERSION = 1


class JointType(enum.Enum):
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"


@dataclass(frozen=True)
class JointNode:
    """One joint of the chain.

    ``states`` holds the joint state at every observed frame (radians for
    revolute, meters for prismatic), starting at exactly 0. ``direction`` is
    stored canonically: its first component with magnitude above 1e-9 is
    positive, which resolves the +/-d axis ambiguity for serialization and
    equality testing. ``contact_pose`` is a single optional pose; in general
    a joint admits a whole set of valid contact poses, but nothing here
    operates on the set structure, so one representative suffices.
    """

    joint_type: JointType
    direction: np.ndarray
    position: np.ndarray
    states: tuple
    contact_pose: Optional[RigidTransform] = None

    def __post_init__(self):
        if not isinstance(self.joint_type, JointType):
            raise ValidationError(f"bad joint type: {self.joint_type!r}")
        d = np.asarray(self.direction, dtype=float).reshape(-1)
        p = np.asarray(self.position, dtype=float).reshape(-1)
        if d.shape != (3,) or p.shape != (3,):
            raise ValidationError("direction and position must be 3-vectors")
        if not np.isfinite(d).all() or not np.isfinite(p).all():
            raise ValidationError("direction and position must be finite")
        if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
            raise ValidationError("joint direction must be unit length within 1e-6")
        canon, sign = canonical_direction(d)
        if sign != 1.0:
            raise ValidationError(
                "joint direction is not canonical (first significant component negative)"
            )
        states = tuple(float(s) for s in self.states)
        if len(states) < 1:
            raise ValidationError("states must contain at least the initial 0")
        if states[0] != 0.0:
            raise ValidationError("states[0] must be exactly 0")
        if not all(math.isfinite(s) for s in states):
            raise ValidationError("states must be finite")
        if self.contact_pose is not None and not isinstance(
            self.contact_pose, RigidTransform
        ):
            raise ValidationError("contact_pose must be a RigidTransform or None")
        object.__setattr__(self, "direction", _frozen(d))
        object.__setattr__(self, "position", _frozen(p))
        object.__setattr__(self, "states", states)

    @property
    def final_state(self) -> float:
        return self.states[-1]

    def __eq__(self, other):
        if not isinstance(other, JointNode):
            return NotImplemented
        return (
            self.joint_type == other.joint_type
            and np.array_equal(self.direction, other.direction)
            and np.array_equal(self.position, other.position)
            and self.states == other.states
            and self.contact_pose == other.contact_pose
        )


@dataclass(frozen=True)
class Oksm:
    """Ordered chain of joints; index order is the manipulation order."""

    nodes: tuple

    def __init__(self, nodes: Sequence[JointNode]):
        nodes = tuple(nodes)
        if len(nodes) < 1:
            raise ValidationError("a kinematic sequence needs at least one node")
        if len({id(n) for n in nodes}) != len(nodes):
            raise ValidationError("each node may appear only once in the chain")
        for n in nodes:
            if not isinstance(n, JointNode):
                raise ValidationError(f"nodes must be JointNode, got {type(n)!r}")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def dof(self) -> int:
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, Oksm):
            return NotImplemented
        return self.nodes == other.nodes


# --- canonical document emission -------------------------------------------
#
# json.dumps offers no hook for float formatting, so the emitter below walks
# the fixed schema itself. 17 significant digits round-trip IEEE doubles.


def _fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValidationError("cannot serialize non-finite number")
    return format(x, ".17g")


def _fmt_vec(v) -> str:
    return "[" + ", ".join(_fmt(x) for x in np.asarray(v).reshape(-1)) + "]"


def _node_doc(n: JointNode) -> str:
    if n.contact_pose is None:
        pose = "null"
    else:
        pose = (
            '{"rotation": '
            + _fmt_vec(n.contact_pose.rotation)
            + ', "translation": '
            + _fmt_vec(n.contact_pose.translation)
            + "}"
        )
    return (
        "    {"
        + f'"type": "{n.joint_type.value}", '
        + f'"direction": {_fmt_vec(n.direction)}, '
        + f'"position": {_fmt_vec(n.position)}, '
        + f'"states": {_fmt_vec(n.states)}, '
        + f'"contact_pose": {pose}'
        + "}"
    )


def save_oksm(model: Oksm) -> str:
    """Serialize to the canonical UTF-8 text document (JSON)."""
    if not isinstance(model, Oksm):
        raise ValidationError("save_oksm expects an Oksm")
    body = ",\n".join(_node_doc(n) for n in model.nodes)
    return (
        "{\n"
        f'  "version": {FORMAT_VERSION},\n'
        '  "nodes": [\n' + body + "\n  ]\n"
        "}\n"
    )


def _require(cond: bool, message: str, location: str):
    if not cond:
        raise ParseError(message, location)


def _parse_vec(obj, length: int, location: str) -> np.ndarray:
    _require(
        isinstance(obj, list) and len(obj) == length,
        f"expected array of {length} numbers",
        location,
    )
    _require(
        all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj),
        "expected numeric entries",
        location,
    )
    return np.asarray(obj, dtype=float)


def load_oksm(doc) -> Oksm:
    """Parse a document produced by save_oksm, validating all invariants."""
    if isinstance(doc, bytes):
        doc = doc.decode("utf-8")
    try:
        raw = json.loads(doc)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"line {e.lineno} column {e.colno}") from e
    _require(isinstance(raw, dict), "document must be an object", "$")
    _require(raw.get("version") == FORMAT_VERSION, "unsupported version", "$.version")
    nodes_raw = raw.get("nodes")
    _require(isinstance(nodes_raw, list), "nodes must be an array", "$.nodes")
    nodes = []
    for i, nd in enumerate(nodes_raw):
        loc = f"$.nodes[{i}]"
        _require(isinstance(nd, dict), "node must be an object", loc)
        type_name = nd.get("type")
        _require(
            type_name in ("revolute", "prismatic"),
            "type must be 'revolute' or 'prismatic'",
            loc + ".type",
        )
        direction = _parse_vec(nd.get("direction"), 3, loc + ".direction")
        position = _parse_vec(nd.get("position"), 3, loc + ".position")
        states_raw = nd.get("states")
        _require(
            isinstance(states_raw, list) and len(states_raw) >= 1,
            "states must be a non-empty array",
            loc + ".states",
        )
        states = _parse_vec(states_raw, len(states_raw), loc + ".states")
        pose_raw = nd.get("contact_pose", None)
        if pose_raw is None:
            pose = None
        else:
            _require(isinstance(pose_raw, dict), "contact_pose must be object or null",
                     loc + ".contact_pose")
            rot = _parse_vec(pose_raw.get("rotation"), 9, loc + ".contact_pose.rotation")
            tra = _parse_vec(
                pose_raw.get("translation"), 3, loc + ".contact_pose.translation"
            )
            try:
                pose = RigidTransform(rot.reshape(3, 3), tra)
            except ValidationError as e:
                raise ParseError(str(e), loc + ".contact_pose") from e
        try:
            nodes.append(
                JointNode(
                    joint_type=JointType(type_name),
                    direction=direction,
                    position=position,
                    states=tuple(states),
                    contact_pose=pose,
                )
            )
        except ValidationError as e:
            raise ParseError(str(e), loc) from e
    if len(nodes) < 1:
        raise ValidationError("a kinematic sequence needs at least one node")
    return Oksm(nodes)


__all__ = [
    "FORMAT_VERSION",
    "JointType",
    "JointNode",
    "Oksm",
    "load_oksm",
    "save_oksm",
]
