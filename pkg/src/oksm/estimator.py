"""Geometric recovery of a kinematic sequence from a labeled demonstration.

The pipeline is deterministic: segment points into rigid groups, register
each group across consecutive frames (correspondences are known, so Kabsch
suffices), decompose each step into screw parameters, classify the joint,
and fit one axis per moving link. Links are ordered by motion onset, which
is the demonstrated manipulation order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .core import JointNode, JointType, Oksm
from .errors import AmbiguousJoint, NoMotionDetected, NullMotion, ValidationError
from .geometry import (
    MIN_ROTATION,
    canonical_direction,
    kabsch_fit,
    point_line_distance,
    screw_from_transform,
    unit,
)
from .synthgen import DemoSequence


@dataclass(frozen=True)
class EstimatorConfig:
    """Decision thresholds, all ~2.5x the default sensor noise floor."""

    tau_move: float = 0.005                      # meters of total path length
    epsilon_angle: float = np.deg2rad(0.5)       # significant rotation per step
    epsilon_slide: float = 0.002                 # significant translation per step
    cluster_threshold: float = 0.2               # cosine distance between trajectories
    angle_floor: float = np.deg2rad(3.0)         # revolute decision floor
    slide_floor: float = 0.005                   # prismatic decision floor


DEFAULT_CONFIG = EstimatorConfig()


@dataclass(frozen=True)
class Segmentation:
    base: np.ndarray      # corr_ids of static points
    groups: tuple         # ((link_id, corr_ids), ...) sorted by link_id


@dataclass(frozen=True)
class LinkTrack:
    """Per-transition rigid motion of one point group."""

    link_id: int
    transforms: tuple                 # T-1 RigidTransform
    screws: tuple                     # T-1 Optional[ScrewParams]; None = static pair
    onset_frame: Optional[int]        # first significant transition, or None
    points0: np.ndarray = field(repr=False)   # group's first-frame points


def _rows_for(seq: DemoSequence, corr_ids: np.ndarray) -> np.ndarray:
    """Row indices of the given corr_ids, ordered by corr_id.

    The canonical ordering makes every downstream reduction independent of
    the point order inside the frames.
    """
    order = np.argsort(seq.corr_ids, kind="stable")
    sorted_ids = seq.corr_ids[order]
    pos = np.searchsorted(sorted_ids, corr_ids)
    if not np.array_equal(sorted_ids[pos], corr_ids):
        raise ValidationError("corr_ids not present in sequence")
    rows = order[pos]
    return rows[np.argsort(seq.corr_ids[rows], kind="stable")]


def segment_links(
    seq: DemoSequence, mode: str = "labeled", config: EstimatorConfig = DEFAULT_CONFIG
) -> Segmentation:
    """Partition corr_ids into a static base group and per-link groups.

    ``labeled`` trusts the per-point labels. ``motion`` thresholds each
    point's total path length at tau_move, then splits the movers by
    agglomerative clustering (average linkage) on the cosine distance
    between stacked per-transition displacement vectors.
    """
    if mode == "labeled":
        link_ids = sorted(int(v) for v in np.unique(seq.labels) if v != 0)
        base = np.sort(seq.corr_ids[seq.labels == 0])
        groups = tuple(
            (lid, np.sort(seq.corr_ids[seq.labels == lid])) for lid in link_ids
        )
        if not groups:
            raise NoMotionDetected("sequence has no labeled moving link")
        return Segmentation(base=base, groups=groups)
    if mode != "motion":
        raise ValidationError(f"mode must be 'labeled' or 'motion', got {mode!r}")

    diffs = np.diff(seq.frames, axis=0)                    # (T-1, N, 3)
    path = np.linalg.norm(diffs, axis=2).sum(axis=0)       # (N,)
    movers = path > config.tau_move
    if not movers.any():
        raise NoMotionDetected(
            f"no point moved more than {config.tau_move * 1e3:.1f} mm"
        )
    base = np.sort(seq.corr_ids[~movers])
    traj = diffs[:, movers, :].transpose(1, 0, 2).reshape(int(movers.sum()), -1)
    mover_ids = seq.corr_ids[movers]
    if traj.shape[0] == 1:
        flat = np.array([1])
    else:
        flat = fcluster(
            linkage(traj, method="average", metric="cosine"),
            t=config.cluster_threshold,
            criterion="distance",
        )
    clusters = [np.sort(mover_ids[flat == c]) for c in np.unique(flat)]
    clusters.sort(key=lambda ids: int(ids[0]))
    groups = tuple((i + 1, ids) for i, ids in enumerate(clusters))
    return Segmentation(base=base, groups=groups)


def track_link(
    seq: DemoSequence,
    group: np.ndarray,
    link_id: int = 0,
    config: EstimatorConfig = DEFAULT_CONFIG,
) -> LinkTrack:
    """Rigid transform + screw decomposition of one group per frame pair."""
    rows = _rows_for(seq, np.asarray(group))
    transforms = []
    screws = []
    onset = None
    for t in range(seq.num_frames - 1):
        tf = kabsch_fit(seq.frames[t][rows], seq.frames[t + 1][rows])
        transforms.append(tf)
        try:
            s = screw_from_transform(tf)
        except NullMotion:
            s = None
        screws.append(s)
        if (
            onset is None
            and s is not None
            and (s.angle > config.epsilon_angle or abs(s.slide) > config.epsilon_slide)
        ):
            onset = t
    return LinkTrack(
        link_id=link_id,
        transforms=tuple(transforms),
        screws=tuple(screws),
        onset_frame=onset,
        points0=seq.frames[0][rows],
    )


def _significant(track: LinkTrack, config: EstimatorConfig):
    return [
        s
        for s in track.screws
        if s is not None
        and (s.angle > config.epsilon_angle or abs(s.slide) > config.epsilon_slide)
    ]


def classify_joint(
    track: LinkTrack, config: EstimatorConfig = DEFAULT_CONFIG
) -> JointType:
    """Revolute vs prismatic from accumulated rotation vs translation.

    A rotation of theta seen at lever arm r displaces points by ~theta * r;
    comparing that against the accumulated slide picks the dominant motion.
    """
    moving = _significant(track, config)
    total_angle = sum(s.angle for s in moving)
    total_slide = sum(abs(s.slide) for s in moving)
    if total_angle <= config.angle_floor and total_slide <= config.slide_floor:
        raise AmbiguousJoint(
            f"accumulated angle {np.rad2deg(total_angle):.2f} deg and slide "
            f"{total_slide * 1e3:.2f} mm are both below the decision floor",
            link_id=track.link_id,
        )
    if total_angle > config.angle_floor:
        levers = [
            point_line_distance(track.points0, s.point, s.direction).mean()
            for s in moving
            if s.angle > config.epsilon_angle
        ]
        # No single step rotated significantly: the accumulated angle is
        # slide-borne jitter, not a hinge.
        if levers and total_angle * float(np.mean(levers)) >= total_slide:
            return JointType.REVOLUTE
    return JointType.PRISMATIC


def fit_joint(
    track: LinkTrack,
    joint_type: JointType,
    config: EstimatorConfig = DEFAULT_CONFIG,
):
    """Axis direction, axis position, and per-frame states for one link.

    Revolute: the direction is the per-step rotation axes averaged with
    angle weights (signs aligned to the first step), the position is the
    least-squares intersection of the step axes reduced to its minimum-norm
    point. Prismatic: the direction is the step translations averaged with
    length weights and the position is the group's rest centroid. States
    accumulate signed per-step motion measured against the canonical
    direction.
    """
    if joint_type is JointType.REVOLUTE:
        rotating = [
            s for s in _significant(track, config) if s.angle > config.epsilon_angle
        ]
        d_first = rotating[0].direction
        weighted = np.zeros(3)
        A = np.zeros((3, 3))
        b = np.zeros(3)
        for s in rotating:
            d_k = s.direction * (1.0 if float(np.dot(s.direction, d_first)) >= 0 else -1.0)
            weighted += s.angle * d_k
            P = np.eye(3) - np.outer(s.direction, s.direction)
            A += P
            b += P @ s.point
        direction, _ = canonical_direction(unit(weighted))
        # Nearly parallel axes leave the on-axis coordinate free; the ridge
        # term pulls the solve to the minimum-norm point of the common line.
        p = np.linalg.solve(A + 1e-12 * np.eye(3), b)
        position = p - float(np.dot(p, direction)) * direction
        steps = [
            0.0 if s is None or s.angle <= MIN_ROTATION
            else s.angle * float(np.sign(np.dot(direction, s.direction)))
            for s in track.screws
        ]
    else:
        moving = [
            tf.translation
            for tf, s in zip(track.transforms, track.screws)
            if s is not None and np.linalg.norm(tf.translation) > config.epsilon_slide
        ]
        if not moving:
            moving = [
                tf.translation
                for tf, s in zip(track.transforms, track.screws)
                if s is not None
            ]
        direction, _ = canonical_direction(unit(np.sum(moving, axis=0)))
        position = track.points0.mean(axis=0)
        steps = [
            0.0 if s is None else float(np.dot(tf.translation, direction))
            for tf, s in zip(track.transforms, track.screws)
        ]
    states = np.concatenate([[0.0], np.cumsum(steps)])
    return direction, position, tuple(float(q) for q in states)


def _onset_magnitude(seq: DemoSequence, group: np.ndarray, onset: int) -> float:
    rows = _rows_for(seq, np.asarray(group))
    step = seq.frames[onset + 1][rows] - seq.frames[onset][rows]
    return float(np.linalg.norm(step, axis=1).mean())


def estimate_oksm(
    seq: DemoSequence, mode: str = "labeled", config: EstimatorConfig = DEFAULT_CONFIG
) -> Oksm:
    """Full pipeline: one JointNode per moving link, ordered by motion onset."""
    segmentation = segment_links(seq, mode=mode, config=config)
    fitted = []
    for link_id, ids in segmentation.groups:
        track = track_link(seq, ids, link_id=link_id, config=config)
        if track.onset_frame is None:
            continue
        joint_type = classify_joint(track, config=config)
        direction, position, states = fit_joint(track, joint_type, config=config)
        magnitude = _onset_magnitude(seq, ids, track.onset_frame)
        node = JointNode(
            joint_type=joint_type,
            direction=direction,
            position=position,
            states=states,
        )
        fitted.append((track.onset_frame, -magnitude, link_id, node))
    if not fitted:
        raise NoMotionDetected("no link shows significant motion")
    fitted.sort(key=lambda item: item[:3])
    return Oksm([item[3] for item in fitted])


__all__ = [
    "DEFAULT_CONFIG",
    "EstimatorConfig",
    "LinkTrack",
    "Segmentation",
    "classify_joint",
    "estimate_oksm",
    "fit_joint",
    "segment_links",
    "track_link",
]
