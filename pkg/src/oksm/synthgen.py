"""Synthetic labeled point-cloud demonstrations of articulated desk-scale objects.

Objects are axis-aligned boxes: a static base plus 1-3 moving links, each
attached by a one-DoF joint. A motion script actuates the links one at a
time; rendering samples box surfaces once, moves each link rigidly per frame,
maps everything into a randomized camera frame, and embeds the ground-truth
kinematic chain. Everything is deterministic given the seeds.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .core import JointNode, JointType, Oksm, load_oksm, save_oksm
from .errors import (
    InvalidScript,
    IoError,
    ParseError,
    UnknownCategory,
    ValidationError,
)
from .geometry import RigidTransform, apply_transform, canonical_direction, joint_transform, unit

DEFAULT_FRAMES = 12
DEFAULT_POINTS_PER_LINK = 512
DEFAULT_NOISE_SIGMA = 0.002  # typical consumer depth-camera noise, meters

SAMPLE_MAGIC = "OKSMPC v1"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class LinkSpec:
    """A moving box link and the joint attaching it to the base."""

    extents: np.ndarray
    center: np.ndarray
    joint_type: JointType
    joint_direction: np.ndarray  # object frame; positive state = opening
    joint_position: np.ndarray
    motion_range: tuple

    def __post_init__(self):
        ext = np.asarray(self.extents, dtype=float)
        ctr = np.asarray(self.center, dtype=float)
        d = unit(self.joint_direction)
        p = np.asarray(self.joint_position, dtype=float)
        lo, hi = (float(x) for x in self.motion_range)
        if (ext <= 0).any():
            raise ValidationError("link extents must be positive")
        if not lo < hi:
            raise ValidationError("motion range must satisfy lo < hi")
        if self.joint_type is JointType.REVOLUTE and hi - lo > np.pi:
            raise ValidationError("revolute motion range may not exceed pi")
        object.__setattr__(self, "extents", ext)
        object.__setattr__(self, "center", ctr)
        object.__setattr__(self, "joint_direction", d)
        object.__setattr__(self, "joint_position", p)
        object.__setattr__(self, "motion_range", (lo, hi))


@dataclass(frozen=True)
class ArticulatedTemplate:
    """Base box (centered at the object-frame origin) plus 1-3 links."""

    category: str
    base_extents: np.ndarray
    links: tuple

    def __post_init__(self):
        ext = np.asarray(self.base_extents, dtype=float)
        if (ext <= 0).any():
            raise ValidationError("base extents must be positive")
        if not 1 <= len(self.links) <= 3:
            raise ValidationError("templates carry between 1 and 3 links")
        object.__setattr__(self, "base_extents", ext)
        object.__setattr__(self, "links", tuple(self.links))


@dataclass(frozen=True)
class MotionScript:
    """Sequential actuation plan over T frames.

    ``windows[k]`` is link k's (start, end) frame pair: its state ramps
    linearly from 0 at frame ``start`` to ``targets[k]`` at frame ``end``.
    Windows of distinct links may not overlap (one link moves at a time), and
    every window satisfies 1 <= start < end <= T-1, so frame 0 is always the
    rest pose. ``order`` lists link indices by ascending window start.
    """

    order: tuple
    windows: tuple
    targets: tuple
    total_frames: int

    def __post_init__(self):
        t = int(self.total_frames)
        order = tuple(int(i) for i in self.order)
        windows = tuple((int(s), int(e)) for s, e in self.windows)
        targets = tuple(float(x) for x in self.targets)
        n = len(windows)
        if len(targets) != n or len(order) != n:
            raise InvalidScript("order, windows, and targets must cover every link")
        if sorted(order) != list(range(n)):
            raise InvalidScript("order must be a permutation of link indices")
        for s, e in windows:
            if not (1 <= s < e <= t - 1):
                raise InvalidScript(
                    f"window ({s}, {e}) outside 1 <= start < end <= {t - 1}"
                )
        spans = sorted((windows[k], k) for k in order)
        for (w1, _), (w2, _) in zip(spans, spans[1:]):
            if w2[0] < w1[1]:
                raise InvalidScript(
                    f"actuation windows {w1} and {w2} overlap"
                )
        starts = [windows[k][0] for k in order]
        if starts != sorted(starts):
            raise InvalidScript("order must list links by ascending window start")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "windows", windows)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "total_frames", t)

    def state_at(self, link: int, frame: int) -> float:
        s, e = self.windows[link]
        if frame <= s:
            return 0.0
        if frame >= e:
            return self.targets[link]
        return self.targets[link] * (frame - s) / (e - s)


@dataclass(frozen=True)
class DemoSequence:
    """T frames of N labeled, corresponded points in the camera frame."""

    frames: np.ndarray       # (T, N, 3) float64, meters
    labels: np.ndarray       # (N,) uint32; 0 = base, links are 1..L
    corr_ids: np.ndarray     # (N,) uint32, stable across frames
    ground_truth: Oksm
    camera_pose: Optional[RigidTransform] = None  # object->camera; None when loaded

    def __post_init__(self):
        f = np.asarray(self.frames, dtype=float)
        lab = np.asarray(self.labels, dtype=np.uint32)
        cid = np.asarray(self.corr_ids, dtype=np.uint32)
        if f.ndim != 3 or f.shape[2] != 3:
            raise ValidationError(f"frames must be (T, N, 3), got {f.shape}")
        n = f.shape[1]
        if lab.shape != (n,) or cid.shape != (n,):
            raise ValidationError("labels and corr_ids must have one entry per point")
        if len(np.unique(cid)) != n:
            raise ValidationError("corr_ids must be unique")
        object.__setattr__(self, "frames", f)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "corr_ids", cid)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_points(self) -> int:
        return self.frames.shape[1]


# --- category templates -----------------------------------------------------

def _front_door(width, height, hinge, base_ext, z_center=0.0, thickness=0.02,
                x_center=0.0, range_hi=np.pi / 2):
    """Door panel on the front (+y) face, hinged on one edge.

    The joint direction is chosen so a positive state swings the panel
    outward (away from the base).
    """
    y = base_ext[1] / 2 + thickness / 2
    center = np.array([x_center, y, z_center])
    if hinge == "left":
        direction = np.array([0.0, 0.0, 1.0])
        position = np.array([x_center - width / 2, y, z_center])
    elif hinge == "right":
        direction = np.array([0.0, 0.0, -1.0])
        position = np.array([x_center + width / 2, y, z_center])
    elif hinge == "bottom":
        direction = np.array([-1.0, 0.0, 0.0])
        position = np.array([x_center, y, z_center - height / 2])
    else:
        raise ValueError(f"bad hinge: {hinge}")
    return LinkSpec(
        extents=np.array([width, thickness, height]),
        center=center,
        joint_type=JointType.REVOLUTE,
        joint_direction=direction,
        joint_position=position,
        motion_range=(0.0, range_hi),
    )


def _slider(extents, center, travel):
    """Drawer-style link translating out the front (+y)."""
    return LinkSpec(
        extents=np.asarray(extents, dtype=float),
        center=np.asarray(center, dtype=float),
        joint_type=JointType.PRISMATIC,
        joint_direction=np.array([0.0, 1.0, 0.0]),
        joint_position=np.asarray(center, dtype=float),
        motion_range=(0.0, float(travel)),
    )


def _lid(width, depth, hinge_y, z_top, flip, range_hi=1.9):
    """Half-lid on the top (+z) face, hinged along an x-parallel edge."""
    center_y = hinge_y + (depth / 2 if flip > 0 else -depth / 2)
    return LinkSpec(
        extents=np.array([width, depth, 0.015]),
        center=np.array([0.0, center_y, z_top]),
        joint_type=JointType.REVOLUTE,
        joint_direction=np.array([float(flip), 0.0, 0.0]),
        joint_position=np.array([0.0, hinge_y, z_top]),
        motion_range=(0.0, range_hi),
    )


def _microwave():
    base = np.array([0.50, 0.38, 0.30])
    return base, [_front_door(0.40, 0.26, "left", base, range_hi=1.92)]


def _laptop():
    base = np.array([0.34, 0.24, 0.03])
    lid = LinkSpec(
        extents=np.array([0.34, 0.23, 0.015]),
        center=np.array([0.0, 0.0, 0.03]),
        joint_type=JointType.REVOLUTE,
        joint_direction=np.array([1.0, 0.0, 0.0]),
        joint_position=np.array([0.0, -0.12, 0.015]),
        motion_range=(0.0, 1.75),
    )
    return base, [lid]


def _washing_machine():
    base = np.array([0.60, 0.60, 0.85])
    return base, [_front_door(0.45, 0.45, "left", base, thickness=0.04, range_hi=2.1)]


def _fridge():
    base = np.array([0.60, 0.55, 1.50])
    upper = _front_door(0.58, 0.70, "right", base, z_center=0.35, thickness=0.04)
    lower = _front_door(0.58, 0.35, "left", base, z_center=-0.15, thickness=0.04)
    freezer = _slider([0.54, 0.45, 0.30], [0.0, 0.05, -0.55], travel=0.32)
    return base, [upper, lower, freezer]


def _drawer():
    base = np.array([0.50, 0.45, 0.70])
    return base, [_slider([0.44, 0.40, 0.18], [0.0, 0.04, 0.10], travel=0.30)]


def _box():
    base = np.array([0.45, 0.35, 0.25])
    z_top = 0.25 / 2 + 0.0075
    return base, [
        _lid(0.44, 0.17, -0.17, z_top, flip=+1.0),
        _lid(0.44, 0.17, +0.17, z_top, flip=-1.0),
    ]


def _dishwasher():
    base = np.array([0.60, 0.60, 0.85])
    door = _front_door(0.58, 0.75, "bottom", base, z_center=-0.02, thickness=0.03,
                       range_hi=np.pi / 2)
    rack = _slider([0.50, 0.50, 0.12], [0.0, 0.0, 0.15], travel=0.40)
    return base, [door, rack]


def _furniture():
    base = np.array([0.80, 0.45, 0.90])
    door = _front_door(0.38, 0.80, "left", base, x_center=-0.20, thickness=0.03)
    drawer = _slider([0.36, 0.40, 0.20], [0.20, 0.02, 0.25], travel=0.30)
    return base, [door, drawer]


_BUILDERS = {
    "microwave": _microwave,
    "laptop": _laptop,
    "washing_machine": _washing_machine,
    "fridge": _fridge,
    "drawer": _drawer,
    "box": _box,
    "dishwasher": _dishwasher,
    "furniture": _furniture,
}

CATEGORIES = tuple(sorted(_BUILDERS))


def make_template(category: str, rng_seed: int) -> ArticulatedTemplate:
    """Category template with extents and joint placements jittered +/-25%."""
    if category not in _BUILDERS:
        raise UnknownCategory(
            f"unknown category {category!r}; choose from {', '.join(CATEGORIES)}"
        )
    rng = np.random.default_rng(rng_seed)

    def jitter(v):
        v = np.asarray(v, dtype=float)
        return v * rng.uniform(0.75, 1.25, size=v.shape)

    base_ext, links = _BUILDERS[category]()
    scaled = []
    for link in links:
        scaled.append(
            LinkSpec(
                extents=jitter(link.extents),
                center=jitter(link.center),
                joint_type=link.joint_type,
                joint_direction=link.joint_direction,
                joint_position=jitter(link.joint_position),
                motion_range=link.motion_range,
            )
        )
    return ArticulatedTemplate(category, jitter(base_ext), tuple(scaled))


# --- surface sampling --------------------------------------------------------

def _box_faces(extents):
    """(areas, normal axis, sign) for the six faces of a box."""
    ax, ay, az = extents
    return [
        (ay * az, 0, +1.0), (ay * az, 0, -1.0),
        (ax * az, 1, +1.0), (ax * az, 1, -1.0),
        (ax * ay, 2, +1.0), (ax * ay, 2, -1.0),
    ]


def _sample_box(extents, center, count, rng):
    faces = _box_faces(extents)
    areas = np.array([f[0] for f in faces])
    choice = rng.choice(6, size=count, p=areas / areas.sum())
    u = rng.uniform(-0.5, 0.5, size=(count, 3))
    pts = u * np.asarray(extents)
    for i, (_, axis, sign) in enumerate(faces):
        mask = choice == i
        pts[mask, axis] = sign * extents[axis] / 2
    return pts + np.asarray(center)


def sample_surface(tpl: ArticulatedTemplate, points_per_link: int, rng_seed: int):
    """Rest-pose surface samples for base and every link.

    Returns (points (N, 3) in the object frame, labels (N,), corr_ids (N,))
    with N = (1 + len(links)) * points_per_link; samples are uniform in area
    over each body's box faces.
    """
    if points_per_link < 50:
        raise ValidationError("points_per_link must be at least 50")
    rng = np.random.default_rng(rng_seed)
    chunks = [_sample_box(tpl.base_extents, np.zeros(3), points_per_link, rng)]
    labels = [np.zeros(points_per_link, dtype=np.uint32)]
    for i, link in enumerate(tpl.links):
        chunks.append(_sample_box(link.extents, link.center, points_per_link, rng))
        labels.append(np.full(points_per_link, i + 1, dtype=np.uint32))
    pts = np.concatenate(chunks, axis=0)
    labs = np.concatenate(labels)
    corr = np.arange(len(pts), dtype=np.uint32)
    return pts, labs, corr


# --- rendering ---------------------------------------------------------------

def sample_camera_pose(camera_seed: int) -> RigidTransform:
    """Object->camera transform: a look-at pose on a hemisphere above the object.

    The camera sits 1.5-2.5 m away, at 10-70 degrees elevation, optical axis
    (+z of the camera frame) aimed at the object-frame origin, rolled a
    random amount about that axis. Without the roll, the image x axis would
    be exactly level and every vertical joint axis would land precisely on
    the canonical-sign boundary (first camera-frame component identically
    zero), where sensor noise flips the sign of recovered states.
    """
    rng = np.random.default_rng(camera_seed)
    radius = rng.uniform(1.5, 2.5)
    azimuth = rng.uniform(0.0, 2.0 * np.pi)
    elevation = rng.uniform(np.deg2rad(10.0), np.deg2rad(70.0))
    roll = rng.uniform(np.deg2rad(-30.0), np.deg2rad(30.0))
    eye = radius * np.array([
        np.cos(elevation) * np.cos(azimuth),
        np.cos(elevation) * np.sin(azimuth),
        np.sin(elevation),
    ])
    forward = unit(-eye)
    world_up = np.array([0.0, 0.0, 1.0])
    right = unit(np.cross(forward, world_up))
    down = np.cross(forward, right)
    c, s = np.cos(roll), np.sin(roll)
    # Rows of R are the camera axes: x right, y down, z toward the object.
    R = np.stack([c * right + s * down, -s * right + c * down, forward])
    return RigidTransform(R, -R @ eye)


def render_sequence(
    tpl: ArticulatedTemplate,
    script: MotionScript,
    camera_seed: int,
    noise_sigma: float,
    rng_seed: int,
    points_per_link: int = DEFAULT_POINTS_PER_LINK,
) -> DemoSequence:
    """Render a T-frame labeled point-cloud demonstration in the camera frame."""
    if len(script.windows) != len(tpl.links):
        raise InvalidScript(
            f"script covers {len(script.windows)} links, template has {len(tpl.links)}"
        )
    rest, labels, corr = sample_surface(tpl, points_per_link, rng_seed)
    camera = sample_camera_pose(camera_seed)
    # Separate child stream so noise draws never replay the surface sampler.
    noise_rng = np.random.default_rng(np.random.SeedSequence((rng_seed, 1)))

    t_frames = script.total_frames
    frames = np.empty((t_frames, len(rest), 3))
    for f in range(t_frames):
        pts = rest.copy()
        for k, link in enumerate(tpl.links):
            q = script.state_at(k, f)
            if q != 0.0:
                motion = joint_transform(
                    link.joint_direction, link.joint_position, q,
                    prismatic=link.joint_type is JointType.PRISMATIC,
                )
                mask = labels == k + 1
                pts[mask] = apply_transform(motion, pts[mask])
        frames[f] = apply_transform(camera, pts)
        if noise_sigma > 0:
            frames[f] += noise_rng.normal(0.0, noise_sigma, size=frames[f].shape)

    clean_rest_cam = apply_transform(camera, rest)
    nodes = []
    for k in script.order:
        link = tpl.links[k]
        d_cam, sign = canonical_direction(camera.rotation @ link.joint_direction)
        if link.joint_type is JointType.PRISMATIC:
            # A translation axis has no identifiable anchor; the conventional
            # reference point is the link's rest centroid.
            p_cam = clean_rest_cam[labels == k + 1].mean(axis=0)
        else:
            p_cam = apply_transform(camera, link.joint_position)[0]
        states = tuple(sign * script.state_at(k, f) for f in range(t_frames))
        nodes.append(
            JointNode(
                joint_type=link.joint_type,
                direction=d_cam,
                position=p_cam,
                states=states,
            )
        )
    return DemoSequence(
        frames=frames,
        labels=labels,
        corr_ids=corr,
        ground_truth=Oksm(nodes),
        camera_pose=camera,
    )


def random_script(tpl: ArticulatedTemplate, total_frames: int, rng_seed: int) -> MotionScript:
    """Random sequential script: disjoint windows in random link order."""
    rng = np.random.default_rng(rng_seed)
    n = len(tpl.links)
    slots = total_frames - 2  # usable transitions: 1 .. T-2
    min_len = 2
    if slots < n * min_len:
        raise InvalidScript(
            f"{total_frames} frames cannot host {n} sequential windows"
        )
    extra = slots - n * min_len
    lens = np.full(n, min_len)
    gaps = np.zeros(n + 1, dtype=int)
    for _ in range(extra):
        # Spend each spare transition on a window or a gap, at random.
        if rng.random() < 0.6:
            lens[rng.integers(n)] += 1
        else:
            gaps[rng.integers(n + 1)] += 1
    order = tuple(int(i) for i in rng.permutation(n))
    windows = [None] * n
    cursor = 1
    for slot, link in enumerate(order):
        cursor += int(gaps[slot])
        windows[link] = (cursor, cursor + int(lens[slot]))
        cursor += int(lens[slot])
    targets = []
    for link in tpl.links:
        lo, hi = link.motion_range
        targets.append(lo + rng.uniform(0.45, 0.95) * (hi - lo))
    return MotionScript(order, tuple(windows), tuple(targets), total_frames)


# --- sample files and manifests ----------------------------------------------

def write_sample(path, seq: DemoSequence) -> None:
    """Binary sample: header line, float32 frames, uint32 labels/corr ids,
    then the ground-truth document as trailing UTF-8 text."""
    t, n = seq.num_frames, seq.num_points
    header = f"{SAMPLE_MAGIC} {n} {t}\n".encode("utf-8")
    payload = (
        header
        + seq.frames.astype("<f4").tobytes()
        + seq.labels.astype("<u4").tobytes()
        + seq.corr_ids.astype("<u4").tobytes()
        + save_oksm(seq.ground_truth).encode("utf-8")
    )
    try:
        Path(path).write_bytes(payload)
    except OSError as e:
        raise IoError(f"cannot write sample {path}: {e}") from e


def read_sample(path) -> DemoSequence:
    """Parse a sample file written by write_sample (camera pose is not stored)."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read sample {path}: {e}") from e
    nl = blob.find(b"\n")
    if nl < 0:
        raise ParseError("missing header line", str(path))
    header = blob[:nl].decode("utf-8", errors="replace")
    m = re.fullmatch(rf"{SAMPLE_MAGIC} (\d+) (\d+)", header)
    if not m:
        raise ParseError(f"bad sample header {header!r}", str(path))
    n, t = int(m.group(1)), int(m.group(2))
    offset = nl + 1
    float_bytes = t * n * 3 * 4
    int_bytes = n * 4
    need = offset + float_bytes + 2 * int_bytes
    if len(blob) < need:
        raise ParseError("sample file truncated", str(path))
    frames = np.frombuffer(blob, dtype="<f4", count=t * n * 3, offset=offset)
    frames = frames.astype(np.float64).reshape(t, n, 3)
    offset += float_bytes
    labels = np.frombuffer(blob, dtype="<u4", count=n, offset=offset).copy()
    offset += int_bytes
    corr = np.frombuffer(blob, dtype="<u4", count=n, offset=offset).copy()
    offset += int_bytes
    gt = load_oksm(blob[offset:])
    return DemoSequence(frames=frames, labels=labels, corr_ids=corr,
                        ground_truth=gt, camera_pose=None)


def read_sample_ground_truth(path) -> Oksm:
    """Parse only the trailing ground-truth document of a sample file."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoError(f"cannot read sample {path}: {e}") from e
    nl = blob.find(b"\n")
    if nl < 0:
        raise ParseError("missing header line", str(path))
    m = re.fullmatch(
        rf"{SAMPLE_MAGIC} (\d+) (\d+)", blob[:nl].decode("utf-8", errors="replace")
    )
    if not m:
        raise ParseError("bad sample header", str(path))
    n, t = int(m.group(1)), int(m.group(2))
    offset = nl + 1 + t * n * 3 * 4 + 2 * n * 4
    if len(blob) <= offset:
        raise ParseError("sample file truncated", str(path))
    return load_oksm(blob[offset:])


@dataclass(frozen=True)
class ManifestEntry:
    category: str
    path: str    # relative to the manifest's directory
    seed: int
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    samples: tuple
    counts: dict

    def paths(self, root, split: Optional[str] = None):
        root = Path(root)
        return [
            root / e.path
            for e in self.samples
            if split is None or e.split == split
        ]


@dataclass(frozen=True)
class GenConfig:
    categories: tuple = CATEGORIES
    samples_per_category: int = 10
    seed: int = 0
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    frames: int = DEFAULT_FRAMES
    points_per_link: int = DEFAULT_POINTS_PER_LINK
    train_fraction: float = 0.85
    holdout: tuple = ("furniture",)


def _sample_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((master_seed, index)).generate_state(1, np.uint64)[0])


def render_from_entry(config: GenConfig, category: str, sample_seed: int) -> DemoSequence:
    """Regenerate one sample purely from its per-sample seed."""
    rng = np.random.default_rng(sample_seed)
    tpl_seed, cam_seed, script_seed, render_seed = (
        int(x) for x in rng.integers(2**63, size=4)
    )
    tpl = make_template(category, tpl_seed)
    script = random_script(tpl, config.frames, script_seed)
    return render_sequence(
        tpl, script, cam_seed, config.noise_sigma, render_seed,
        points_per_link=config.points_per_link,
    )


def _write_one(args) -> None:
    config, out_dir, entry = args
    seq = render_from_entry(config, entry.category, entry.seed)
    write_sample(Path(out_dir) / entry.path, seq)


def plan_manifest(config: GenConfig) -> DatasetManifest:
    """Decide per-sample seeds, paths, and splits without rendering anything."""
    for c in config.categories:
        if c not in _BUILDERS:
            raise UnknownCategory(f"unknown category {c!r}")
    entries = []
    index = 0
    for category in config.categories:
        n = config.samples_per_category
        n_train = 0 if category in config.holdout else round(n * config.train_fraction)
        for i in range(n):
            entries.append(
                ManifestEntry(
                    category=category,
                    path=f"{category}_{i:04d}.oksmpc",
                    seed=_sample_seed(config.seed, index),
                    split="train" if i < n_train else "test",
                )
            )
            index += 1
    seeds = [e.seed for e in entries]
    if len(set(seeds)) != len(seeds):
        raise ValidationError("per-sample seed collision; choose another seed")
    counts = {}
    for e in entries:
        counts[e.split] = counts.get(e.split, 0) + 1
    return DatasetManifest(seed=config.seed, samples=tuple(entries), counts=counts)


def generate_dataset(config: GenConfig, out_dir, jobs: int = 1) -> DatasetManifest:
    """Write one file per sample plus manifest.json; byte-identical per seed."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"cannot create {out}: {e}") from e
    manifest = plan_manifest(config)
    tasks = [(config, out, e) for e in manifest.samples]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(_write_one, tasks, chunksize=1))
    else:
        for task in tasks:
            _write_one(task)
    save_manifest(manifest, out / MANIFEST_NAME)
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "version": 1,
        "seed": manifest.seed,
        "counts": manifest.counts,
        "samples": [
            {"category": e.category, "path": e.path, "seed": e.seed, "split": e.split}
            for e in manifest.samples
        ],
    }
    try:
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write manifest {path}: {e}") from e


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"cannot read manifest {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"{path}:{e.lineno}:{e.colno}") from e
    if raw.get("version") != 1:
        raise ParseError("unsupported manifest version", str(path))
    samples = tuple(
        ManifestEntry(
            category=s["category"], path=s["path"], seed=int(s["seed"]),
            split=s["split"],
        )
        for s in raw.get("samples", [])
    )
    return DatasetManifest(seed=int(raw["seed"]), samples=samples,
                           counts=dict(raw.get("counts", {})))


__all__ = [
    "ArticulatedTemplate",
    "CATEGORIES",
    "DEFAULT_FRAMES",
    "DEFAULT_NOISE_SIGMA",
    "DEFAULT_POINTS_PER_LINK",
    "DatasetManifest",
    "DemoSequence",
    "GenConfig",
    "LinkSpec",
    "ManifestEntry",
    "MotionScript",
    "generate_dataset",
    "load_manifest",
    "make_template",
    "plan_manifest",
    "random_script",
    "read_sample",
    "read_sample_ground_truth",
    "render_from_entry",
    "render_sequence",
    "sample_camera_pose",
    "sample_surface",
    "save_manifest",
    "write_sample",
]
