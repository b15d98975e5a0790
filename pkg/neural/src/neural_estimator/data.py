"""Readers and writers for the interchange formats.

This package talks to the dataset generator and the evaluation harness only
through files: `OKSMPC v1` demonstration samples, the dataset manifest, and
kinematic-chain JSON documents. The readers here implement those published
layouts independently.

Sample layout: UTF-8 header line ``OKSMPC v1 N T``, then T*N*3 little-endian
float32 coordinates (frame-major, xyz interleaved), N uint32 link labels,
N uint32 correspondence ids, and a trailing UTF-8 chain document.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
import numpy as np

from .errors import FormatError

SAMPLE_MAGIC = "OKSMPC v1"
REVOLUTE, PRISMATIC = 0, 1
_TYPE_NAMES = {"revolute": REVOLUTE, "prismatic": PRISMATIC}
_TYPE_LABELS = {REVOLUTE: "revolute", PRISMATIC: "prismatic"}


@dataclass(frozen=True)
class ChainNode:
    joint_type: int          # REVOLUTE or PRISMATIC
    direction: np.ndarray    # unit, canonical sign
    position: np.ndarray
    states: np.ndarray       # per-frame, states[0] == 0


@dataclass(frozen=True)
class Sample:
    frames: np.ndarray       # (T, N, 3) float32
    labels: np.ndarray       # (N,)
    corr_ids: np.ndarray     # (N,)
    nodes: tuple             # ground-truth ChainNodes in manipulation order
    path: str


def parse_chain_document(text) -> tuple:
    """Nodes of a chain document, in manipulation order."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"bad chain document: {e.msg}") from e
    if raw.get("version") != 1 or not isinstance(raw.get("nodes"), list):
        raise FormatError("chain document must have version 1 and a node array")
    nodes = []
    for nd in raw["nodes"]:
        if nd.get("type") not in _TYPE_NAMES:
            raise FormatError(f"unknown joint type {nd.get('type')!r}")
        nodes.append(
            ChainNode(
                joint_type=_TYPE_NAMES[nd["type"]],
                direction=np.asarray(nd["direction"], dtype=np.float64),
                position=np.asarray(nd["position"], dtype=np.float64),
                states=np.asarray(nd["states"], dtype=np.float64),
            )
        )
    if not nodes:
        raise FormatError("chain document has no nodes")
    return tuple(nodes)


def read_sample(path) -> Sample:
    blob = Path(path).read_bytes()
    nl = blob.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: missing header")
    header = blob[:nl].decode("utf-8", errors="replace")
    m = re.fullmatch(rf"{SAMPLE_MAGIC} (\d+) (\d+)", header)
    if not m:
        raise FormatError(f"{path}: bad header {header!r}")
    n, t = int(m.group(1)), int(m.group(2))
    offset = nl + 1
    if len(blob) < offset + t * n * 3 * 4 + 2 * n * 4:
        raise FormatError(f"{path}: truncated")
    frames = np.frombuffer(blob, dtype="<f4", count=t * n * 3, offset=offset)
    frames = frames.reshape(t, n, 3).copy()
    offset += t * n * 3 * 4
    labels = np.frombuffer(blob, dtype="<u4", count=n, offset=offset).copy()
    offset += n * 4
    corr = np.frombuffer(blob, dtype="<u4", count=n, offset=offset).copy()
    offset += n * 4
    nodes = parse_chain_document(blob[offset:])
    return Sample(frames=frames, labels=labels, corr_ids=corr, nodes=nodes,
                  path=str(path))


@dataclass(frozen=True)
class ManifestEntry:
    category: str
    path: str
    seed: int
    split: str


def read_manifest(path):
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if raw.get("version") != 1:
        raise FormatError(f"{path}: unsupported manifest version")
    return tuple(
        ManifestEntry(category=s["category"], path=s["path"], seed=int(s["seed"]),
                      split=s["split"])
        for s in raw["samples"]
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _vec(v) -> str:
    return "[" + ", ".join(_fmt(x) for x in np.asarray(v).reshape(-1)) + "]"


def write_chain_document(nodes) -> str:
    """Serialize predicted nodes to the canonical chain-document layout."""
    parts = []
    for n in nodes:
        parts.append(
            "    {"
            + f'"type": "{_TYPE_LABELS[int(n.joint_type)]}", '
            + f'"direction": {_vec(n.direction)}, '
            + f'"position": {_vec(n.position)}, '
            + f'"states": {_vec(n.states)}, '
            + '"contact_pose": null}'
        )
    return (
        "{\n"
        '  "version": 1,\n'
        '  "nodes": [\n' + ",\n".join(parts) + "\n  ]\n"
        "}\n"
    )


def canonical_direction(d: np.ndarray) -> tuple:
    """Flip so the first component with magnitude above 1e-9 is positive."""
    for c in d:
        if abs(c) > 1e-9:
            return (d, 1.0) if c > 0 else (-d, -1.0)
    raise FormatError("direction is numerically zero")


def subsample_frames(frames: np.ndarray, count: int, seed: int) -> np.ndarray:
    """Fixed random subset of points, identical across the frames of a sample."""
    n = frames.shape[1]
    rng = np.random.default_rng(seed)
    if n >= count:
        idx = rng.choice(n, size=count, replace=False)
    else:
        idx = rng.choice(n, size=count, replace=True)
    return frames[:, np.sort(idx), :]
