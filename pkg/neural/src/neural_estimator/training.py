"""Training loop, prediction/decoding, and the dataset-mean baseline.

Targets come straight from the ground-truth chain embedded in each sample
file: slot k binds to the k-th node after sorting nodes by position, the
order head learns each slot's manipulation rank, and states are supervised
with their canonical signs. Everything is seeded and single-process, so a
run is reproducible end to end.
"""

from __future__ import annotations

import copy
import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from .data import (
    ChainNode,
    Sample,
    canonical_direction,
    read_manifest,
    read_sample,
    subsample_frames,
    write_chain_document,
)
from .errors import ConfigMismatch, FormatError
from .losses import compound_loss
from .model import ChainRegressor, ModelConfig, decode_order

LOSS_COLUMNS = ("dir", "pos", "ord", "dof", "q", "norm")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 16
    learning_rate: float = 2e-3
    lr_decay: float = 0.92       # exponential, per epoch
    ema_decay: float = 0.95      # Polyak weight averaging, per step
    seed: int = 0


def direction_error_deg(a, b) -> float:
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return math.degrees(
        math.atan2(float(np.linalg.norm(np.cross(a, b))), abs(float(np.dot(a, b))))
    )


def _spatial_slot_order(nodes):
    return sorted(range(len(nodes)), key=lambda i: tuple(nodes[i].position))


def _sample_tensors(sample: Sample, config: ModelConfig, sub_seed: int):
    if sample.frames.shape[0] != config.frames:
        raise ConfigMismatch(
            f"{sample.path}: {sample.frames.shape[0]} frames, model expects "
            f"{config.frames}"
        )
    if len(sample.nodes) > config.max_slots:
        raise ConfigMismatch(f"{sample.path}: more joints than model slots")
    center = sample.frames[0].mean(axis=0)
    cloud = subsample_frames(sample.frames, config.points_per_frame, sub_seed)
    frames = torch.from_numpy((cloud - center).astype(np.float32))

    s = config.max_slots
    directions = np.tile([1.0, 0.0, 0.0], (s, 1))
    positions = np.zeros((s, 3))
    states = np.zeros((s, config.frames))
    types = np.zeros(s, dtype=np.int64)
    ranks = np.zeros(s, dtype=np.int64)
    mask = np.zeros(s)
    for slot, node_index in enumerate(_spatial_slot_order(sample.nodes)):
        node = sample.nodes[node_index]
        directions[slot] = node.direction
        positions[slot] = node.position - center
        states[slot] = node.states
        types[slot] = node.joint_type
        ranks[slot] = node_index          # document order is manipulation order
        mask[slot] = 1.0
    target = {
        "directions": torch.from_numpy(directions.astype(np.float32)),
        "positions": torch.from_numpy(positions.astype(np.float32)),
        "states": torch.from_numpy(states.astype(np.float32)),
        "types": torch.from_numpy(types),
        "ranks": torch.from_numpy(ranks),
        "dof_index": torch.tensor(len(sample.nodes) - 1, dtype=torch.int64),
        "mask": torch.from_numpy(mask.astype(np.float32)),
    }
    return frames, target, center


def build_dataset(data_dir, entries, config: ModelConfig, seed: int):
    """Stacked tensors for a list of manifest entries, in list order."""
    frames, targets, centers = [], [], []
    for idx, entry in enumerate(entries):
        sample = read_sample(Path(data_dir) / entry.path)
        f, t, c = _sample_tensors(sample, config, sub_seed=(seed, 0, idx))
        frames.append(f)
        targets.append(t)
        centers.append(c)
    batch = {
        key: torch.stack([t[key] for t in targets]) for key in targets[0]
    }
    return torch.stack(frames), batch, np.asarray(centers)


def _type_cross_entropy(prediction, target):
    # Joint-type supervision rides along with the six contract terms.
    b, s, _ = prediction["type_logits"].shape
    ce = torch.nn.functional.cross_entropy(
        prediction["type_logits"].reshape(b * s, 2),
        target["types"].reshape(b * s),
        reduction="none",
    ).reshape(b, s)
    mask = target["mask"]
    return (ce * mask).sum() / mask.sum().clamp_min(1.0)


def train(
    data_dir,
    out_dir,
    model_config: ModelConfig = ModelConfig(),
    train_config: TrainConfig = TrainConfig(),
    split: str = "train",
):
    """Train on one manifest split; writes model.pt and curve.csv.

    Returns (checkpoint path, per-epoch rows of mean losses).
    """
    data_dir = Path(data_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = [e for e in read_manifest(data_dir / "manifest.json")
               if e.split == split]
    if not entries:
        raise FormatError(f"manifest has no '{split}' samples")
    frames, targets, _ = build_dataset(data_dir, entries, model_config,
                                       train_config.seed)

    torch.manual_seed(train_config.seed)
    model = ChainRegressor(model_config)
    # The trained artifact is the Polyak average of the raw weights: it
    # converges far more smoothly than the raw minibatch iterates.
    averaged = copy.deepcopy(model)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_config.learning_rate)
    scheduler = torch.optim.lr_scheduler.ExponentialLR(
        optimizer, gamma=train_config.lr_decay
    )
    shuffler = torch.Generator().manual_seed(train_config.seed)

    n = frames.shape[0]
    rows = []
    for epoch in range(train_config.epochs):
        order = torch.randperm(n, generator=shuffler)
        for start in range(0, n, train_config.batch_size):
            idx = order[start:start + train_config.batch_size]
            batch_target = {k: v[idx] for k, v in targets.items()}
            prediction = model(frames[idx])
            total, _terms = compound_loss(prediction, batch_target)
            optimizer.zero_grad()
            (total + _type_cross_entropy(prediction, batch_target)).backward()
            optimizer.step()
            with torch.no_grad():
                for avg, raw in zip(averaged.parameters(), model.parameters()):
                    avg.mul_(train_config.ema_decay).add_(
                        raw, alpha=1.0 - train_config.ema_decay
                    )
        scheduler.step()
        # Epoch row: the averaged model's loss on the whole training split,
        # a fixed measurement target rather than a moving minibatch mix.
        with torch.no_grad():
            total, terms = compound_loss(averaged(frames), targets)
        rows.append({
            "epoch": epoch,
            "total": float(total),
            **{k: float(v) for k, v in terms.items()},
        })

    with open(out / "curve.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "total", *LOSS_COLUMNS])
        writer.writeheader()
        writer.writerows(rows)
    checkpoint = out / "model.pt"
    torch.save(
        {
            "model_config": asdict(model_config),
            "train_config": asdict(train_config),
            "state_dict": averaged.state_dict(),
        },
        checkpoint,
    )
    return checkpoint, rows


def load_checkpoint(path):
    payload = torch.load(path, map_location="cpu", weights_only=False)
    config = ModelConfig(**payload["model_config"])
    model = ChainRegressor(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, config, TrainConfig(**payload["train_config"])


def decode_prediction(prediction: dict, center: np.ndarray,
                      config: ModelConfig) -> tuple:
    """Predicted nodes in manipulation order, document-ready.

    Directions are normalized and canonicalized; states keep their learned
    signs (targets are canonical-signed) and are shifted so states[0] = 0;
    positions move back to the camera frame.
    """
    dof = int(torch.argmax(prediction["dof_logits"][0]).item()) + 1
    order = decode_order(prediction["order_logits"][0, :dof, :dof], dof)
    nodes = []
    for slot in order:
        d = prediction["directions"][0, slot].detach().numpy().astype(np.float64)
        d = d / np.linalg.norm(d)
        d, _sign = canonical_direction(d)
        q = prediction["states"][0, slot].detach().numpy().astype(np.float64)
        q = q - q[0]
        p = prediction["positions"][0, slot].detach().numpy().astype(np.float64)
        joint_type = int(torch.argmax(prediction["type_logits"][0, slot]).item())
        nodes.append(ChainNode(joint_type=joint_type, direction=d,
                               position=p + center, states=q))
    return tuple(nodes)


def predict(checkpoint_path, sample_path, sub_seed=0) -> str:
    """One chain document for one sample file."""
    model, config, _ = load_checkpoint(checkpoint_path)
    sample = read_sample(sample_path)
    frames, _target, center = _sample_tensors(sample, config, sub_seed=sub_seed)
    with torch.no_grad():
        prediction = model(frames.unsqueeze(0))
    return write_chain_document(decode_prediction(prediction, center, config))


def predict_dataset(checkpoint_path, data_dir, out_dir, split="test"):
    """Chain documents for every sample of a split; returns written paths."""
    data_dir = Path(data_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, config, train_config = load_checkpoint(checkpoint_path)
    entries = [e for e in read_manifest(data_dir / "manifest.json")
               if split in (None, "all", e.split)]
    written = []
    for idx, entry in enumerate(entries):
        sample = read_sample(data_dir / entry.path)
        frames, _, center = _sample_tensors(
            sample, config, sub_seed=(train_config.seed, 1, idx)
        )
        with torch.no_grad():
            prediction = model(frames.unsqueeze(0))
        doc = write_chain_document(decode_prediction(prediction, center, config))
        path = out / (Path(entry.path).stem + ".json")
        path.write_text(doc, encoding="utf-8")
        written.append(path)
    return written


def mean_axis_baseline(data_dir, train_split="train"):
    """The constant predictor: the normalized mean of all training axes."""
    data_dir = Path(data_dir)
    entries = [e for e in read_manifest(data_dir / "manifest.json")
               if e.split == train_split]
    total = np.zeros(3)
    for entry in entries:
        for node in read_sample(data_dir / entry.path).nodes:
            total += node.direction
    norm = np.linalg.norm(total)
    if norm < 1e-12:
        return np.array([1.0, 0.0, 0.0])
    return total / norm


def split_direction_errors(data_dir, predictions_dir, split="test"):
    """Greedy-matched per-node direction errors of written predictions."""
    from .data import parse_chain_document

    data_dir = Path(data_dir)
    errors = []
    for entry in read_manifest(data_dir / "manifest.json"):
        if entry.split != split:
            continue
        gt_nodes = read_sample(data_dir / entry.path).nodes
        doc = (Path(predictions_dir) / (Path(entry.path).stem + ".json")).read_text()
        pred_nodes = parse_chain_document(doc)
        free = list(range(len(gt_nodes)))
        for pred in pred_nodes:
            if not free:
                break
            errs = [direction_error_deg(pred.direction, gt_nodes[j].direction)
                    for j in free]
            j = free.pop(int(np.argmin(errs)))
            errors.append(direction_error_deg(pred.direction,
                                              gt_nodes[j].direction))
    return np.asarray(errors)


def baseline_direction_errors(data_dir, split="test", train_split="train"):
    axis = mean_axis_baseline(data_dir, train_split)
    data_dir = Path(data_dir)
    errors = []
    for entry in read_manifest(data_dir / "manifest.json"):
        if entry.split != split:
            continue
        for node in read_sample(data_dir / entry.path).nodes:
            errors.append(direction_error_deg(axis, node.direction))
    return np.asarray(errors)
