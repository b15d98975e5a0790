"""Toy neural estimator of articulated-object kinematic chains.

Consumes `OKSMPC v1` demonstration datasets (point-cloud sequences with
embedded ground truth), trains a point-set encoder + temporal transformer +
regression head with a six-term compound loss, and writes predictions in
the standard chain-document format so the geometric toolkit's evaluation
harness scores them unmodified.
"""

from .data import (
    ChainNode,
    Sample,
    parse_chain_document,
    read_manifest,
    read_sample,
    write_chain_document,
)
from .errors import ConfigMismatch, FormatError, NeuralEstimatorError, ShapeMismatch
from .losses import compound_loss
from .model import ChainRegressor, ModelConfig
from .training import (
    TrainConfig,
    baseline_direction_errors,
    mean_axis_baseline,
    predict,
    predict_dataset,
    split_direction_errors,
    train,
)

__version__ = "0.1.0"
