class NeuralEstimatorError(Exception):
    """Base class for this package's domain errors."""


class ShapeMismatch(NeuralEstimatorError):
    """Input tensor shape disagrees with the model configuration."""


class ConfigMismatch(NeuralEstimatorError):
    """Checkpoint configuration disagrees with the dataset."""


class FormatError(NeuralEstimatorError):
    """Sample, manifest, or document does not follow its declared format."""
