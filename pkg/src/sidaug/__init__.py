"""Composite augmentation search for robust synthetic-image detection."""

__version__ = "0.1.0"

from .augment import AugmentationSet, OperatorKind, OperatorParams, apply_pipeline
from .corpus import CorpusConfig, LabeledDataset, generate_corpus
from .image import Image, load_image, save_image
from .metrics import GainReport, MetricsReport, ScoredSet, accuracy, average_precision, map_gain, mean_average_precision
from .model import LossConfig, Model, TrainConfig, TrainHistory, train
from .rng import Rng
from .scenarios import Scenario, apply_scenario, builtin_scenarios, evaluate_model

__all__ = [
    "AugmentationSet",
    "CorpusConfig",
    "GainReport",
    "Image",
    "LabeledDataset",
    "LossConfig",
    "MetricsReport",
    "Model",
    "OperatorKind",
    "OperatorParams",
    "Rng",
    "Scenario",
    "ScoredSet",
    "TrainConfig",
    "TrainHistory",
    "accuracy",
    "apply_pipeline",
    "apply_scenario",
    "average_precision",
    "builtin_scenarios",
    "evaluate_model",
    "generate_corpus",
    "load_image",
    "map_gain",
    "mean_average_precision",
    "save_image",
    "train",
]
