from camsel.model.checkpoint import (
    Checkpoint,
    load_checkpoint,
    model_from_checkpoint,
    save_checkpoint,
)
from camsel.model.config import ModelConfig
from camsel.model.layers import FeatureEmbedding, InceptionConv2d, TimesBlock, sinusoidal_encoding
from camsel.model.losses import class_weights, one_hot, weighted_cross_entropy
from camsel.model.network import (
    CameraSelector,
    init_parameters,
    predict_labels,
    validate_prob_sequence,
)
from camsel.model.periods import PeriodSet, amplitude_spectrum, detect_periods, select_periods

__all__ = [
    "CameraSelector",
    "Checkpoint",
    "FeatureEmbedding",
    "InceptionConv2d",
    "ModelConfig",
    "PeriodSet",
    "TimesBlock",
    "amplitude_spectrum",
    "class_weights",
    "detect_periods",
    "init_parameters",
    "load_checkpoint",
    "model_from_checkpoint",
    "one_hot",
    "predict_labels",
    "save_checkpoint",
    "select_periods",
    "sinusoidal_encoding",
    "validate_prob_sequence",
    "weighted_cross_entropy",
]
