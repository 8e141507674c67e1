from .model import (
    ModelParams,
    NonFiniteError,
    attention_weights,
    backward,
    forward,
    forward_batch,
    greedy_decode,
    init_params,
    loss_and_grads,
)
from .optim import AdamState, adam_step, clip_by_global_norm, global_norm
from .training import Predictor, TrainConfig, TrainingDiverged, TrainResult, evaluate_model, predict, train

__all__ = [
    "AdamState", "ModelParams", "NonFiniteError", "Predictor", "TrainConfig", "TrainResult",
    "TrainingDiverged", "adam_step", "attention_weights", "backward", "clip_by_global_norm",
    "evaluate_model", "forward", "forward_batch", "global_norm", "greedy_decode", "init_params",
    "loss_and_grads", "predict", "train",
]
