from .model import (
    MdrnnParams,
    MdrnnState,
    MixtureParams,
    SIGMA_FLOOR,
    encode_frame,
    forward_step,
    init_params,
    initial_state,
    nll,
    predict_next,
    sample,
)
from .train import TrainHyper, TrainingDiverged, sequence_nll, sequence_nll_and_grads, train
from .weights import load_weights, save_weights

__all__ = [
    "MdrnnParams",
    "MdrnnState",
    "MixtureParams",
    "SIGMA_FLOOR",
    "TrainHyper",
    "TrainingDiverged",
    "encode_frame",
    "forward_step",
    "init_params",
    "initial_state",
    "load_weights",
    "nll",
    "predict_next",
    "sample",
    "save_weights",
    "sequence_nll",
    "sequence_nll_and_grads",
    "train",
]
