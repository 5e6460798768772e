"""From-scratch differentiable sequence models on numpy."""

from .gradcheck import gradient_check
from .layers import (LSTM, BiFinalPool, BiLSTM, Dense, Layer, MeanPool,
                     MultiHeadAttention, build_layer, sigmoid)
from .losses import cross_entropy, mse, softmax
from .model import SequenceModel, assemble
from .optim import Adam, clip_by_global_norm, global_norm
from .serialize import load_model, save_model
from .train import TrainConfig, train

__all__ = [
    "Adam", "BiFinalPool", "BiLSTM", "Dense", "LSTM", "Layer", "MeanPool",
    "MultiHeadAttention", "SequenceModel", "TrainConfig", "assemble",
    "build_layer", "clip_by_global_norm", "cross_entropy", "global_norm",
    "gradient_check", "load_model", "mse", "save_model", "sigmoid",
    "softmax", "train",
]
