"""Trainable denoisers, MSE / MC-SURE training and the joint recovery loop."""

from .grads import grad_mse, grad_sure
from .joint import JointReport, curate, harvest, joint_loop, pretrain
from .models import ARCHITECTURES, LearnedShrinkage, ScalarGain, SmallResidualCNN, TrainableDenoiser
from .training import Objective, Source, TrainConfig, TrainingPair, TrainingSample, train
from .weights import load_weights, save_weights

__all__ = [
    "ARCHITECTURES", "JointReport", "LearnedShrinkage", "Objective", "ScalarGain",
    "SmallResidualCNN", "Source", "TrainConfig", "TrainableDenoiser", "TrainingPair",
    "TrainingSample", "curate", "grad_mse", "grad_sure", "harvest", "joint_loop",
    "load_weights", "pretrain", "save_weights", "train",
]
