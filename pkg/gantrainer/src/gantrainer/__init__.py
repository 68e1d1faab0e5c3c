"""Desk-scale conditional WGAN-GP trainer for microstructure chip corpora."""

__version__ = "0.1.0"

from .losses import critic_loss, generator_loss, gradient_penalty
from .model import Critic, CriticOutput, Generator
from .sample import sample
from .train import TrainConfig, TrainResult, load_generator, train
