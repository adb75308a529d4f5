"""learnlab: dual-tower value-network experiments for the f2c compiler."""

from .model import DualTowerConfig, DualTowerValueNet
from .train import TrainRunConfig, train_dual_tower

__all__ = [
    "DualTowerConfig",
    "DualTowerValueNet",
    "TrainRunConfig",
    "train_dual_tower",
]
