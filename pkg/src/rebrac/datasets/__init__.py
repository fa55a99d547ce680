"""Offline datasets: generation, storage, sampling, statistics."""

from .behavior import KINDS, TIERS, BehaviorPolicy, realize
from .dataset import (
    STD_FLOOR,
    Batch,
    OfflineDataset,
    normalize_dataset,
    sample_batch,
    state_stats,
)
from .generate import generate
from .io import load, meta_path, save

__all__ = [
    "Batch",
    "BehaviorPolicy",
    "KINDS",
    "OfflineDataset",
    "STD_FLOOR",
    "TIERS",
    "generate",
    "load",
    "meta_path",
    "normalize_dataset",
    "realize",
    "sample_batch",
    "save",
    "state_stats",
]
