"""
Datasets, IDX files and checkpoints.
"""

from .checkpoint import (
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .dataset import Dataset
from .idx import decode_idx, encode_idx, load_idx, read_idx, write_idx_pair
from .registry import load_dataset_spec, load_mnist, mnist_available
from .synthetic import synth_blobs, synth_spirals

__all__ = [
    "Dataset",
    "decode_checkpoint",
    "decode_idx",
    "encode_checkpoint",
    "encode_idx",
    "load_checkpoint",
    "load_dataset_spec",
    "load_idx",
    "load_mnist",
    "mnist_available",
    "read_idx",
    "save_checkpoint",
    "synth_blobs",
    "synth_spirals",
]
