"""
IDX file codec (the MNIST container format).

Layout, big-endian:
    u8 0, u8 0, u8 dtype (0x08 = unsigned byte), u8 ndim
    u32 size per dimension
    payload, row-major
"""

import logging
import struct
from pathlib import Path

import numpy as np

from ..core.exceptions import FormatError
from ..core.files import PathLike, atomic_write_bytes
from .dataset import Dataset

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
UBYTE = 0x08


def decode_idx(
    payload: bytes, expected_magic: int, source: str = "<bytes>"
) -> np.ndarray:
    """Parse an unsigned-byte IDX buffer whose magic must equal ``expected_magic``."""
    if len(payload) < 4:
        raise FormatError(f"{source}: truncated header (field 'magic')")
    (magic,) = struct.unpack(">I", payload[:4])
    if magic != expected_magic:
        raise FormatError(
            f"{source}: bad magic 0x{magic:08x}, expected 0x{expected_magic:08x} "
            "(field 'magic')"
        )
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(payload) < header:
        raise FormatError(f"{source}: truncated header (field 'dimensions')")
    dims = struct.unpack(f">{ndim}I", payload[4:header])
    count = int(np.prod(dims, dtype=np.int64))
    available = len(payload) - header
    if available < count:
        raise FormatError(
            f"{source}: truncated payload, {available} of {count} bytes "
            "(field 'payload')"
        )
    if available > count:
        raise FormatError(
            f"{source}: {available - count} trailing bytes (field 'payload')"
        )
    values = np.frombuffer(payload, dtype=np.uint8, count=count, offset=header)
    return values.reshape(dims)


def encode_idx(array: np.ndarray) -> bytes:
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise FormatError(f"IDX writer only supports uint8, got {array.dtype}")
    magic = (UBYTE << 8) | array.ndim
    header = struct.pack(f">I{array.ndim}I", magic, *array.shape)
    return header + np.ascontiguousarray(array).tobytes()


def read_idx(path: PathLike, expected_magic: int) -> np.ndarray:
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise FormatError(f"{path}: cannot read ({e})")
    return decode_idx(payload, expected_magic, str(path))


def quantize_images(images: np.ndarray) -> np.ndarray:
    """[0, 1] floats (N, 1, H, W) or (N, H, W) to uint8 (N, H, W)."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim == 4:
        if images.shape[1] != 1:
            raise FormatError(f"IDX images must be single-channel, got {images.shape}")
        images = images[:, 0]
    return np.rint(np.clip(images, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_idx_pair(dataset: Dataset, images_path: PathLike, labels_path: PathLike):
    atomic_write_bytes(images_path, encode_idx(quantize_images(dataset.images)))
    atomic_write_bytes(labels_path, encode_idx(dataset.labels.astype(np.uint8)))


def load_idx(
    images_path: PathLike,
    labels_path: PathLike,
    name: str = "mnist",
    split: str = "train",
    class_count: int = 10,
) -> Dataset:
    """Images scaled to [0, 1] as (N, 1, H, W), labels as int64."""
    raw_images = read_idx(images_path, IMAGES_MAGIC)
    raw_labels = read_idx(labels_path, LABELS_MAGIC)
    if raw_images.shape[0] != raw_labels.shape[0]:
        raise FormatError(
            f"{images_path}: {raw_images.shape[0]} images vs "
            f"{raw_labels.shape[0]} labels in {labels_path} (field 'count')"
        )
    if raw_labels.size and raw_labels.max() >= class_count:
        raise FormatError(
            f"{labels_path}: label {raw_labels.max()} >= {class_count} "
            "(field 'payload')"
        )
    images = raw_images.astype(np.float64)[:, None, :, :] / 255.0
    logger.info(f"Loaded {images.shape[0]} {split} images of shape {images.shape[1:]}")
    return Dataset(
        images=images,
        labels=raw_labels.astype(np.int64),
        name=name,
        split=split,
        class_count=class_count,
    )
