"""
Checkpoint persistence.

Little-endian layout:
    b"ANPM", u32 version
    u32 class_count, u32 input rank, u32 dims...
    u32 layer count, then per layer: u8 kind code + kind-specific u32 fields
        affine  : out, in
        conv2d  : c_out, c_in, kh, kw, stride, padding
    parameter tensors in declaration order as f64
Noise registers are never stored.
"""

import io
import logging
import struct
from pathlib import Path

import numpy as np

from ..core.exceptions import FormatError
from ..core.files import PathLike, atomic_write_bytes
from ..nn.layers import Affine, Conv2D, Flatten, MaxPool2x2, Relu
from ..nn.network import Network

logger = logging.getLogger(__name__)

MAGIC = b"ANPM"
FORMAT_VERSION = 1

KIND_CODES = {"affine": 1, "conv2d": 2, "maxpool2x2": 3, "relu": 4, "flatten": 5}
KIND_NAMES = {code: kind for kind, code in KIND_CODES.items()}


def encode_checkpoint(net: Network) -> bytes:
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<I", FORMAT_VERSION))
    out.write(struct.pack("<II", net.class_count, len(net.input_shape)))
    out.write(struct.pack(f"<{len(net.input_shape)}I", *net.input_shape))
    out.write(struct.pack("<I", len(net.layers)))
    for layer in net.layers:
        out.write(struct.pack("<B", KIND_CODES[layer.kind]))
        if isinstance(layer, Affine):
            out.write(struct.pack("<II", *layer.weight.shape))
        elif isinstance(layer, Conv2D):
            out.write(
                struct.pack("<6I", *layer.kernels.shape, layer.stride, layer.padding)
            )
    for _, _, value in net.iter_parameters():
        out.write(np.ascontiguousarray(value, dtype="<f8").tobytes())
    return out.getvalue()


class _Reader:
    def __init__(self, payload: bytes, source: str):
        self.payload = payload
        self.offset = 0
        self.source = source

    def take(self, size: int, field: str) -> bytes:
        if self.offset + size > len(self.payload):
            raise FormatError(f"{self.source}: truncated checkpoint (field '{field}')")
        chunk = self.payload[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str, field: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), field))

    def array(self, shape: tuple, field: str) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(8 * count, field)
        return np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def decode_checkpoint(payload: bytes, source: str = "<bytes>") -> Network:
    reader = _Reader(payload, source)
    if reader.take(4, "magic") != MAGIC:
        raise FormatError(f"{source}: not an ANPM checkpoint (field 'magic')")
    (version,) = reader.unpack("<I", "version")
    if version != FORMAT_VERSION:
        raise FormatError(
            f"{source}: checkpoint version {version}, expected {FORMAT_VERSION} "
            "(field 'version')"
        )
    class_count, rank = reader.unpack("<II", "architecture")
    input_shape = reader.unpack(f"<{rank}I", "input_shape")
    (layer_count,) = reader.unpack("<I", "layer_count")

    descriptors = []
    for index in range(layer_count):
        field = f"layer[{index}]"
        (code,) = reader.unpack("<B", f"{field}.kind")
        kind = KIND_NAMES.get(code)
        if kind is None:
            raise FormatError(
                f"{source}: unknown layer code {code} (field '{field}.kind')"
            )
        if kind == "affine":
            descriptors.append((kind, reader.unpack("<II", f"{field}.shape")))
        elif kind == "conv2d":
            descriptors.append((kind, reader.unpack("<6I", f"{field}.shape")))
        else:
            descriptors.append((kind, ()))

    layers = []
    for index, (kind, fields) in enumerate(descriptors):
        if kind == "affine":
            weight = reader.array(tuple(fields), f"layer[{index}].weight")
            bias = reader.array((fields[0],), f"layer[{index}].bias")
            layers.append(Affine(weight=weight, bias=bias))
        elif kind == "conv2d":
            kernels = reader.array(tuple(fields[:4]), f"layer[{index}].kernels")
            bias = reader.array((fields[0],), f"layer[{index}].bias")
            layers.append(
                Conv2D(kernels=kernels, bias=bias, stride=fields[4], padding=fields[5])
            )
        elif kind == "maxpool2x2":
            layers.append(MaxPool2x2())
        elif kind == "relu":
            layers.append(Relu())
        else:
            layers.append(Flatten())
    if reader.offset != len(payload):
        raise FormatError(
            f"{source}: {len(payload) - reader.offset} trailing bytes "
            "(field 'parameters')"
        )
    try:
        return Network(layers=layers, input_shape=input_shape, class_count=class_count)
    except Exception as e:
        raise FormatError(
            f"{source}: inconsistent architecture ({e}) (field 'architecture')"
        )


def save_checkpoint(net: Network, path: PathLike) -> Path:
    target = atomic_write_bytes(path, encode_checkpoint(net))
    logger.info(f"Saved checkpoint with {net.parameter_count()} parameters to {target}")
    return target


def load_checkpoint(path: PathLike) -> Network:
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise FormatError(f"{path}: cannot read ({e})")
    return decode_checkpoint(payload, str(path))
