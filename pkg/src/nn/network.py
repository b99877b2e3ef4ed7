"""Feed-forward networks with per-layer noise registers and explicit traces."""

import copy
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from ..core.exceptions import DomainError, NumericError
from ..core.types import Tensor
from ..tensor.kernels import one_hot, softmax
from .layers import Grads, Layer, Relu, Shape

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Network:
    """
    Ordered layer stack.

    Noise sites are the places a register can be spliced in: site 0 is the
    network input, and every parametric layer whose output feeds a ReLU adds
    one site holding its pre-activation. Sites are numbered from the input
    towards the output.
    """

    layers: List[Layer]
    input_shape: Shape
    class_count: int
    activation_shapes: List[Shape] = field(init=False)

    def __post_init__(self):
        self.input_shape = tuple(int(d) for d in self.input_shape)
        shapes = [self.input_shape]
        for index, layer in enumerate(self.layers):
            try:
                shapes.append(layer.output_shape(shapes[-1]))
            except DomainError as e:
                raise DomainError(f"Layer {index} ({layer.kind}): {e}")
        if shapes[-1] != (self.class_count,):
            raise DomainError(
                f"Final output shape {shapes[-1]} does not match "
                f"class_count {self.class_count}"
            )
        self.activation_shapes = shapes

    def noise_sites(self) -> List[int]:
        """Activation indices that accept injected noise."""
        sites = [0]
        for index, layer in enumerate(self.layers[:-1]):
            if layer.parametric and isinstance(self.layers[index + 1], Relu):
                sites.append(index + 1)
        return sites

    def site_shape(self, site: int) -> Shape:
        return self.activation_shapes[self.noise_sites()[site]]

    def iter_parameters(self) -> Iterator[Tuple[int, str, Tensor]]:
        """(layer index, name, array) in declaration order."""
        for index, layer in enumerate(self.layers):
            for name, value in layer.parameters().items():
                yield index, name, value

    def parameter_count(self) -> int:
        return sum(value.size for _, _, value in self.iter_parameters())

    def parameter_digest(self) -> str:
        digest = hashlib.sha256()
        for index, name, value in self.iter_parameters():
            digest.update(f"{index}:{name}:{value.shape}".encode())
            digest.update(np.ascontiguousarray(value, dtype="<f8").tobytes())
        return digest.hexdigest()

    def copy(self) -> "Network":
        clone = copy.deepcopy(self)
        for _, _, value in clone.iter_parameters():
            value.setflags(write=True)
        return clone

    def freeze(self) -> "Network":
        """Mark parameters read-only; in-place updates then fail loudly."""
        for _, _, value in self.iter_parameters():
            value.setflags(write=False)
        return self

    @property
    def frozen(self) -> bool:
        return any(not value.flags.writeable for _, _, value in self.iter_parameters())

    def logits(self, x: Tensor, batch_size: Optional[int] = None) -> Tensor:
        if batch_size is None or x.shape[0] <= batch_size:
            return forward(self, x).logits
        chunks = [
            forward(self, x[start : start + batch_size]).logits
            for start in range(0, x.shape[0], batch_size)
        ]
        return np.concatenate(chunks, axis=0)

    def predict(self, x: Tensor, batch_size: Optional[int] = None) -> np.ndarray:
        return self.logits(x, batch_size).argmax(axis=1)


class NoiseRegister:
    """Per-site adversarial noise, one slice per example of the current batch."""

    def __init__(self, net: Network, sites: Iterable[int], batch_size: int):
        self._net = net
        self._site_count = len(net.noise_sites())
        self.tensors: Dict[int, Tensor] = {}
        for m in sorted(set(sites)):
            if not 0 <= m < self._site_count:
                raise DomainError(
                    f"Noise site {m} out of range; network has {self._site_count} sites"
                )
            self.tensors[m] = np.zeros((batch_size,) + net.site_shape(m))
        self.batch_size = batch_size

    @property
    def sites(self) -> List[int]:
        return list(self.tensors)

    def reset(self, batch_size: Optional[int] = None) -> "NoiseRegister":
        """Zero every register, resizing to ``batch_size`` when given."""
        if batch_size is not None:
            self.batch_size = batch_size
        for m in self.tensors:
            self.tensors[m] = np.zeros((self.batch_size,) + self._net.site_shape(m))
        return self

    def __getitem__(self, m: int) -> Tensor:
        return self.tensors[m]

    def __setitem__(self, m: int, value: Tensor):
        if m not in self.tensors:
            raise DomainError(f"Site {m} has no register")
        if value.shape != self.tensors[m].shape:
            raise DomainError(
                f"Register {m} shape {self.tensors[m].shape} cannot take {value.shape}"
            )
        self.tensors[m] = value

    def __contains__(self, m: int) -> bool:
        return m in self.tensors

    def is_zero(self) -> bool:
        return all(not np.any(value) for value in self.tensors.values())


@dataclass
class ForwardTrace:
    """Activations per layer boundary: ``activations[0]`` is the (noisy) input,
    ``activations[i + 1]`` the (noisy) output of layer ``i``."""

    activations: List[Tensor]
    caches: list
    noise_sites: List[int]
    loss: Optional[float] = None

    @property
    def logits(self) -> Tensor:
        return self.activations[-1]

    def pre_activation(self, m: int) -> Tensor:
        return self.activations[self.noise_sites[m]]

    def post_activation(self, m: int) -> Tensor:
        index = self.noise_sites[m]
        return self.activations[index + 1] if m > 0 else self.activations[index]


@dataclass
class BackwardTrace:
    """``grads[i]`` is dL/d activations[i]; ``param_grads[i]`` belongs to layer i."""

    grads: List[Tensor]
    param_grads: List[Grads]
    noise_sites: List[int]

    def hidden_gradient(self, m: int) -> Tensor:
        return self.grads[self.noise_sites[m]]


def _check_labels(y, batch: int, class_count: int) -> np.ndarray:
    labels = np.asarray(y, dtype=np.int64)
    if labels.shape != (batch,):
        raise DomainError(f"Expected {batch} labels, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= class_count):
        raise DomainError(f"Labels must lie in [0, {class_count})")
    return labels


def per_example_loss(logits: Tensor, y) -> Tensor:
    """-log softmax(logits)[y] per row."""
    labels = _check_labels(y, logits.shape[0], logits.shape[1])
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    return log_norm - shifted[np.arange(logits.shape[0]), labels]


def cross_entropy_loss(logits: Tensor, y) -> float:
    """Mean softmax cross-entropy over the batch."""
    if logits.ndim != 2 or logits.shape[0] == 0:
        raise DomainError(f"Logits must be (batch, classes), got {logits.shape}")
    return float(per_example_loss(logits, y).mean())


def cross_entropy_gradient(logits: Tensor, y) -> Tensor:
    labels = _check_labels(y, logits.shape[0], logits.shape[1])
    return (softmax(logits) - one_hot(labels, logits.shape[1])) / logits.shape[0]


def forward(
    net: Network,
    x: Tensor,
    registers: Optional[NoiseRegister] = None,
    y=None,
) -> ForwardTrace:
    """Run the layer stack, adding register noise at each registered site."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != len(net.input_shape) + 1 or x.shape[1:] != net.input_shape:
        raise DomainError(
            f"Input batch shape {x.shape} does not match (N,) + {net.input_shape}"
        )
    sites = net.noise_sites()
    noisy: Dict[int, Tensor] = {}
    if registers is not None:
        noisy = {sites[m]: registers[m] for m in registers.sites}

    def splice(index: int, value: Tensor) -> Tensor:
        if index not in noisy:
            return value
        if noisy[index].shape != value.shape:
            raise DomainError(
                f"Register shape {noisy[index].shape} does not match "
                f"pre-activation shape {value.shape} at activation {index}"
            )
        return value + noisy[index]

    activations = [splice(0, x)]
    caches = []
    for index, layer in enumerate(net.layers):
        out, cache = layer.forward(activations[-1])
        activations.append(splice(index + 1, out))
        caches.append(cache)

    trace = ForwardTrace(activations=activations, caches=caches, noise_sites=sites)
    if y is not None:
        trace.loss = cross_entropy_loss(trace.logits, y)
    return trace


def backpropagate(
    net: Network, trace: ForwardTrace, dlogits: Tensor, params: bool = True
) -> BackwardTrace:
    """Reverse-mode pass from an arbitrary upstream gradient on the logits."""
    grads: List[Optional[Tensor]] = [None] * (len(net.layers) + 1)
    param_grads: List[Grads] = [{} for _ in net.layers]
    grads[-1] = dlogits
    for index in range(len(net.layers) - 1, -1, -1):
        grads[index], param_grads[index] = net.layers[index].backward(
            grads[index + 1], trace.caches[index], params
        )
    if not np.all(np.isfinite(grads[0])):
        raise NumericError("Non-finite gradient reached the network input")
    return BackwardTrace(
        grads=grads, param_grads=param_grads, noise_sites=trace.noise_sites
    )


def backward(
    net: Network, trace: ForwardTrace, y, params: bool = True
) -> BackwardTrace:
    """dL/dz for every activation and dL/dθ for every parameter under cross-entropy."""
    return backpropagate(net, trace, cross_entropy_gradient(trace.logits, y), params)


def evaluate(
    net: Network, x: Tensor, y, batch_size: int = 500
) -> Tuple[float, float]:
    """Clean (accuracy, mean loss) over a dataset, in fixed-size chunks."""
    labels = np.asarray(y, dtype=np.int64)
    if labels.shape[0] == 0:
        raise DomainError("Cannot evaluate on an empty dataset")
    logits = net.logits(x, batch_size)
    accuracy = float((logits.argmax(axis=1) == labels).mean())
    return accuracy, cross_entropy_loss(logits, labels)
