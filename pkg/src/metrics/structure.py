"""Structural robustness: decision-boundary distance and noise insensitivity."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from tqdm import tqdm

from ..attacks.craft import craft
from ..attacks.spec import AttackSpec
from ..core.config import settings
from ..core.exceptions import ConfigurationError, DomainError
from ..core.seeding import derive_rng, derive_seed
from ..core.types import TAU_ZERO, AttackMethod, CorruptionKind, Tensor
from ..corruption.kinds import PROFILES
from ..data.dataset import Dataset
from ..nn.layers import Relu
from ..nn.network import Network, forward, per_example_loss
from ..tensor.ops import clip_to_linf_ball, lp_norm_batch

logger = logging.getLogger(__name__)


class MarchDirections(BaseModel):
    """Orthonormal march directions (rows) with a step size and distance cap."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    directions: np.ndarray = Field(description="(m, D) orthonormal rows")
    step: float = Field(default=0.01, gt=0)
    cap: float = Field(default=10.0, gt=0)

    @model_validator(mode="after")
    def _orthonormal(self):
        self.directions = np.asarray(self.directions, dtype=np.float64)
        if self.directions.ndim != 2 or self.directions.shape[0] == 0:
            raise DomainError(
                "Directions must be a non-empty (m, D) array, "
                f"got {self.directions.shape}"
            )
        gram = self.directions @ self.directions.T
        if np.abs(gram - np.eye(gram.shape[0])).max() > 1e-9:
            raise DomainError("March directions are not orthonormal")
        return self

    @classmethod
    def random(
        cls, dim: int, m: int, seed: int = 0, step: float = 0.01, cap: float = 10.0
    ) -> "MarchDirections":
        """Orthonormalize m standard-Gaussian vectors with a QR decomposition."""
        if not 1 <= m <= dim:
            raise ConfigurationError(
                f"Need 1 <= m <= {dim} orthogonal directions, got {m}"
            )
        gaussian = derive_rng(seed, "march").standard_normal((dim, m))
        q, _ = np.linalg.qr(gaussian)
        return cls(directions=q.T.copy(), step=step, cap=cap)


class BoundaryDistanceResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    distances: np.ndarray = Field(description="d_i per image")
    flagged: np.ndarray = Field(
        description="Images where every direction reached the cap"
    )
    w_f: float


def _march(model: Network, x: Tensor, march: MarchDirections) -> Tuple[float, bool]:
    """
    First marched distance along +/- any direction that changes the prediction,
    and whether any did; (cap, False) when none crosses.
    """
    flat = x.reshape(-1)
    base = model.predict(x[None])[0]
    signed = np.concatenate([march.directions, -march.directions])
    steps = int(np.floor(march.cap / march.step + 1e-9))
    for j in range(1, steps + 1):
        t = j * march.step
        candidates = flat[None, :] + t * signed
        predictions = model.predict(
            candidates.reshape((-1,) + x.shape), settings.eval_batch_size
        )
        if np.any(predictions != base):
            return t, True
    return march.cap, False


def empirical_boundary_distance(
    model: Network, xs: Tensor, march: MarchDirections
) -> BoundaryDistanceResult:
    """
    Per image, the minimum over directions of the first marched distance that
    changes the predicted class (the cap when none does); W_f is their mean.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.shape[0] == 0:
        raise DomainError("No images to march from")
    if march.directions.shape[1] != xs[0].size:
        raise DomainError(
            f"March dimension {march.directions.shape[1]} does not match "
            f"input size {xs[0].size}"
        )
    progress = tqdm(xs, desc="Boundary march", disable=not settings.show_progress)
    marches = [_march(model, x, march) for x in progress]
    distances = np.array([distance for distance, _ in marches])
    flagged = np.array([not crossed for _, crossed in marches], dtype=bool)
    if flagged.any():
        logger.warning(
            f"{int(flagged.sum())} images never changed class within cap {march.cap}"
        )
    return BoundaryDistanceResult(
        distances=distances, flagged=flagged, w_f=float(distances.mean())
    )


class InsensitivitySample(BaseModel):
    """One clean input with its polluted neighbours inside an l-inf ball."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    polluted: np.ndarray = Field(description="(J,) + x.shape")
    label: int = Field(ge=0)
    eps: float = Field(ge=0)

    @model_validator(mode="after")
    def _inside_ball(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.polluted = np.asarray(self.polluted, dtype=np.float64)
        if self.polluted.shape[1:] != self.x.shape:
            raise DomainError(
                f"Polluted shape {self.polluted.shape} does not match x {self.x.shape}"
            )
        if not self.polluted.shape[0]:
            return self
        if lp_norm_batch(self.polluted - self.x, np.inf).max() > self.eps + 1e-12:
            raise DomainError(
                f"Polluted example farther than eps={self.eps} from its clean input"
            )
        return self


class InsensitivityResult(BaseModel):
    value: float = Field(ge=0)
    pairs_used: int
    pairs_skipped: int


def noise_insensitivity(
    model: Network, samples: Sequence[InsensitivitySample]
) -> InsensitivityResult:
    """
    Mean over clean/polluted pairs of |loss(x) - loss(mu)| / ||x - mu||_inf.

    Pairs closer than TAU_ZERO are skipped and counted.

    Raises:
        DomainError: If every pair is degenerate
    """
    ratios: List[np.ndarray] = []
    skipped = 0
    for sample in samples:
        if sample.polluted.shape[0] == 0:
            continue
        distance = lp_norm_batch(sample.polluted - sample.x, np.inf)
        keep = distance >= TAU_ZERO
        skipped += int((~keep).sum())
        if not keep.any():
            continue
        labels = np.full(int(keep.sum()) + 1, sample.label)
        batch = np.concatenate([sample.x[None], sample.polluted[keep]])
        losses = per_example_loss(model.logits(batch), labels)
        ratios.append(np.abs(losses[1:] - losses[0]) / distance[keep])
    if not ratios:
        raise DomainError(
            f"All {skipped} clean/polluted pairs are degenerate "
            f"(distance < {TAU_ZERO})"
        )
    values = np.concatenate(ratios)
    return InsensitivityResult(
        value=float(values.mean()), pairs_used=int(values.size), pairs_skipped=skipped
    )


def _pollute(
    model: Network, x: Tensor, label: int, budget: float, generator: str, seed: int
) -> Tensor:
    if generator in ("fgsm", "pgd", "stepll"):
        spec = AttackSpec(method=AttackMethod(generator), eps=budget, seed=seed)
        return craft(model, x[None], np.array([label]), spec).x_adv[0]
    rng = derive_rng(seed, "pollution")
    if generator == "gaussian":
        noisy = x + rng.normal(0.0, budget / 2.0, size=x.shape)
    else:
        shot = PROFILES[CorruptionKind.SHOT_NOISE]
        noisy = shot.apply(x, shot.levels[2], rng.standard_normal(x.shape))
    return clip_to_linf_ball(noisy, x, budget)


GENERATORS = ("fgsm", "pgd", "stepll", "gaussian", "shot")


def make_insensitivity_samples(
    model: Network, dataset: Dataset, eps: float, per_image: int = 10, seed: int = 0
) -> List[InsensitivitySample]:
    """
    ``per_image`` polluted neighbours for every image, cycling through the
    generators; the r-th pass over the generators uses budget eps*(r+1)/passes.
    """
    if per_image < 1:
        raise ConfigurationError(f"per_image must be >= 1, got {per_image}")
    passes = -(-per_image // len(GENERATORS))
    samples = []
    for i in range(len(dataset)):
        x, label = dataset.images[i], int(dataset.labels[i])
        polluted = [
            _pollute(
                model,
                x,
                label,
                eps * (j // len(GENERATORS) + 1) / passes,
                GENERATORS[j % len(GENERATORS)],
                derive_seed(seed, "pollution", i * per_image + j),
            )
            for j in range(per_image)
        ]
        samples.append(
            InsensitivitySample(x=x, polluted=np.stack(polluted), label=label, eps=eps)
        )
    return samples


class HiddenInsensitivityResult(BaseModel):
    per_layer: List[float] = Field(
        description="Scale-free activation change per parametric layer"
    )
    dead: List[bool] = Field(
        description="Layers with all-zero activations on the clean inputs"
    )
    mean: float


def representation_indices(net: Network) -> List[int]:
    """Activation index of each parametric layer output, after its ReLU if any."""
    indices = []
    for index, layer in enumerate(net.layers):
        if layer.parametric:
            follows = index + 1 < len(net.layers) and isinstance(
                net.layers[index + 1], Relu
            )
            indices.append(index + 2 if follows else index + 1)
    return indices


def hidden_insensitivity(
    model: Network, x: Tensor, x_prime: Tensor, eps: Optional[float] = None
) -> HiddenInsensitivityResult:
    """
    Per parametric layer: mean |a(x) - a(x')| over pairs and neurons, divided
    by the mean |a(x)|. A layer whose clean activations are all zero scores 0
    and is flagged dead.
    """
    x = np.asarray(x, dtype=np.float64)
    x_prime = np.asarray(x_prime, dtype=np.float64)
    if x.shape != x_prime.shape or x.shape[0] == 0:
        raise DomainError(
            f"Pairs must share a non-empty shape, got {x.shape} and {x_prime.shape}"
        )
    if eps is not None and lp_norm_batch(x_prime - x, np.inf).max() > eps + 1e-12:
        raise DomainError(f"Pair farther apart than eps={eps}")
    clean = forward(model, x).activations
    moved = forward(model, x_prime).activations
    per_layer, dead = [], []
    for index in representation_indices(model):
        scale = float(np.abs(clean[index]).mean())
        if scale == 0.0:
            per_layer.append(0.0)
            dead.append(True)
            continue
        per_layer.append(float(np.abs(clean[index] - moved[index]).mean()) / scale)
        dead.append(False)
    return HiddenInsensitivityResult(
        per_layer=per_layer, dead=dead, mean=float(np.mean(per_layer))
    )
