"""Batched crafting, white-box accuracy and worst-case transfer accuracy."""

import logging
from typing import List, Sequence

import numpy as np
from tqdm import tqdm

from ..core.config import settings
from ..core.exceptions import ConfigurationError
from ..core.seeding import derive_seed
from ..core.types import Tensor
from ..nn.network import Network
from .craft import AdversarialBatch, craft
from .spec import AttackSpec

logger = logging.getLogger(__name__)


def craft_dataset(
    model: Network, x: Tensor, y, spec: AttackSpec, batch_size: int | None = None
) -> AdversarialBatch:
    """Craft over ``x`` in chunks; chunk i draws its random start from ``spec.seed``."""
    batch_size = batch_size or settings.eval_batch_size
    labels = np.asarray(y, dtype=np.int64)
    if x.shape[0] <= batch_size:
        return craft(model, x, labels, spec)
    parts: List[AdversarialBatch] = []
    starts = range(0, x.shape[0], batch_size)
    for index, start in enumerate(
        tqdm(
            starts,
            desc=f"Crafting {spec.method.value}",
            disable=not settings.show_progress,
        )
    ):
        seed = derive_seed(spec.seed, "attack", index)
        chunk = slice(start, start + batch_size)
        parts.append(
            craft(
                model, x[chunk], labels[chunk], spec.model_copy(update={"seed": seed})
            )
        )
    return AdversarialBatch(
        x_adv=np.concatenate([p.x_adv for p in parts]),
        success_mask=np.concatenate([p.success_mask for p in parts]),
        distortion=np.concatenate([p.distortion for p in parts]),
    )


def accuracy(model: Network, x: Tensor, y) -> float:
    labels = np.asarray(y, dtype=np.int64)
    return float((model.predict(x, settings.eval_batch_size) == labels).mean())


def white_box_accuracy(model: Network, x: Tensor, y, spec: AttackSpec) -> float:
    """Accuracy of ``model`` on examples crafted against itself."""
    adversarial = craft_dataset(model, x, y, spec)
    return accuracy(model, adversarial.x_adv, y)


def worst_case_accuracy(
    target: Network, holdouts: Sequence[Network], x: Tensor, y, spec: AttackSpec
) -> float:
    """
    Transfer examples crafted on each holdout to ``target`` and keep the
    lowest accuracy.

    Raises:
        ConfigurationError: If no holdout model is given
    """
    if not holdouts:
        raise ConfigurationError(
            "Worst-case black-box accuracy needs at least one holdout model"
        )
    accuracies = []
    for index, holdout in enumerate(holdouts):
        adversarial = craft_dataset(holdout, x, y, spec)
        accuracies.append(accuracy(target, adversarial.x_adv, y))
        logger.info(
            f"Holdout {index}: target accuracy {accuracies[-1]:.4f} "
            f"under {spec.label()}"
        )
    return min(accuracies)
