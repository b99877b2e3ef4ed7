"""Named dataset sources: ``mnist[:DIR]``, ``blobs[:CLASSES]``, ``spirals``."""

import logging
from pathlib import Path
from typing import Optional, Tuple

from ..core.config import settings
from ..core.exceptions import ConfigurationError
from ..core.seeding import derive_rng, derive_seed
from .dataset import Dataset
from .idx import load_idx
from .synthetic import synth_blobs, synth_spirals

logger = logging.getLogger(__name__)

MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}

SYNTHETIC_TRAIN = 1000
SYNTHETIC_TEST = 500


def mnist_available(directory: Optional[str]) -> bool:
    if not directory:
        return False
    root = Path(directory)
    return all(
        (root / name).is_file() for pair in MNIST_FILES.values() for name in pair
    )


def load_mnist(
    directory: str,
    seed: int = 0,
    train_subset: Optional[int] = None,
    test_subset: Optional[int] = None,
) -> Tuple[Dataset, Dataset]:
    """The MNIST train/test splits, each cut to a seeded subset."""
    root = Path(directory)
    splits = []
    for index, (split, (images, labels)) in enumerate(MNIST_FILES.items()):
        dataset = load_idx(root / images, root / labels, name="mnist", split=split)
        size = train_subset if split == "train" else test_subset
        if size is not None:
            dataset = dataset.subset(size, derive_rng(seed, "subset", index))
        splits.append(dataset)
    return tuple(splits)


def load_dataset_spec(spec: str, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """
    Resolve a ``--data`` value to (train, test).

    Raises:
        ConfigurationError: For unknown sources or a missing MNIST directory
    """
    name, _, argument = spec.strip().partition(":")
    name = name.lower()
    if name == "mnist":
        directory = argument or settings.mnist_dir
        if not directory:
            raise ConfigurationError(
                "mnist needs a directory: --data mnist:DIR or ANP_MNIST_DIR"
            )
        return load_mnist(directory, seed, settings.train_subset, settings.test_subset)
    if name == "blobs":
        if argument and not argument.isdigit():
            raise ConfigurationError(
                f"blobs needs an integer class count, got {spec!r}"
            )
        classes = int(argument) if argument else 2
        train_seed = derive_seed(seed, "synthetic", 0)
        test_seed = derive_seed(seed, "synthetic", 1)
        train = synth_blobs(SYNTHETIC_TRAIN, classes=classes, seed=train_seed)
        test = synth_blobs(SYNTHETIC_TEST, classes=classes, seed=test_seed)
    elif name == "spirals":
        train = synth_spirals(SYNTHETIC_TRAIN, seed=derive_seed(seed, "synthetic", 0))
        test = synth_spirals(SYNTHETIC_TEST, seed=derive_seed(seed, "synthetic", 1))
    else:
        raise ConfigurationError(
            f"Unknown dataset {spec!r}; use mnist:DIR, blobs or spirals"
        )
    test = test.model_copy(update={"split": "test"})
    logger.info(f"Generated {name}: {len(train)} train / {len(test)} test points")
    return train, test
