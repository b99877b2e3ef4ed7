"""Shared fixtures: small seeded datasets and networks."""

import os

import numpy as np
import pytest

from src.data.dataset import Dataset
from src.data.registry import mnist_available
from src.data.synthetic import synth_blobs
from src.nn.builders import build_lenet_small, build_mlp


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def blobs_train():
    return synth_blobs(200, seed=1)


@pytest.fixture
def blobs_test():
    return synth_blobs(100, seed=2)


@pytest.fixture
def mlp(rng):
    return build_mlp([2, 16, 2], rng)


@pytest.fixture
def deep_mlp(rng):
    """Five noise sites: the input plus four hidden pre-activations."""
    return build_mlp([2, 8, 8, 8, 8, 2], rng)


@pytest.fixture
def lenet(rng):
    return build_lenet_small(rng)


@pytest.fixture
def tiny_images(rng):
    images = rng.uniform(0.1, 0.9, size=(6, 1, 8, 8))
    return Dataset(
        images=images,
        labels=np.array([0, 1, 2, 0, 1, 2]),
        name="tiny",
        split="test",
        class_count=3,
    )


@pytest.fixture
def mnist_dir():
    directory = os.environ.get("ANP_MNIST_DIR")
    if not mnist_available(directory):
        pytest.skip("MNIST IDX files not available (set ANP_MNIST_DIR)")
    return directory
