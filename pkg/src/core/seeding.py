"""Seed derivation: every random stream flows from one experiment seed."""

import numpy as np

from .types import Rng

# Fixed offsets per consumer so streams never overlap.
SEED_OFFSETS = {
    "init": 0,
    "shuffle": 1,
    "attack": 2,
    "corruption": 3,
    "march": 4,
    "subset": 5,
    "synthetic": 6,
    "pollution": 7,
    "holdout": 8,
}


def derive_seed(seed: int, purpose: str, index: int = 0) -> int:
    """32-bit seed for the ``purpose`` stream and its ``index``-th substream."""
    if purpose not in SEED_OFFSETS:
        raise KeyError(f"Unknown seed purpose: {purpose}")
    sequence = np.random.SeedSequence([int(seed), SEED_OFFSETS[purpose], int(index)])
    return int(sequence.generate_state(1)[0])


def derive_rng(seed: int, purpose: str, index: int = 0) -> Rng:
    return np.random.default_rng(derive_seed(seed, purpose, index))
