"""In-memory labelled datasets."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.exceptions import DomainError
from ..core.types import Rng


class Dataset(BaseModel):
    """Images (N, ...) in [0, 1] with one integer label each."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    images: np.ndarray = Field(description="float64 inputs, leading batch axis")
    labels: np.ndarray = Field(description="int64 class ids")
    name: str = Field(default="dataset")
    split: str = Field(default="train")
    class_count: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _check_invariants(self):
        self.images = np.ascontiguousarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim < 2:
            raise DomainError(
                f"Images need a batch axis, got shape {self.images.shape}"
            )
        if self.labels.shape != (self.images.shape[0],):
            raise DomainError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )
        labels = self.labels
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise DomainError(f"Labels must lie in [0, {self.class_count})")
        if self.images.size and (self.images.min() < 0.0 or self.images.max() > 1.0):
            raise DomainError("Images must lie in [0, 1]")
        return self

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def input_shape(self) -> tuple:
        return tuple(self.images.shape[1:])

    def take(self, indices, split: str | None = None) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            images=self.images[indices],
            labels=self.labels[indices],
            name=self.name,
            split=split or self.split,
            class_count=self.class_count,
        )

    def subset(self, n: int, rng: Rng) -> "Dataset":
        """``n`` examples chosen by a seeded shuffle (all of them if n >= len)."""
        if n >= len(self):
            return self
        return self.take(np.sort(rng.permutation(len(self))[:n]))

    def head(self, n: int) -> "Dataset":
        return self.take(np.arange(min(n, len(self))))
