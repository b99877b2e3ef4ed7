"""Training hyperparameters and the flat key=value config file."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Type, TypeVar

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError, field_validator

from ..core.exceptions import ConfigurationError
from ..core.files import PathLike
from ..core.types import NormOrder

logger = logging.getLogger(__name__)

ConfigT = TypeVar("ConfigT", bound=BaseModel)


class TrainConfig(BaseModel):
    """Plain SGD settings shared by every training procedure."""

    lr: float = Field(default=0.05, gt=0, description="SGD learning rate")
    epochs: int = Field(default=10, ge=1)
    batch_size: int = Field(default=64, ge=1)
    seed: int = Field(default=0, ge=0)
    k: int = Field(default=1, ge=1, description="SGD steps per mini-batch")


class AnpConfig(TrainConfig):
    """Adversarial noise propagation settings."""

    eta: float = Field(default=0.1, ge=0, lt=1, description="Noise decay coefficient")
    eps: float = Field(default=1.0, ge=0, description="Noise magnitude per mini-batch")
    k: int = Field(default=3, ge=1, description="Progressive backward-forward steps")
    p: NormOrder = Field(
        default=NormOrder.L2, description="Norm used to scale noise steps"
    )
    layer_mask: Optional[List[int]] = Field(
        default=None, description="Noisy site indices; None means the top-4 sites"
    )
    eps_units: Literal["rms", "absolute"] = Field(
        default="rms",
        description="'rms': eps is relative to each site's pre-activation RMS at init",
    )
    layer_eps: Dict[int, float] = Field(
        default_factory=dict, description="Absolute per-site eps overrides"
    )
    accumulate_updates: bool = Field(
        default=False, description="Apply one averaged update after the k steps"
    )

    @field_validator("p", mode="before")
    @classmethod
    def _coerce_norm(cls, value: Any) -> Any:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return "inf" if value == float("inf") else str(int(value))
        if isinstance(value, str) and value.strip().lower() in ("linf", "∞"):
            return "inf"
        return value

    @field_validator("layer_mask", mode="before")
    @classmethod
    def _split_mask(cls, value: Any) -> Any:
        if isinstance(value, str):
            text = value.strip()
            if text.lower() in ("", "none", "default"):
                return None
            return [int(part) for part in text.split(",") if part.strip()]
        return value

    @field_validator("layer_mask")
    @classmethod
    def _unique_mask(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None:
            if len(set(value)) != len(value):
                raise ValueError(f"duplicate indices in layer_mask {value}")
            if any(index < 0 for index in value):
                raise ValueError(f"negative index in layer_mask {value}")
        return value

    @field_validator("layer_eps", mode="before")
    @classmethod
    def _split_layer_eps(cls, value: Any) -> Any:
        if isinstance(value, str):
            pairs = [item.split(":") for item in value.split(",") if item.strip()]
            return {int(site): float(eps) for site, eps in pairs}
        return value

    @field_validator("layer_eps")
    @classmethod
    def _non_negative_layer_eps(cls, value: Dict[int, float]) -> Dict[int, float]:
        if any(eps < 0 for eps in value.values()):
            raise ValueError(f"layer_eps values must be non-negative: {value}")
        return value

    def without_noise(self) -> "AnpConfig":
        return self.model_copy(update={"eps": 0.0})


def build_config(cls: Type[ConfigT], values: Mapping[str, Any]) -> ConfigT:
    """Validate ``values`` into ``cls``; any problem is a ConfigurationError."""
    unknown = sorted(set(values) - set(cls.model_fields))
    if unknown:
        raise ConfigurationError(f"Unknown {cls.__name__} keys: {', '.join(unknown)}")
    try:
        return cls(**values)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid {cls.__name__}: {e}")


def load_config_file(path: PathLike) -> Dict[str, str]:
    """Read a flat ``key=value`` file with ``#`` comments."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")
    values = {
        key: value for key, value in dotenv_values(path).items() if value is not None
    }
    logger.info(f"Loaded {len(values)} config keys from {path}")
    return values


def load_anp_config(
    path: Optional[PathLike] = None, overrides: Optional[Mapping[str, Any]] = None
) -> AnpConfig:
    """File values first, then ``overrides`` (CLI flags) on top."""
    values: Dict[str, Any] = dict(load_config_file(path)) if path else {}
    values.update(
        {key: value for key, value in (overrides or {}).items() if value is not None}
    )
    return build_config(AnpConfig, values)
