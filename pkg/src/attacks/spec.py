"""Declarative attack descriptions and their command-line spelling."""

from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, ValidationError, model_validator

from ..core.exceptions import ConfigurationError
from ..core.types import AttackMethod

# steps, alpha as a fraction of eps
_DEFAULTS: Dict[AttackMethod, tuple] = {
    AttackMethod.FGSM: (1, 1.0),
    AttackMethod.STEP_LL: (1, 1.0),
    AttackMethod.BIM: (10, 0.1),
    AttackMethod.PGD: (10, 0.25),
    AttackMethod.MI_FGSM: (10, 0.1),
    AttackMethod.CW_L2: (100, 0.0),
}


class AttackSpec(BaseModel):
    """One perturbation procedure; inputs are assumed to live in [0, 1]."""

    method: AttackMethod
    eps: float = Field(ge=0, description="l-inf budget, or l2 acceptance cap for cwl2")
    steps: Optional[int] = Field(default=None, ge=1, description="Iterations")
    alpha: Optional[float] = Field(default=None, ge=0, description="Per-step size")
    mu: float = Field(default=1.0, ge=0, description="Momentum decay (mifgsm)")
    confidence: float = Field(default=0.0, ge=0, description="Margin kappa (cwl2)")
    binary_search_steps: int = Field(
        default=5, ge=1, description="Trade-off searches (cwl2)"
    )
    learning_rate: float = Field(default=0.01, gt=0, description="Adam step (cwl2)")
    initial_const: float = Field(
        default=1.0, gt=0, description="Initial trade-off (cwl2)"
    )
    seed: int = Field(default=0, ge=0, description="Random start seed (pgd)")

    @model_validator(mode="after")
    def _fill_defaults(self):
        steps, alpha_fraction = _DEFAULTS[self.method]
        if self.steps is None:
            self.steps = steps
        if self.alpha is None:
            if self.method is AttackMethod.MI_FGSM:
                self.alpha = self.eps / self.steps
            else:
                self.alpha = self.eps * alpha_fraction
        reach = self.alpha * self.steps
        if self.method is AttackMethod.PGD and reach < self.eps - 1e-12:
            raise ValueError(f"pgd alpha*steps = {reach} cannot cover eps = {self.eps}")
        return self

    @property
    def linf(self) -> bool:
        return self.method is not AttackMethod.CW_L2

    @classmethod
    def parse(cls, text: str) -> "AttackSpec":
        """Parse ``method:key=value,...``, e.g. ``pgd:eps=0.0313,steps=10``."""
        method, _, rest = text.strip().partition(":")
        try:
            name = method.strip().lower().replace("-", "").replace("_", "")
            method_enum = AttackMethod(name)
        except ValueError:
            raise ConfigurationError(
                f"Unknown attack method {method!r}; choose from "
                f"{', '.join(m.value for m in AttackMethod)}"
            )
        values: Dict[str, Any] = {"method": method_enum}
        for item in [part for part in rest.split(",") if part.strip()]:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigurationError(f"Attack parameter {item!r} is not key=value")
            values[key.strip()] = value.strip()
        return cls.build(**values)

    @classmethod
    def build(cls, **values: Any) -> "AttackSpec":
        unknown = sorted(set(values) - set(cls.model_fields))
        if unknown:
            raise ConfigurationError(f"Unknown attack parameters: {', '.join(unknown)}")
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid attack spec: {e}")

    def label(self) -> str:
        """Canonical spelling, stable across runs."""
        parts = [f"eps={self.eps!r}", f"steps={self.steps}", f"alpha={self.alpha!r}"]
        if self.method is AttackMethod.MI_FGSM:
            parts.append(f"mu={self.mu!r}")
        if self.method is AttackMethod.PGD:
            parts.append(f"seed={self.seed}")
        return f"{self.method.value}:{','.join(parts)}"
