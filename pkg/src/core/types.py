"""Type definitions for ANP-Lab."""

from enum import Enum

import numpy as np

# Dense float64 array, row-major; the carrier of inputs, activations,
# gradients and noise.
Tensor = np.ndarray

# Seeded PCG64 generator; equal seeds give bit-identical sample streams.
Rng = np.random.Generator

# Norms below this are treated as zero when normalizing.
TAU_ZERO = 1e-12


class NormOrder(str, Enum):
    """Supported lp norm orders."""

    L1 = "1"
    L2 = "2"
    LINF = "inf"

    @property
    def value_p(self) -> float:
        return np.inf if self is NormOrder.LINF else float(self.value)


class TrainMode(str, Enum):
    """Training procedures exposed on the command line."""

    ANP = "anp"
    VANILLA = "vanilla"
    ADVERSARIAL = "adversarial"


class AttackMethod(str, Enum):
    """White-box attack algorithms."""

    FGSM = "fgsm"
    BIM = "bim"
    PGD = "pgd"
    STEP_LL = "stepll"
    MI_FGSM = "mifgsm"
    CW_L2 = "cwl2"


class CorruptionKind(str, Enum):
    """Desk-scale common corruptions."""

    GAUSSIAN_NOISE = "gaussian_noise"
    SHOT_NOISE = "shot_noise"
    IMPULSE_NOISE = "impulse_noise"
    BOX_BLUR = "box_blur"
    MOTION_BLUR = "motion_blur"
    BRIGHTNESS = "brightness"
    CONTRAST = "contrast"
    PIXELATE = "pixelate"


class RelativeMceMode(str, Enum):
    """How the clean error is subtracted in Relative mCE."""

    PER_SEVERITY = "per_severity"
    ONCE = "once"
