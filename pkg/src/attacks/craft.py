"""White-box adversarial example crafting against a fixed network."""

import logging
from typing import Callable, Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..core.exceptions import DomainError
from ..core.types import AttackMethod, Tensor
from ..nn.network import Network, backpropagate, backward, forward
from ..tensor.kernels import one_hot
from ..tensor.ops import clip_to_linf_ball, lp_norm_batch, normalize_lp_batch
from .spec import AttackSpec

logger = logging.getLogger(__name__)

# keeps arctanh finite at the box edges
_TANH_SHRINK = 0.999999


class AdversarialBatch(BaseModel):
    """Crafted inputs with per-example success flags and distortion."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    x_adv: np.ndarray
    success_mask: np.ndarray = Field(description="Prediction differs from the label")
    distortion: np.ndarray = Field(description="l-inf (or l2 for cwl2) distance to x")
    audit: List[np.ndarray] = Field(
        default_factory=list,
        description="cwl2: best successful l2 per example at each binary-search step",
    )

    @property
    def success_rate(self) -> float:
        return float(self.success_mask.mean()) if self.success_mask.size else 0.0


def input_gradient(model: Network, x: Tensor, y) -> Tensor:
    """Gradient of the mean cross-entropy with respect to the input batch."""
    trace = forward(model, x)
    return backward(model, trace, y, params=False).grads[0]


def _fgsm(
    model: Network, x: Tensor, y: np.ndarray, spec: AttackSpec
) -> AdversarialBatch:
    step = spec.eps * np.sign(input_gradient(model, x, y))
    return _finish(model, x, y, clip_to_linf_ball(x + step, x, spec.eps), spec)


def _step_ll(
    model: Network, x: Tensor, y: np.ndarray, spec: AttackSpec
) -> AdversarialBatch:
    least_likely = model.logits(x).argmin(axis=1)
    step = spec.eps * np.sign(input_gradient(model, x, least_likely))
    return _finish(model, x, y, clip_to_linf_ball(x - step, x, spec.eps), spec)


def _iterative(
    model: Network, x: Tensor, y: np.ndarray, spec: AttackSpec, x_adv: Tensor
) -> Tensor:
    for _ in range(spec.steps):
        step = spec.alpha * np.sign(input_gradient(model, x_adv, y))
        x_adv = clip_to_linf_ball(x_adv + step, x, spec.eps)
    return x_adv


def _bim(
    model: Network, x: Tensor, y: np.ndarray, spec: AttackSpec
) -> AdversarialBatch:
    return _finish(model, x, y, _iterative(model, x, y, spec, x.copy()), spec)


def _pgd(
    model: Network, x: Tensor, y: np.ndarray, spec: AttackSpec
) -> AdversarialBatch:
    rng = np.random.default_rng(spec.seed)
    jitter = rng.uniform(-spec.eps, spec.eps, size=x.shape)
    start = clip_to_linf_ball(x + jitter, x, spec.eps)
    return _finish(model, x, y, _iterative(model, x, y, spec, start), spec)


def _mi_fgsm(
    model: Network, x: Tensor, y: np.ndarray, spec: AttackSpec
) -> AdversarialBatch:
    x_adv = x.copy()
    velocity = np.zeros_like(x)
    for _ in range(spec.steps):
        g = input_gradient(model, x_adv, y)
        velocity = spec.mu * velocity + normalize_lp_batch(g, 1)
        x_adv = clip_to_linf_ball(x_adv + spec.alpha * np.sign(velocity), x, spec.eps)
    return _finish(model, x, y, x_adv, spec)


def _cw_l2(
    model: Network, x: Tensor, y: np.ndarray, spec: AttackSpec
) -> AdversarialBatch:
    """
    Margin loss in tanh space with Adam, binary search on the trade-off constant.
    Keeps the smallest-l2 misclassified iterate per example; failures return x.
    """
    batch = x.shape[0]
    axes = tuple(range(1, x.ndim))
    shape = (-1,) + (1,) * (x.ndim - 1)
    w_start = np.arctanh((2.0 * x - 1.0) * _TANH_SHRINK)
    target = one_hot(y, model.class_count)

    const = np.full(batch, spec.initial_const)
    lower = np.zeros(batch)
    upper = np.full(batch, 1e10)
    best_l2 = np.full(batch, np.inf)
    best_adv = x.copy()
    audit = []

    for _ in range(spec.binary_search_steps):
        w = w_start.copy()
        m = np.zeros_like(w)
        v = np.zeros_like(w)
        step_best = np.full(batch, np.inf)
        for it in range(1, spec.steps + 1):
            x_adv = (np.tanh(w) + 1.0) / 2.0
            trace = forward(model, x_adv)
            logits = trace.logits
            other = np.where(target > 0, -np.inf, logits).max(axis=1)
            runner_up = np.where(target > 0, -np.inf, logits).argmax(axis=1)
            real = logits[np.arange(batch), y]
            margin = real - other + spec.confidence
            l2 = np.sqrt(((x_adv - x) ** 2).sum(axis=axes))

            hit = (
                (logits.argmax(axis=1) != y)
                & (real - other <= -spec.confidence)
                & (l2 <= spec.eps)
            )
            improved = hit & (l2 < step_best)
            step_best = np.where(improved, l2, step_best)
            better = hit & (l2 < best_l2)
            best_l2 = np.where(better, l2, best_l2)
            best_adv[better] = x_adv[better]

            active = (margin > 0).astype(np.float64) * const
            dlogits = active[:, None] * (target - one_hot(runner_up, model.class_count))
            grad_x = backpropagate(model, trace, dlogits, params=False).grads[0]
            grad_x = grad_x + 2.0 * (x_adv - x)
            grad_w = grad_x * (1.0 - np.tanh(w) ** 2) / 2.0

            m = 0.9 * m + 0.1 * grad_w
            v = 0.999 * v + 0.001 * grad_w**2
            m_hat = m / (1.0 - 0.9**it)
            v_hat = v / (1.0 - 0.999**it)
            w = w - spec.learning_rate * m_hat / (np.sqrt(v_hat) + 1e-8)

        audit.append(step_best)
        succeeded = np.isfinite(step_best)
        upper = np.where(succeeded, np.minimum(upper, const), upper)
        lower = np.where(succeeded, lower, np.maximum(lower, const))
        const = np.where(upper < 1e9, (lower + upper) / 2.0, const * 10.0)

    success = np.isfinite(best_l2)
    x_adv = np.where(success.reshape(shape), best_adv, x)
    distortion = np.where(success, best_l2, 0.0)
    predicted = model.predict(x_adv)
    logger.debug(f"C&W-l2 succeeded on {success.sum()}/{batch} examples")
    return AdversarialBatch(
        x_adv=x_adv,
        success_mask=predicted != y,
        distortion=distortion,
        audit=audit,
    )


def _finish(
    model: Network, x: Tensor, y: np.ndarray, x_adv: Tensor, spec: AttackSpec
) -> AdversarialBatch:
    return AdversarialBatch(
        x_adv=x_adv,
        success_mask=model.predict(x_adv) != y,
        distortion=lp_norm_batch(x_adv - x, np.inf),
    )


ATTACKS: Dict[AttackMethod, Callable[..., AdversarialBatch]] = {
    AttackMethod.FGSM: _fgsm,
    AttackMethod.BIM: _bim,
    AttackMethod.PGD: _pgd,
    AttackMethod.STEP_LL: _step_ll,
    AttackMethod.MI_FGSM: _mi_fgsm,
    AttackMethod.CW_L2: _cw_l2,
}


def craft(model: Network, x: Tensor, y, spec: AttackSpec) -> AdversarialBatch:
    """
    Craft adversarial examples for a batch.

    Args:
        model: Network to attack; its parameters are only read
        x: Clean batch in [0, 1]
        y: True labels
        spec: Attack description

    Returns:
        AdversarialBatch with crafted inputs, success flags and distortions
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(y, dtype=np.int64)
    if x.shape[0] != labels.shape[0]:
        raise DomainError(f"{x.shape[0]} inputs but {labels.shape[0]} labels")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise DomainError("Attack inputs must lie in [0, 1]")
    if spec.eps == 0.0:
        return AdversarialBatch(
            x_adv=x.copy(),
            success_mask=model.predict(x) != labels,
            distortion=np.zeros(x.shape[0]),
        )
    return ATTACKS[spec.method](model, x, labels, spec)
