"""Mini-batch SGD training with noise propagation, vanilla and adversarial modes."""

import logging
import time
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field
from tqdm import tqdm

from ..attacks.craft import craft
from ..attacks.spec import AttackSpec
from ..core.config import settings
from ..core.exceptions import ConfigurationError, DomainError, NumericError
from ..core.files import PathLike, atomic_write_csv
from ..core.seeding import derive_rng, derive_seed
from ..core.types import AttackMethod, Tensor, TrainMode
from ..data.dataset import Dataset
from ..nn.layers import Grads
from ..nn.network import Network, NoiseRegister, backward, evaluate, forward
from ..tensor.ops import lp_norm_batch
from .config import AnpConfig, TrainConfig
from .masks import LayerMask, default_mask, validate_mask
from .noise import calibrate_site_scales, noise_update

logger = logging.getLogger(__name__)

StepFn = Callable[[Tensor, np.ndarray, int], List[float]]


class EpochRecord(BaseModel):
    """Clean metrics after one epoch."""

    epoch: int = Field(ge=1)
    train_accuracy: float = Field(ge=0, le=1)
    train_loss: float
    test_accuracy: Optional[float] = Field(default=None, ge=0, le=1)
    test_loss: Optional[float] = None
    mean_step_loss: float = Field(
        description="Mean loss over every SGD step of the epoch"
    )
    max_perturbation: Optional[float] = Field(
        default=None,
        description="Largest l-inf input deviation fed to SGD (adversarial mode)",
    )
    seconds: float = Field(default=0.0, description="Wall-clock, never written to CSV")


class TrainReport(BaseModel):
    """Per-epoch history of one training run."""

    mode: TrainMode
    config: Dict = Field(default_factory=dict)
    epochs: List[EpochRecord] = Field(default_factory=list)
    layer_mask: Optional[List[int]] = None
    site_eps: Dict[int, float] = Field(
        default_factory=dict, description="Resolved absolute eps per site"
    )
    checkpoint: Optional[str] = None
    wall_clock_seconds: float = 0.0

    @property
    def final(self) -> EpochRecord:
        return self.epochs[-1]

    def write_csv(self, path: PathLike):
        header = [
            "epoch",
            "train_accuracy",
            "train_loss",
            "test_accuracy",
            "test_loss",
            "mean_step_loss",
        ]
        rows = [
            [
                record.epoch,
                record.train_accuracy,
                record.train_loss,
                "" if record.test_accuracy is None else record.test_accuracy,
                "" if record.test_loss is None else record.test_loss,
                record.mean_step_loss,
            ]
            for record in self.epochs
        ]
        return atomic_write_csv(path, header, rows)


def sgd_update(net: Network, param_grads: List[Grads], lr: float):
    """theta <- theta - lr * dL/dtheta, in place."""
    for layer, grads in zip(net.layers, param_grads):
        params = layer.parameters()
        for name, grad in grads.items():
            params[name] -= lr * grad


def _average_grads(history: List[List[Grads]]) -> List[Grads]:
    return [
        {
            name: sum(step[index][name] for step in history) / len(history)
            for name in history[0][index]
        }
        for index in range(len(history[0]))
    ]


def anp_minibatch_step(
    net: Network,
    registers: NoiseRegister,
    x: Tensor,
    y,
    cfg: AnpConfig,
    site_eps: Optional[Dict[int, float]] = None,
) -> List[float]:
    """
    Run the k backward-forward iterations of one mini-batch.

    Iteration 0 sees zero noise. Every iteration updates the parameters from
    the current (noisy) trace, then moves each masked register along its
    per-example normalized hidden gradient.

    Returns:
        Loss of each of the k forward passes
    """
    registers.reset(x.shape[0])
    if site_eps is None:
        site_eps = {m: cfg.eps for m in registers.sites}
    losses = []
    history: List[List[Grads]] = []
    for _ in range(cfg.k):
        trace = forward(net, x, registers, y)
        losses.append(trace.loss)
        grads = backward(net, trace, y)
        if cfg.accumulate_updates:
            history.append(grads.param_grads)
        else:
            sgd_update(net, grads.param_grads, cfg.lr)
        for m in registers.sites:
            registers[m] = noise_update(
                registers[m],
                grads.hidden_gradient(m),
                cfg.eta,
                site_eps[m],
                cfg.k,
                cfg.p,
                per_example=True,
            )
    if history:
        sgd_update(net, _average_grads(history), cfg.lr)
    return losses


def plain_sgd_step(net: Network, x: Tensor, y, cfg: TrainConfig) -> List[float]:
    losses = []
    for _ in range(cfg.k):
        trace = forward(net, x, y=y)
        losses.append(trace.loss)
        sgd_update(net, backward(net, trace, y).param_grads, cfg.lr)
    return losses


def resolve_mask(net: Network, cfg: AnpConfig) -> LayerMask:
    if cfg.layer_mask is None:
        return default_mask(net)
    return validate_mask(net, cfg.layer_mask)


def resolve_site_eps(
    net: Network, x: Tensor, cfg: AnpConfig, mask: LayerMask
) -> Dict[int, float]:
    """Absolute eps per masked site; ``layer_eps`` entries win over the shared eps."""
    stray = sorted(set(cfg.layer_eps) - set(mask.indices))
    if stray:
        raise ConfigurationError(
            f"layer_eps sites {stray} are not in the layer mask {list(mask.indices)}"
        )
    if cfg.eps_units == "rms":
        scales = calibrate_site_scales(net, x, mask.indices, cfg.p)
        site_eps = {m: cfg.eps * scales[m] for m in mask.indices}
    else:
        site_eps = {m: cfg.eps for m in mask.indices}
    site_eps.update({m: float(eps) for m, eps in cfg.layer_eps.items()})
    return site_eps


def _run_epochs(
    net: Network,
    dataset: Dataset,
    cfg: TrainConfig,
    mode: TrainMode,
    step: StepFn,
    test_set: Optional[Dataset],
    report: TrainReport,
    perturbation: Optional[List[float]] = None,
) -> TrainReport:
    shuffle = derive_rng(cfg.seed, "shuffle")
    n = len(dataset)
    started = time.perf_counter()
    global_step = 0
    for epoch in range(1, cfg.epochs + 1):
        epoch_started = time.perf_counter()
        order = shuffle.permutation(n)
        losses: List[float] = []
        starts = range(0, n, cfg.batch_size)
        for start in tqdm(
            starts,
            desc=f"{mode.value} epoch {epoch}/{cfg.epochs}",
            disable=not settings.show_progress,
            leave=False,
        ):
            batch = order[start : start + cfg.batch_size]
            losses.extend(
                step(dataset.images[batch], dataset.labels[batch], global_step)
            )
            global_step += 1
        train_accuracy, train_loss = evaluate(
            net, dataset.images, dataset.labels, settings.eval_batch_size
        )
        record = EpochRecord(
            epoch=epoch,
            train_accuracy=train_accuracy,
            train_loss=train_loss,
            mean_step_loss=float(np.mean(losses)),
            seconds=time.perf_counter() - epoch_started,
        )
        if test_set is not None and len(test_set):
            record.test_accuracy, record.test_loss = evaluate(
                net, test_set.images, test_set.labels, settings.eval_batch_size
            )
        if perturbation is not None:
            record.max_perturbation = max(perturbation) if perturbation else 0.0
            perturbation.clear()
        report.epochs.append(record)
        test_note = (
            f", test acc {record.test_accuracy:.4f}"
            if record.test_accuracy is not None
            else ""
        )
        logger.info(
            f"[{mode.value}] epoch {epoch}: train acc {record.train_accuracy:.4f}, "
            f"loss {record.train_loss:.4f}{test_note} ({record.seconds:.1f}s)"
        )
    report.wall_clock_seconds = time.perf_counter() - started
    return report


def _check_trainable(net: Network, dataset: Dataset):
    if len(dataset) == 0:
        raise DomainError("Cannot train on an empty dataset")
    if net.frozen:
        raise ConfigurationError("Network parameters are frozen; train a copy instead")
    if dataset.input_shape != net.input_shape:
        raise DomainError(
            f"Dataset inputs {dataset.input_shape} do not match network "
            f"{net.input_shape}"
        )


def train_anp(
    net: Network, dataset: Dataset, cfg: AnpConfig, test_set: Optional[Dataset] = None
) -> TrainReport:
    """
    Train ``net`` in place with adversarial noise propagation.

    Noise scales are calibrated once, on the first shuffled mini-batch, before
    any parameter update.

    Args:
        net: Network to train
        dataset: Training data
        cfg: ANP hyperparameters
        test_set: Optional held-out data evaluated after each epoch

    Returns:
        TrainReport with one record per epoch
    """
    _check_trainable(net, dataset)
    mask = resolve_mask(net, cfg)
    first = derive_rng(cfg.seed, "shuffle").permutation(len(dataset))[: cfg.batch_size]
    site_eps = resolve_site_eps(net, dataset.images[first], cfg, mask)
    logger.info(
        f"ANP on sites {list(mask.indices)} "
        f"(k={cfg.k}, eta={cfg.eta}, p={cfg.p.value}); "
        f"eps per site: { {m: round(e, 6) for m, e in site_eps.items()} }"
    )
    registers = NoiseRegister(net, mask.indices, cfg.batch_size)

    def step(x: Tensor, y: np.ndarray, _: int) -> List[float]:
        return anp_minibatch_step(net, registers, x, y, cfg, site_eps)

    report = TrainReport(
        mode=TrainMode.ANP,
        config=cfg.model_dump(mode="json"),
        layer_mask=list(mask.indices),
        site_eps=site_eps,
    )
    return _run_epochs(net, dataset, cfg, TrainMode.ANP, step, test_set, report)


def train_vanilla(
    net: Network, dataset: Dataset, cfg: TrainConfig, test_set: Optional[Dataset] = None
) -> TrainReport:
    """Plain SGD with the same batching, shuffling and k steps per mini-batch as ANP."""
    _check_trainable(net, dataset)

    def step(x: Tensor, y: np.ndarray, _: int) -> List[float]:
        return plain_sgd_step(net, x, y, cfg)

    report = TrainReport(mode=TrainMode.VANILLA, config=cfg.model_dump(mode="json"))
    return _run_epochs(net, dataset, cfg, TrainMode.VANILLA, step, test_set, report)


def train_adversarial(
    net: Network,
    dataset: Dataset,
    cfg: TrainConfig,
    inner_attack: AttackSpec,
    test_set: Optional[Dataset] = None,
) -> TrainReport:
    """
    Replace every mini-batch by examples crafted against the current
    parameters before each SGD step (FGSM or PGD inner attack).

    Raises:
        ConfigurationError: For any other inner attack
    """
    if inner_attack.method not in (AttackMethod.FGSM, AttackMethod.PGD):
        raise ConfigurationError(
            "Adversarial training supports fgsm or pgd inner attacks, "
            f"not {inner_attack.method.value}"
        )
    _check_trainable(net, dataset)
    deviations: List[float] = []

    def step(x: Tensor, y: np.ndarray, index: int) -> List[float]:
        losses = []
        for inner in range(cfg.k):
            spec = inner_attack.model_copy(
                update={"seed": derive_seed(cfg.seed, "attack", index * cfg.k + inner)}
            )
            x_adv = craft(net, x, y, spec).x_adv
            deviation = float(lp_norm_batch(x_adv - x, np.inf).max())
            outside = x_adv.min() < 0.0 or x_adv.max() > 1.0
            if deviation > inner_attack.eps + 1e-12 or outside:
                raise NumericError(
                    f"Crafted batch left the eps-ball: deviation {deviation} > "
                    f"{inner_attack.eps}"
                )
            deviations.append(deviation)
            trace = forward(net, x_adv, y=y)
            losses.append(trace.loss)
            sgd_update(net, backward(net, trace, y).param_grads, cfg.lr)
        return losses

    report = TrainReport(
        mode=TrainMode.ADVERSARIAL,
        config={**cfg.model_dump(mode="json"), "inner_attack": inner_attack.label()},
    )
    return _run_epochs(
        net, dataset, cfg, TrainMode.ADVERSARIAL, step, test_set, report, deviations
    )
