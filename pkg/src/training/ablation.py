"""Layer-mask sweeps: one ANP training run per mask, scored side by side."""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from ..attacks.blackbox import accuracy, white_box_accuracy
from ..attacks.spec import AttackSpec
from ..core.config import settings
from ..core.files import PathLike, atomic_write_csv
from ..core.types import AttackMethod
from ..corruption.kinds import CorruptionSpec, corrupt_dataset
from ..data.dataset import Dataset
from ..metrics.corruption import ErrorTable, corruption_error, error_table, scorable
from ..nn.network import Network
from .config import AnpConfig, TrainConfig
from .loop import train_anp, train_vanilla
from .masks import LayerMask

logger = logging.getLogger(__name__)

HEADER = ("mask", "indices", "clean_accuracy", "fgsm_accuracy", "mce")


class AblationRow(BaseModel):
    mask: str
    indices: Tuple[int, ...]
    clean_accuracy: float = Field(ge=0, le=1)
    fgsm_accuracy: float = Field(ge=0, le=1)
    mce: Optional[float] = Field(
        default=None, description="None when no corruption suite is scored"
    )
    sort_key: Tuple[str, Tuple[int, ...]] = Field(exclude=True)


def _corrupted_sets(
    test: Dataset, specs: Sequence[CorruptionSpec]
) -> Dict[Tuple[str, int], Dataset]:
    return {spec.key: corrupt_dataset(test, spec) for spec in specs}


def baseline_table(
    net: Network,
    train: Dataset,
    test: Dataset,
    cfg: TrainConfig,
    specs: Sequence[CorruptionSpec],
) -> ErrorTable:
    """Error table of a vanilla model trained from the same initialization."""
    model = net.copy()
    vanilla = TrainConfig(**cfg.model_dump(include=set(TrainConfig.model_fields)))
    train_vanilla(model, train, vanilla)
    return error_table(model, test, _corrupted_sets(test, specs))


def _evaluate_mask(
    net: Network,
    train: Dataset,
    test: Dataset,
    cfg: AnpConfig,
    mask: LayerMask,
    fgsm: AttackSpec,
    specs: Sequence[CorruptionSpec],
    baseline: Optional[ErrorTable],
) -> AblationRow:
    model = net.copy()
    train_anp(model, train, cfg.model_copy(update={"layer_mask": list(mask.indices)}))
    mce = None
    if specs and baseline is not None:
        table = error_table(model, test, _corrupted_sets(test, specs))
        table = scorable(table, baseline)
        if table.kinds:
            mce = corruption_error(table, baseline).mce
    row = AblationRow(
        mask=mask.label,
        indices=mask.indices,
        clean_accuracy=accuracy(model, test.images, test.labels),
        fgsm_accuracy=white_box_accuracy(model, test.images, test.labels, fgsm),
        mce=mce,
        sort_key=mask.sort_key(),
    )
    logger.info(
        f"Mask {mask.label}: clean {row.clean_accuracy:.4f}, "
        f"fgsm {row.fgsm_accuracy:.4f}, mCE {mce}"
    )
    return row


def run_ablation(
    net: Network,
    train: Dataset,
    test: Dataset,
    cfg: AnpConfig,
    masks: Sequence[LayerMask],
    fgsm_eps: float = 0.2,
    specs: Sequence[CorruptionSpec] = (),
    baseline: Optional[ErrorTable] = None,
    n_jobs: Optional[int] = None,
) -> List[AblationRow]:
    """
    Train one copy of ``net`` per mask and score it.

    Every run starts from the same initialization and seed. Rows come back
    sorted by mask key whatever the completion order. When ``specs`` is given
    without a ``baseline``, a vanilla model trained from ``net`` is the baseline.
    """
    fgsm = AttackSpec(method=AttackMethod.FGSM, eps=fgsm_eps)
    if specs and baseline is None:
        baseline = baseline_table(net, train, test, cfg, specs)
    jobs = n_jobs if n_jobs is not None else settings.n_jobs
    logger.info(f"Ablating {len(masks)} masks with n_jobs={jobs}")
    rows = Parallel(n_jobs=jobs)(
        delayed(_evaluate_mask)(net, train, test, cfg, mask, fgsm, specs, baseline)
        for mask in masks
    )
    return sorted(rows, key=lambda row: row.sort_key)


def write_ablation_csv(rows: Sequence[AblationRow], path: PathLike):
    return atomic_write_csv(
        path,
        HEADER,
        (
            [
                row.mask,
                " ".join(str(i) for i in row.indices),
                row.clean_accuracy,
                row.fgsm_accuracy,
                "" if row.mce is None else row.mce,
            ]
            for row in rows
        ),
    )
