"""Baseline-relative corruption errors and flip rates."""

import logging
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..core.config import settings
from ..core.exceptions import DomainError
from ..core.types import RelativeMceMode
from ..corruption.sequences import PerturbationSequence
from ..data.dataset import Dataset
from ..nn.network import Network

logger = logging.getLogger(__name__)


class ErrorTable(BaseModel):
    """Error rate per corruption kind and severity, plus the clean error."""

    errors: Dict[str, Dict[int, float]] = Field(
        description="kind -> severity -> error rate"
    )
    clean_error: float = Field(ge=0, le=1)

    @model_validator(mode="after")
    def _rates_in_unit_interval(self):
        for kind, rates in self.errors.items():
            for severity, rate in rates.items():
                if not 0.0 <= rate <= 1.0:
                    raise DomainError(
                        f"Error rate {rate} for {kind}@{severity} outside [0, 1]"
                    )
        return self

    @property
    def kinds(self) -> List[str]:
        return list(self.errors)

    def total(self, kind: str) -> float:
        return float(sum(self.errors[kind].values()))

    def severity_count(self, kind: str) -> int:
        return len(self.errors[kind])


class CorruptionErrorResult(BaseModel):
    ce: Dict[str, float] = Field(description="Per-kind corruption error x100")
    mce: float = Field(description="Mean of the per-kind CE")


class RelativeMceResult(BaseModel):
    relative_ce: Dict[str, float]
    relative_mce: float


class FlipRateResult(BaseModel):
    fp: Dict[str, float] = Field(description="Per-kind flip probability")
    fr: Dict[str, float] = Field(
        description="Per-kind flip rate x100, relative to the baseline"
    )
    mfr: float


def _error(model: Network, dataset: Dataset) -> float:
    predictions = model.predict(dataset.images, settings.eval_batch_size)
    return float((predictions != dataset.labels).mean())


def error_table(
    model: Network, clean: Dataset, corrupted: Mapping[Tuple[str, int], Dataset]
) -> ErrorTable:
    """Error rates on the clean set and every (kind, severity) corrupted set."""
    if len(clean) == 0:
        raise DomainError("Clean evaluation set is empty")
    errors: Dict[str, Dict[int, float]] = {}
    for (kind, severity), dataset in corrupted.items():
        errors.setdefault(kind, {})[int(severity)] = _error(model, dataset)
    return ErrorTable(errors=errors, clean_error=_error(model, clean))


def _check_coverage(model_table: ErrorTable, baseline: ErrorTable):
    for kind, rates in model_table.errors.items():
        missing = set(rates) - set(baseline.errors.get(kind, {}))
        if missing:
            raise DomainError(
                f"Baseline table has no {kind} entry for severities {sorted(missing)}"
            )


def _baseline_total(model_table: ErrorTable, baseline: ErrorTable, kind: str) -> float:
    """Baseline errors summed over the severities the model was scored on."""
    return sum(baseline.errors[kind][s] for s in model_table.errors[kind])


def scorable(
    model_table: ErrorTable, baseline: ErrorTable, excess: bool = False
) -> ErrorTable:
    """
    Drop kinds whose baseline denominator is not positive, with a warning.

    With ``excess`` the denominator is the baseline's corruption error minus
    its clean error per severity, as in Relative mCE.
    """
    _check_coverage(model_table, baseline)
    keep = {}
    for kind, rates in model_table.errors.items():
        total = _baseline_total(model_table, baseline, kind)
        if excess:
            total -= len(rates) * baseline.clean_error
        if total > 0.0:
            keep[kind] = rates
        else:
            logger.warning(
                f"Skipping {kind}: baseline denominator {total} is not positive"
            )
    return ErrorTable(errors=keep, clean_error=model_table.clean_error)


def corruption_error(
    model_table: ErrorTable, baseline_table: ErrorTable
) -> CorruptionErrorResult:
    """
    CE_c = sum_s E_{s,c} / sum_s E^base_{s,c} (x100), mCE = mean over kinds.

    Raises:
        DomainError: If a baseline kind sums to zero error
    """
    _check_coverage(model_table, baseline_table)
    if not model_table.kinds:
        raise DomainError("No corruption kinds to score")
    ce = {}
    for kind in model_table.kinds:
        denominator = _baseline_total(model_table, baseline_table, kind)
        if denominator <= 0.0:
            raise DomainError(f"Baseline makes no errors on {kind}; CE is undefined")
        ce[kind] = 100.0 * model_table.total(kind) / denominator
    return CorruptionErrorResult(ce=ce, mce=float(np.mean(list(ce.values()))))


def relative_mce(
    model_table: ErrorTable,
    baseline_table: ErrorTable,
    mode: RelativeMceMode = RelativeMceMode.PER_SEVERITY,
) -> RelativeMceResult:
    """
    Excess of corruption error over clean error, relative to the baseline's excess.

    With ``PER_SEVERITY`` the clean error is subtracted once per severity
    level; with ``ONCE`` it is subtracted a single time from the sum.
    """
    _check_coverage(model_table, baseline_table)
    if not model_table.kinds:
        raise DomainError("No corruption kinds to score")
    relative = {}
    for kind in model_table.kinds:
        count = 1
        if mode is RelativeMceMode.PER_SEVERITY:
            count = model_table.severity_count(kind)
        numerator = model_table.total(kind) - count * model_table.clean_error
        denominator = (
            _baseline_total(model_table, baseline_table, kind)
            - count * baseline_table.clean_error
        )
        if denominator <= 0.0:
            raise DomainError(
                f"Baseline corruption error on {kind} does not exceed its clean error; "
                "relative CE is undefined"
            )
        relative[kind] = 100.0 * numerator / denominator
    return RelativeMceResult(
        relative_ce=relative, relative_mce=float(np.mean(list(relative.values())))
    )


def flip_probability_from_predictions(predictions: Iterable[Sequence[int]]) -> float:
    """Flips between adjacent frames over all sequences, per adjacent pair."""
    flips = 0
    pairs = 0
    for sequence in predictions:
        labels = np.asarray(sequence)
        if labels.shape[0] < 2:
            raise DomainError("Every sequence needs at least two frames")
        flips += int((labels[1:] != labels[:-1]).sum())
        pairs += labels.shape[0] - 1
    if pairs == 0:
        raise DomainError("No sequences to score")
    return flips / pairs


def flip_probability(
    model: Network, sequences: Sequence[PerturbationSequence]
) -> float:
    if not sequences:
        raise DomainError("No sequences to score")
    frames = np.concatenate([s.frames for s in sequences])
    predictions = model.predict(frames, settings.eval_batch_size)
    bounds = np.cumsum([0] + [s.frames.shape[0] for s in sequences])
    return flip_probability_from_predictions(
        predictions[start:stop] for start, stop in zip(bounds[:-1], bounds[1:])
    )


def flip_probabilities(
    model: Network, sequences: Mapping[str, Sequence[PerturbationSequence]]
) -> Dict[str, float]:
    return {kind: flip_probability(model, group) for kind, group in sequences.items()}


def flip_rates(
    model: Network,
    sequences: Mapping[str, Sequence[PerturbationSequence]],
    baseline_fp: Mapping[str, float],
) -> FlipRateResult:
    """
    FR_c = FP_c / FP^base_c (x100), mFR = mean over kinds.

    Raises:
        DomainError: If the baseline never flips on some kind
    """
    fp = flip_probabilities(model, sequences)
    fr = {}
    for kind, value in fp.items():
        base = baseline_fp.get(kind, 0.0)
        if base <= 0.0:
            raise DomainError(
                f"Baseline flip probability on {kind} is zero; FR is undefined"
            )
        fr[kind] = 100.0 * value / base
    if not fr:
        raise DomainError("No sequences to score")
    logger.info(f"mFR {np.mean(list(fr.values())):.2f} over {len(fr)} kinds")
    return FlipRateResult(fp=fp, fr=fr, mfr=float(np.mean(list(fr.values()))))
