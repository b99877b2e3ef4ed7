"""
Training procedures, noise updates and layer masks.
"""

from .ablation import AblationRow, baseline_table, run_ablation, write_ablation_csv
from .config import (
    AnpConfig,
    TrainConfig,
    build_config,
    load_anp_config,
    load_config_file,
)
from .loop import (
    EpochRecord,
    TrainReport,
    anp_minibatch_step,
    sgd_update,
    train_adversarial,
    train_anp,
    train_vanilla,
)
from .masks import (
    LayerMask,
    default_mask,
    layer_mask_bottom,
    layer_mask_pair,
    layer_mask_single,
    layer_mask_top,
    parse_mask_spec,
    validate_mask,
)
from .noise import calibrate_site_scales, noise_update

__all__ = [
    "AblationRow",
    "AnpConfig",
    "EpochRecord",
    "LayerMask",
    "TrainConfig",
    "TrainReport",
    "anp_minibatch_step",
    "baseline_table",
    "build_config",
    "calibrate_site_scales",
    "default_mask",
    "layer_mask_bottom",
    "layer_mask_pair",
    "layer_mask_single",
    "layer_mask_top",
    "load_anp_config",
    "load_config_file",
    "noise_update",
    "parse_mask_spec",
    "run_ablation",
    "sgd_update",
    "train_adversarial",
    "train_anp",
    "train_vanilla",
    "write_ablation_csv",
]
