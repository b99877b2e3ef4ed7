"""Command-line interface for ANP-Lab."""

import io
import logging
import sys
from pathlib import Path
from typing import Annotated, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
import typer

from ..attacks.blackbox import (
    accuracy,
    craft_dataset,
    white_box_accuracy,
    worst_case_accuracy,
)
from ..attacks.spec import AttackSpec
from ..core.config import settings
from ..core.exceptions import (
    ConfigurationError,
    DomainError,
    FormatError,
    NumericError,
    UnsupportedArchitectureError,
)
from ..core.files import atomic_write_bytes
from ..core.seeding import derive_rng, derive_seed
from ..core.types import CorruptionKind, RelativeMceMode, TrainMode
from ..corruption.kinds import PROFILES, all_specs, corrupt_dataset
from ..corruption.sequences import make_sequence
from ..data.checkpoint import load_checkpoint, save_checkpoint
from ..data.dataset import Dataset
from ..data.materialize import load_materialized, materialize_corrupted, read_manifest
from ..data.registry import load_dataset_spec
from ..metrics.corruption import (
    corruption_error,
    error_table,
    flip_probabilities,
    flip_rates,
    relative_mce,
    scorable,
)
from ..metrics.report import MetricReport
from ..metrics.structure import (
    MarchDirections,
    empirical_boundary_distance,
    hidden_insensitivity,
    make_insensitivity_samples,
    noise_insensitivity,
)
from ..nn.builders import build_architecture
from ..nn.network import Network
from ..training.ablation import run_ablation, write_ablation_csv
from ..training.config import AnpConfig, TrainConfig, load_anp_config
from ..training.loop import train_adversarial, train_anp, train_vanilla
from ..training.masks import parse_mask_spec

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="anp-lab",
    help="Adversarial noise propagation: training, attacks and robustness metrics.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)

ConfigOpt = Annotated[
    Optional[Path], typer.Option("--config", help="Flat key=value AnpConfig file")
]
SeedOpt = Annotated[
    int, typer.Option("--seed", help="Experiment seed; every stream derives from it")
]
OverrideSeedOpt = Annotated[
    Optional[int],
    typer.Option("--seed", help="Experiment seed; overrides the config file"),
]
OutOpt = Annotated[Optional[Path], typer.Option("--out", help="Output directory")]
DataOpt = Annotated[
    str, typer.Option("--data", help="mnist:DIR, blobs[:CLASSES] or spirals")
]
ModelOpt = Annotated[Path, typer.Option("--model", help="Checkpoint to evaluate")]
AttackOpt = Annotated[
    str, typer.Option("--attack", help="method:key=value,... e.g. pgd:eps=0.1")
]
ArchOpt = Annotated[
    Optional[str], typer.Option("--arch", help="lenet or mlp:W1,W2,...")
]


def _out_dir(out: Optional[Path]) -> Path:
    directory = out or Path(settings.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def _default_arch(dataset: Dataset) -> str:
    return "lenet" if len(dataset.input_shape) == 3 else "mlp:16"


def _build_net(arch: Optional[str], dataset: Dataset, seed: int) -> Network:
    return build_architecture(
        arch or _default_arch(dataset),
        dataset.input_shape,
        dataset.class_count,
        derive_rng(seed, "init"),
    )


def _plain(cfg: AnpConfig) -> TrainConfig:
    return TrainConfig(**cfg.model_dump(include=set(TrainConfig.model_fields)))


def _load_model(path: Path, dataset: Dataset, flag: str) -> Network:
    net = load_checkpoint(path)
    if net.input_shape != dataset.input_shape or net.class_count != dataset.class_count:
        raise DomainError(
            f"{flag} {path}: model expects {net.input_shape} -> "
            f"{net.class_count} classes, data is {dataset.input_shape} -> "
            f"{dataset.class_count}"
        )
    return net.freeze()


def _corruption_kinds(dataset: Dataset) -> List[CorruptionKind]:
    spatial = len(dataset.input_shape) >= 2
    return [kind for kind in CorruptionKind if spatial or not PROFILES[kind].spatial]


@app.command()
def train(
    config: ConfigOpt = None,
    seed: OverrideSeedOpt = None,
    out: OutOpt = None,
    data: DataOpt = "blobs",
    arch: ArchOpt = None,
    mode: Annotated[
        TrainMode, typer.Option("--mode", help="anp, vanilla or adversarial")
    ] = TrainMode.ANP,
    eps: Annotated[
        Optional[float], typer.Option("--eps", help="Override the noise eps")
    ] = None,
    attack: Annotated[
        Optional[str], typer.Option("--attack", help="Inner attack (adversarial mode)")
    ] = None,
):
    """Train a model; writes model.anpm and train_report.csv."""
    cfg = load_anp_config(config, {"seed": seed, "eps": eps})
    train_set, test_set = load_dataset_spec(data, cfg.seed)
    net = _build_net(arch, train_set, cfg.seed)
    if mode is TrainMode.ANP:
        report = train_anp(net, train_set, cfg, test_set)
    elif mode is TrainMode.VANILLA:
        report = train_vanilla(net, train_set, _plain(cfg), test_set)
    else:
        if attack is None:
            raise ConfigurationError(
                "--mode adversarial needs --attack fgsm:... or pgd:..."
            )
        inner = AttackSpec.parse(attack)
        report = train_adversarial(net, train_set, _plain(cfg), inner, test_set)
    directory = _out_dir(out)
    report.checkpoint = str(save_checkpoint(net, directory / "model.anpm"))
    report.write_csv(directory / "train_report.csv")
    logger.info(
        f"Trained {mode.value} model in {report.wall_clock_seconds:.1f}s "
        f"-> {report.checkpoint}"
    )


@app.command("attack")
def attack_command(
    model: ModelOpt,
    attack: AttackOpt,
    seed: SeedOpt = 0,
    out: OutOpt = None,
    data: DataOpt = "blobs",
):
    """Craft adversarial test examples; writes adversarial.npy and attack.csv."""
    _, test_set = load_dataset_spec(data, seed)
    net = _load_model(model, test_set, "--model")
    spec = AttackSpec.parse(attack)
    spec = spec.model_copy(update={"seed": derive_seed(seed, "attack")})
    batch = craft_dataset(net, test_set.images, test_set.labels, spec)
    directory = _out_dir(out)
    buffer = io.BytesIO()
    np.save(buffer, batch.x_adv)
    atomic_write_bytes(directory / "adversarial.npy", buffer.getvalue())
    label = spec.label()
    report = MetricReport()
    clean = accuracy(net, test_set.images, test_set.labels)
    report.add("clean_accuracy", clean, kind=label)
    adversarial = accuracy(net, batch.x_adv, test_set.labels)
    report.add("adversarial_accuracy", adversarial, kind=label)
    report.add("success_rate", batch.success_rate, kind=label)
    report.add("mean_distortion", float(batch.distortion.mean()), kind=label)
    report.write_csv(directory / "attack.csv")


@app.command("eval-adv")
def eval_adv(
    model: ModelOpt,
    attack: AttackOpt,
    holdout: Annotated[
        Optional[List[Path]],
        typer.Option("--holdout", help="Holdout checkpoint (repeatable)"),
    ] = None,
    seed: SeedOpt = 0,
    out: OutOpt = None,
    data: DataOpt = "blobs",
):
    """White-box and worst-case black-box accuracy; writes eval_adv.csv."""
    _, test_set = load_dataset_spec(data, seed)
    net = _load_model(model, test_set, "--model")
    holdouts = [_load_model(path, test_set, "--holdout") for path in holdout or []]
    spec = AttackSpec.parse(attack)
    spec = spec.model_copy(update={"seed": derive_seed(seed, "attack")})
    label = spec.label()
    report = MetricReport()
    report.add("clean_accuracy", accuracy(net, test_set.images, test_set.labels))
    report.add(
        "white_box_accuracy",
        white_box_accuracy(net, test_set.images, test_set.labels, spec),
        kind=label,
    )
    if holdouts:
        report.add(
            "worst_case_accuracy",
            worst_case_accuracy(net, holdouts, test_set.images, test_set.labels, spec),
            kind=label,
        )
    report.write_csv(_out_dir(out) / "eval_adv.csv")


def _corrupted_sets(
    test_set: Dataset, seed: int, corrupted: Optional[Path]
) -> Dict[Tuple[str, int], Dataset]:
    if corrupted is not None:
        return {
            entry.spec.key: load_materialized(corrupted, entry, test_set.name)
            for entry in read_manifest(corrupted)
        }
    specs = all_specs(derive_seed(seed, "corruption"), _corruption_kinds(test_set))
    return {spec.key: corrupt_dataset(test_set, spec) for spec in specs}


def _sequences(test_set: Dataset, seed: int) -> Dict[str, list]:
    count = min(settings.flip_samples, len(test_set))
    return {
        kind.value: [
            make_sequence(
                test_set.images[i],
                kind,
                settings.sequence_frames,
                derive_seed(seed, "corruption", i + 1),
                int(test_set.labels[i]),
            )
            for i in range(count)
        ]
        for kind in _corruption_kinds(test_set)
    }


@app.command("eval-corr")
def eval_corr(
    model: ModelOpt,
    baseline: Annotated[
        Path, typer.Option("--baseline", help="Baseline checkpoint for CE/mCE/mFR")
    ],
    seed: SeedOpt = 0,
    out: OutOpt = None,
    data: DataOpt = "blobs",
    corrupted: Annotated[
        Optional[Path],
        typer.Option("--corrupted", help="Directory written by 'materialize'"),
    ] = None,
):
    """Corruption errors, CE/mCE, Relative mCE and flip rates; writes eval_corr.csv."""
    _, test_set = load_dataset_spec(data, seed)
    net = _load_model(model, test_set, "--model")
    base = _load_model(baseline, test_set, "--baseline")
    sets = _corrupted_sets(test_set, seed, corrupted)
    model_table = error_table(net, test_set, sets)
    base_table = error_table(base, test_set, sets)

    report = MetricReport()
    report.add("clean_error", model_table.clean_error)
    for kind, rates in model_table.errors.items():
        for severity, rate in sorted(rates.items()):
            report.add("error", rate, kind=kind, severity=severity)
    ce_table = scorable(model_table, base_table)
    if ce_table.kinds:
        ce = corruption_error(ce_table, base_table)
        for kind, value in ce.ce.items():
            report.add("ce", value, kind=kind)
        report.add("mce", ce.mce)
        logger.info(f"mCE {ce.mce:.2f}")
    relative_table = scorable(model_table, base_table, excess=True)
    if relative_table.kinds:
        relative = relative_mce(
            relative_table, base_table, RelativeMceMode.PER_SEVERITY
        )
        for kind, value in relative.relative_ce.items():
            report.add("relative_ce", value, kind=kind)
        report.add("relative_mce", relative.relative_mce)

    sequences = _sequences(test_set, seed)
    base_fp = flip_probabilities(base, sequences)
    flippy = {kind: group for kind, group in sequences.items() if base_fp[kind] > 0.0}
    if len(flippy) < len(sequences):
        still = sorted(set(sequences) - set(flippy))
        logger.warning(f"Baseline never flips on {still}; FR skipped there")
    if flippy:
        fr = flip_rates(net, flippy, base_fp)
        for kind in fr.fp:
            report.add("fp", fr.fp[kind], kind=kind)
            report.add("fr", fr.fr[kind], kind=kind)
        report.add("mfr", fr.mfr)
    report.write_csv(_out_dir(out) / "eval_corr.csv")


@app.command("eval-structure")
def eval_structure(
    model: ModelOpt,
    seed: SeedOpt = 0,
    out: OutOpt = None,
    data: DataOpt = "blobs",
    eps: Annotated[
        Optional[float], typer.Option("--eps", help="l-inf radius of polluted examples")
    ] = None,
):
    """Boundary distance and insensitivity measures; writes eval_structure.csv."""
    _, test_set = load_dataset_spec(data, seed)
    net = _load_model(model, test_set, "--model")
    eps = settings.insensitivity_eps if eps is None else eps
    sample = test_set.head(settings.structure_samples)
    dim = int(np.prod(test_set.input_shape))
    march = MarchDirections.random(
        dim,
        min(dim, settings.boundary_directions),
        seed,
        step=settings.boundary_step,
        cap=settings.boundary_cap,
    )
    boundary = empirical_boundary_distance(net, sample.images, march)
    samples = make_insensitivity_samples(
        net, sample, eps, settings.polluted_per_image, seed
    )
    insensitivity = noise_insensitivity(net, samples)
    pairs_x = np.concatenate(
        [np.repeat(s.x[None], s.polluted.shape[0], axis=0) for s in samples]
    )
    pairs_mu = np.concatenate([s.polluted for s in samples])
    hidden = hidden_insensitivity(net, pairs_x, pairs_mu, eps)

    report = MetricReport()
    report.add("w_f", boundary.w_f)
    report.add("boundary_flagged", float(boundary.flagged.sum()))
    report.add("noise_insensitivity", insensitivity.value)
    report.add("insensitivity_eps", eps)
    report.add("insensitivity_pairs_skipped", float(insensitivity.pairs_skipped))
    for index, (value, dead) in enumerate(zip(hidden.per_layer, hidden.dead)):
        report.add("hidden_insensitivity", value, kind=f"layer{index}")
        if dead:
            logger.warning(f"Layer {index} is dead on the clean inputs")
    report.add("hidden_insensitivity", hidden.mean)
    report.write_csv(_out_dir(out) / "eval_structure.csv")


@app.command()
def ablate(
    masks: Annotated[
        str,
        typer.Option(
            "--masks", help="e.g. top:1..5,bottom:1..5,single:0..4,pair:0:0..3"
        ),
    ],
    config: ConfigOpt = None,
    seed: OverrideSeedOpt = None,
    out: OutOpt = None,
    data: DataOpt = "blobs",
    arch: ArchOpt = None,
    eps: Annotated[
        float, typer.Option("--eps", help="FGSM eps used for scoring")
    ] = 0.2,
    jobs: Annotated[
        Optional[int], typer.Option("--jobs", help="Parallel training runs")
    ] = None,
):
    """One ANP run per layer mask; writes ablation.csv."""
    cfg = load_anp_config(config, {"seed": seed})
    train_set, test_set = load_dataset_spec(data, cfg.seed)
    net = _build_net(arch, train_set, cfg.seed)
    specs = all_specs(derive_seed(cfg.seed, "corruption"), _corruption_kinds(test_set))
    rows = run_ablation(
        net,
        train_set,
        test_set,
        cfg,
        parse_mask_spec(net, masks),
        eps,
        specs,
        n_jobs=jobs,
    )
    write_ablation_csv(rows, _out_dir(out) / "ablation.csv")


@app.command()
def materialize(
    seed: SeedOpt = 0,
    out: OutOpt = None,
    data: DataOpt = "mnist",
):
    """Write the corrupted test suite as IDX files plus manifest.tsv."""
    _, test_set = load_dataset_spec(data, seed)
    if len(test_set.input_shape) != 3:
        raise ConfigurationError(
            f"--data {data}: only (1, H, W) image data can be stored as IDX"
        )
    specs = all_specs(derive_seed(seed, "corruption"), _corruption_kinds(test_set))
    entries = materialize_corrupted(test_set, specs, _out_dir(out))
    logger.info(f"Materialized {len(entries)} corrupted splits")


def _configure_logging():
    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )


def run(argv: Sequence[str]) -> int:
    """
    Execute one subcommand.

    Returns:
        0 on success, 2 on usage or configuration errors, 3 on data, format
        or numeric errors
    """
    _configure_logging()
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=list(argv), prog_name="anp-lab", standalone_mode=False
        )
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.Abort:
        typer.echo("error: aborted", err=True)
        return 2
    except click.ClickException as e:
        typer.echo(f"error: {e.format_message()}", err=True)
        return 2
    except (ConfigurationError, UnsupportedArchitectureError) as e:
        typer.echo(f"error: {e}", err=True)
        return 2
    except (FormatError, DomainError, NumericError, OSError) as e:
        typer.echo(f"error: {e}", err=True)
        return 3
    return result if isinstance(result, int) else 0


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
