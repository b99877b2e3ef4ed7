import numpy as np
import pytest

from src.attacks.spec import AttackSpec
from src.core.exceptions import ConfigurationError, DomainError
from src.core.types import AttackMethod
from src.data.dataset import Dataset
from src.nn.network import BackwardTrace, NoiseRegister, backward, forward
from src.tensor.ops import lp_norm_batch, normalize_lp_batch
from src.training.config import AnpConfig, TrainConfig, build_config, load_anp_config
from src.training.loop import (
    anp_minibatch_step,
    plain_sgd_step,
    train_adversarial,
    train_anp,
    train_vanilla,
)


def unit_backward(net, trace, y, params=True):
    """Every activation gradient is all ones; parameters get no update."""
    return BackwardTrace(
        grads=[np.ones_like(a) for a in trace.activations],
        param_grads=[{} for _ in net.layers],
        noise_sites=trace.noise_sites,
    )


class TestAnpStep:
    def test_noise_reaches_budget_without_decay(self, mlp, rng, monkeypatch):
        monkeypatch.setattr("src.training.loop.backward", unit_backward)
        x = rng.uniform(size=(3, 2))
        registers = NoiseRegister(mlp, [0, 1], 3)
        cfg = AnpConfig(eta=0.0, eps=0.5, k=4)
        losses = anp_minibatch_step(mlp, registers, x, [0, 1, 0], cfg)
        assert len(losses) == 4
        for m in (0, 1):
            np.testing.assert_allclose(lp_norm_batch(registers[m], 2), [0.5] * 3)

    def test_per_site_budgets(self, mlp, rng, monkeypatch):
        monkeypatch.setattr("src.training.loop.backward", unit_backward)
        x = rng.uniform(size=(2, 2))
        registers = NoiseRegister(mlp, [0, 1], 2)
        cfg = AnpConfig(eta=0.0, k=2)
        anp_minibatch_step(mlp, registers, x, [0, 1], cfg, {0: 0.2, 1: 0.9})
        np.testing.assert_allclose(lp_norm_batch(registers[0], 2), [0.2, 0.2])
        np.testing.assert_allclose(lp_norm_batch(registers[1], 2), [0.9, 0.9])

    def test_decay_keeps_noise_inside_budget(self, mlp, rng, monkeypatch):
        monkeypatch.setattr("src.training.loop.backward", unit_backward)
        registers = NoiseRegister(mlp, [1], 2)
        cfg = AnpConfig(eta=0.5, eps=1.0, k=3)
        anp_minibatch_step(mlp, registers, rng.uniform(size=(2, 2)), [0, 1], cfg)
        assert np.all(lp_norm_batch(registers[1], 2) < 1.0)

    def test_single_step_input_noise_follows_clean_gradient(self, mlp, rng):
        x = rng.uniform(size=(4, 2))
        y = np.array([0, 1, 1, 0])
        before = mlp.copy()
        registers = NoiseRegister(mlp, [0], 4)
        cfg = AnpConfig(eps=0.3, k=1, eta=0.1)
        anp_minibatch_step(mlp, registers, x, y, cfg)
        g = backward(before, forward(before, x), y).grads[0]
        np.testing.assert_allclose(registers[0], 0.3 * normalize_lp_batch(g, 2))
        assert mlp.parameter_digest() != before.parameter_digest()

    def test_registers_are_reset_per_batch(self, mlp, rng, monkeypatch):
        monkeypatch.setattr("src.training.loop.backward", unit_backward)
        registers = NoiseRegister(mlp, [0], 2)
        cfg = AnpConfig(eta=0.0, eps=0.5, k=2)
        x = rng.uniform(size=(2, 2))
        anp_minibatch_step(mlp, registers, x, [0, 1], cfg)
        anp_minibatch_step(mlp, registers, x, [0, 1], cfg)
        np.testing.assert_allclose(lp_norm_batch(registers[0], 2), [0.5, 0.5])

    def test_accumulated_updates_without_noise(self, mlp, rng):
        x = rng.uniform(size=(5, 2))
        y = np.array([0, 1, 0, 1, 1])
        other = mlp.copy()
        cfg = AnpConfig(eps=0.0, k=3, lr=0.1, accumulate_updates=True)
        anp_minibatch_step(mlp, NoiseRegister(mlp, [0, 1], 5), x, y, cfg)
        plain_sgd_step(other, x, y, TrainConfig(lr=0.1, k=1))
        for (_, _, a), (_, _, b) in zip(mlp.iter_parameters(), other.iter_parameters()):
            np.testing.assert_allclose(a, b, atol=1e-12)


class TestTrainAnp:
    def test_zero_eps_matches_vanilla(self, mlp, blobs_train):
        other = mlp.copy()
        anp = AnpConfig(eps=0.0, k=3, epochs=2, batch_size=32, eps_units="absolute")
        vanilla = TrainConfig(k=3, epochs=2, batch_size=32)
        first = train_anp(mlp, blobs_train, anp)
        second = train_vanilla(other, blobs_train, vanilla)
        assert mlp.parameter_digest() == other.parameter_digest()
        assert first.final.mean_step_loss == second.final.mean_step_loss

    def test_learns_blobs(self, mlp, blobs_train, blobs_test):
        cfg = AnpConfig(eps=0.1, lr=0.1, epochs=20, batch_size=32)
        report = train_anp(mlp, blobs_train, cfg, blobs_test)
        assert report.final.test_accuracy >= 0.95
        assert report.layer_mask == [0, 1]
        assert set(report.site_eps) == {0, 1}

    def test_runs_are_reproducible(self, mlp, blobs_train, tmp_path):
        other = mlp.copy()
        cfg = AnpConfig(eps=0.5, epochs=2, batch_size=16, seed=3)
        train_anp(mlp, blobs_train, cfg).write_csv(tmp_path / "a.csv")
        train_anp(other, blobs_train, cfg).write_csv(tmp_path / "b.csv")
        assert mlp.parameter_digest() == other.parameter_digest()
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.csv").read_text().startswith("epoch,train_accuracy")

    def test_layer_eps_overrides_shared_eps(self, mlp, blobs_train):
        cfg = AnpConfig(
            eps=0.5, epochs=1, layer_mask=[0, 1], layer_eps={1: 0.25}
        )
        report = train_anp(mlp, blobs_train, cfg)
        assert report.site_eps[1] == 0.25
        assert report.site_eps[0] != 0.25

    def test_layer_eps_outside_mask(self, mlp, blobs_train):
        cfg = AnpConfig(layer_mask=[0], layer_eps={1: 0.1})
        with pytest.raises(ConfigurationError):
            train_anp(mlp, blobs_train, cfg)

    def test_mask_outside_network(self, mlp, blobs_train):
        with pytest.raises(ConfigurationError):
            train_anp(mlp, blobs_train, AnpConfig(layer_mask=[0, 5]))

    def test_frozen_network(self, mlp, blobs_train):
        with pytest.raises(ConfigurationError):
            train_anp(mlp.freeze(), blobs_train, AnpConfig(epochs=1))

    def test_empty_dataset(self, mlp):
        empty = Dataset(images=np.zeros((0, 2)), labels=np.zeros(0), class_count=2)
        with pytest.raises(DomainError):
            train_anp(mlp, empty, AnpConfig(epochs=1))


class TestTrainAdversarial:
    def test_zero_eps_fgsm_matches_vanilla(self, mlp, blobs_train):
        other = mlp.copy()
        cfg = TrainConfig(epochs=2, batch_size=32)
        attack = AttackSpec(method=AttackMethod.FGSM, eps=0.0)
        train_adversarial(mlp, blobs_train, cfg, attack)
        train_vanilla(other, blobs_train, cfg)
        assert mlp.parameter_digest() == other.parameter_digest()

    def test_pgd_stays_in_ball(self, mlp, blobs_train):
        cfg = TrainConfig(epochs=1, batch_size=50)
        attack = AttackSpec(method=AttackMethod.PGD, eps=0.05, steps=3, alpha=0.02)
        report = train_adversarial(mlp, blobs_train, cfg, attack)
        assert 0.0 < report.final.max_perturbation <= 0.05 + 1e-12

    def test_other_inner_attacks_rejected(self, mlp, blobs_train):
        attack = AttackSpec(method=AttackMethod.BIM, eps=0.1)
        with pytest.raises(ConfigurationError):
            train_adversarial(mlp, blobs_train, TrainConfig(epochs=1), attack)


class TestConfig:
    def test_defaults(self):
        cfg = AnpConfig()
        assert (cfg.eta, cfg.eps, cfg.k, cfg.p.value) == (0.1, 1.0, 3, "2")
        assert cfg.layer_mask is None

    def test_string_values_are_parsed(self):
        cfg = build_config(
            AnpConfig, {"p": "linf", "layer_mask": "0,2", "layer_eps": "2:0.5"}
        )
        assert cfg.p.value == "inf"
        assert cfg.layer_mask == [0, 2]
        assert cfg.layer_eps == {2: 0.5}

    @pytest.mark.parametrize(
        "values",
        [{"eta": 1.0}, {"k": 0}, {"eps": -1}, {"layer_mask": "1,1"}, {"bogus": 1}],
    )
    def test_invalid_values(self, values):
        with pytest.raises(ConfigurationError):
            build_config(AnpConfig, values)

    def test_file_then_overrides(self, tmp_path):
        path = tmp_path / "anp.cfg"
        path.write_text("# desk run\neps=0.5\nk=2\nseed=4\n")
        cfg = load_anp_config(path, {"seed": 9, "eps": None})
        assert (cfg.eps, cfg.k, cfg.seed) == (0.5, 2, 9)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_anp_config(tmp_path / "absent.cfg")
