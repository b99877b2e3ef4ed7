import numpy as np
import pytest

from src.attacks.blackbox import accuracy, craft_dataset, worst_case_accuracy
from src.attacks.craft import craft
from src.attacks.spec import AttackSpec
from src.core.exceptions import ConfigurationError, DomainError
from src.core.types import AttackMethod
from src.nn.builders import build_mlp

from .shadows import linear_net

LINF_METHODS = [
    AttackMethod.FGSM,
    AttackMethod.BIM,
    AttackMethod.PGD,
    AttackMethod.STEP_LL,
    AttackMethod.MI_FGSM,
]


@pytest.fixture
def swap_net():
    return linear_net([[1.0, -1.0], [-1.0, 1.0]], [0.0, 0.0])


class TestCraft:
    @pytest.mark.parametrize("method", list(AttackMethod))
    def test_zero_eps_is_identity(self, mlp, rng, method):
        x = rng.uniform(size=(4, 2))
        batch = craft(mlp, x, [0, 1, 0, 1], AttackSpec(method=method, eps=0.0))
        np.testing.assert_array_equal(batch.x_adv, x)
        np.testing.assert_array_equal(batch.distortion, np.zeros(4))

    def test_fgsm_on_linear_model(self, swap_net):
        spec = AttackSpec(method=AttackMethod.FGSM, eps=0.1)
        batch = craft(swap_net, np.array([[0.5, 0.5]]), [0], spec)
        np.testing.assert_allclose(batch.x_adv, [[0.4, 0.6]])
        assert batch.success_mask.tolist() == [True]

    @pytest.mark.parametrize("method", LINF_METHODS)
    def test_stays_inside_ball_and_box(self, mlp, rng, method):
        x = rng.uniform(size=(1000, 2))
        x[:4] = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
        spec = AttackSpec(method=method, eps=0.1, seed=3)
        batch = craft(mlp, x, np.arange(1000) % 2, spec)
        assert np.abs(batch.x_adv - x).max() <= 0.1 + 1e-12
        assert batch.x_adv.min() >= 0.0 and batch.x_adv.max() <= 1.0
        assert batch.distortion.max() <= 0.1 + 1e-12

    def test_fgsm_success_grows_with_eps(self, rng):
        normal = rng.standard_normal(2)
        net = linear_net([normal, [0.0, 0.0]], [-normal.sum() / 2, 0.0])
        x = rng.uniform(size=(200, 2))
        y = net.predict(x)
        rates = [
            craft(net, x, y, AttackSpec(method=AttackMethod.FGSM, eps=eps)).success_rate
            for eps in (0.0, 0.05, 0.1, 0.2, 0.3, 0.5)
        ]
        assert rates == sorted(rates)
        assert rates[0] == 0.0 and rates[-1] > 0.0

    def test_pgd_succeeds_at_least_as_often_as_fgsm(self):
        wins = 0
        for seed in range(5):
            net = build_mlp([2, 16, 16, 2], np.random.default_rng(seed))
            x = np.random.default_rng(50 + seed).uniform(size=(500, 2))
            y = net.predict(x)
            fgsm = craft(net, x, y, AttackSpec(method=AttackMethod.FGSM, eps=0.1))
            spec = AttackSpec(method=AttackMethod.PGD, eps=0.1, seed=seed)
            pgd = craft(net, x, y, spec)
            wins += pgd.success_rate >= fgsm.success_rate
        assert wins >= 4

    @pytest.mark.parametrize("method", list(AttackMethod))
    def test_model_is_not_modified(self, mlp, rng, method):
        digest = mlp.parameter_digest()
        spec = AttackSpec(method=method, eps=0.1, steps=5, binary_search_steps=2)
        craft(mlp, rng.uniform(size=(3, 2)), [0, 1, 1], spec)
        assert mlp.parameter_digest() == digest

    def test_pgd_is_seeded(self, mlp, rng):
        x = rng.uniform(size=(4, 2))
        spec = AttackSpec(method=AttackMethod.PGD, eps=0.1, seed=5)
        first = craft(mlp, x, [0, 1, 0, 1], spec).x_adv
        np.testing.assert_array_equal(first, craft(mlp, x, [0, 1, 0, 1], spec).x_adv)

    def test_inputs_outside_unit_box(self, mlp):
        with pytest.raises(DomainError):
            craft(mlp, np.array([[1.5, 0.0]]), [0], AttackSpec(method="fgsm", eps=0.1))


class TestCarliniWagner:
    def test_distortion_is_best_audited_step(self, swap_net):
        x = np.array([[0.55, 0.45], [0.7, 0.3], [0.9, 0.1]])
        spec = AttackSpec(
            method=AttackMethod.CW_L2, eps=1.0, steps=60, binary_search_steps=4
        )
        batch = craft(swap_net, x, [0, 0, 0], spec)
        best = np.min(np.stack(batch.audit), axis=0)
        found = np.isfinite(best)
        assert found.any()
        np.testing.assert_allclose(batch.distortion[found], best[found])
        np.testing.assert_array_equal(batch.x_adv[~found], x[~found])

    def test_failures_return_clean_input(self, swap_net):
        x = np.array([[0.7, 0.3]])
        spec = AttackSpec(method=AttackMethod.CW_L2, eps=1e-6, steps=20)
        batch = craft(swap_net, x, [0], spec)
        np.testing.assert_array_equal(batch.x_adv, x)
        assert batch.distortion.tolist() == [0.0]
        assert batch.success_mask.tolist() == [False]


class TestAttackSpec:
    def test_parse(self):
        spec = AttackSpec.parse("pgd:eps=0.0313,steps=10")
        assert spec.method is AttackMethod.PGD
        assert spec.steps == 10
        assert spec.alpha == pytest.approx(0.0313 * 0.25)

    def test_bim_defaults(self):
        spec = AttackSpec.parse("bim:eps=0.2")
        assert spec.steps == 10
        assert spec.alpha == pytest.approx(0.02)

    def test_label_round_trips(self):
        spec = AttackSpec.parse("mi-fgsm:eps=0.1")
        assert AttackSpec.parse(spec.label()) == spec

    @pytest.mark.parametrize(
        "text",
        [
            "nope:eps=0.1",
            "fgsm:eps",
            "fgsm:eps=0.1,foo=1",
            "pgd:eps=0.1,steps=2,alpha=0.01",
            "fgsm:eps=-0.1",
        ],
    )
    def test_invalid(self, text):
        with pytest.raises(ConfigurationError):
            AttackSpec.parse(text)


class TestTransfer:
    def test_chunked_fgsm_matches_whole_batch(self, mlp, rng):
        x = rng.uniform(size=(10, 2))
        y = np.arange(10) % 2
        spec = AttackSpec(method=AttackMethod.FGSM, eps=0.05)
        chunked = craft_dataset(mlp, x, y, spec, batch_size=4)
        np.testing.assert_array_equal(chunked.x_adv, craft(mlp, x, y, spec).x_adv)

    def test_worst_case_is_minimum(self, mlp, rng):
        holdouts = [build_mlp([2, 8, 2], np.random.default_rng(s)) for s in (1, 2)]
        x = rng.uniform(size=(20, 2))
        y = np.arange(20) % 2
        spec = AttackSpec(method=AttackMethod.FGSM, eps=0.2)
        expected = min(
            accuracy(mlp, craft(h, x, y, spec).x_adv, y) for h in holdouts
        )
        assert worst_case_accuracy(mlp, holdouts, x, y, spec) == expected

    def test_worst_case_needs_holdouts(self, mlp, rng):
        spec = AttackSpec(method=AttackMethod.FGSM, eps=0.2)
        with pytest.raises(ConfigurationError):
            worst_case_accuracy(mlp, [], rng.uniform(size=(2, 2)), [0, 1], spec)
