import numpy as np
import pytest

from src.core.exceptions import ConfigurationError, DomainError
from src.core.types import CorruptionKind
from src.corruption.kinds import (
    PROFILES,
    CorruptionSpec,
    all_specs,
    apply_intensity,
    corrupt,
    corrupt_dataset,
    severity_level,
)
from src.corruption.sequences import frame_step_bound, make_sequence


class TestCorrupt:
    def test_brightness_adds_level(self, rng):
        x = rng.uniform(size=(3, 1, 4, 4))
        spec = CorruptionSpec(kind=CorruptionKind.BRIGHTNESS, severity=2)
        np.testing.assert_array_equal(corrupt(x, spec), np.clip(x + 0.1, 0.0, 1.0))

    def test_same_seed_same_output(self, rng):
        x = rng.uniform(size=(2, 1, 6, 6))
        spec = CorruptionSpec(kind=CorruptionKind.GAUSSIAN_NOISE, severity=3, seed=11)
        np.testing.assert_array_equal(corrupt(x, spec), corrupt(x, spec))

    def test_seed_changes_noise(self, rng):
        x = rng.uniform(size=(2, 1, 6, 6))
        first = CorruptionSpec(kind=CorruptionKind.IMPULSE_NOISE, severity=5, seed=1)
        second = first.model_copy(update={"seed": 2})
        assert not np.array_equal(corrupt(x, first), corrupt(x, second))

    @pytest.mark.parametrize("kind", list(CorruptionKind))
    def test_identity_intensity_copies(self, rng, kind):
        x = rng.uniform(size=(1, 1, 5, 5))
        out = apply_intensity(x, kind, PROFILES[kind].identity)
        np.testing.assert_array_equal(out, x)
        assert out is not x

    def test_pixelate_constant_image(self):
        x = np.full((1, 1, 7, 7), 0.3)
        spec = CorruptionSpec(kind=CorruptionKind.PIXELATE, severity=1)
        np.testing.assert_allclose(corrupt(x, spec), x)

    def test_pixelate_block_means(self):
        x = np.arange(16, dtype=np.float64).reshape(1, 1, 4, 4) / 15.0
        out = corrupt(x, CorruptionSpec(kind=CorruptionKind.PIXELATE, severity=1))
        np.testing.assert_allclose(out[0, 0, :2, :2], np.full((2, 2), 2.5 / 15.0))
        np.testing.assert_allclose(out[0, 0, 2:, 2:], np.full((2, 2), 12.5 / 15.0))

    def test_blur_keeps_constant_image(self):
        x = np.full((2, 1, 6, 6), 0.6)
        for kind in (CorruptionKind.BOX_BLUR, CorruptionKind.MOTION_BLUR):
            spec = CorruptionSpec(kind=kind, severity=4)
            np.testing.assert_allclose(corrupt(x, spec), x)

    def test_contrast_moves_toward_mean(self, rng):
        x = rng.uniform(size=(1, 1, 4, 4))
        out = corrupt(x, CorruptionSpec(kind=CorruptionKind.CONTRAST, severity=5))
        assert out.std() < x.std()
        assert out.mean() == pytest.approx(x.mean())

    @pytest.mark.parametrize("shape", [(5, 12), (5, 1, 4, 4)])
    def test_contrast_is_per_example(self, rng, shape):
        x = rng.uniform(size=shape)
        x[2] *= 0.2
        spec = CorruptionSpec(kind=CorruptionKind.CONTRAST, severity=3)
        whole = corrupt(x, spec)
        for i in range(shape[0]):
            np.testing.assert_array_equal(corrupt(x[i : i + 1], spec)[0], whole[i])
            assert whole[i].mean() == pytest.approx(x[i].mean())

    def test_spatial_kinds_reject_flat_batches(self, rng):
        x = rng.uniform(size=(4, 16))
        for kind in (CorruptionKind.BOX_BLUR, CorruptionKind.PIXELATE):
            with pytest.raises(DomainError):
                corrupt(x, CorruptionSpec(kind=kind, severity=2))

    @pytest.mark.parametrize("kind", list(CorruptionKind))
    def test_distortion_grows_with_severity(self, kind):
        x = np.random.default_rng(9).uniform(size=(100, 1, 16, 16))
        means, errors = [], []
        for severity in range(1, 6):
            out = corrupt(x, CorruptionSpec(kind=kind, severity=severity, seed=5))
            distortion = np.sqrt(((out - x) ** 2).sum(axis=(1, 2, 3)))
            means.append(distortion.mean())
            errors.append(distortion.std(ddof=1) / np.sqrt(len(distortion)))
        for s in range(4):
            slack = 3.0 * np.hypot(errors[s], errors[s + 1])
            assert means[s + 1] >= means[s] - slack

    def test_every_spec_stays_in_unit_box(self, tiny_images):
        for spec in all_specs(seed=4):
            out = corrupt(tiny_images.images, spec)
            assert out.shape == tiny_images.images.shape
            assert out.min() >= 0.0 and out.max() <= 1.0

    def test_all_specs_covers_grid(self):
        specs = all_specs()
        assert len(specs) == 40
        assert len({spec.key for spec in specs}) == 40

    def test_severity_outside_table(self):
        with pytest.raises(ConfigurationError):
            CorruptionSpec(kind=CorruptionKind.CONTRAST, severity=6)
        with pytest.raises(ConfigurationError):
            severity_level(CorruptionKind.CONTRAST, 0)

    def test_inputs_outside_unit_box(self):
        spec = CorruptionSpec(kind=CorruptionKind.BRIGHTNESS, severity=1)
        with pytest.raises(DomainError):
            corrupt(np.array([[1.2, 0.5]]), spec)

    def test_spatial_kind_on_vector(self):
        spec = CorruptionSpec(kind=CorruptionKind.BOX_BLUR, severity=1)
        with pytest.raises(DomainError):
            corrupt(np.array([0.2, 0.4, 0.6]), spec)

    def test_corrupt_dataset_keeps_labels(self, tiny_images):
        spec = CorruptionSpec(kind=CorruptionKind.SHOT_NOISE, severity=2)
        out = corrupt_dataset(tiny_images, spec)
        np.testing.assert_array_equal(out.labels, tiny_images.labels)
        assert out.split == "test-shot_noise-2"


class TestSequences:
    @pytest.mark.parametrize("kind", list(CorruptionKind))
    def test_first_frame_is_clean(self, rng, kind):
        x = rng.uniform(size=(1, 6, 6))
        sequence = make_sequence(x, kind, 11, seed=3)
        assert sequence.frames.shape == (11, 1, 6, 6)
        np.testing.assert_array_equal(sequence.frames[0], x)
        assert np.all(np.diff(sequence.intensities) > 0)
        assert sequence.intensities[-1] == pytest.approx(severity_level(kind, 3))

    def test_too_short(self, rng):
        with pytest.raises(ConfigurationError):
            make_sequence(rng.uniform(size=(1, 4, 4)), CorruptionKind.BRIGHTNESS, 1, 0)

    @pytest.mark.parametrize(
        "kind",
        [
            CorruptionKind.GAUSSIAN_NOISE,
            CorruptionKind.BRIGHTNESS,
            CorruptionKind.CONTRAST,
        ],
    )
    def test_adjacent_frames_respect_step_bound(self, rng, kind):
        x = rng.uniform(size=(1, 6, 6))
        sequence = make_sequence(x, kind, 11, seed=8)
        bound = frame_step_bound(x, kind, 11, seed=8)
        steps = np.abs(np.diff(sequence.frames, axis=0)).max()
        assert steps <= bound + 1e-12

    def test_no_bound_for_blur(self, rng):
        x = rng.uniform(size=(1, 6, 6))
        assert frame_step_bound(x, CorruptionKind.BOX_BLUR, 11, 0) is None
