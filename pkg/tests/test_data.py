import numpy as np
import pytest

from src.core.config import settings
from src.core.exceptions import ConfigurationError, DomainError, FormatError
from src.corruption.kinds import all_specs, corrupt
from src.data.checkpoint import (
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from src.data.dataset import Dataset
from src.data.idx import (
    IMAGES_MAGIC,
    LABELS_MAGIC,
    decode_idx,
    encode_idx,
    load_idx,
    write_idx_pair,
)
from src.data.materialize import (
    MANIFEST_NAME,
    load_materialized,
    materialize_corrupted,
    read_manifest,
)
from src.data.registry import load_dataset_spec, load_mnist
from src.data.synthetic import blob_centers, synth_blobs, synth_spirals


class TestIdx:
    def test_decode_fixture(self):
        images = np.arange(48, dtype=np.uint8).reshape(3, 4, 4)
        payload = encode_idx(images)
        assert payload[:4] == b"\x00\x00\x08\x03"
        np.testing.assert_array_equal(decode_idx(payload, IMAGES_MAGIC), images)

    def test_wrong_magic(self):
        payload = encode_idx(np.zeros(3, dtype=np.uint8))
        with pytest.raises(FormatError, match="magic"):
            decode_idx(payload, IMAGES_MAGIC)

    def test_truncated_payload(self):
        payload = encode_idx(np.zeros((2, 3, 3), dtype=np.uint8))
        with pytest.raises(FormatError, match="truncated"):
            decode_idx(payload[:-1], IMAGES_MAGIC)

    def test_trailing_bytes(self):
        payload = encode_idx(np.zeros(4, dtype=np.uint8))
        with pytest.raises(FormatError, match="trailing"):
            decode_idx(payload + b"\x00", LABELS_MAGIC)

    def test_only_unsigned_bytes(self):
        with pytest.raises(FormatError):
            encode_idx(np.zeros(3, dtype=np.int32))

    def test_dataset_pair(self, tmp_path):
        pixels = np.arange(32, dtype=np.float64).reshape(2, 1, 4, 4) / 255.0
        dataset = Dataset(images=pixels, labels=[3, 9])
        write_idx_pair(dataset, tmp_path / "images", tmp_path / "labels")
        loaded = load_idx(tmp_path / "images", tmp_path / "labels", split="test")
        np.testing.assert_array_equal(loaded.images, pixels)
        np.testing.assert_array_equal(loaded.labels, [3, 9])
        assert loaded.split == "test"

    def test_count_mismatch(self, tmp_path):
        (tmp_path / "images").write_bytes(encode_idx(np.zeros((2, 2, 2), np.uint8)))
        (tmp_path / "labels").write_bytes(encode_idx(np.zeros(3, np.uint8)))
        with pytest.raises(FormatError):
            load_idx(tmp_path / "images", tmp_path / "labels")


class TestCheckpoint:
    def test_save_load_save_is_stable(self, lenet, rng, tmp_path):
        first = save_checkpoint(lenet, tmp_path / "a.anpm")
        restored = load_checkpoint(first)
        second = save_checkpoint(restored, tmp_path / "b.anpm")
        assert first.read_bytes() == second.read_bytes()
        x = rng.uniform(size=(2, 1, 28, 28))
        np.testing.assert_array_equal(restored.logits(x), lenet.logits(x))
        assert restored.noise_sites() == lenet.noise_sites()

    def test_mlp_round_trip(self, mlp):
        restored = decode_checkpoint(encode_checkpoint(mlp))
        assert restored.parameter_digest() == mlp.parameter_digest()

    def test_truncated(self, mlp):
        payload = encode_checkpoint(mlp)
        with pytest.raises(FormatError, match="truncated"):
            decode_checkpoint(payload[:-8])

    def test_trailing_bytes(self, mlp):
        with pytest.raises(FormatError, match="trailing"):
            decode_checkpoint(encode_checkpoint(mlp) + b"\x00")

    def test_bad_magic(self, mlp):
        with pytest.raises(FormatError, match="magic"):
            decode_checkpoint(b"XXXX" + encode_checkpoint(mlp)[4:])

    def test_version_mismatch(self, mlp):
        payload = encode_checkpoint(mlp)
        with pytest.raises(FormatError, match="version"):
            decode_checkpoint(payload[:4] + b"\x02\x00\x00\x00" + payload[8:])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            load_checkpoint(tmp_path / "absent.anpm")


class TestMaterialize:
    def test_manifest_and_reload(self, tiny_images, tmp_path):
        specs = all_specs(seed=3)
        entries = materialize_corrupted(tiny_images, specs, tmp_path)
        assert len(entries) == 40
        assert read_manifest(tmp_path) == entries
        entry = entries[7]
        loaded = load_materialized(tmp_path, entry, "tiny")
        expected = np.rint(corrupt(tiny_images.images, entry.spec) * 255.0) / 255.0
        np.testing.assert_array_equal(loaded.images, expected)
        np.testing.assert_array_equal(loaded.labels, tiny_images.labels)

    def test_rerun_is_byte_identical(self, tiny_images, tmp_path):
        specs = all_specs(seed=3)[:10]
        materialize_corrupted(tiny_images, specs, tmp_path / "a")
        materialize_corrupted(tiny_images, specs, tmp_path / "b")
        first, second = tmp_path / "a", tmp_path / "b"
        files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
        assert files == sorted(
            p.relative_to(second) for p in second.rglob("*") if p.is_file()
        )
        for relative in files:
            assert (first / relative).read_bytes() == (second / relative).read_bytes()

    def test_malformed_manifest(self, tmp_path):
        (tmp_path / MANIFEST_NAME).write_text("contrast\t3\t0\n")
        with pytest.raises(FormatError):
            read_manifest(tmp_path)
        (tmp_path / MANIFEST_NAME).write_text("fog\t3\t0\tcorrupted/fog/3\n")
        with pytest.raises(FormatError):
            read_manifest(tmp_path)


class TestDataset:
    def test_labels_in_range(self):
        with pytest.raises(DomainError):
            Dataset(images=np.zeros((2, 2)), labels=[0, 2], class_count=2)

    def test_images_in_unit_box(self):
        with pytest.raises(DomainError):
            Dataset(images=np.full((1, 2), 1.5), labels=[0], class_count=2)

    def test_subset_is_seeded(self, blobs_train):
        first = blobs_train.subset(20, np.random.default_rng(4))
        second = blobs_train.subset(20, np.random.default_rng(4))
        np.testing.assert_array_equal(first.images, second.images)
        assert len(first) == 20


class TestRegistry:
    def test_blobs_with_classes(self):
        train, test = load_dataset_spec("blobs:3", seed=1)
        assert (len(train), len(test)) == (1000, 500)
        assert train.class_count == 3
        assert test.split == "test"

    def test_same_seed_same_data(self):
        first, _ = load_dataset_spec("spirals", seed=2)
        second, _ = load_dataset_spec("spirals", seed=2)
        np.testing.assert_array_equal(first.images, second.images)

    @pytest.mark.parametrize("spec", ["blobs:abc", "cifar10"])
    def test_bad_specs(self, spec):
        with pytest.raises(ConfigurationError):
            load_dataset_spec(spec)

    def test_mnist_needs_directory(self, monkeypatch):
        monkeypatch.setattr(settings, "mnist_dir", None)
        with pytest.raises(ConfigurationError):
            load_dataset_spec("mnist")

    @pytest.mark.slow
    def test_mnist_subsets(self, mnist_dir):
        train, test = load_mnist(mnist_dir, seed=0, train_subset=100, test_subset=50)
        assert train.images.shape == (100, 1, 28, 28)
        assert test.images.shape == (50, 1, 28, 28)
        assert 0.0 <= train.images.min() and train.images.max() <= 1.0


class TestSynthetic:
    def test_classes_balanced_within_one(self):
        counts = np.bincount(synth_blobs(301, classes=3, seed=5).labels)
        assert counts.max() - counts.min() <= 1

    def test_zero_spread_is_separable(self):
        blobs = synth_blobs(60, classes=4, spread=0.0, seed=1)
        centers = blob_centers(4)
        distances = np.linalg.norm(blobs.images[:, None] - centers[None], axis=2)
        np.testing.assert_array_equal(distances.argmin(axis=1), blobs.labels)

    def test_spirals_stay_in_unit_square(self):
        spirals = synth_spirals(200, seed=3)
        assert spirals.images.min() >= 0.0 and spirals.images.max() <= 1.0
        assert spirals.class_count == 2

    def test_bad_parameters(self):
        with pytest.raises(ConfigurationError):
            synth_blobs(10, classes=1)
        with pytest.raises(ConfigurationError):
            synth_spirals(1)
