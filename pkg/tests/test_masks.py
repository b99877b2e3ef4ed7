import pytest

from src.core.exceptions import ConfigurationError
from src.training.masks import (
    default_mask,
    layer_mask_bottom,
    layer_mask_pair,
    layer_mask_single,
    layer_mask_top,
    parse_mask_spec,
    validate_mask,
)


class TestMaskBuilders:
    def test_top(self, deep_mlp):
        assert layer_mask_top(deep_mlp, 2).indices == (0, 1)
        assert layer_mask_top(deep_mlp, 0).indices == ()

    def test_bottom(self, deep_mlp):
        assert layer_mask_bottom(deep_mlp, 2).indices == (3, 4)
        assert layer_mask_bottom(deep_mlp, 5).indices == (0, 1, 2, 3, 4)

    def test_single(self, deep_mlp):
        assert layer_mask_single(deep_mlp, 3).indices == (3,)

    def test_pair(self, deep_mlp):
        assert layer_mask_pair(deep_mlp, 1, 2).indices == (1, 3)

    def test_zero_interval_is_single_layer(self, deep_mlp):
        assert layer_mask_pair(deep_mlp, 2, 0).indices == (2,)

    @pytest.mark.parametrize(
        "build,args",
        [
            (layer_mask_top, (6,)),
            (layer_mask_bottom, (-1,)),
            (layer_mask_single, (5,)),
            (layer_mask_pair, (3, 2)),
            (layer_mask_pair, (0, -1)),
        ],
    )
    def test_out_of_range(self, deep_mlp, build, args):
        with pytest.raises(ConfigurationError):
            build(deep_mlp, *args)

    def test_default_is_top_four(self, deep_mlp, mlp):
        assert default_mask(deep_mlp).indices == (0, 1, 2, 3)
        assert default_mask(mlp).indices == (0, 1)

    def test_validate_sorts_and_rejects_duplicates(self, deep_mlp):
        assert validate_mask(deep_mlp, [3, 0]).indices == (0, 3)
        with pytest.raises(ConfigurationError):
            validate_mask(deep_mlp, [1, 1])
        with pytest.raises(ConfigurationError):
            validate_mask(deep_mlp, [7])


class TestParseMaskSpec:
    def test_ranges_expand(self, deep_mlp):
        masks = parse_mask_spec(deep_mlp, "top:1..5")
        assert [m.indices for m in masks] == [
            (0,),
            (0, 1),
            (0, 1, 2),
            (0, 1, 2, 3),
            (0, 1, 2, 3, 4),
        ]

    def test_mixed_groups(self, deep_mlp):
        masks = parse_mask_spec(deep_mlp, "bottom:1, single:0..1, pair:0:0..2")
        labels = [m.label for m in masks]
        assert labels == [
            "bottom:1",
            "single:0",
            "single:1",
            "pair:0:0",
            "pair:0:1",
            "pair:0:2",
        ]

    @pytest.mark.parametrize("spec", ["", "middle:1", "top:3..1", "top:9", "pair:1"])
    def test_bad_specs(self, deep_mlp, spec):
        with pytest.raises(ConfigurationError):
            parse_mask_spec(deep_mlp, spec)
