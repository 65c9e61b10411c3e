"""test functions in zsm_model.py"""

import pytest
import torch

from src.model_config import ModelConfig
from src.zsm_model import (
    FeatureExtractor,
    LRSynthesizer,
    Reconstructor,
    ZoomingSlowMo,
    count_parameters,
    extract_features,
    parameter_breakdown,
)

from .finite_diff import check_param_gradients

VARIANTS = ["a", "b", "c", "d", "e", "f"]


def _small_config(variant, pcd_levels=3):
    return ModelConfig(
        variant=variant,
        k1=1,
        k2=1,
        k3=1,
        channels=8,
        pcd_levels=pcd_levels,
        deformable_groups=2,
    )


def _param_names(variant):
    model = ZoomingSlowMo(_small_config(variant))
    return {name for name, _ in model.named_parameters()}


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("frame_cnt", [2, 3, 4])
def test_forward_shapes(variant, frame_cnt):
    """n+1 LR frames give 2n+1 HR frames at 4x and n intermediate feature maps"""
    torch.manual_seed(0)
    model = ZoomingSlowMo(_small_config(variant))
    hr_frames, interp_features = model(torch.rand(2, frame_cnt, 3, 8, 12))
    assert hr_frames.shape == (2, 2 * frame_cnt - 1, 3, 32, 48)
    assert len(interp_features) == frame_cnt - 1
    assert all(feat.shape == (2, 8, 8, 12) for feat in interp_features)


def test_forward_training_patch_shapes():
    """4 LR frames of 32x32 give 7 HR frames of 128x128"""
    model = ZoomingSlowMo(_small_config("f"))
    hr_frames, _ = model(torch.rand(1, 4, 3, 32, 32))
    assert hr_frames.shape == (1, 7, 3, 128, 128)


def test_forward_errors():
    model = ZoomingSlowMo(_small_config("f"))
    with pytest.raises(ValueError):
        model(torch.rand(1, 1, 3, 8, 8))
    with pytest.raises(ValueError):
        model(torch.rand(1, 2, 3, 6, 8))


def test_forward_deterministic():
    torch.manual_seed(1)
    model = ZoomingSlowMo(_small_config("e"))
    lr_frames = torch.rand(1, 3, 3, 8, 8)
    with torch.no_grad():
        assert torch.equal(model(lr_frames)[0], model(lr_frames)[0])


def test_variant_structure():
    """each variant adds only its stated modules"""
    names = {variant: _param_names(variant) for variant in VARIANTS}

    def added(small, large):
        return {".".join(name.split(".")[:2]) for name in names[large] - names[small]}

    shared_ab = names["a"] & names["b"]
    assert {name.split(".")[0] for name in shared_ab} == {
        "feature_extractor",
        "reconstructor",
    }
    assert all(name.startswith("interp.") for name in names["b"] - names["a"])
    assert added("b", "c") == {"aggregator.cell"}
    assert added("c", "d") == {"aggregator.aligner_h", "aggregator.aligner_c"}
    assert names["e"] - names["d"] == {
        "reconstructor.fusion.weight",
        "reconstructor.fusion.bias",
    }
    assert all(name.startswith("lr_synthesizer.") for name in names["f"] - names["e"])
    for small, large in zip(VARIANTS[1:-1], VARIANTS[2:]):
        assert names[small] <= names[large]


def test_count_parameters_single_conv():
    """3x3 convolution 3->64 with bias"""
    extractor = FeatureExtractor(channels=64, k1=0)
    assert count_parameters(extractor) == 3 * 64 * 9 + 64 == 1792


def test_count_parameters_minimal():
    """variant a without residual blocks, by hand and by enumeration"""
    config = ModelConfig(variant="a", k1=0, k2=0, k3=0)
    conv_first = 1792
    interp = (2 * 64 * 64 * 9 + 64) + (64 * 64 * 9 + 64)
    upconvs = 2 * (64 * 256 * 9 + 256)
    hr_conv = 64 * 64 * 9 + 64
    conv_last = 64 * 3 * 9 + 3
    expected = conv_first + interp + upconvs + hr_conv + conv_last
    assert count_parameters(config) == expected == 446595
    model = ZoomingSlowMo(config)
    assert sum(parameter_breakdown(model).values()) == expected


def test_count_parameters_full_model():
    """variant f, k1=5, k2=40, 64 channels, 3 pcd levels: near 11.10 million"""
    total = count_parameters(ModelConfig(variant="f", k1=5, k2=40, pcd_levels=3))
    assert abs(total - 11.10e6) <= 0.15 * 11.10e6


def test_parameter_breakdown():
    model = ZoomingSlowMo(_small_config("f"))
    breakdown = parameter_breakdown(model)
    assert list(breakdown) == [
        "feature_extractor",
        "interp",
        "aggregator",
        "reconstructor",
        "lr_synthesizer",
    ]
    assert sum(breakdown.values()) == count_parameters(model)
    breakdown_a = parameter_breakdown(ZoomingSlowMo(_small_config("a")))
    assert list(breakdown_a) == ["feature_extractor", "interp", "reconstructor"]


def test_extract_features():
    extractor = FeatureExtractor(channels=4, k1=1)
    features = extract_features(torch.rand(2, 3, 3, 5, 6), extractor)
    assert len(features) == 3
    assert all(feat.shape == (2, 4, 5, 6) for feat in features)
    with pytest.raises(ValueError):
        extract_features(torch.rand(2, 3, 5, 6), extractor)


def test_reconstructor_and_synthesizer():
    recon = Reconstructor(in_channels=16, channels=8, k2=1)
    assert recon(torch.rand(1, 16, 6, 5)).shape == (1, 3, 24, 20)
    with pytest.raises(ValueError):
        recon(torch.rand(1, 8, 6, 5))
    synth = LRSynthesizer(channels=8, k3=0)
    assert synth(torch.rand(2, 8, 6, 5)).shape == (2, 3, 6, 5)
    with pytest.raises(ValueError):
        synth(torch.rand(2, 4, 6, 5))


def test_reconstruct_hr_gradients():
    """derivatives w.r.t. the hidden map and the reconstruction weights"""
    gen = torch.Generator().manual_seed(4)
    names = [
        "fusion.weight",
        "body.0.conv1.weight",
        "upconv1.weight",
        "upconv2.weight",
        "hr_conv.weight",
        "conv_last.bias",
    ]
    for seed in range(20):
        torch.manual_seed(seed)
        recon = Reconstructor(in_channels=4, channels=2, k2=1).double()
        hidden = torch.randn(1, 4, 3, 3, generator=gen, dtype=torch.float64)
        proj = torch.randn(1, 3, 12, 12, generator=gen, dtype=torch.float64)

        def fcn(apply, hidden, proj=proj):
            return (apply(hidden) * proj).sum()

        # small eps keeps central differences clear of the rectifier kinks
        worst = check_param_gradients(
            recon, names, fcn, inputs=(hidden,), seed=seed, eps=1.0e-8
        )
        assert worst <= 1.0e-4


def test_infer_chunking():
    """long sequences run as 4-frame clips sharing a frame, earlier clip kept"""
    torch.manual_seed(2)
    model = ZoomingSlowMo(_small_config("e")).eval()
    lr_frames = torch.rand(1, 6, 3, 8, 8)
    hr_frames = model.infer(lr_frames)
    assert hr_frames.shape == (1, 11, 3, 32, 32)
    with torch.no_grad():
        first_clip, _ = model(lr_frames[:, :4])
        second_clip, _ = model(lr_frames[:, 3:])
    assert torch.equal(hr_frames[:, :7], first_clip.clamp(0.0, 1.0))
    assert torch.equal(hr_frames[:, 7:], second_clip[:, 1:].clamp(0.0, 1.0))


def test_infer_pads_arbitrary_sizes():
    model = ZoomingSlowMo(_small_config("b", pcd_levels=3)).eval()
    hr_frames = model.infer(torch.rand(1, 2, 3, 5, 7))
    assert hr_frames.shape == (1, 3, 3, 20, 28)
    assert hr_frames.min().item() >= 0.0
    assert hr_frames.max().item() <= 1.0
    with pytest.raises(ValueError):
        model.infer(torch.rand(1, 1, 3, 8, 8))
