"""
one-stage space-time video super-resolution network: feature extraction, feature
interpolation, sequence aggregation, HR reconstruction, LR synthesis head
"""

import logging

import torch
import torch.nn.functional as F
from torch import nn

from .core_ops import LRELU_SLOPE, ResidualBlockNoBN, make_layer, pixel_shuffle
from .deformable_convlstm import DeformableConvLSTM
from .model_config import ModelConfig
from .temporal_interpolation import (
    FeatureInterpolation,
    NaiveFeatureInterpolation,
    interpolate_sequence,
)

# input frames per clip when inference runs over a long sequence
INFER_CLIP_FRAMES = 4


class FeatureExtractor(nn.Module):
    """3->C convolution followed by k1 residual blocks"""

    def __init__(self, channels=64, k1=5):
        super().__init__()
        self.conv_first = nn.Conv2d(3, channels, 3, 1, 1, bias=True)
        self.body = make_layer(lambda: ResidualBlockNoBN(channels), k1)

    def forward(self, x):
        return self.body(self.conv_first(x))


def extract_features(frames, params):
    """(B, T, 3, H, W) frames -> list of T feature maps (B, C, H, W)"""
    if frames.dim() != 5 or frames.shape[2] != 3:
        msg = "frames must have shape (B, T, 3, H, W), not %s" % (tuple(frames.shape),)
        raise ValueError(msg)
    batch, frame_cnt = frames.shape[:2]
    feat = params(frames.reshape(batch * frame_cnt, *frames.shape[2:]))
    feat = feat.view(batch, frame_cnt, *feat.shape[1:])
    return list(torch.unbind(feat, dim=1))


class Reconstructor(nn.Module):
    """
    optional 1x1 fusion to C channels, k2 residual blocks, two x2 pixel-shuffle
    stages, HR conv, 3-channel output conv
    """

    def __init__(self, in_channels=64, channels=64, k2=40):
        super().__init__()
        self.in_channels = in_channels
        if in_channels != channels:
            self.fusion = nn.Conv2d(in_channels, channels, 1, 1, 0, bias=True)
        else:
            self.fusion = nn.Identity()
        self.body = make_layer(lambda: ResidualBlockNoBN(channels), k2)
        self.upconv1 = nn.Conv2d(channels, 4 * channels, 3, 1, 1, bias=True)
        self.upconv2 = nn.Conv2d(channels, 4 * channels, 3, 1, 1, bias=True)
        self.hr_conv = nn.Conv2d(channels, channels, 3, 1, 1, bias=True)
        self.conv_last = nn.Conv2d(channels, 3, 3, 1, 1, bias=True)

    def forward(self, hidden):
        return reconstruct_hr(hidden, self)


def reconstruct_hr(hidden, params):
    """(B, C_in, h, w) hidden map -> (B, 3, 4h, 4w) frame, unclipped"""
    if hidden.dim() != 4 or hidden.shape[1] != params.in_channels:
        msg = "hidden shape %s, expected %d channels" % (
            tuple(hidden.shape),
            params.in_channels,
        )
        raise ValueError(msg)
    out = params.body(params.fusion(hidden))
    out = F.leaky_relu(pixel_shuffle(params.upconv1(out), 2), LRELU_SLOPE)
    out = F.leaky_relu(pixel_shuffle(params.upconv2(out), 2), LRELU_SLOPE)
    out = F.leaky_relu(params.hr_conv(out), LRELU_SLOPE)
    return params.conv_last(out)


class LRSynthesizer(nn.Module):
    """k3 residual blocks then a C->3 convolution"""

    def __init__(self, channels=64, k3=5):
        super().__init__()
        self.channels = channels
        self.body = make_layer(lambda: ResidualBlockNoBN(channels), k3)
        self.conv_out = nn.Conv2d(channels, 3, 3, 1, 1, bias=True)

    def forward(self, feature):
        return synthesize_lr(feature, self)


def synthesize_lr(feature, params):
    """(B, C, h, w) feature map -> (B, 3, h, w) LR frame"""
    if feature.dim() != 4 or feature.shape[1] != params.channels:
        msg = "feature shape %s, expected %d channels" % (
            tuple(feature.shape),
            params.channels,
        )
        raise ValueError(msg)
    return params.conv_out(params.body(feature))


class ZoomingSlowMo(nn.Module):
    """full network for one ModelConfig variant"""

    def __init__(self, model_config=None):
        super().__init__()
        if model_config is None:
            model_config = ModelConfig()
        self.model_config = model_config
        channels = model_config.channels
        groups = model_config.deformable_groups

        self.feature_extractor = FeatureExtractor(channels, model_config.k1)
        if model_config.interp == "naive":
            self.interp = NaiveFeatureInterpolation(channels)
        else:
            self.interp = FeatureInterpolation(
                channels, groups, model_config.pcd_levels
            )
        recon_in_channels = channels
        if model_config.aggregation != "none":
            self.aggregator = DeformableConvLSTM(
                channels,
                groups,
                model_config.pcd_levels,
                aligned=model_config.aggregation == "dconvlstm",
                bidirectional=model_config.bidirectional,
            )
            recon_in_channels = self.aggregator.out_channels
        else:
            self.aggregator = None
        self.reconstructor = Reconstructor(recon_in_channels, channels, model_config.k2)
        if model_config.lr_synthesis:
            self.lr_synthesizer = LRSynthesizer(channels, model_config.k3)
        else:
            self.lr_synthesizer = None

    def forward(self, lr_frames):
        """
        (B, n+1, 3, h, w) LR frames -> ((B, 2n+1, 3, 4h, 4w) HR frames, list of the
        n synthesized intermediate feature maps)
        """
        if lr_frames.dim() != 5 or lr_frames.shape[1] < 2:
            msg = "need (B, T, 3, h, w) LR frames with T >= 2, got %s" % (
                tuple(lr_frames.shape),
            )
            raise ValueError(msg)
        multiple = self.model_config.pad_multiple
        if lr_frames.shape[-2] % multiple != 0 or lr_frames.shape[-1] % multiple != 0:
            msg = "LR dims %s not multiples of %d, use infer for arbitrary sizes" % (
                tuple(lr_frames.shape[-2:]),
                multiple,
            )
            raise ValueError(msg)

        features = extract_features(lr_frames, self.feature_extractor)
        sequence = interpolate_sequence(features, self.interp)
        interp_features = sequence[1::2]
        if self.aggregator is not None:
            sequence = self.aggregator(sequence)

        hidden = torch.stack(sequence, dim=1)
        batch, frame_cnt = hidden.shape[:2]
        hr_frames = self.reconstructor(
            hidden.reshape(batch * frame_cnt, *hidden.shape[2:])
        )
        hr_frames = hr_frames.view(batch, frame_cnt, *hr_frames.shape[1:])
        return hr_frames, interp_features

    def infer(self, lr_frames):
        """
        HR frames for an arbitrary-length, arbitrary-size LR sequence, clipped to
        [0, 1]

        LR frames are edge-padded to a multiple of pad_multiple. Sequences longer
        than INFER_CLIP_FRAMES run as overlapping clips sharing one frame; at an
        overlap the earlier clip's output is kept.
        """
        logger = logging.getLogger(__name__)
        if lr_frames.dim() != 5 or lr_frames.shape[1] < 2:
            msg = "need (B, T, 3, h, w) LR frames with T >= 2, got %s" % (
                tuple(lr_frames.shape),
            )
            raise ValueError(msg)
        batch, frame_cnt, _, height, width = lr_frames.shape
        multiple = self.model_config.pad_multiple
        pad_h = -height % multiple
        pad_w = -width % multiple
        if pad_h or pad_w:
            logger.debug("padding LR frames by (%d, %d)", pad_h, pad_w)
            padded = F.pad(
                lr_frames.reshape(batch * frame_cnt, 3, height, width),
                (0, pad_w, 0, pad_h),
                mode="replicate",
            )
            lr_frames = padded.view(batch, frame_cnt, *padded.shape[1:])

        outputs = []
        with torch.no_grad():
            start = 0
            while start < frame_cnt - 1:
                stop = min(start + INFER_CLIP_FRAMES, frame_cnt)
                hr_frames, _ = self(lr_frames[:, start:stop])
                outputs.append(hr_frames if start == 0 else hr_frames[:, 1:])
                start = stop - 1
        hr_frames = torch.cat(outputs, dim=1)
        scale = self.model_config.scale
        hr_frames = hr_frames[..., : scale * height, : scale * width]
        return hr_frames.clamp(0.0, 1.0)


def count_parameters(model_or_config):
    """total learnable scalar count of a model, or of the model a config builds"""
    if isinstance(model_or_config, ModelConfig):
        model_or_config = ZoomingSlowMo(model_or_config)
    return sum(param.numel() for param in model_or_config.parameters())


def parameter_breakdown(model):
    """dict of parameter counts per top-level module, in registration order"""
    return {
        name: sum(param.numel() for param in child.parameters())
        for name, child in model.named_children()
    }
