"""
synthesis of intermediate LR feature maps from neighboring feature maps,
via learned deformable sampling and linear blending
"""

import logging

import torch
import torch.nn.functional as F
from torch import nn

from .core_ops import LRELU_SLOPE, DeformableSampler


def _check_same_shape(name_a, tensor_a, name_b, tensor_b):
    """raise ValueError if the two tensors differ in shape"""
    if tensor_a.shape != tensor_b.shape:
        msg = "%s shape %s != %s shape %s" % (
            name_a,
            tuple(tensor_a.shape),
            name_b,
            tuple(tensor_b.shape),
        )
        raise ValueError(msg)


class OffsetPredictor(nn.Module):
    """
    two 3x3 convs with leaky rectifier over [f_ref, f_other], then a 3x3 offset head

    The head is zero-initialized, so an untrained predictor yields all-zero offsets.
    """

    def __init__(self, channels, offset_channels):
        super().__init__()
        self.conv1 = nn.Conv2d(2 * channels, channels, 3, 1, 1, bias=True)
        self.conv2 = nn.Conv2d(channels, channels, 3, 1, 1, bias=True)
        self.offset_head = nn.Conv2d(channels, offset_channels, 3, 1, 1, bias=True)
        nn.init.zeros_(self.offset_head.weight)
        nn.init.zeros_(self.offset_head.bias)

    def forward(self, f_ref, f_other):
        feat = F.leaky_relu(self.conv1(torch.cat([f_ref, f_other], dim=1)), LRELU_SLOPE)
        feat = F.leaky_relu(self.conv2(feat), LRELU_SLOPE)
        return self.offset_head(feat)


def predict_offsets(f_ref, f_other, predictor):
    """offset field for sampling f_ref, conditioned on f_other"""
    _check_same_shape("f_ref", f_ref, "f_other", f_other)
    return predictor(f_ref, f_other)


def sample_features(f, offsets, sampler):
    """deformable sampling of f with the given offsets and sampler weights"""
    return sampler(f, offsets)


class PCDAligner(nn.Module):
    """
    pyramid, cascading and deformable alignment of a feature map to a reference

    Offsets are estimated coarse to fine over a stride-2 feature pyramid, each
    level conditioned on the upsampled offset features of the coarser level, and
    refined by a cascading deformable sampling at full resolution.
    """

    def __init__(self, channels=64, groups=8, levels=3, kernel_size=3):
        super().__init__()
        if levels < 2:
            msg = "PCDAligner needs at least 2 levels, got %d" % levels
            raise ValueError(msg)
        self.levels = levels

        # pyramid: level l is 2^(l-1) times coarser than level 1
        self.down_conv1 = nn.ModuleList()
        self.down_conv2 = nn.ModuleList()
        for _ in range(levels - 1):
            self.down_conv1.append(nn.Conv2d(channels, channels, 3, 2, 1, bias=True))
            self.down_conv2.append(nn.Conv2d(channels, channels, 3, 1, 1, bias=True))

        offset_channels = 2 * kernel_size * kernel_size * groups
        self.offset_conv1 = nn.ModuleList()
        self.offset_conv2 = nn.ModuleList()
        self.offset_conv3 = nn.ModuleList()
        self.offset_head = nn.ModuleList()
        self.sampler = nn.ModuleList()
        self.feat_conv = nn.ModuleList()
        # index 0 is the coarsest level
        for ind in range(levels):
            coarsest = ind == 0
            self.offset_conv1.append(nn.Conv2d(2 * channels, channels, 3, 1, 1))
            conv2_in = channels if coarsest else 2 * channels
            self.offset_conv2.append(nn.Conv2d(conv2_in, channels, 3, 1, 1))
            self.offset_conv3.append(
                nn.Identity() if coarsest else nn.Conv2d(channels, channels, 3, 1, 1)
            )
            self.offset_head.append(nn.Conv2d(channels, offset_channels, 3, 1, 1))
            self.sampler.append(
                DeformableSampler(channels, channels, kernel_size, groups)
            )
            self.feat_conv.append(
                nn.Identity()
                if coarsest
                else nn.Conv2d(2 * channels, channels, 3, 1, 1, bias=True)
            )

        self.cas_offset_conv1 = nn.Conv2d(2 * channels, channels, 3, 1, 1)
        self.cas_offset_conv2 = nn.Conv2d(channels, channels, 3, 1, 1)
        self.cas_offset_head = nn.Conv2d(channels, offset_channels, 3, 1, 1)
        self.cas_sampler = DeformableSampler(channels, channels, kernel_size, groups)

        for head in list(self.offset_head) + [self.cas_offset_head]:
            nn.init.zeros_(head.weight)
            nn.init.zeros_(head.bias)

    def pyramid(self, feat):
        """list of feature maps, finest first"""
        res = [feat]
        for conv1, conv2 in zip(self.down_conv1, self.down_conv2):
            feat = F.leaky_relu(conv1(feat), LRELU_SLOPE)
            feat = F.leaky_relu(conv2(feat), LRELU_SLOPE)
            res.append(feat)
        return res

    def forward(self, nbr, ref):
        _check_same_shape("nbr", nbr, "ref", ref)
        factor = 2 ** (self.levels - 1)
        if nbr.shape[-2] % factor != 0 or nbr.shape[-1] % factor != 0:
            msg = "spatial dims %s not divisible by %d" % (
                tuple(nbr.shape[-2:]),
                factor,
            )
            raise ValueError(msg)

        # coarsest first
        nbr_pyr = self.pyramid(nbr)[::-1]
        ref_pyr = self.pyramid(ref)[::-1]

        up_offset_feat, up_feat = None, None
        for ind in range(self.levels):
            offset_feat = torch.cat([nbr_pyr[ind], ref_pyr[ind]], dim=1)
            offset_feat = F.leaky_relu(self.offset_conv1[ind](offset_feat), LRELU_SLOPE)
            if ind == 0:
                offset_feat = F.leaky_relu(
                    self.offset_conv2[ind](offset_feat), LRELU_SLOPE
                )
            else:
                offset_feat = torch.cat([offset_feat, up_offset_feat * 2], dim=1)
                offset_feat = F.leaky_relu(
                    self.offset_conv2[ind](offset_feat), LRELU_SLOPE
                )
                offset_feat = F.leaky_relu(
                    self.offset_conv3[ind](offset_feat), LRELU_SLOPE
                )

            offsets = self.offset_head[ind](offset_feat)
            feat = self.sampler[ind](nbr_pyr[ind], offsets)
            if ind == 0:
                feat = F.leaky_relu(feat, LRELU_SLOPE)
            else:
                feat = self.feat_conv[ind](torch.cat([feat, up_feat], dim=1))
                if ind < self.levels - 1:
                    feat = F.leaky_relu(feat, LRELU_SLOPE)

            if ind < self.levels - 1:
                up_offset_feat = F.interpolate(
                    offset_feat, scale_factor=2, mode="bilinear", align_corners=False
                )
                up_feat = F.interpolate(
                    feat, scale_factor=2, mode="bilinear", align_corners=False
                )

        # cascading refinement at full resolution
        offset_feat = torch.cat([feat, ref_pyr[-1]], dim=1)
        offset_feat = F.leaky_relu(self.cas_offset_conv1(offset_feat), LRELU_SLOPE)
        offset_feat = F.leaky_relu(self.cas_offset_conv2(offset_feat), LRELU_SLOPE)
        offsets = self.cas_offset_head(offset_feat)
        return F.leaky_relu(self.cas_sampler(feat, offsets), LRELU_SLOPE)


class FeatureInterpolation(nn.Module):
    """
    deformable feature interpolation:
        F2 = alpha * T1(f1, g1([f1, f3])) + beta * T3(f3, g3([f3, f1]))
    with alpha, beta 1x1 convolutions

    With pcd_levels > 1, each sampling function is a PCDAligner instead of a
    single-level offset predictor and sampler pair.
    """

    def __init__(self, channels=64, groups=8, pcd_levels=1, kernel_size=3):
        super().__init__()
        self.pcd_levels = pcd_levels
        if pcd_levels > 1:
            self.aligner_fwd = PCDAligner(channels, groups, pcd_levels, kernel_size)
            self.aligner_bwd = PCDAligner(channels, groups, pcd_levels, kernel_size)
        else:
            sampler_args = (channels, channels, kernel_size, groups)
            self.sampler_fwd = DeformableSampler(*sampler_args)
            self.sampler_bwd = DeformableSampler(*sampler_args)
            offset_channels = self.sampler_fwd.offset_channels
            self.predictor_fwd = OffsetPredictor(channels, offset_channels)
            self.predictor_bwd = OffsetPredictor(channels, offset_channels)
        self.blend_alpha = nn.Conv2d(channels, channels, 1, 1, 0, bias=False)
        self.blend_beta = nn.Conv2d(channels, channels, 1, 1, 0, bias=False)

    def sample_fwd(self, f1, f3):
        """T1(f1, Phi1), Phi1 predicted from [f1, f3]"""
        if self.pcd_levels > 1:
            return self.aligner_fwd(f1, f3)
        offsets = predict_offsets(f1, f3, self.predictor_fwd)
        return sample_features(f1, offsets, self.sampler_fwd)

    def sample_bwd(self, f3, f1):
        """T3(f3, Phi3), Phi3 predicted from [f3, f1]"""
        if self.pcd_levels > 1:
            return self.aligner_bwd(f3, f1)
        offsets = predict_offsets(f3, f1, self.predictor_bwd)
        return sample_features(f3, offsets, self.sampler_bwd)

    def forward(self, f1, f3):
        return interpolate_intermediate(f1, f3, self)


class NaiveFeatureInterpolation(nn.Module):
    """blend [f1, f3] with two plain 3x3 convolutions, no deformable sampling"""

    def __init__(self, channels=64):
        super().__init__()
        self.conv1 = nn.Conv2d(2 * channels, channels, 3, 1, 1, bias=True)
        self.conv2 = nn.Conv2d(channels, channels, 3, 1, 1, bias=True)

    def forward(self, f1, f3):
        _check_same_shape("f1", f1, "f3", f3)
        feat = F.leaky_relu(self.conv1(torch.cat([f1, f3], dim=1)), LRELU_SLOPE)
        return self.conv2(feat)


def interpolate_intermediate(f1, f3, params):
    """synthesize the feature map between f1 and f3"""
    _check_same_shape("f1", f1, "f3", f3)
    term_fwd = params.blend_alpha(params.sample_fwd(f1, f3))
    term_bwd = params.blend_beta(params.sample_bwd(f3, f1))
    return term_fwd + term_bwd


def interpolate_sequence(features, interp):
    """
    interleave n+1 feature maps with the n maps synthesized between neighbors,
    returning 2n+1 maps [F1, F2, F3, ..., F2n+1]
    """
    if len(features) < 2:
        msg = "need at least 2 feature maps to interpolate, got %d" % len(features)
        raise ValueError(msg)
    logger = logging.getLogger(__name__)
    logger.debug("interpolating %d intermediate feature maps", len(features) - 1)
    res = [features[0]]
    for f_prev, f_next in zip(features[:-1], features[1:]):
        res.append(interp(f_prev, f_next))
        res.append(f_next)
    return res
