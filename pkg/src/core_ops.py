"""
differentiable numeric primitives: bilinear sampling, deformable convolution,
pixel shuffle, Charbonnier penalty, residual block
"""

import math

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn
from torchvision.ops import deform_conv2d

# negative slope of the leaky rectifier used throughout the network
LRELU_SLOPE = 0.1

# default Charbonnier epsilon
CHARBONNIER_EPS = 1.0e-3


################################################################################
# bilinear sampling and deformable convolution


def bilinear_sample(feature, y, x, channel, batch):
    """
    bilinear interpolation of feature[batch, channel] at real location (y, x)

    Grid values outside [0, H-1] x [0, W-1] are treated as zero. channel may be an
    int or a slice; with a slice, a vector of sampled values is returned.
    """
    height, width = feature.shape[-2:]
    y_low = math.floor(y)
    x_low = math.floor(x)
    res = 0.0
    for y_ind, y_wt in ((y_low, 1.0 - (y - y_low)), (y_low + 1, y - y_low)):
        if y_ind < 0 or y_ind > height - 1:
            continue
        for x_ind, x_wt in ((x_low, 1.0 - (x - x_low)), (x_low + 1, x - x_low)):
            if x_ind < 0 or x_ind > width - 1:
                continue
            res = res + (y_wt * x_wt) * feature[batch, channel, y_ind, x_ind]
    return res


def _check_deformable_args(input_shape, offsets_shape, weight_shape, groups):
    """vet shapes of deformable convolution arguments, return (kh, kw)"""
    if len(input_shape) != 4 or len(offsets_shape) != 4 or len(weight_shape) != 4:
        msg = "input, offsets and weight must all be 4-dimensional"
        raise ValueError(msg)
    kernel_h, kernel_w = weight_shape[2:]
    if kernel_h % 2 == 0 or kernel_w % 2 == 0:
        msg = "kernel dims must be odd, got %dx%d" % (kernel_h, kernel_w)
        raise ValueError(msg)
    if groups < 1 or input_shape[1] % groups != 0:
        msg = "input channels %d not divisible by groups %d" % (input_shape[1], groups)
        raise ValueError(msg)
    if weight_shape[1] != input_shape[1]:
        msg = "weight expects %d input channels, input has %d" % (
            weight_shape[1],
            input_shape[1],
        )
        raise ValueError(msg)
    taps = kernel_h * kernel_w
    if offsets_shape[1] != 2 * taps * groups:
        msg = "offsets have %d channels, expected 2*%d taps*%d groups" % (
            offsets_shape[1],
            taps,
            groups,
        )
        raise ValueError(msg)
    if offsets_shape[0] != input_shape[0] or offsets_shape[2:] != input_shape[2:]:
        msg = "offsets shape %s not aligned with input shape %s" % (
            tuple(offsets_shape),
            tuple(input_shape),
        )
        raise ValueError(msg)
    return kernel_h, kernel_w


def deformable_conv(input, offsets, weight, bias=None, groups=1):
    """
    stride-1, zero-padded deformable convolution

    offsets has 2*K*groups channels, ordered (dy, dx) per tap, taps in row-major
    kernel order, deformable groups outermost. Differentiable w.r.t. input,
    offsets, weight and bias.
    """
    # pylint: disable=redefined-builtin
    kernel_h, kernel_w = _check_deformable_args(
        input.shape, offsets.shape, weight.shape, groups
    )
    return deform_conv2d(
        input,
        offsets,
        weight,
        bias=bias,
        stride=1,
        padding=(kernel_h // 2, kernel_w // 2),
    )


def deformable_conv_reference(input, offsets, weight, bias=None, groups=1):
    """
    naive per-pixel loop evaluation of deformable_conv, composed from
    bilinear_sample, in float64
    """
    # pylint: disable=redefined-builtin
    input, offsets, weight = (_as_float64(arr) for arr in (input, offsets, weight))
    kernel_h, kernel_w = _check_deformable_args(
        input.shape, offsets.shape, weight.shape, groups
    )
    batch_cnt, channels, height, width = input.shape
    taps = kernel_h * kernel_w
    group_channels = channels // groups

    res = np.zeros((batch_cnt, weight.shape[0], height, width))
    for batch in range(batch_cnt):
        for group in range(groups):
            chans = slice(group * group_channels, (group + 1) * group_channels)
            for y_ind in range(height):
                for x_ind in range(width):
                    for tap in range(taps):
                        k_y, k_x = divmod(tap, kernel_w)
                        off_ind = 2 * (group * taps + tap)
                        pos_y = (
                            y_ind
                            + k_y
                            - kernel_h // 2
                            + offsets[batch, off_ind, y_ind, x_ind]
                        )
                        pos_x = (
                            x_ind
                            + k_x
                            - kernel_w // 2
                            + offsets[batch, off_ind + 1, y_ind, x_ind]
                        )
                        # scalar zero when every corner is off the grid
                        vals = np.broadcast_to(
                            bilinear_sample(input, pos_y, pos_x, chans, batch),
                            (group_channels,),
                        )
                        res[batch, :, y_ind, x_ind] += weight[:, chans, k_y, k_x] @ vals
    if bias is not None:
        res += _as_float64(bias)[None, :, None, None]
    return res


def _as_float64(arr):
    """return float64 numpy copy of a tensor or array"""
    if isinstance(arr, torch.Tensor):
        arr = arr.detach().cpu().numpy()
    return np.asarray(arr, dtype=np.float64)


################################################################################
# sub-pixel rearrangement


def pixel_shuffle(input, r):
    """sub-pixel upscaling: (B, C*r^2, H, W) -> (B, C, r*H, r*W)"""
    # pylint: disable=redefined-builtin
    if input.shape[-3] % (r * r) != 0:
        msg = "channels %d not divisible by r^2=%d" % (input.shape[-3], r * r)
        raise ValueError(msg)
    return F.pixel_shuffle(input, r)


def pixel_unshuffle(input, r):
    """inverse of pixel_shuffle: (B, C, r*H, r*W) -> (B, C*r^2, H, W)"""
    # pylint: disable=redefined-builtin
    if input.shape[-2] % r != 0 or input.shape[-1] % r != 0:
        msg = "spatial dims %s not divisible by r=%d" % (tuple(input.shape[-2:]), r)
        raise ValueError(msg)
    return F.pixel_unshuffle(input, r)


################################################################################
# penalty


def charbonnier(pred, target, eps=CHARBONNIER_EPS):
    """mean over elements of sqrt((pred - target)^2 + eps^2)"""
    if pred.shape != target.shape:
        msg = "pred shape %s != target shape %s" % (
            tuple(pred.shape),
            tuple(target.shape),
        )
        raise ValueError(msg)
    if eps <= 0.0:
        msg = "eps must be positive, got %s" % eps
        raise ValueError(msg)
    diff = pred - target
    return torch.sqrt(diff * diff + eps * eps).mean()


################################################################################
# residual block and module wrappers


def residual_block(input, w1, w2, b1=None, b2=None):
    """input + conv(w2, lrelu(conv(w1, input))), 3x3 channel-preserving convs"""
    # pylint: disable=redefined-builtin
    channels = input.shape[1]
    for name, weight in (("w1", w1), ("w2", w2)):
        if tuple(weight.shape) != (channels, channels, 3, 3):
            msg = "%s shape %s incompatible with %d input channels" % (
                name,
                tuple(weight.shape),
                channels,
            )
            raise ValueError(msg)
    res = F.leaky_relu(F.conv2d(input, w1, b1, padding=1), LRELU_SLOPE)
    return input + F.conv2d(res, w2, b2, padding=1)


def default_init_weights(module_list, scale=1.0, bias_fill=0.0):
    """kaiming-normal init of conv weights, scaled by scale, constant bias"""
    if not isinstance(module_list, (list, tuple)):
        module_list = [module_list]
    with torch.no_grad():
        for module in module_list:
            for sub in module.modules():
                if isinstance(sub, nn.Conv2d):
                    nn.init.kaiming_normal_(sub.weight)
                    sub.weight.mul_(scale)
                    if sub.bias is not None:
                        sub.bias.fill_(bias_fill)


class ResidualBlockNoBN(nn.Module):
    """residual unit without normalization: conv-lrelu-conv plus identity"""

    def __init__(self, channels=64):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, 1, 1, bias=True)
        self.conv2 = nn.Conv2d(channels, channels, 3, 1, 1, bias=True)
        default_init_weights([self.conv1, self.conv2], 0.1)

    def forward(self, x):
        return residual_block(
            x, self.conv1.weight, self.conv2.weight, self.conv1.bias, self.conv2.bias
        )


def make_layer(block_fn, count):
    """stack count blocks produced by block_fn into a Sequential"""
    return nn.Sequential(*[block_fn() for _ in range(count)])


class DeformableSampler(nn.Module):
    """weights of a deformable convolution whose offsets are supplied by the caller"""

    def __init__(self, in_channels, out_channels, kernel_size=3, groups=1, bias=True):
        super().__init__()
        if kernel_size % 2 == 0:
            msg = "kernel_size must be odd, got %d" % kernel_size
            raise ValueError(msg)
        self.groups = groups
        self.kernel_size = kernel_size
        self.weight = nn.Parameter(
            torch.empty(out_channels, in_channels, kernel_size, kernel_size)
        )
        if bias:
            self.bias = nn.Parameter(torch.empty(out_channels))
        else:
            self.register_parameter("bias", None)
        self.reset_parameters()

    @property
    def taps(self):
        """number of kernel taps"""
        return self.kernel_size * self.kernel_size

    @property
    def offset_channels(self):
        """channel count of the offset field this sampler consumes"""
        return 2 * self.taps * self.groups

    def reset_parameters(self):
        """same initialization as nn.Conv2d"""
        nn.init.kaiming_uniform_(self.weight, a=math.sqrt(5))
        if self.bias is not None:
            fan_in = self.weight.shape[1] * self.taps
            bound = 1.0 / math.sqrt(fan_in)
            nn.init.uniform_(self.bias, -bound, bound)

    def forward(self, x, offsets):
        return deformable_conv(x, offsets, self.weight, self.bias, self.groups)
