"""
bicubic image resizing with MATLAB imresize conventions: bicubic kernel with
a = -0.5, antialiased kernel widening when downscaling, symmetric boundary
"""

import math

import numpy as np

# default kernel width, in input samples, of the bicubic kernel
CUBIC_KERNEL_WIDTH = 4.0


def cubic(x):
    """bicubic convolution kernel with a = -0.5"""
    absx = np.abs(x)
    absx2 = absx * absx
    absx3 = absx2 * absx
    near = (1.5 * absx3 - 2.5 * absx2 + 1.0) * (absx <= 1.0)
    far = (-0.5 * absx3 + 2.5 * absx2 - 4.0 * absx + 2.0) * (
        (absx > 1.0) & (absx <= 2.0)
    )
    return near + far


def resize_weights_indices(in_length, out_length, scale, antialiasing=True):
    """
    return (weights, indices), each (out_length, taps); output sample i is
    sum_j weights[i, j] * input[indices[i, j]], indices 0-based
    """
    kernel_width = CUBIC_KERNEL_WIDTH
    if scale < 1.0 and antialiasing:
        kernel_width = kernel_width / scale

    # output sample centers, in 1-based input coordinates
    out_pos = np.arange(1, out_length + 1, dtype=np.float64)
    centers = out_pos / scale + 0.5 * (1.0 - 1.0 / scale)
    left = np.floor(centers - kernel_width / 2.0)
    taps = int(math.ceil(kernel_width)) + 2
    indices = left[:, None] + np.arange(taps)[None, :]
    distance = centers[:, None] - indices
    if scale < 1.0 and antialiasing:
        weights = scale * cubic(distance * scale)
    else:
        weights = cubic(distance)
    weights = weights / np.sum(weights, axis=1, keepdims=True)

    # drop taps that are zero for every output sample
    keep = np.any(weights != 0.0, axis=0)
    weights = weights[:, keep]
    indices = indices[:, keep].astype(np.int64)

    # symmetric boundary: 1..L, L..1 repeated
    mirror = np.concatenate([np.arange(in_length), np.arange(in_length)[::-1]])
    indices = mirror[np.mod(indices - 1, 2 * in_length)]
    return weights, indices


def _resize_axis(arr, axis, out_length, scale, antialiasing):
    """resize arr along one axis"""
    weights, indices = resize_weights_indices(
        arr.shape[axis], out_length, scale, antialiasing
    )
    moved = np.moveaxis(arr, axis, -1)
    res = np.einsum("...ij,ij->...i", moved[..., indices], weights)
    return np.moveaxis(res, -1, axis)


def imresize(img, scale, antialiasing=True):
    """
    resize a (C, H, W) or (H, W) float array by scale, output dims ceil(scale * dims)

    Computation is in float64; the result has the input's float dtype and is not
    clipped.
    """
    img = np.asarray(img)
    if img.ndim not in (2, 3):
        msg = "expected (C, H, W) or (H, W) array, got shape %s" % (img.shape,)
        raise ValueError(msg)
    if scale <= 0.0:
        msg = "scale must be positive, got %s" % scale
        raise ValueError(msg)
    dtype = img.dtype if np.issubdtype(img.dtype, np.floating) else np.float64
    res = img.astype(np.float64)
    for axis in (-2, -1):
        out_length = int(math.ceil(scale * res.shape[axis]))
        res = _resize_axis(res, axis, out_length, scale, antialiasing)
    return res.astype(dtype)


def bicubic_downsample(frame, factor=4):
    """antialiased bicubic downscaling by an integer factor, clipped to [0, 1]"""
    frame = np.asarray(frame)
    if frame.shape[-2] % factor != 0 or frame.shape[-1] % factor != 0:
        msg = "frame dims %s not divisible by %d" % (frame.shape[-2:], factor)
        raise ValueError(msg)
    return np.clip(imresize(frame, 1.0 / factor), 0.0, 1.0)


def bicubic_upsample(frame, factor=4):
    """bicubic upscaling by an integer factor, clipped to [0, 1]"""
    return np.clip(imresize(frame, float(factor)), 0.0, 1.0)
