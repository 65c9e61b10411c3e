"""corruption of LR frames: mixed Gaussian/salt-and-pepper noise, JPEG compression"""

import io
import logging
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .utils import parse_key_value

DEGRADATION_KINDS = ["clean", "mixed_noise", "jpeg"]

# spec-string kind names -> DegradationSpec kinds
_SPEC_KINDS = {"clean": "clean", "noise": "mixed_noise", "jpeg": "jpeg"}
# spec-string keys -> DegradationSpec fields
_SPEC_KEYS = {"sigma": "gaussian_sigma", "sp": "sp_ratio", "qf": "quality_factor"}


@dataclass(frozen=True)
class DegradationSpec:
    """how LR frames are corrupted"""

    kind: str = "clean"
    gaussian_sigma: float = 0.1
    sp_ratio: float = 0.1
    quality_factor: int = None

    def __post_init__(self):
        if self.kind not in DEGRADATION_KINDS:
            msg = "unknown degradation kind %s" % self.kind
            raise ValueError(msg)
        if not 0.0 <= self.sp_ratio <= 1.0:
            msg = "sp_ratio must be in [0, 1], got %s" % self.sp_ratio
            raise ValueError(msg)
        if self.gaussian_sigma < 0.0:
            msg = "gaussian_sigma must be non-negative, got %s" % self.gaussian_sigma
            raise ValueError(msg)
        if (self.quality_factor is not None) != (self.kind == "jpeg"):
            msg = "quality_factor must be given iff kind is jpeg"
            raise ValueError(msg)
        if self.kind == "jpeg":
            check_quality_factor(self.quality_factor)

    @property
    def is_clean(self):
        """does the spec leave frames untouched"""
        return self.kind == "clean"

    def __str__(self):
        if self.kind == "mixed_noise":
            return "noise:sigma=%g,sp=%g" % (self.gaussian_sigma, self.sp_ratio)
        if self.kind == "jpeg":
            return "jpeg:qf=%d" % self.quality_factor
        return "clean"


def check_quality_factor(quality_factor):
    """raise ValueError unless quality_factor is an int in [1, 100]"""
    if isinstance(quality_factor, bool) or not isinstance(
        quality_factor, (int, np.integer)
    ):
        msg = "quality_factor must be an integer, got %s" % (quality_factor,)
        raise ValueError(msg)
    if not 1 <= quality_factor <= 100:
        msg = "quality_factor must be in [1, 100], got %d" % quality_factor
        raise ValueError(msg)


def parse_degradation_spec(spec_str):
    """
    parse kind[:k=v,...] into a DegradationSpec

    kinds are clean, noise, jpeg; keys are sigma, sp, qf; jpeg:20 is jpeg:qf=20
    """
    kind_str, _, args_str = spec_str.strip().partition(":")
    if kind_str not in _SPEC_KINDS:
        msg = "unknown degradation kind %s in %s, expected one of %s" % (
            kind_str,
            spec_str,
            ",".join(_SPEC_KINDS),
        )
        raise ValueError(msg)
    kind = _SPEC_KINDS[kind_str]

    fields = {}
    for item in filter(None, (item.strip() for item in args_str.split(","))):
        if kind == "jpeg" and "=" not in item:
            item = "qf=" + item
        key, val = parse_key_value(item)
        if key not in _SPEC_KEYS:
            msg = "unknown degradation key %s in %s" % (key, spec_str)
            raise ValueError(msg)
        try:
            fields[_SPEC_KEYS[key]] = int(val) if key == "qf" else float(val)
        except ValueError:
            msg = "bad value %s for %s in %s" % (val, key, spec_str)
            raise ValueError(msg) from None

    if kind == "clean" and fields:
        msg = "clean takes no arguments, got %s" % spec_str
        raise ValueError(msg)
    if kind != "jpeg" and "quality_factor" in fields:
        msg = "qf only applies to jpeg, got %s" % spec_str
        raise ValueError(msg)
    if kind == "jpeg":
        if "quality_factor" not in fields:
            msg = "jpeg needs a quality factor, got %s" % spec_str
            raise ValueError(msg)
        if set(fields) != {"quality_factor"}:
            msg = "jpeg only takes qf, got %s" % spec_str
            raise ValueError(msg)
    return DegradationSpec(kind=kind, **fields)


def degrade_noise(frame, spec, rng):
    """
    add zero-mean Gaussian noise, then saturate a sp_ratio fraction of pixels to
    0 or 1 (all channels of a pixel together), then clip to [0, 1]
    """
    frame = np.asarray(frame)
    noisy = frame.astype(np.float64) + rng.normal(0.0, spec.gaussian_sigma, frame.shape)
    height, width = frame.shape[-2:]
    mask = rng.random((height, width)) < spec.sp_ratio
    salt = (rng.random((height, width)) < 0.5).astype(np.float64)
    noisy[..., mask] = salt[mask]
    return np.clip(noisy, 0.0, 1.0).astype(frame.dtype)


def degrade_jpeg(frame, quality_factor):
    """encode (3, H, W) frame in [0, 1] as baseline JPEG at quality_factor, decode"""
    check_quality_factor(quality_factor)
    frame = np.asarray(frame)
    vals = np.clip(np.round(frame.transpose(1, 2, 0) * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(vals, mode="RGB").save(buf, format="JPEG", quality=quality_factor)
    buf.seek(0)
    with Image.open(buf) as img:
        decoded = np.asarray(img.convert("RGB"), dtype=np.float64)
    return (decoded.transpose(2, 0, 1) / 255.0).astype(frame.dtype)


def degrade(frame, spec, rng):
    """apply spec to one (3, H, W) frame"""
    if spec.kind == "mixed_noise":
        return degrade_noise(frame, spec, rng)
    if spec.kind == "jpeg":
        return degrade_jpeg(frame, spec.quality_factor)
    return frame


def degrade_frames(frames, spec, rng):
    """apply spec to each frame of a list, drawing from one rng in order"""
    logger = logging.getLogger(__name__)
    logger.debug("applying %s to %d frames", spec, len(frames))
    return [degrade(frame, spec, rng) for frame in frames]
