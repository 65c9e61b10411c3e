"""general purpose utility functions"""

import errno
import glob
import logging
import os

import numpy as np
import torch
from PIL import Image

################################################################################
# utilities related to python built-in types


def strtobool(val):
    """convert a string representation of truth to True or False"""
    val = val.strip().lower()
    if val in ["y", "yes", "t", "true", "on", "1"]:
        return True
    if val in ["n", "no", "f", "false", "off", "0"]:
        return False
    msg = "invalid truth value %s" % val
    raise ValueError(msg)


def parse_key_value(item):
    """split a key=value string, stripping whitespace around both"""
    key, sep, value = item.partition("=")
    if sep != "=" or key.strip() == "":
        msg = "expected key=value, got %s" % item
        raise ValueError(msg)
    return key.strip(), value.strip()


################################################################################
# utilities related to generic file/path manipulations


def mkdir_exist_okay(path):
    """
    Create a directory named path, and intermediate directories.
    It is okay if it already exists.
    """
    if path == "":
        return
    try:
        os.makedirs(path)
    except OSError as err:
        if err.errno == errno.EEXIST:
            pass
        else:
            raise


################################################################################
# utilities related to frame files


def read_frame(fname):
    """read an 8-bit RGB image file, return float32 array (3, H, W) in [0, 1]"""
    with Image.open(fname) as img:
        vals = np.asarray(img.convert("RGB"), dtype=np.float32)
    return np.ascontiguousarray(vals.transpose(2, 0, 1) / 255.0)


def write_frame(fname, frame):
    """write float array (3, H, W) in [0, 1] as an 8-bit RGB png"""
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[0] != 3:
        msg = "frame must have shape (3, H, W), not %s" % (frame.shape,)
        raise ValueError(msg)
    vals = np.clip(np.round(frame.transpose(1, 2, 0) * 255.0), 0, 255)
    Image.fromarray(vals.astype(np.uint8), mode="RGB").save(fname)


def frame_fnames(dirname, pattern="*.png"):
    """return sorted list of frame file names in dirname"""
    fnames = sorted(glob.glob(os.path.join(dirname, pattern)))
    if len(fnames) == 0:
        msg = "no frames matching %s found in %s" % (pattern, dirname)
        raise FileNotFoundError(msg)
    logger = logging.getLogger(__name__)
    logger.debug("found %d frames in %s", len(fnames), dirname)
    return fnames


def frames_to_tensor(frames, dtype=torch.float32):
    """stack a list of (3, H, W) arrays into a tensor (1, T, 3, H, W)"""
    return torch.from_numpy(np.stack(frames)).to(dtype).unsqueeze(0)


def tensor_to_frames(tensor):
    """split a tensor (1, T, 3, H, W) into a list of float32 (3, H, W) arrays"""
    if tensor.dim() != 5 or tensor.shape[0] != 1:
        msg = "expected tensor of shape (1, T, 3, H, W), not %s" % (
            tuple(tensor.shape),
        )
        raise ValueError(msg)
    vals = tensor[0].detach().cpu().to(torch.float32).numpy()
    return [vals[ind] for ind in range(vals.shape[0])]
