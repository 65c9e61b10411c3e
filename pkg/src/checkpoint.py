"""
checkpoint container: plain-text header followed by little-endian float32 blobs

header lines are key=value, in order:
    format_version, step, config.<field> for each ModelConfig field,
    param.<name>=<comma-separated shape> for each parameter,
    optionally optim.step and optim.exp_avg.<name> / optim.exp_avg_sq.<name>
blobs follow the end-of-header marker, in the order their header lines appear
"""

import logging
from dataclasses import dataclass

import numpy as np
import torch

from .model_config import MODEL_CONFIG_DEFAULTS, ModelConfig
from .utils import parse_key_value
from .zsm_model import ZoomingSlowMo

CKPT_MAGIC = "ZSMCKPT"
CKPT_END_HEADER = "end_header"
CKPT_FORMAT_VERSION = 1
BLOB_DTYPE = np.dtype("<f4")

ADAM_MOMENTS = ["exp_avg", "exp_avg_sq"]


@dataclass
class Checkpoint:
    """model config, named parameters, optional Adam state, training step"""

    config: ModelConfig
    params: dict
    step: int = 0
    optimizer_state: dict = None
    format_version: int = CKPT_FORMAT_VERSION


def _shape_str(shape):
    return ",".join(str(dim) for dim in shape)


def _parse_shape(val):
    return tuple(int(dim) for dim in val.split(",")) if val else ()


def save_checkpoint(fname, ckpt):
    """write ckpt to fname"""
    logger = logging.getLogger(__name__)
    header = [CKPT_MAGIC]
    header.append("format_version=%d" % ckpt.format_version)
    header.append("step=%d" % ckpt.step)
    for key, val in ckpt.config.to_dict().items():
        header.append("config.%s=%s" % (key, val))
    blobs = []
    for name, arr in ckpt.params.items():
        header.append("param.%s=%s" % (name, _shape_str(arr.shape)))
        blobs.append(arr)
    if ckpt.optimizer_state is not None:
        header.append("optim.step=%d" % ckpt.optimizer_state["step"])
        for moment in ADAM_MOMENTS:
            for name, arr in ckpt.optimizer_state[moment].items():
                header.append("optim.%s.%s=%s" % (moment, name, _shape_str(arr.shape)))
                blobs.append(arr)
    header.append(CKPT_END_HEADER)

    with open(fname, mode="wb") as fptr:
        fptr.write(("\n".join(header) + "\n").encode("utf-8"))
        for arr in blobs:
            fptr.write(np.ascontiguousarray(arr, dtype=BLOB_DTYPE).tobytes())
    logger.info("wrote checkpoint for step %d to %s", ckpt.step, fname)


def load_checkpoint(fname, variant_defs=None):
    """read a Checkpoint from fname"""
    logger = logging.getLogger(__name__)
    with open(fname, mode="rb") as fptr:
        contents = fptr.read()

    marker = ("\n" + CKPT_END_HEADER + "\n").encode("utf-8")
    header_end = contents.find(marker)
    if not contents.startswith(CKPT_MAGIC.encode("utf-8")) or header_end < 0:
        msg = "%s is not a checkpoint file" % fname
        raise ValueError(msg)
    header = contents[:header_end].decode("utf-8").split("\n")[1:]
    offset = header_end + len(marker)

    vals = dict(parse_key_value(line) for line in header)
    format_version = int(vals["format_version"])
    if format_version != CKPT_FORMAT_VERSION:
        msg = "unsupported checkpoint format_version %d in %s" % (format_version, fname)
        raise ValueError(msg)
    config_vals = {
        key: vals["config.%s" % key]
        for key in MODEL_CONFIG_DEFAULTS
        if "config.%s" % key in vals
    }
    config = ModelConfig.from_dict(config_vals, variant_defs)

    params = {}
    optimizer_state = None
    # header lines are in blob order; dict preserves insertion order
    for key, val in vals.items():
        if key.startswith("param."):
            target = params
            name = key[len("param.") :]
        elif key.startswith("optim.") and key != "optim.step":
            if optimizer_state is None:
                optimizer_state = {"step": int(vals["optim.step"])}
                optimizer_state.update({moment: {} for moment in ADAM_MOMENTS})
            moment, _, name = key[len("optim.") :].partition(".")
            if moment not in ADAM_MOMENTS:
                msg = "unknown optimizer entry %s in %s" % (key, fname)
                raise ValueError(msg)
            target = optimizer_state[moment]
        else:
            continue
        shape = _parse_shape(val)
        count = int(np.prod(shape, dtype=np.int64))
        nbytes = count * BLOB_DTYPE.itemsize
        if offset + nbytes > len(contents):
            msg = "checkpoint %s truncated at %s" % (fname, key)
            raise ValueError(msg)
        arr = np.frombuffer(contents, dtype=BLOB_DTYPE, count=count, offset=offset)
        target[name] = arr.reshape(shape).astype(np.float32)
        offset += nbytes
    if offset != len(contents):
        msg = "checkpoint %s has %d trailing bytes" % (fname, len(contents) - offset)
        raise ValueError(msg)

    logger.info("read checkpoint for step %s from %s", vals["step"], fname)
    return Checkpoint(
        config=config,
        params=params,
        step=int(vals["step"]),
        optimizer_state=optimizer_state,
        format_version=format_version,
    )


def checkpoint_from_model(model, step=0, optimizer=None):
    """snapshot model parameters, and Adam moments if optimizer is given"""
    params = {
        name: param.detach().cpu().to(torch.float32).numpy().copy()
        for name, param in model.named_parameters()
    }
    optimizer_state = None
    if optimizer is not None:
        optimizer_state = {"step": 0}
        optimizer_state.update({moment: {} for moment in ADAM_MOMENTS})
        for name, param in model.named_parameters():
            state = optimizer.state.get(param)
            if not state:
                continue
            optimizer_state["step"] = int(state["step"])
            for moment in ADAM_MOMENTS:
                optimizer_state[moment][name] = (
                    state[moment].detach().cpu().to(torch.float32).numpy().copy()
                )
    return Checkpoint(
        config=model.model_config,
        params=params,
        step=step,
        optimizer_state=optimizer_state,
    )


def load_params_into(model, ckpt):
    """copy ckpt parameters into model, requiring an exact parameter name match"""
    model_names = [name for name, _ in model.named_parameters()]
    missing = sorted(set(model_names) - set(ckpt.params))
    unexpected = sorted(set(ckpt.params) - set(model_names))
    if missing or unexpected:
        msg = "checkpoint/model parameter mismatch, missing=%s, unexpected=%s" % (
            ",".join(missing[:5]),
            ",".join(unexpected[:5]),
        )
        raise ValueError(msg)
    with torch.no_grad():
        for name, param in model.named_parameters():
            arr = ckpt.params[name]
            if tuple(arr.shape) != tuple(param.shape):
                msg = "shape mismatch for %s, checkpoint %s, model %s" % (
                    name,
                    tuple(arr.shape),
                    tuple(param.shape),
                )
                raise ValueError(msg)
            param.copy_(torch.from_numpy(arr))


def model_from_checkpoint(ckpt):
    """instantiate the checkpoint's model variant and load its parameters"""
    model = ZoomingSlowMo(ckpt.config)
    load_params_into(model, ckpt)
    return model


def restore_optimizer_state(optimizer, model, ckpt):
    """seed Adam moments and step count from ckpt, if it carries them"""
    if ckpt.optimizer_state is None:
        return
    for name, param in model.named_parameters():
        if name not in ckpt.optimizer_state["exp_avg"]:
            continue
        optimizer.state[param] = {
            "step": torch.tensor(float(ckpt.optimizer_state["step"])),
            "exp_avg": torch.from_numpy(ckpt.optimizer_state["exp_avg"][name])
            .to(param.dtype)
            .to(param.device),
            "exp_avg_sq": torch.from_numpy(ckpt.optimizer_state["exp_avg_sq"][name])
            .to(param.dtype)
            .to(param.device),
        }
