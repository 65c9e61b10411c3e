#!/usr/bin/env python
"""command line driver: train, infer, eval, degrade, inspect, make-synthetic"""

import argparse
import logging
import os
import sys

import numpy as np
import torch

from .checkpoint import load_checkpoint, model_from_checkpoint
from .clip_dataset import read_clip_index
from .degradation import degrade_frames, parse_degradation_spec
from .evaluation import (
    baseline_predictor,
    check_eval_degradation,
    evaluate_dataset,
    model_predictor,
)
from .losses import LossWeights
from .model_config import ModelConfig, load_variant_defs
from .share import (
    args_replace,
    cfg_key_epilog,
    common_args,
    logging_config,
    read_cfg_file,
    repo_version,
    repro_fname,
)
from .synthetic import write_synthetic_dataset
from .training import NonFiniteLossError, TrainConfig, train
from .utils import (
    frame_fnames,
    frames_to_tensor,
    mkdir_exist_okay,
    read_frame,
    strtobool,
    tensor_to_frames,
    write_frame,
)
from .zsm_model import ZoomingSlowMo, count_parameters, parameter_breakdown

OUT_FRAME_FNAME_FMT = "out_%03d.png"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NON_FINITE = 3


def parse_args(args_list_in=None):
    """parse command line arguments"""

    args_list = [] if args_list_in is None else args_list_in
    parent = common_args("zsm")

    parser = argparse.ArgumentParser(
        description="one-stage space-time video super-resolution",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=cfg_key_epilog(),
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    def add_command(name, help_str):
        return subparsers.add_parser(
            name,
            help=help_str,
            description=help_str,
            parents=[parent],
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog=cfg_key_epilog(),
        )

    cmd_parser = add_command("train", "train a model on the clips under data_root")
    cmd_parser.add_argument(
        "--resume",
        help="resume training from the latest checkpoint in workdir",
        action="store_true",
        default=False,
    )
    cmd_parser.add_argument(
        "--out", dest="workdir", help="override workdir from cfg file", default=None
    )

    cmd_parser = add_command("infer", "upsample a directory of LR frames")
    cmd_parser.add_argument("--checkpoint", help="checkpoint file", required=True)
    cmd_parser.add_argument("in_dir", help="directory of LR png frames")
    cmd_parser.add_argument("out_dir", help="directory that HR frames are written to")

    cmd_parser = add_command("eval", "score a model on ground-truth clips")
    group = cmd_parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint", help="checkpoint file", default=None)
    group.add_argument(
        "--baseline",
        help="score bicubic upsampling with frame repetition instead of a model",
        action="store_true",
    )
    cmd_parser.add_argument("--split", help="clip index split", default="test")
    cmd_parser.add_argument(
        "--degrade",
        help="corruption of LR inputs, overrides degradation from cfg file",
        default=None,
    )
    cmd_parser.add_argument(
        "--report",
        help="name of csv report file, default <workdir>/eval_report.csv",
        default=None,
    )

    cmd_parser = add_command("degrade", "write corrupted copies of png frames")
    cmd_parser.add_argument(
        "--spec", help="degradation, kind[:k=v,...]", required=True
    )
    cmd_parser.add_argument("in_dir", help="directory of png frames")
    cmd_parser.add_argument("out_dir", help="directory that frames are written to")

    cmd_parser = add_command(
        "inspect", "print model configuration and parameter counts"
    )
    cmd_parser.add_argument(
        "checkpoint",
        nargs="?",
        help="checkpoint file, the model from the cfg file if omitted",
        default=None,
    )

    cmd_parser = add_command("make-synthetic", "write a synthetic clip dataset")
    cmd_parser.add_argument("--clips", help="number of clips", type=int, default=4)
    cmd_parser.add_argument(
        "--out",
        dest="synthetic_out",
        help="root of dataset, default data_root from cfg file",
        default=None,
    )
    cmd_parser.add_argument("--split", help="clip index split", default="train")
    cmd_parser.add_argument("--frames", help="frames per clip", type=int, default=7)
    cmd_parser.add_argument(
        "--size", help="frame height and width", type=int, default=128
    )

    return args_replace(parser.parse_args(args_list))


def main(args):
    """run the command in args, return exit status"""

    logger = logging.getLogger(__name__)
    try:
        config = read_cfg_file(args)
        filemode = "w" if args.command == "train" and not args.resume else "a"
        logging_config(config["DEFAULT"], config["traininfo"], filemode)
        if not strtobool(config["DEFAULT"]["logging_reproducible"]):
            logger.info("repo version %s", repo_version())
        _commands[args.command](args, config)
    except NonFiniteLossError as err:
        logger.error("%s", err)
        return EXIT_NON_FINITE
    except (ValueError, FileNotFoundError) as err:
        logger.error("%s failed: %s", args.command, err)
        return EXIT_USAGE
    return EXIT_OK


################################################################################
# cfg translation


def _cfg_val(section, key, conv):
    """section[key] converted by conv, raising ValueError naming key on failure"""
    try:
        return conv(section[key])
    except ValueError:
        msg = "bad value %s for cfg key %s" % (section[key], key)
        raise ValueError(msg) from None


def train_config_from_cfg(traininfo, datainfo):
    """TrainConfig from the traininfo and datainfo sections of a cfg file"""
    loss_weights = LossWeights(
        *(_cfg_val(traininfo, key, float) for key in ["lambda1", "lambda2", "lambda3"])
    )
    return TrainConfig(
        total_steps=_cfg_val(traininfo, "total_steps", int),
        batch_size=_cfg_val(traininfo, "batch_size", int),
        lr_max=_cfg_val(traininfo, "lr_max", float),
        lr_min=_cfg_val(traininfo, "lr_min", float),
        loss_weights=loss_weights,
        degradation=parse_degradation_spec(datainfo["degradation"]),
        seed=_cfg_val(traininfo, "seed", int),
        checkpoint_interval=_cfg_val(traininfo, "checkpoint_interval", int),
        log_interval=_cfg_val(traininfo, "log_interval", int),
        crop_size=_cfg_val(traininfo, "crop_size", int),
        augment=_cfg_val(traininfo, "augment", strtobool),
        grad_clip=_cfg_val(traininfo, "grad_clip", float),
        gfi_on_degraded=_cfg_val(traininfo, "gfi_on_degraded", strtobool),
        num_workers=_cfg_val(traininfo, "num_workers", int),
        device=traininfo["device"],
    )


def _checkpoint_model(fname, modelinfo):
    """model stored in checkpoint fname, which must match the cfg variant"""
    logger = logging.getLogger(__name__)
    variant_defs = load_variant_defs(modelinfo.get("variant_defs_fname"))
    ckpt = load_checkpoint(fname, variant_defs)
    if ckpt.config.variant != modelinfo["variant"]:
        msg = "checkpoint %s has variant %s, cfg has variant %s" % (
            fname,
            ckpt.config.variant,
            modelinfo["variant"],
        )
        raise ValueError(msg)
    logger.info("loaded %r at step %d from %s", ckpt.config, ckpt.step, fname)
    return model_from_checkpoint(ckpt).eval()


################################################################################
# commands


def cmd_train(args, config):
    """train a model, checkpoints and metrics go to workdir"""
    logger = logging.getLogger(__name__)
    model_config = ModelConfig.from_modelinfo(config["modelinfo"], logging.INFO)
    train_config = train_config_from_cfg(config["traininfo"], config["datainfo"])
    clips = read_clip_index(config["datainfo"]["data_root"], split="train")
    workdir = config["DEFAULT"]["workdir"]
    logger.info(
        "training %r on %d clips, workdir=%s",
        model_config,
        len(clips),
        repro_fname(config["DEFAULT"], workdir),
    )
    ckpt = train(model_config, train_config, clips, workdir, resume=args.resume)
    logger.info("training done at step %d", ckpt.step)


def cmd_infer(args, config):
    """write 2n+1 HR frames for the n+1 LR frames in args.in_dir"""
    logger = logging.getLogger(__name__)
    model = _checkpoint_model(args.checkpoint, config["modelinfo"])
    lr_frames = [read_frame(fname) for fname in frame_fnames(args.in_dir)]
    if len(lr_frames) < 2:
        msg = "need at least 2 frames in %s, found %d" % (args.in_dir, len(lr_frames))
        raise ValueError(msg)
    with torch.no_grad():
        hr_frames = tensor_to_frames(model.infer(frames_to_tensor(lr_frames)))
    mkdir_exist_okay(args.out_dir)
    for ind, frame in enumerate(hr_frames):
        write_frame(os.path.join(args.out_dir, OUT_FRAME_FNAME_FMT % (ind + 1)), frame)
    logger.info(
        "wrote %d frames from %d inputs to %s",
        len(hr_frames),
        len(lr_frames),
        args.out_dir,
    )


def cmd_eval(args, config):
    """score a checkpoint, or the bicubic baseline, print and write the report"""
    logger = logging.getLogger(__name__)
    datainfo = config["datainfo"]
    spec_str = datainfo["degradation"] if args.degrade is None else args.degrade
    degradation = parse_degradation_spec(spec_str)
    check_eval_degradation(degradation)

    clips = read_clip_index(datainfo["data_root"], split=args.split, missing_ok=True)
    if len(clips) == 0:
        msg = "no %s clips found under %s" % (args.split, datainfo["data_root"])
        raise ValueError(msg)

    if args.baseline:
        predict_fn = baseline_predictor()
        parameter_count = 0
    else:
        model = _checkpoint_model(args.checkpoint, config["modelinfo"])
        predict_fn = model_predictor(model, config["traininfo"]["device"])
        parameter_count = count_parameters(model)

    with torch.no_grad():
        report = evaluate_dataset(
            predict_fn,
            clips,
            degradation=degradation,
            seed=_cfg_val(config["traininfo"], "seed", int),
            parameter_count=parameter_count,
            exclude_blank=_cfg_val(datainfo, "exclude_blank", strtobool),
        )
    if len(report.clips) == 0:
        msg = "no %s clips could be scored" % args.split
        raise ValueError(msg)

    print(report.format_table())
    report_fname = args.report
    if report_fname is None:
        report_fname = os.path.join(config["DEFAULT"]["workdir"], "eval_report.csv")
    mkdir_exist_okay(os.path.dirname(report_fname))
    report.write_csv(report_fname)
    logger.info("wrote report to %s", repro_fname(config["DEFAULT"], report_fname))


def cmd_degrade(args, config):
    """write corrupted copies of the png frames in args.in_dir, same file names"""
    logger = logging.getLogger(__name__)
    spec = parse_degradation_spec(args.spec)
    fnames = frame_fnames(args.in_dir)
    rng = np.random.default_rng(_cfg_val(config["traininfo"], "seed", int))
    frames = degrade_frames([read_frame(fname) for fname in fnames], spec, rng)
    mkdir_exist_okay(args.out_dir)
    for fname, frame in zip(fnames, frames):
        write_frame(os.path.join(args.out_dir, os.path.basename(fname)), frame)
    logger.info("wrote %d frames degraded by %s to %s", len(frames), spec, args.out_dir)


def cmd_inspect(args, config):
    """print the model config, total and per-module parameter counts"""
    if args.checkpoint is None:
        model = ZoomingSlowMo(ModelConfig.from_modelinfo(config["modelinfo"]))
    else:
        variant_defs = load_variant_defs(config["modelinfo"].get("variant_defs_fname"))
        model = model_from_checkpoint(load_checkpoint(args.checkpoint, variant_defs))
    print(repr(model.model_config))
    print("variant: %s" % model.model_config.variant_def["description"])
    total = count_parameters(model)
    print("parameters: %d (%.2fM)" % (total, total / 1.0e6))
    for name, cnt in parameter_breakdown(model).items():
        print("  %-20s %10d" % (name, cnt))


def cmd_make_synthetic(args, config):
    """write args.clips synthetic clips"""
    root = args.synthetic_out
    if root is None:
        root = config["datainfo"]["data_root"]
    if args.clips < 1 or args.frames < 2 or args.size < 4:
        msg = "need clips >= 1, frames >= 2, size >= 4, got %d, %d, %d" % (
            args.clips,
            args.frames,
            args.size,
        )
        raise ValueError(msg)
    write_synthetic_dataset(
        root,
        args.clips,
        seed=_cfg_val(config["traininfo"], "seed", int),
        split=args.split,
        frame_cnt=args.frames,
        height=args.size,
        width=args.size,
    )


_commands = {
    "train": cmd_train,
    "infer": cmd_infer,
    "eval": cmd_eval,
    "degrade": cmd_degrade,
    "inspect": cmd_inspect,
    "make-synthetic": cmd_make_synthetic,
}


if __name__ == "__main__":
    sys.exit(main(parse_args(sys.argv[1:])))
