"""functions shared across multiple modules"""

import argparse
import configparser
import logging
import sys
from os import environ
from os.path import dirname, join, realpath

import git

from .utils import mkdir_exist_okay, parse_key_value, strtobool

# every accepted cfg key, with the section it lives in and its meaning
cfg_key_docs = {
    # DEFAULT
    "model_name": {"section": "DEFAULT", "help": "name of model"},
    "logging_reproducible": {
        "section": "DEFAULT",
        "help": "should logging output avoid user/cfg specific content",
    },
    "workdir": {"section": "DEFAULT", "help": "directory where run files are stored"},
    "no_value_allowed": {
        "section": "DEFAULT",
        "help": "cfg vars that are allowed to have no value",
    },
    # modelinfo
    "variant": {"section": "modelinfo", "help": "ablation variant, a-f"},
    "k1": {"section": "modelinfo", "help": "feature extraction residual blocks"},
    "k2": {"section": "modelinfo", "help": "reconstruction residual blocks"},
    "k3": {"section": "modelinfo", "help": "LR synthesis residual blocks"},
    "channels": {"section": "modelinfo", "help": "feature channels"},
    "scale": {"section": "modelinfo", "help": "spatial upscaling factor, must be 4"},
    "pcd_levels": {
        "section": "modelinfo",
        "help": "pyramid levels of deformable alignment, 1 disables the pyramid",
    },
    "deformable_groups": {
        "section": "modelinfo",
        "help": "offset groups of deformable sampling",
    },
    "variant_defs_fname": {
        "section": "modelinfo",
        "help": "name of file with ablation variant definitions",
    },
    # traininfo
    "cfg_out_fname": {
        "section": "traininfo",
        "help": "name of file that cfg contents are written to",
    },
    "logging_fname": {
        "section": "traininfo",
        "help": "name of file that logging entries are written to",
    },
    "logging_level": {
        "section": "traininfo",
        "help": "level of logging entries to be written (e.g., INFO or DEBUG)",
    },
    "total_steps": {"section": "traininfo", "help": "optimizer steps"},
    "batch_size": {"section": "traininfo", "help": "training samples per step"},
    "lr_max": {"section": "traininfo", "help": "learning rate at step 0"},
    "lr_min": {"section": "traininfo", "help": "learning rate at the final step"},
    "lambda1": {"section": "traininfo", "help": "weight of reconstruction loss"},
    "lambda2": {
        "section": "traininfo",
        "help": "weight of first-order cyclic interpolation loss",
    },
    "lambda3": {
        "section": "traininfo",
        "help": "weight of second-order cyclic interpolation loss",
    },
    "seed": {"section": "traininfo", "help": "seed of all random draws"},
    "checkpoint_interval": {
        "section": "traininfo",
        "help": "steps between checkpoints",
    },
    "log_interval": {"section": "traininfo", "help": "steps between log entries"},
    "crop_size": {"section": "traininfo", "help": "HR training crop size"},
    "augment": {
        "section": "traininfo",
        "help": "apply random rotations and flips to training samples",
    },
    "grad_clip": {"section": "traininfo", "help": "global gradient norm limit"},
    "gfi_on_degraded": {
        "section": "traininfo",
        "help": "keep cyclic interpolation losses on for degraded inputs",
    },
    "num_workers": {"section": "traininfo", "help": "data loader worker processes"},
    "device": {"section": "traininfo", "help": "torch device, e.g., cpu or cuda"},
    # datainfo
    "data_root": {"section": "datainfo", "help": "root directory of clip dataset"},
    "degradation": {
        "section": "datainfo",
        "help": "corruption of LR inputs, kind[:k=v,...], kinds clean, noise, jpeg",
    },
    "exclude_blank": {
        "section": "datainfo",
        "help": "skip evaluation clips with an all-black frame",
    },
}

# keys supplied by read_cfg_file, not by cfg files, lowercased by configparser
cfg_builtin_keys = ["home", "user", "repo_root"]

cfg_sections = ["modelinfo", "traininfo", "datainfo"]

cfg_override_args = {
    "workdir": {"section": "DEFAULT"},
    "logging_fname": {"section": "traininfo"},
    "logging_reproducible": {
        "section": "DEFAULT",
        "action": "store_true",
        "override_val": "True",
    },
    "logging_level": {"section": "traininfo"},
    "seed": {"section": "traininfo"},
    "variant": {"section": "modelinfo"},
    "data_root": {"section": "datainfo"},
}


def repo_root_dir():
    """return root directory of the repo holding this package"""
    return dirname(dirname(realpath(__file__)))


def repo_version():
    """return commit hash of the repo, with a -dirty suffix, or unknown outside git"""
    try:
        repo = git.Repo(repo_root_dir())
        version = repo.head.commit.hexsha
        dirty = repo.is_dirty()
    except (git.InvalidGitRepositoryError, git.NoSuchPathError, git.GitCommandError):
        return "unknown"
    except ValueError:
        # repo without commits
        return "unknown"
    return version + "-dirty" if dirty else version


def cfg_key_epilog():
    """text listing every documented cfg key, for --help"""
    lines = ["cfg keys (settable with --set key=value):"]
    for key, metadata in cfg_key_docs.items():
        lines.append("  %-20s [%s] %s" % (key, metadata["section"], metadata["help"]))
    return "\n".join(lines)


def common_args(model_name):
    """return a parent parser with options common to all commands"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument(
        "--model_name",
        help="name of the model; selects the default cfg file",
        default=model_name,
    )
    parser.add_argument(
        "--cfg_fname",
        "--config",
        help="name of configuration file, default input/<model_name>/zsm.cfg",
        default=None,
    )
    parser.add_argument(
        "--set",
        help="override a cfg key, key=value; may be repeated",
        action="append",
        default=[],
        metavar="KEY=VALUE",
    )

    # add arguments that override cfg file
    for argname, metadata in cfg_override_args.items():
        if "action" not in metadata:
            parser.add_argument(
                "--%s" % argname,
                help="override %s from cfg file" % argname,
                default=None,
            )
        elif metadata["action"] in ["store_true"]:
            parser.add_argument(
                "--%s" % argname,
                help="override %s from cfg file" % argname,
                action=metadata["action"],
            )
        else:
            msg = "action = %s not implemented" % metadata["action"]
            raise NotImplementedError(msg)

    return parser


def args_replace(args):
    """apply common args replacements/format on string arguments"""
    if args.cfg_fname is None:
        args.cfg_fname = join(repo_root_dir(), "input", "{model_name}", "zsm.cfg")
    str_subs = {"model_name": args.model_name}
    for arg, value in vars(args).items():
        if isinstance(value, str):
            setattr(args, arg, value.format(**str_subs))
    return args


def read_cfg_file(args):
    """
    read cfg file
    set defaults common to all occurrances
    apply overrides from dedicated arguments, then from --set
    """
    cfg_fname = args.cfg_fname

    defaults = {key: environ.get(key, "") for key in ["HOME", "USER"]}
    defaults["repo_root"] = repo_root_dir()
    config = configparser.ConfigParser(defaults, allow_no_value=True)
    with open(cfg_fname, mode="r") as fptr:
        config.read_file(fptr)

    _check_config_keys(cfg_fname, config)
    _check_config_no_values(cfg_fname, config)

    _apply_cfg_override_args(args, config)
    _apply_set_args(getattr(args, "set", []), config)

    # write cfg contents to a file, if requested
    cfg_out_fname = config["traininfo"]["cfg_out_fname"]
    if cfg_out_fname is not None:
        mkdir_exist_okay(dirname(cfg_out_fname))
        with open(cfg_out_fname, "w") as fptr:
            config.write(fptr)

    return config


def _check_config_keys(cfg_fname, config):
    """verify that sections and keys in config are documented"""
    for section in config.sections():
        if section not in cfg_sections:
            msg = "unknown section %s in cfg file %s" % (section, cfg_fname)
            raise ValueError(msg)
    for section in cfg_sections:
        if section not in config:
            msg = "section %s missing from cfg file %s" % (section, cfg_fname)
            raise ValueError(msg)
    for section in ["DEFAULT"] + cfg_sections:
        for name in config[section]:
            if name in cfg_builtin_keys:
                continue
            if name not in cfg_key_docs:
                msg = "unknown key %s in cfg file %s" % (name, cfg_fname)
                raise ValueError(msg)
            # keys from DEFAULT show up in every section
            if name in config.defaults() and section != "DEFAULT":
                continue
            if cfg_key_docs[name]["section"] != section:
                msg = "key %s belongs in section %s, not %s, in cfg file %s" % (
                    name,
                    cfg_key_docs[name]["section"],
                    section,
                    cfg_fname,
                )
                raise ValueError(msg)


def _check_config_no_values(cfg_fname, config):
    """verify that only names in no_value_allowed have no value"""
    # no_value_allowed is allowed to have no value or not be present
    if "no_value_allowed" in config["DEFAULT"]:
        no_value_allowed = config["DEFAULT"]["no_value_allowed"]
    else:
        no_value_allowed = None
    nva_list = [] if no_value_allowed is None else no_value_allowed.split(",")
    nva_list.append("no_value_allowed")
    for section in config.sections():
        for name in config[section]:
            if config[section][name] is None and name not in nva_list:
                msg = "%s not allowed to be empty in cfg file %s" % (name, cfg_fname)
                raise ValueError(msg)


def _apply_cfg_override_args(args, config):
    """apply cfg_override_args to config"""
    for argname, metadata in cfg_override_args.items():
        # skip conditional overrides that were not added
        if argname not in args:
            continue
        if argname not in config[metadata["section"]]:
            msg = "%s not in cfg section %s" % (argname, metadata["section"])
            raise ValueError(msg)
        if "action" not in metadata:
            if getattr(args, argname) is not None:
                config[metadata["section"]][argname] = getattr(args, argname)
        elif metadata["action"] == "store_true":
            if getattr(args, argname):
                config[metadata["section"]][argname] = metadata["override_val"]


def _apply_set_args(set_args, config):
    """apply --set key=value overrides to config, rejecting undocumented keys"""
    logger = logging.getLogger(__name__)
    for item in set_args:
        key, value = parse_key_value(item)
        if key not in cfg_key_docs:
            msg = "unknown cfg key %s in --set %s" % (key, item)
            raise ValueError(msg)
        logger.debug("setting %s=%s", key, value)
        config[cfg_key_docs[key]["section"]][key] = value


def logging_config(cfg_defaults, traininfo, filemode):
    """configure logging"""
    logging_format_list = []
    if not strtobool(cfg_defaults["logging_reproducible"]):
        logging_format_list.extend(["%(asctime)s", "%(process)s"])
    logging_format_list.extend(["%(filename)s", "%(funcName)s", "%(message)s"])
    logging_format = ":".join(logging_format_list)
    mkdir_exist_okay(dirname(traininfo["logging_fname"]))
    logging.basicConfig(
        format=logging_format,
        level=traininfo["logging_level"],
        handlers=[
            logging.StreamHandler(stream=sys.stdout),
            logging.FileHandler(filename=traininfo["logging_fname"], mode=filemode),
        ],
        force=True,
    )


def repro_fname(cfg_section, fname):
    """return version of fname appropriate for reproducible logging, if specified"""
    ret = fname
    if strtobool(cfg_section["logging_reproducible"]):
        ret = ret.replace(cfg_section["workdir"], "$workdir")
        ret = ret.replace(cfg_section["repo_root"], "$repo_root")
    return ret
