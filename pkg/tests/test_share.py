"""test functions in share.py"""

import argparse
import os

import pytest

from src.share import (
    args_replace,
    cfg_key_docs,
    cfg_key_epilog,
    common_args,
    read_cfg_file,
    repo_root_dir,
    repo_version,
    repro_fname,
)


def _parse(args_list):
    parser = argparse.ArgumentParser(parents=[common_args("zsm")])
    return args_replace(parser.parse_args(args_list))


def _repo_cfg_text():
    fname = os.path.join(repo_root_dir(), "input", "zsm", "zsm.cfg")
    with open(fname, mode="r") as fptr:
        return fptr.read()


def test_parse_args():
    args = _parse([])
    assert args.model_name == "zsm"
    assert args.cfg_fname == os.path.join(repo_root_dir(), "input", "zsm", "zsm.cfg")
    assert args.set == []

    args = _parse(["--config", "{model_name}.cfg", "--set", "k2=3", "--set", "k3=2"])
    assert args.cfg_fname == "zsm.cfg"
    assert args.set == ["k2=3", "k3=2"]


def test_read_cfg_file(tmp_path):
    workdir = str(tmp_path)
    args = _parse(["--workdir", workdir, "--variant", "c", "--set", "lr_max=1e-3"])
    config = read_cfg_file(args)

    assert config["DEFAULT"]["model_name"] == "zsm"
    assert config["modelinfo"]["variant"] == "c"
    assert config["modelinfo"]["k2"] == "40"
    assert config["traininfo"]["lr_max"] == "1e-3"
    assert config["datainfo"]["data_root"] == os.path.join(workdir, "data")
    assert config["modelinfo"]["variant_defs_fname"] == os.path.join(
        repo_root_dir(), "input", "zsm", "variant_defs.yaml"
    )
    assert os.path.exists(os.path.join(workdir, "zsm.cfg.out"))


def test_logging_reproducible(tmp_path):
    workdir = str(tmp_path)
    config = read_cfg_file(_parse(["--workdir", workdir]))
    assert config["DEFAULT"]["logging_reproducible"] == "False"
    fname = os.path.join(workdir, "x.ckpt")
    assert repro_fname(config["DEFAULT"], fname) == fname

    config = read_cfg_file(_parse(["--workdir", workdir, "--logging_reproducible"]))
    assert config["DEFAULT"]["logging_reproducible"] == "True"
    assert repro_fname(config["DEFAULT"], fname) == os.path.join("$workdir", "x.ckpt")


@pytest.mark.parametrize("item", ["bogus=1", "k2"])
def test_bad_set_args(tmp_path, item):
    with pytest.raises(ValueError):
        read_cfg_file(_parse(["--workdir", str(tmp_path), "--set", item]))


@pytest.mark.parametrize(
    "old, new",
    [
        ("[datainfo]\n", "[datainfo]\nseed=0\n"),
        ("[datainfo]\n", "[datainfo]\nbogus=0\n"),
        ("logging_level=INFO", "logging_level"),
        ("[datainfo]\n", "[extra]\n\n[datainfo]\n"),
        ("[datainfo]", "[notdatainfo]"),
    ],
)
def test_bad_cfg_files(tmp_path, old, new):
    cfg_text = _repo_cfg_text()
    assert old in cfg_text
    cfg_fname = str(tmp_path / "bad.cfg")
    with open(cfg_fname, mode="w") as fptr:
        fptr.write(cfg_text.replace(old, new, 1))
    args = _parse(["--config", cfg_fname, "--workdir", str(tmp_path)])
    with pytest.raises(ValueError):
        read_cfg_file(args)


def test_cfg_key_epilog():
    epilog = cfg_key_epilog()
    for key in cfg_key_docs:
        assert key in epilog


def test_repo_version():
    version = repo_version()
    assert version == "unknown" or len(version.partition("-")[0]) == 40
    assert os.path.exists(os.path.join(repo_root_dir(), "input", "zsm", "zsm.cfg"))
