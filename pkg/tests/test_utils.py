"""test functions in utils.py"""

import os

import numpy as np
import pytest
import torch

from src.utils import (
    frame_fnames,
    frames_to_tensor,
    mkdir_exist_okay,
    parse_key_value,
    read_frame,
    strtobool,
    tensor_to_frames,
    write_frame,
)


@pytest.mark.parametrize(
    "val, expected",
    [("True", True), (" yes ", True), ("1", True), ("off", False), ("F", False)],
)
def test_strtobool(val, expected):
    assert strtobool(val) is expected


def test_strtobool_error():
    with pytest.raises(ValueError):
        strtobool("maybe")


def test_parse_key_value():
    assert parse_key_value("k2 = 40") == ("k2", "40")
    assert parse_key_value("degradation=noise:sigma=0.1") == (
        "degradation",
        "noise:sigma=0.1",
    )
    for item in ["k2", "=40"]:
        with pytest.raises(ValueError):
            parse_key_value(item)


def test_mkdir_exist_okay(tmp_path):
    path = str(tmp_path / "a" / "b")
    mkdir_exist_okay(path)
    mkdir_exist_okay(path)
    mkdir_exist_okay("")
    assert os.path.isdir(path)


def test_frame_files(tmp_path):
    rng = np.random.default_rng(0)
    frame = rng.random((3, 5, 7))
    for name in ["f_2.png", "f_1.png"]:
        write_frame(str(tmp_path / name), frame)
    fnames = frame_fnames(str(tmp_path))
    assert [os.path.basename(fname) for fname in fnames] == ["f_1.png", "f_2.png"]

    res = read_frame(fnames[0])
    assert res.dtype == np.float32
    assert res.shape == (3, 5, 7)
    assert np.max(np.abs(res - frame)) <= 0.5 / 255.0 + 1.0e-6

    with pytest.raises(FileNotFoundError):
        frame_fnames(str(tmp_path / "missing"))
    with pytest.raises(ValueError):
        write_frame(str(tmp_path / "bad.png"), frame[:2])


def test_frames_tensor_conversion():
    frames = [np.full((3, 2, 4), val, dtype=np.float32) for val in (0.25, 0.75)]
    tensor = frames_to_tensor(frames)
    assert tensor.shape == (1, 2, 3, 2, 4)
    assert tensor.dtype == torch.float32
    res = tensor_to_frames(tensor)
    assert len(res) == 2
    assert np.array_equal(res[1], frames[1])
    with pytest.raises(ValueError):
        tensor_to_frames(tensor[0])
