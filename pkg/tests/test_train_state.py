"""test functions in train_state.py"""

import json
import os

import pytest

from src.train_state import TrainState, action_step_log_wrap


def test_fresh_state(tmp_path):
    workdir = str(tmp_path / "run")
    state = TrainState(workdir)
    assert os.path.isdir(workdir)
    assert state.get_step() == 0
    assert state.get_checkpoint_fname() is None
    assert state.step_logged("__init__", per_step=False)


def test_resume(tmp_path):
    workdir = str(tmp_path)
    state = TrainState(workdir)
    state.record_checkpoint(500, "ckpt_500")
    state.log_step("eval")

    with open(os.path.join(workdir, "train_state.json"), mode="r") as fptr:
        saved_state = json.load(fptr)
    assert saved_state["step_log"] == ["__init__", "000500:eval"]

    resumed = TrainState(workdir, resume=True)
    assert resumed.get_step() == 500
    assert resumed.get_checkpoint_fname() == "ckpt_500"
    assert resumed.step_logged("eval")
    assert not resumed.step_logged("eval", per_step=False)

    resumed.record_checkpoint(1000, "ckpt_1000")
    assert not resumed.step_logged("eval")


def test_fresh_state_overwrites(tmp_path):
    workdir = str(tmp_path)
    TrainState(workdir).record_checkpoint(10, "ckpt_10")
    assert TrainState(workdir).get_checkpoint_fname() is None
    assert TrainState(workdir, resume=True).get_step() == 0


def test_resume_without_state(tmp_path):
    with pytest.raises(FileNotFoundError):
        TrainState(str(tmp_path), resume=True)


def test_action_step_log_wrap(tmp_path):
    """wrapped action runs once per formatted step name"""
    calls = []

    @action_step_log_wrap("touch {fname}", per_step=False)
    def touch(fname, train_state):
        calls.append(fname)

    state = TrainState(str(tmp_path))
    touch(fname="a", train_state=state)
    touch(fname="a", train_state=state)
    touch(fname="b", train_state=state)
    touch(fname="c", train_state=None)
    assert calls == ["a", "b", "c"]
    assert state.step_logged("touch a", per_step=False)
