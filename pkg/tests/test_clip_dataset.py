"""test functions in clip_dataset.py"""

import os

import numpy as np
import pytest
import torch

from src.clip_dataset import (
    INDEX_FNAME,
    ClipRecord,
    TrainingSampleSet,
    augment,
    clip_dirname,
    load_clip_frames,
    make_data_loader,
    make_training_sample,
    random_augmentation,
    read_clip_index,
    sample_from_frames,
    write_clip_index,
)
from src.degradation import DegradationSpec
from src.utils import write_frame


def _write_clip(root, split, clip_id, frame_cnt=7, height=40, width=48, seed=0):
    rng = np.random.default_rng(seed)
    dirname = clip_dirname(root, split, clip_id)
    os.makedirs(dirname)
    frame_paths = []
    for ind in range(frame_cnt):
        fname = os.path.join(dirname, "frame_%02d.png" % (ind + 1))
        write_frame(fname, rng.random((3, height, width)))
        frame_paths.append(fname)
    return ClipRecord(clip_id, frame_paths, split)


def _frames(frame_cnt=7, height=40, width=48, seed=0):
    rng = np.random.default_rng(seed)
    return [rng.random((3, height, width)).astype(np.float32) for _ in range(frame_cnt)]


def test_clip_index_round_trip(tmp_path):
    root = str(tmp_path)
    records = [
        _write_clip(root, "train", "clip_a"),
        _write_clip(root, "test", "clip_b", frame_cnt=3),
    ]
    records[1].motion_class = "fast"
    write_clip_index(root, records)
    assert read_clip_index(root) == records
    assert read_clip_index(root, split="test") == records[1:]
    frames = load_clip_frames(records[1])
    assert len(frames) == 3
    assert frames[0].shape == (3, 40, 48)
    assert frames[0].dtype == np.float32


def test_clip_index_format(tmp_path):
    root = str(tmp_path)
    _write_clip(root, "train", "clip_a")
    with open(os.path.join(root, INDEX_FNAME), mode="w") as fptr:
        fptr.write("# comment\n\nclip_a train  # trailing comment\n")
    (record,) = read_clip_index(root)
    assert record.clip_id == "clip_a"
    assert record.motion_class == "unlabeled"

    with open(os.path.join(root, INDEX_FNAME), mode="w") as fptr:
        fptr.write("clip_a\n")
    with pytest.raises(ValueError):
        read_clip_index(root)


def test_clip_index_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_clip_index(str(tmp_path))
    with open(os.path.join(tmp_path, INDEX_FNAME), mode="w") as fptr:
        fptr.write("clip_x train\n")
    with pytest.raises(FileNotFoundError):
        read_clip_index(str(tmp_path))
    (record,) = read_clip_index(str(tmp_path), missing_ok=True)
    assert record.clip_id == "clip_x"
    assert record.frame_paths == []
    with pytest.raises(FileNotFoundError):
        load_clip_frames(record)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"frame_paths": ["a.png", "b.png"], "split": "valid"},
        {"frame_paths": ["a.png", "b.png"], "motion_class": "warp"},
        {"frame_paths": ["a.png"]},
    ],
)
def test_clip_record_errors(kwargs):
    with pytest.raises(ValueError):
        ClipRecord("clip", **kwargs)


def test_augment():
    frames = np.arange(2 * 3 * 4 * 4, dtype=np.float32).reshape(2, 3, 4, 4)
    res = frames
    for _ in range(4):
        res = augment(res, rotation=90)
    assert np.array_equal(res, frames)
    assert np.array_equal(augment(frames, hflip=True), frames[..., ::-1])
    assert np.array_equal(augment(frames, rotation=180), frames[..., ::-1, ::-1])
    with pytest.raises(ValueError):
        augment(frames, rotation=45)
    with pytest.raises(ValueError):
        augment(frames[..., :3], rotation=90)
    rotation, hflip = random_augmentation(np.random.default_rng(0))
    assert rotation in [0, 90, 180, 270]
    assert isinstance(hflip, bool)


def test_sample_from_frames():
    lr_inputs, hr_targets, lr_targets = sample_from_frames(
        _frames(), np.random.default_rng(1), crop_size=32
    )
    assert lr_inputs.shape == (4, 3, 8, 8)
    assert hr_targets.shape == (7, 3, 32, 32)
    assert lr_targets.shape == (7, 3, 8, 8)
    assert all(arr.dtype == np.float32 for arr in (lr_inputs, hr_targets))
    assert np.array_equal(lr_inputs, lr_targets[0::2])


def test_sample_degrades_inputs_only():
    spec = DegradationSpec(kind="mixed_noise")
    clean = sample_from_frames(_frames(), np.random.default_rng(2), crop_size=32)
    noisy = sample_from_frames(
        _frames(), np.random.default_rng(2), crop_size=32, degradation=spec
    )
    assert not np.array_equal(clean[0], noisy[0])
    assert np.array_equal(clean[1], noisy[1])
    assert np.array_equal(clean[2], noisy[2])


def test_sample_crop_is_shared():
    """without augmentation, every HR target is the same window of its frame"""
    frames = _frames()
    rng = np.random.default_rng(3)
    _, hr_targets, _ = sample_from_frames(frames, rng, crop_size=32, augment_on=False)
    rng = np.random.default_rng(3)
    top = int(rng.integers(40 - 32 + 1))
    left = int(rng.integers(48 - 32 + 1))
    for frame, target in zip(frames, hr_targets):
        assert np.array_equal(target, frame[:, top : top + 32, left : left + 32])


@pytest.mark.parametrize("frame_cnt, crop_size", [(6, 32), (7, 30), (7, 44)])
def test_sample_errors(frame_cnt, crop_size):
    with pytest.raises(ValueError):
        sample_from_frames(
            _frames(frame_cnt), np.random.default_rng(0), crop_size=crop_size
        )


def test_training_sample_set(tmp_path):
    """sample i does not depend on where the set starts"""
    root = str(tmp_path)
    clips = [_write_clip(root, "train", "clip_%d" % ind, seed=ind) for ind in range(2)]
    full = TrainingSampleSet(clips, seed=5, sample_cnt=6, crop_size=32)
    tail = TrainingSampleSet(clips, seed=5, sample_cnt=4, first_sample=2, crop_size=32)
    assert len(full) == 6
    for ind in range(4):
        for a, b in zip(full[ind + 2], tail[ind]):
            assert torch.equal(a, b)
    with pytest.raises(IndexError):
        tail[4]

    batches = list(make_data_loader(full, batch_size=4))
    assert [batch[0].shape[0] for batch in batches] == [4, 2]
    assert batches[0][1].shape == (4, 7, 3, 32, 32)
    assert torch.equal(batches[1][2][0], full[4][2])

    sample = make_training_sample(clips[0], np.random.default_rng(0), crop_size=32)
    assert sample[0].shape == (4, 3, 8, 8)
    with pytest.raises(ValueError):
        TrainingSampleSet([], seed=0, sample_cnt=1)
