"""
video clip datasets on disk and construction of training samples from them

layout: root/index.txt, with lines "clip_id split motion_class", and frames at
root/split/clip_id/frame_%02d.png
"""

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from .degradation import DegradationSpec, degrade_frames
from .imresize import bicubic_downsample
from .utils import frame_fnames, mkdir_exist_okay, read_frame

INDEX_FNAME = "index.txt"
FRAME_FNAME_FMT = "frame_%02d.png"
SPLITS = ["train", "test"]
MOTION_CLASSES = ["fast", "medium", "slow", "unlabeled"]
ROTATIONS = [0, 90, 180, 270]

# training samples are septuplets: 4 LR inputs, 7 HR and 7 LR targets
SAMPLE_FRAMES = 7


@dataclass
class ClipRecord:
    """one clip of an on-disk dataset, with no frame_paths if its frames are absent"""

    clip_id: str
    frame_paths: list = field(default_factory=list)
    split: str = "train"
    motion_class: str = "unlabeled"

    def __post_init__(self):
        if self.split not in SPLITS:
            msg = "unknown split %s for clip %s" % (self.split, self.clip_id)
            raise ValueError(msg)
        if self.motion_class not in MOTION_CLASSES:
            msg = "unknown motion class %s for clip %s" % (
                self.motion_class,
                self.clip_id,
            )
            raise ValueError(msg)
        if len(self.frame_paths) == 1:
            msg = "clip %s has %d frames, need at least 2" % (
                self.clip_id,
                len(self.frame_paths),
            )
            raise ValueError(msg)


def clip_dirname(root, split, clip_id):
    """directory holding the frames of one clip"""
    return os.path.join(root, split, clip_id)


def read_clip_index(root, split=None, missing_ok=False):
    """
    ClipRecords listed in root/index.txt, optionally restricted to one split

    A clip without frames raises FileNotFoundError, unless missing_ok is set, in
    which case its record is kept with no frame_paths.
    """
    logger = logging.getLogger(__name__)
    fname = os.path.join(root, INDEX_FNAME)
    if not os.path.exists(fname):
        msg = "clip index %s not found" % fname
        raise FileNotFoundError(msg)
    records = []
    with open(fname, mode="r") as fptr:
        for line in fptr:
            line = line.partition("#")[0].strip()
            if line == "":
                continue
            words = line.split()
            if len(words) not in (2, 3):
                msg = "malformed line in %s: %s" % (fname, line)
                raise ValueError(msg)
            clip_id, clip_split = words[:2]
            motion_class = words[2] if len(words) == 3 else "unlabeled"
            if split is not None and clip_split != split:
                continue
            dirname = clip_dirname(root, clip_split, clip_id)
            try:
                frame_paths = frame_fnames(dirname, "frame_*.png")
            except FileNotFoundError:
                if not missing_ok:
                    raise
                logger.warning("no frames found for clip %s in %s", clip_id, dirname)
                frame_paths = []
            records.append(
                ClipRecord(
                    clip_id=clip_id,
                    frame_paths=frame_paths,
                    split=clip_split,
                    motion_class=motion_class,
                )
            )
    logger.info("read %d clips from %s", len(records), fname)
    return records


def write_clip_index(root, records):
    """write root/index.txt listing records"""
    mkdir_exist_okay(root)
    with open(os.path.join(root, INDEX_FNAME), mode="w") as fptr:
        fptr.write("# clip_id split motion_class\n")
        for record in records:
            fptr.write(
                "%s %s %s\n" % (record.clip_id, record.split, record.motion_class)
            )


def load_clip_frames(record):
    """list of (3, H, W) float32 frames of a clip"""
    if len(record.frame_paths) == 0:
        msg = "frames of clip %s are absent" % record.clip_id
        raise FileNotFoundError(msg)
    frames = [read_frame(fname) for fname in record.frame_paths]
    for fname, frame in zip(record.frame_paths, frames):
        if frame.shape != frames[0].shape:
            msg = "frame %s shape %s differs from %s in clip %s" % (
                fname,
                frame.shape,
                frames[0].shape,
                record.clip_id,
            )
            raise ValueError(msg)
    return frames


################################################################################
# augmentation


def augment(frames, rotation=0, hflip=False):
    """
    rotate by a multiple of 90 degrees, then optionally flip horizontally, every
    frame of (..., H, W) array frames identically
    """
    frames = np.asarray(frames)
    if rotation not in ROTATIONS:
        msg = "rotation must be one of %s, got %s" % (ROTATIONS, rotation)
        raise ValueError(msg)
    if rotation in (90, 270) and frames.shape[-2] != frames.shape[-1]:
        msg = "rotation by %d needs square frames, got %s" % (
            rotation,
            frames.shape[-2:],
        )
        raise ValueError(msg)
    res = np.rot90(frames, k=rotation // 90, axes=(-2, -1))
    if hflip:
        res = res[..., ::-1]
    return np.ascontiguousarray(res)


def random_augmentation(rng):
    """(rotation, hflip) drawn uniformly"""
    rotation = ROTATIONS[int(rng.integers(len(ROTATIONS)))]
    hflip = bool(rng.integers(2))
    return rotation, hflip


################################################################################
# training samples


def sample_from_frames(
    frames,
    rng,
    crop_size=128,
    scale=4,
    augment_on=True,
    degradation=None,
):
    """
    (lr_inputs, hr_targets, lr_targets) float32 arrays of shapes (4, 3, c/s, c/s),
    (7, 3, c, c), (7, 3, c/s, c/s), c = crop_size, s = scale

    The same crop window and augmentation apply to all 7 frames. lr_inputs are the
    odd-numbered LR frames, degraded per degradation; targets stay clean.
    """
    if len(frames) < SAMPLE_FRAMES:
        msg = "need %d frames for a training sample, got %d" % (
            SAMPLE_FRAMES,
            len(frames),
        )
        raise ValueError(msg)
    if crop_size % scale != 0:
        msg = "crop_size %d not divisible by scale %d" % (crop_size, scale)
        raise ValueError(msg)
    height, width = frames[0].shape[-2:]
    if height < crop_size or width < crop_size:
        msg = "frames %dx%d smaller than crop %d" % (height, width, crop_size)
        raise ValueError(msg)

    top = int(rng.integers(height - crop_size + 1))
    left = int(rng.integers(width - crop_size + 1))
    hr_targets = np.stack(
        [
            frame[:, top : top + crop_size, left : left + crop_size]
            for frame in frames[:SAMPLE_FRAMES]
        ]
    )
    if augment_on:
        hr_targets = augment(hr_targets, *random_augmentation(rng))
    lr_targets = np.stack([bicubic_downsample(frame, scale) for frame in hr_targets])
    lr_inputs = lr_targets[0::2]
    if degradation is not None and not degradation.is_clean:
        lr_inputs = np.stack(degrade_frames(list(lr_inputs), degradation, rng))
    return (
        lr_inputs.astype(np.float32),
        hr_targets.astype(np.float32),
        lr_targets.astype(np.float32),
    )


def make_training_sample(clip, rng, **kwargs):
    """training sample from a ClipRecord, see sample_from_frames"""
    return sample_from_frames(load_clip_frames(clip), rng, **kwargs)


class TrainingSampleSet(Dataset):
    """
    training samples indexed by global sample number

    Sample i, i = first_sample + index, picks its clip and crop from an rng seeded
    with (seed, i), so the sequence of samples does not depend on where a run
    starts or how many workers build it.
    """

    def __init__(
        self,
        clips,
        seed,
        sample_cnt,
        first_sample=0,
        crop_size=128,
        scale=4,
        augment_on=True,
        degradation=None,
    ):
        if len(clips) == 0:
            msg = "TrainingSampleSet needs at least one clip"
            raise ValueError(msg)
        self.clip_frames = [load_clip_frames(clip) for clip in clips]
        self.seed = seed
        self.sample_cnt = sample_cnt
        self.first_sample = first_sample
        self.sample_kwargs = {
            "crop_size": crop_size,
            "scale": scale,
            "augment_on": augment_on,
            "degradation": degradation if degradation else DegradationSpec(),
        }

    def __len__(self):
        return self.sample_cnt

    def __getitem__(self, index):
        if not 0 <= index < self.sample_cnt:
            raise IndexError(index)
        rng = np.random.default_rng([self.seed, self.first_sample + index])
        frames = self.clip_frames[int(rng.integers(len(self.clip_frames)))]
        sample = sample_from_frames(frames, rng, **self.sample_kwargs)
        return tuple(torch.from_numpy(arr) for arr in sample)


def make_data_loader(sample_set, batch_size, num_workers=0):
    """ordered, non-shuffling loader of (lr_inputs, hr_targets, lr_targets) batches"""
    return DataLoader(
        sample_set,
        batch_size=batch_size,
        shuffle=False,
        drop_last=False,
        num_workers=num_workers,
    )
