"""synthetic clips: textured backgrounds with moving textured rectangles"""

import logging
import os

import numpy as np

from .clip_dataset import (
    FRAME_FNAME_FMT,
    INDEX_FNAME,
    SPLITS,
    ClipRecord,
    clip_dirname,
    read_clip_index,
    write_clip_index,
)
from .imresize import imresize
from .utils import mkdir_exist_okay, write_frame

# max per-frame displacement, in pixels, for each motion class
MOTION_CLASS_LIMITS = [("slow", 1), ("medium", 3)]


def motion_class_for_speed(speed):
    """motion class of a clip whose fastest object moves speed pixels per frame"""
    for motion_class, limit in MOTION_CLASS_LIMITS:
        if speed <= limit:
            return motion_class
    return "fast"


def _smooth_texture(rng, channels, height, width, cell=8):
    """random texture smooth on the scale of cell pixels, values in [0, 1]"""
    coarse = rng.random((channels, -(-height // cell) + 1, -(-width // cell) + 1))
    fine = imresize(coarse, float(cell))
    return np.clip(fine[:, :height, :width], 0.0, 1.0)


def make_synthetic_clip(
    rng, frame_cnt=7, height=128, width=128, rect_cnt=2, max_velocity=4
):
    """
    list of frame_cnt (3, height, width) float32 frames and the clip's motion class

    Rectangles move with constant integer velocity and are clipped at the frame
    border.
    """
    background = _smooth_texture(rng, 3, height, width, cell=16)
    rects = []
    speed = 0
    for _ in range(rect_cnt):
        rect_h = int(rng.integers(height // 4, height // 2 + 1))
        rect_w = int(rng.integers(width // 4, width // 2 + 1))
        texture = 0.5 * _smooth_texture(rng, 3, rect_h, rect_w, cell=4)
        texture += 0.5 * rng.random((3, 1, 1))
        velocity = rng.integers(-max_velocity, max_velocity + 1, size=2)
        start = (
            int(rng.integers(0, height - rect_h + 1)),
            int(rng.integers(0, width - rect_w + 1)),
        )
        speed = max(speed, int(np.abs(velocity).max()))
        rects.append((start, velocity, texture))

    frames = []
    for frame_ind in range(frame_cnt):
        frame = background.copy()
        for (top, left), velocity, texture in rects:
            top += int(velocity[0]) * frame_ind
            left += int(velocity[1]) * frame_ind
            rect_h, rect_w = texture.shape[1:]
            y0, y1 = max(top, 0), min(top + rect_h, height)
            x0, x1 = max(left, 0), min(left + rect_w, width)
            if y0 >= y1 or x0 >= x1:
                continue
            frame[:, y0:y1, x0:x1] = texture[
                :, y0 - top : y1 - top, x0 - left : x1 - left
            ]
        frames.append(frame.astype(np.float32))
    return frames, motion_class_for_speed(speed)


def write_synthetic_dataset(
    root, clip_cnt, seed=0, split="train", frame_cnt=7, height=128, width=128
):
    """
    write clip_cnt synthetic clips of one split under root, return their ClipRecords

    Index entries of other splits already under root are kept. Each split draws
    from its own stream, so train and test clips differ for the same seed.
    """
    logger = logging.getLogger(__name__)
    rng = np.random.default_rng([seed, SPLITS.index(split)])
    records = []
    for clip_ind in range(clip_cnt):
        clip_id = "synth_%04d" % clip_ind
        frames, motion_class = make_synthetic_clip(rng, frame_cnt, height, width)
        dirname = clip_dirname(root, split, clip_id)
        mkdir_exist_okay(dirname)
        frame_paths = []
        for frame_ind, frame in enumerate(frames):
            fname = os.path.join(dirname, FRAME_FNAME_FMT % (frame_ind + 1))
            write_frame(fname, frame)
            frame_paths.append(fname)
        records.append(
            ClipRecord(
                clip_id=clip_id,
                frame_paths=frame_paths,
                split=split,
                motion_class=motion_class,
            )
        )
    kept = []
    if os.path.exists(os.path.join(root, INDEX_FNAME)):
        kept = [record for record in read_clip_index(root) if record.split != split]
    write_clip_index(root, kept + records)
    logger.info("wrote %d synthetic clips to %s", clip_cnt, root)
    return records
