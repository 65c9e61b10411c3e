"""Y-channel PSNR/SSIM scoring of predicted HR sequences, with runtime reporting"""

import csv
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .clip_dataset import MOTION_CLASSES, load_clip_frames
from .degradation import DegradationSpec, degrade_frames
from .imresize import bicubic_downsample, bicubic_upsample
from .utils import frames_to_tensor, tensor_to_frames

# JPEG quality factors accepted for evaluation runs
EVAL_JPEG_QUALITIES = (10, 20, 30, 40)

SSIM_WINDOW_SIZE = 11
SSIM_WINDOW_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

REPORT_FIELDS = [
    "kind",
    "name",
    "motion_class",
    "clips",
    "frames",
    "psnr",
    "ssim",
    "seconds",
    "psnr_min",
    "psnr_q1",
    "psnr_median",
    "psnr_q3",
    "psnr_max",
]


################################################################################
# metrics


def rgb_to_y(frame):
    """BT.601 studio-swing luma of (..., 3, H, W) values in [0, 1]"""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim < 3 or frame.shape[-3] != 3:
        msg = "expected (..., 3, H, W) frame, got shape %s" % (frame.shape,)
        raise ValueError(msg)
    red, green, blue = frame[..., 0, :, :], frame[..., 1, :, :], frame[..., 2, :, :]
    return (65.481 * red + 128.553 * green + 24.966 * blue + 16.0) / 255.0


def psnr(a, b, peak=1.0):
    """peak signal-to-noise ratio in dB, inf for identical inputs"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        msg = "shape mismatch %s != %s" % (a.shape, b.shape)
        raise ValueError(msg)
    mse = np.mean((a - b) ** 2)
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def ssim_window():
    """normalized 11x11 Gaussian window, sigma 1.5"""
    window_1d = signal.windows.gaussian(SSIM_WINDOW_SIZE, std=SSIM_WINDOW_SIGMA)
    window = np.outer(window_1d, window_1d)
    return window / np.sum(window)


def ssim(a, b, data_range=1.0):
    """mean structural similarity of two single-channel images over valid windows"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        msg = "need equal-shape single-channel images, got %s, %s" % (a.shape, b.shape)
        raise ValueError(msg)
    if min(a.shape) < SSIM_WINDOW_SIZE:
        msg = "image %s smaller than %d window" % (a.shape, SSIM_WINDOW_SIZE)
        raise ValueError(msg)
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    window = ssim_window()

    def filt(img):
        return signal.convolve2d(img, window, mode="valid")

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(np.mean(ssim_map))


################################################################################
# report


@dataclass
class ClipScore:
    """scores of one clip"""

    clip_id: str
    motion_class: str
    frame_cnt: int
    psnr: float
    ssim: float
    seconds: float
    psnr_quartiles: tuple = ()

    @classmethod
    def from_frames(cls, clip_id, motion_class, frame_psnr, frame_ssim, seconds):
        """aggregate per-frame scores"""
        # nearest avoids inf - inf for frames scoring inf
        quartiles = np.percentile(frame_psnr, [0, 25, 50, 75, 100], method="nearest")
        return cls(
            clip_id=clip_id,
            motion_class=motion_class,
            frame_cnt=len(frame_psnr),
            psnr=float(np.mean(frame_psnr)),
            ssim=float(np.mean(frame_ssim)),
            seconds=seconds,
            psnr_quartiles=tuple(float(val) for val in quartiles),
        )


@dataclass
class EvalReport:
    """per-clip and aggregate scores, runtime and parameter count of a run"""

    clips: list = field(default_factory=list)
    parameter_count: int = None
    degradation: str = "clean"

    @property
    def frame_cnt(self):
        """total number of scored frames"""
        return sum(clip.frame_cnt for clip in self.clips)

    @property
    def seconds(self):
        """total prediction wall-clock seconds"""
        return sum(clip.seconds for clip in self.clips)

    @property
    def seconds_per_frame(self):
        """prediction wall-clock seconds per output frame"""
        return self.seconds / self.frame_cnt if self.frame_cnt else math.nan

    @property
    def psnr(self):
        """mean over clips of clip PSNR"""
        return _mean([clip.psnr for clip in self.clips])

    @property
    def ssim(self):
        """mean over clips of clip SSIM"""
        return _mean([clip.ssim for clip in self.clips])

    def motion_class_summary(self):
        """dict motion_class -> (clip count, frame count, psnr, ssim)"""
        res = {}
        for motion_class in MOTION_CLASSES:
            sel = [clip for clip in self.clips if clip.motion_class == motion_class]
            if sel:
                res[motion_class] = (
                    len(sel),
                    sum(clip.frame_cnt for clip in sel),
                    _mean([clip.psnr for clip in sel]),
                    _mean([clip.ssim for clip in sel]),
                )
        return res

    def format_table(self):
        """human-readable table of scores"""
        lines = [
            "degradation: %s" % self.degradation,
            "parameters: %s" % self.parameter_count,
            "%-24s %-10s %6s %9s %8s %9s"
            % ("clip", "motion", "frames", "PSNR(dB)", "SSIM", "time(s)"),
        ]
        for clip in self.clips:
            lines.append(
                "%-24s %-10s %6d %9.4f %8.6f %9.3f"
                % (
                    clip.clip_id,
                    clip.motion_class,
                    clip.frame_cnt,
                    clip.psnr,
                    clip.ssim,
                    clip.seconds,
                )
            )
        for motion_class, vals in self.motion_class_summary().items():
            lines.append(
                "%-24s %-10s %6d %9.4f %8.6f"
                % ("[%d clips]" % vals[0], motion_class, vals[1], vals[2], vals[3])
            )
        lines.append(
            "%-24s %-10s %6d %9.4f %8.6f %9.3f"
            % ("average", "", self.frame_cnt, self.psnr, self.ssim, self.seconds)
        )
        lines.append("runtime per frame (s): %.6f" % self.seconds_per_frame)
        return "\n".join(lines)

    def write_csv(self, fname):
        """write report as comma-separated rows, metadata as leading # lines"""
        with open(fname, mode="w", newline="") as fptr:
            fptr.write("# parameter_count=%s\n" % self.parameter_count)
            fptr.write("# degradation=%s\n" % self.degradation)
            writer = csv.DictWriter(fptr, fieldnames=REPORT_FIELDS)
            writer.writeheader()
            for clip in self.clips:
                row = {
                    "kind": "clip",
                    "name": clip.clip_id,
                    "motion_class": clip.motion_class,
                    "clips": 1,
                    "frames": clip.frame_cnt,
                    "psnr": repr(clip.psnr),
                    "ssim": repr(clip.ssim),
                    "seconds": repr(clip.seconds),
                }
                for key, val in zip(REPORT_FIELDS[-5:], clip.psnr_quartiles):
                    row[key] = repr(val)
                writer.writerow(row)
            for motion_class, vals in self.motion_class_summary().items():
                writer.writerow(
                    {
                        "kind": "motion_class",
                        "name": motion_class,
                        "motion_class": motion_class,
                        "clips": vals[0],
                        "frames": vals[1],
                        "psnr": repr(vals[2]),
                        "ssim": repr(vals[3]),
                    }
                )
            writer.writerow(
                {
                    "kind": "total",
                    "name": "average",
                    "clips": len(self.clips),
                    "frames": self.frame_cnt,
                    "psnr": repr(self.psnr),
                    "ssim": repr(self.ssim),
                    "seconds": repr(self.seconds),
                }
            )

    @classmethod
    def read_csv(cls, fname):
        """read a report written by write_csv"""
        meta = {}
        with open(fname, mode="r", newline="") as fptr:
            lines = []
            for line in fptr:
                if line.startswith("#"):
                    key, _, val = line[1:].strip().partition("=")
                    meta[key] = val
                else:
                    lines.append(line)
        clips = []
        for row in csv.DictReader(lines):
            if row["kind"] != "clip":
                continue
            clips.append(
                ClipScore(
                    clip_id=row["name"],
                    motion_class=row["motion_class"],
                    frame_cnt=int(row["frames"]),
                    psnr=float(row["psnr"]),
                    ssim=float(row["ssim"]),
                    seconds=float(row["seconds"]),
                    psnr_quartiles=tuple(
                        float(row[key]) for key in REPORT_FIELDS[-5:] if row[key]
                    ),
                )
            )
        parameter_count = meta.get("parameter_count", "None")
        return cls(
            clips=clips,
            parameter_count=None if parameter_count == "None" else int(parameter_count),
            degradation=meta.get("degradation", "clean"),
        )


def _mean(vals):
    return float(np.mean(vals)) if vals else math.nan


################################################################################
# evaluation protocol


def check_eval_degradation(spec):
    """raise ValueError for JPEG quality factors outside EVAL_JPEG_QUALITIES"""
    if spec.kind == "jpeg" and spec.quality_factor not in EVAL_JPEG_QUALITIES:
        msg = "evaluation JPEG quality factor must be one of %s, got %d" % (
            ",".join(str(qf) for qf in EVAL_JPEG_QUALITIES),
            spec.quality_factor,
        )
        raise ValueError(msg)


def clip_inputs(gt_frames, scale=4):
    """
    LR inputs for a ground-truth sequence of odd length: the odd-numbered frames,
    edge-padded to multiples of scale and bicubically downscaled
    """
    height, width = gt_frames[0].shape[-2:]
    pad = ((0, 0), (0, -height % scale), (0, -width % scale))
    return [
        bicubic_downsample(np.pad(frame, pad, mode="edge"), scale)
        for frame in gt_frames[0::2]
    ]


def score_frames(pred_frames, gt_frames):
    """per-frame Y-channel (psnr, ssim) lists"""
    frame_psnr, frame_ssim = [], []
    for pred, gt in zip(pred_frames, gt_frames):
        pred_y = rgb_to_y(np.clip(pred, 0.0, 1.0))
        gt_y = rgb_to_y(gt)
        frame_psnr.append(psnr(pred_y, gt_y))
        frame_ssim.append(ssim(pred_y, gt_y))
    return frame_psnr, frame_ssim


def evaluate_dataset(
    predict_fn,
    clips,
    degradation=None,
    seed=0,
    parameter_count=None,
    exclude_blank=False,
    scale=4,
):
    """
    score predict_fn on clips

    predict_fn maps a list of n+1 (3, h, w) LR frames to a list of 2n+1 HR frames.
    Only predict_fn calls are timed.
    """
    logger = logging.getLogger(__name__)
    if degradation is None:
        degradation = DegradationSpec()
    rng = np.random.default_rng(seed)
    report = EvalReport(parameter_count=parameter_count, degradation=str(degradation))

    for record in clips:
        try:
            frames = load_clip_frames(record)
        except FileNotFoundError as err:
            logger.warning("skipping clip %s, %s", record.clip_id, err)
            continue
        gt_cnt = len(frames) if len(frames) % 2 == 1 else len(frames) - 1
        if gt_cnt < 3:
            logger.warning(
                "skipping clip %s, %d frames is too few", record.clip_id, len(frames)
            )
            continue
        gt_frames = frames[:gt_cnt]
        if exclude_blank and any(not np.any(frame) for frame in gt_frames):
            logger.info("excluding clip %s, it has a blank frame", record.clip_id)
            continue

        lr_frames = clip_inputs(gt_frames, scale)
        lr_frames = degrade_frames(lr_frames, degradation, rng)

        start = time.perf_counter()
        pred_frames = predict_fn(lr_frames)
        seconds = time.perf_counter() - start

        if len(pred_frames) != gt_cnt:
            msg = "predictor returned %d frames for clip %s, expected %d" % (
                len(pred_frames),
                record.clip_id,
                gt_cnt,
            )
            raise RuntimeError(msg)
        height, width = gt_frames[0].shape[-2:]
        pred_frames = [frame[:, :height, :width] for frame in pred_frames]
        frame_psnr, frame_ssim = score_frames(pred_frames, gt_frames)
        clip_score = ClipScore.from_frames(
            record.clip_id, record.motion_class, frame_psnr, frame_ssim, seconds
        )
        logger.info(
            "clip %s: psnr=%.4f, ssim=%.6f, %.3fs",
            record.clip_id,
            clip_score.psnr,
            clip_score.ssim,
            seconds,
        )
        report.clips.append(clip_score)
    return report


def model_predictor(model, device="cpu"):
    """predict_fn running model inference"""
    model = model.to(device)

    def predict_fn(lr_frames):
        hr_frames = model.infer(frames_to_tensor(lr_frames).to(device))
        return tensor_to_frames(hr_frames)

    return predict_fn


def baseline_predictor(scale=4):
    """predict_fn upscaling each LR frame bicubically, repeating the earlier frame"""

    def predict_fn(lr_frames):
        hr_frames = [bicubic_upsample(frame, scale) for frame in lr_frames]
        res = [hr_frames[0]]
        for frame in hr_frames[1:]:
            res.extend([res[-1], frame])
        return res

    return predict_fn

