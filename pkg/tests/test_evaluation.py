"""test functions in evaluation.py"""

import math
import os

import numpy as np
import pytest
import torch

from src.clip_dataset import ClipRecord, clip_dirname, load_clip_frames
from src.degradation import DegradationSpec
from src.evaluation import (
    ClipScore,
    EvalReport,
    baseline_predictor,
    check_eval_degradation,
    clip_inputs,
    evaluate_dataset,
    model_predictor,
    psnr,
    rgb_to_y,
    ssim,
    ssim_window,
)
from src.model_config import ModelConfig
from src.synthetic import write_synthetic_dataset
from src.utils import write_frame
from src.zsm_model import ZoomingSlowMo


def _write_clip(root, clip_id, frames, motion_class="unlabeled"):
    dirname = clip_dirname(root, "test", clip_id)
    os.makedirs(dirname)
    frame_paths = []
    for ind, frame in enumerate(frames):
        fname = os.path.join(dirname, "frame_%02d.png" % (ind + 1))
        write_frame(fname, frame)
        frame_paths.append(fname)
    return ClipRecord(clip_id, frame_paths, "test", motion_class)


def _oracle_predictor(clips):
    """predict_fn returning each clip's ground truth, clips taken in order"""
    gt_iter = iter([load_clip_frames(clip) for clip in clips])

    def predict_fn(lr_frames):
        return next(gt_iter)[: 2 * len(lr_frames) - 1]

    return predict_fn


def test_psnr():
    a = np.zeros((4, 4))
    assert psnr(a, a) == math.inf
    assert psnr(a, a + 0.1) == pytest.approx(20.0)
    assert psnr(a, a + 0.1) > psnr(a, a + 0.2)
    with pytest.raises(ValueError):
        psnr(a, a[:2])


def test_ssim():
    rng = np.random.default_rng(0)
    a = rng.random((32, 24))
    b = np.clip(a + 0.1 * rng.standard_normal(a.shape), 0.0, 1.0)
    assert ssim(a, a) == 1.0
    assert ssim(a, b) < 1.0
    assert ssim(a, b) == pytest.approx(ssim(b, a))
    assert ssim_window().sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ssim(a[:8], a[:8])
    with pytest.raises(ValueError):
        ssim(a, b[:, :20])


def test_rgb_to_y():
    white = np.ones((3, 2, 2))
    assert np.allclose(rgb_to_y(white), 235.0 / 255.0)
    assert np.allclose(rgb_to_y(0.0 * white), 16.0 / 255.0)
    with pytest.raises(ValueError):
        rgb_to_y(np.ones((4, 2, 2)))


def test_clip_inputs():
    frames = [np.full((3, 30, 30), 0.5) for _ in range(7)]
    lr_frames = clip_inputs(frames, 4)
    assert len(lr_frames) == 4
    assert all(frame.shape == (3, 8, 8) for frame in lr_frames)
    assert np.allclose(lr_frames[0], 0.5)


def test_check_eval_degradation():
    for quality_factor in [10, 20, 30, 40]:
        spec = DegradationSpec(kind="jpeg", quality_factor=quality_factor)
        check_eval_degradation(spec)
    check_eval_degradation(DegradationSpec(kind="mixed_noise"))
    with pytest.raises(ValueError):
        check_eval_degradation(DegradationSpec(kind="jpeg", quality_factor=25))


def test_oracle_scores(tmp_path):
    """a predictor returning the ground truth scores SSIM 1.0 everywhere"""
    rng = np.random.default_rng(1)
    root = str(tmp_path)
    frames_a = [rng.random((3, 24, 24)) for _ in range(7)]
    frames_b = [rng.random((3, 24, 24)) for _ in range(6)]
    clips = [
        _write_clip(root, "clip_a", frames_a, "fast"),
        _write_clip(root, "clip_b", frames_b, "slow"),
    ]
    report = evaluate_dataset(_oracle_predictor(clips), clips, parameter_count=5)
    assert [clip.frame_cnt for clip in report.clips] == [7, 5]
    assert all(clip.ssim == 1.0 for clip in report.clips)
    assert report.psnr == math.inf
    assert report.ssim == 1.0
    assert report.frame_cnt == 12
    assert set(report.motion_class_summary()) == {"fast", "slow"}
    assert "average" in report.format_table()


def test_skipped_clips(tmp_path):
    rng = np.random.default_rng(2)
    root = str(tmp_path)
    short = _write_clip(root, "short", [rng.random((3, 16, 16)) for _ in range(2)])
    frames = [rng.random((3, 16, 16)) for _ in range(3)]
    frames[1][:] = 0.0
    blank = _write_clip(root, "blank", frames)
    good = _write_clip(root, "good", [rng.random((3, 16, 16)) for _ in range(3)])
    missing = ClipRecord("missing", ["nowhere_1.png", "nowhere_2.png"], "test")

    clips = [short, blank, good, missing]
    report = evaluate_dataset(
        _oracle_predictor([blank, good]), clips, exclude_blank=False
    )
    assert [clip.clip_id for clip in report.clips] == ["blank", "good"]
    report = evaluate_dataset(_oracle_predictor([good]), clips, exclude_blank=True)
    assert [clip.clip_id for clip in report.clips] == ["good"]


def test_wrong_frame_count(tmp_path):
    rng = np.random.default_rng(3)
    frames = [rng.random((3, 16, 16)) for _ in range(5)]
    clip = _write_clip(str(tmp_path), "clip", frames)
    with pytest.raises(RuntimeError):
        evaluate_dataset(lambda lr_frames: lr_frames, [clip])


def test_report_csv_round_trip(tmp_path):
    clips = [
        ClipScore.from_frames(
            "a", "fast", [30.0, math.inf, 32.0], [0.9, 1.0, 0.95], 0.5
        ),
        ClipScore.from_frames(
            "b", "unlabeled", [25.5, 26.5, 27.5], [0.8, 0.7, 0.6], 1.5
        ),
    ]
    report = EvalReport(clips=clips, parameter_count=123, degradation="jpeg:qf=20")
    fname = str(tmp_path / "report.csv")
    report.write_csv(fname)
    restored = EvalReport.read_csv(fname)
    assert restored == report
    assert restored.psnr == report.psnr
    quartiles = clips[0].psnr_quartiles
    assert (quartiles[0], quartiles[2], quartiles[4]) == (30.0, 32.0, math.inf)
    assert restored.clips[1].psnr_quartiles == clips[1].psnr_quartiles


def test_baseline_predictor():
    lr_frames = [np.full((3, 4, 4), val) for val in (0.2, 0.6, 0.9)]
    hr_frames = baseline_predictor(4)(lr_frames)
    assert len(hr_frames) == 5
    assert all(frame.shape == (3, 16, 16) for frame in hr_frames)
    assert np.array_equal(hr_frames[1], hr_frames[0])
    assert np.array_equal(hr_frames[3], hr_frames[2])
    assert np.allclose(hr_frames[4], 0.9)


def test_model_predictor(tmp_path):
    clips = write_synthetic_dataset(
        str(tmp_path), 1, split="test", frame_cnt=5, height=20, width=28
    )
    torch.manual_seed(0)
    config = ModelConfig(
        variant="f", k1=1, k2=1, k3=1, channels=8, pcd_levels=2, deformable_groups=2
    )
    model = ZoomingSlowMo(config).eval()
    with torch.no_grad():
        report = evaluate_dataset(model_predictor(model), clips, parameter_count=1)
    assert report.frame_cnt == 5
    assert report.clips[0].seconds > 0.0
    assert math.isfinite(report.ssim)
    assert report.ssim < 1.0
