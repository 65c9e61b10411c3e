"""test functions in metrics_log.py"""

import math

import pytest

from src.metrics_log import METRICS_VARNAMES, MetricsLog
from src.train_state import TrainState


def test_put_vars_and_read(tmp_path):
    workdir = str(tmp_path)
    metrics_log = MetricsLog(workdir, TrainState(workdir))
    with open(metrics_log.fname) as fptr:
        assert fptr.readline().strip() == ",".join(METRICS_VARNAMES)

    metrics_log.put_vars(0, {"lr": 4.0e-4, "l_rec": 0.1, "total": 0.123456789012345})
    metrics_log.put_vars(1, {"lr": 3.9e-4, "l_rec": float("nan")})
    rows = metrics_log.read()
    assert [row["step"] for row in rows] == [0, 1]
    assert rows[0]["total"] == 0.123456789012345
    assert rows[0]["l_i1"] is None
    assert math.isnan(rows[1]["l_rec"])
    with pytest.raises(RuntimeError):
        metrics_log.put_vars(2, {"psnr": 30.0})


def test_resume_keeps_and_truncates(tmp_path):
    """file is created once per run; truncate drops rows at or beyond a step"""
    workdir = str(tmp_path)
    state = TrainState(workdir)
    metrics_log = MetricsLog(workdir, state)
    for step in range(5):
        metrics_log.put_vars(step, {"total": float(step)})

    resumed = MetricsLog(workdir, TrainState(workdir, resume=True))
    assert len(resumed.read()) == 5
    resumed.truncate(3)
    assert [row["step"] for row in resumed.read()] == [0, 1, 2]


def test_varnames_must_start_with_step(tmp_path):
    with pytest.raises(ValueError):
        MetricsLog(str(tmp_path), None, varnames=["lr", "step"])
