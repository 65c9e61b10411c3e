"""test functions in losses.py"""

import math

import pytest
import torch

from src.core_ops import CHARBONNIER_EPS
from src.losses import (
    LossWeights,
    cyclic_loss_first_order,
    cyclic_loss_second_order,
    reconstruction_loss,
    total_loss,
)


def _rho(feat):
    """stand-in LR synthesizer: first 3 channels of the feature map"""
    return feat[:, :3]


def test_reconstruction_loss():
    pred = torch.rand(2, 3, 3, 4, 4)
    assert reconstruction_loss(pred, pred).item() == pytest.approx(CHARBONNIER_EPS)
    # one frame off by 1 everywhere, the others exact
    target = pred.clone()
    target[:, 1] += 1.0
    expected = (2.0 * CHARBONNIER_EPS + math.sqrt(1.0 + CHARBONNIER_EPS**2)) / 3.0
    assert reconstruction_loss(pred, target).item() == pytest.approx(expected, rel=1e-5)
    with pytest.raises(ValueError):
        reconstruction_loss(pred, pred[:, :2])
    with pytest.raises(ValueError):
        reconstruction_loss(pred[0], pred[0])


def test_cyclic_loss_first_order():
    """feature t is compared with LR frame 2t+1"""
    gt_lr = torch.rand(1, 5, 3, 4, 4)
    interp_features = [
        torch.cat([gt_lr[:, 1], torch.rand(1, 2, 4, 4)], dim=1),
        torch.cat([gt_lr[:, 3] + 1.0, torch.rand(1, 2, 4, 4)], dim=1),
    ]
    res = cyclic_loss_first_order(interp_features, gt_lr, _rho)
    expected = 0.5 * (CHARBONNIER_EPS + math.sqrt(1.0 + CHARBONNIER_EPS**2))
    assert res.item() == pytest.approx(expected, rel=1e-5)
    with pytest.raises(ValueError):
        cyclic_loss_first_order(interp_features, gt_lr[:, :4], _rho)


def test_cyclic_loss_second_order():
    """re-interpolated pair t is compared with LR frame 2t+2"""
    gt_lr = torch.rand(1, 7, 3, 4, 4)
    interp_features = [torch.rand(1, 3, 4, 4) for _ in range(3)]
    gt_lr[:, 2] = 0.5 * (interp_features[0] + interp_features[1])
    gt_lr[:, 4] = 0.5 * (interp_features[1] + interp_features[2]) - 1.0

    def interp(a, b):
        return 0.5 * (a + b)

    res, degenerate = cyclic_loss_second_order(interp_features, gt_lr, interp, _rho)
    assert not degenerate
    expected = 0.5 * (CHARBONNIER_EPS + math.sqrt(1.0 + CHARBONNIER_EPS**2))
    assert res.item() == pytest.approx(expected, rel=1e-5)


def test_cyclic_loss_second_order_degenerate():
    """a single synthesized feature has no pairs"""
    gt_lr = torch.rand(2, 3, 3, 4, 4)
    res, degenerate = cyclic_loss_second_order(
        [torch.rand(2, 3, 4, 4)], gt_lr, lambda a, b: a, _rho
    )
    assert degenerate
    assert res.item() == 0.0
    with pytest.raises(ValueError):
        cyclic_loss_second_order([torch.rand(2, 3, 4, 4)], gt_lr[:, :2], None, _rho)


def test_total_loss():
    weights = LossWeights(1.0, 0.1, 0.05)
    l_rec, l_i1, l_i2 = torch.tensor(2.0), torch.tensor(3.0), torch.tensor(4.0)
    expected = 2.0 + 0.1 * 3.0 + 0.05 * 4.0
    assert total_loss(l_rec, l_i1, l_i2, weights).item() == pytest.approx(expected)


@pytest.mark.parametrize(
    "lambdas", [(0.0, 0.1, 0.05), (1.0, -0.1, 0.0), (1.0, 0.0, -1.0)]
)
def test_loss_weights_errors(lambdas):
    with pytest.raises(ValueError):
        LossWeights(*lambdas)
